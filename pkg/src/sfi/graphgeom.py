"""Pointwise geometry of radial graphs M = {(rho(1+u(x)), x)}.

All tensors are expressed in the per-node orthonormal frames of the grid,
so the round metric is the identity and raising indices is frame-trivial.
With w = rho * grad u and D = sqrt(phi^2 + |w|^2):

    g_ab   = w_a w_b + phi^2 delta_ab
    h_ab   = (2 phi' w_a w_b + phi^2 phi' delta_ab - phi rho u_ab) / D
    S^a_b  = phi'/D delta - rho u^a_b/(D phi) + phi' w^a w_b / D^3
             + rho w^a (u_bc w^c) / (D^3 phi)

Principal curvatures come from the symmetric similarity
g^{-1/2} h g^{-1/2} of the Weingarten map, which is exact because S is
self-adjoint with respect to g.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from sfi import spherebasis as sb
from sfi.symfunc import elementary_from_eigenvalues

DEGENERACY_TOL = 1e-13


@dataclass(frozen=True)
class RadialGraph:
    """Star-shaped hypersurface given by r(x) = rho (1 + u(x))."""

    sf: object
    rho: float
    u: object

    def __post_init__(self):
        if not self.rho > 0:
            raise ValueError("rho must be positive")
        if np.isfinite(self.sf.r_max) and self.rho >= self.sf.r_max:
            raise ValueError("rho must lie below the radial domain bound")

    def radii(self, vals):
        return self.rho * (1.0 + np.asarray(vals))


@dataclass(frozen=True)
class SurfaceGeometry:
    """Batched per-node geometry of a radial graph on a grid."""

    graph: RadialGraph
    grid: object
    u_vals: np.ndarray = field(repr=False)
    du: np.ndarray = field(repr=False)
    d2u: np.ndarray = field(repr=False)
    r: np.ndarray = field(repr=False)
    phi: np.ndarray = field(repr=False)
    dphi: np.ndarray = field(repr=False)
    Phi: np.ndarray = field(repr=False)
    D: np.ndarray = field(repr=False)
    area_factor: np.ndarray = field(repr=False)
    metric: np.ndarray = field(repr=False)
    metric_inv: np.ndarray = field(repr=False)
    second_form: np.ndarray = field(repr=False)
    weingarten: np.ndarray = field(repr=False)
    kappa: np.ndarray = field(repr=False)
    sigma: np.ndarray = field(repr=False)
    H: np.ndarray = field(repr=False)
    H_plus: np.ndarray = field(repr=False)
    H_minus: np.ndarray = field(repr=False)

    def node(self, i):
        return NodeGeometry(
            r=float(self.r[i]), phi=float(self.phi[i]),
            dphi=float(self.dphi[i]), Phi=float(self.Phi[i]),
            D=float(self.D[i]), area_factor=float(self.area_factor[i]),
            metric=self.metric[i], metric_inv=self.metric_inv[i],
            second_form=self.second_form[i], weingarten=self.weingarten[i],
            kappa=self.kappa[i], sigma=self.sigma[i], H=float(self.H[i]),
            H_plus=float(self.H_plus[i]), H_minus=float(self.H_minus[i]))

    def convex_flags(self):
        """Per-node flag: all principal curvatures strictly positive."""
        return np.min(self.kappa, axis=1) > 0


@dataclass(frozen=True)
class NodeGeometry:
    r: float
    phi: float
    dphi: float
    Phi: float
    D: float
    area_factor: float
    metric: np.ndarray = field(repr=False)
    metric_inv: np.ndarray = field(repr=False)
    second_form: np.ndarray = field(repr=False)
    weingarten: np.ndarray = field(repr=False)
    kappa: np.ndarray = field(repr=False)
    sigma: np.ndarray = field(repr=False)
    H: float = 0.0
    H_plus: float = 0.0
    H_minus: float = 0.0


def surface_geometry(graph, grid):
    """Evaluate the full pointwise geometry of the graph at every node."""
    sf = graph.sf
    n = grid.n
    vals, du, d2u = sb.eval_jet_all(graph.u, grid)
    r = graph.radii(vals)
    if np.any(r <= 0.0) or np.any(r >= sf.r_max):
        raise ValueError("graph radii leave the admissible band (0, r_max)")
    ph = sf.phi(r)
    dph = sf.dphi(r)
    Ph = sf.Phi(r)
    w = graph.rho * du
    gradsq = np.sum(w * w, axis=1)
    D = np.sqrt(ph * ph + gradsq)
    if np.min(D) < DEGENERACY_TOL or np.min(ph) < DEGENERACY_TOL:
        raise ValueError("degenerate metric: D or phi below tolerance")
    area = ph ** (n - 1) * D
    eye = np.eye(n)
    outer = w[:, :, None] * w[:, None, :]
    metric = outer + (ph * ph)[:, None, None] * eye
    metric_inv = (eye - outer / (D * D)[:, None, None]) / (ph * ph)[:, None, None]
    hess_r = graph.rho * d2u
    second = (2.0 * dph[:, None, None] * outer
              + (ph * ph * dph)[:, None, None] * eye
              - ph[:, None, None] * hess_r) / D[:, None, None]
    Sw = (dph / D)[:, None, None] * eye \
        - hess_r / (D * ph)[:, None, None] \
        + dph[:, None, None] * outer / (D ** 3)[:, None, None] \
        + w[:, :, None] * (hess_r @ w[:, :, None])[:, None, :, 0] \
        / (D ** 3 * ph)[:, None, None]
    gn = np.sqrt(gradsq)
    safe = np.where(gn > 0, gn, 1.0)
    what = w / safe[:, None]
    coeff = (1.0 / D - 1.0 / ph)
    ghalf_inv = eye / ph[:, None, None] \
        + coeff[:, None, None] * what[:, :, None] * what[:, None, :]
    sym = np.einsum("iab,ibc,icd->iad", ghalf_inv, second, ghalf_inv)
    sym = 0.5 * (sym + np.swapaxes(sym, 1, 2))
    kappa = np.linalg.eigvalsh(sym)
    sigma = elementary_from_eigenvalues(kappa)
    H = sigma[:, 1]
    return SurfaceGeometry(
        graph=graph, grid=grid, u_vals=vals, du=du, d2u=d2u, r=r, phi=ph,
        dphi=dph, Phi=Ph, D=D, area_factor=area, metric=metric,
        metric_inv=metric_inv, second_form=second, weingarten=Sw,
        kappa=kappa, sigma=sigma, H=H, H_plus=np.maximum(H, 0.0),
        H_minus=-np.minimum(H, 0.0))


def node_geometry(graph, grid, i):
    """Geometry at a single node (computed via the batched path)."""
    return surface_geometry(graph, grid).node(i)


def mean_curvature_two_ways(graph, grid, geo=None):
    """Max discrepancy between the eigenvalue-sum H and the divergence form.

    The first route is sigma_1 of the principal curvatures from the
    symmetrized Weingarten eigensolve. The second evaluates the divergence
    form, expanding div((phi/D) grad u) by the chain rule through the jet
    of u (the gradient of D needs only second derivatives), and never
    builds the curvature tensors.
    """
    if geo is None:
        geo = surface_geometry(graph, grid)
    rho, n = graph.rho, grid.n
    ph, dph, D = geo.phi, geo.dphi, geo.D
    lap_u = np.trace(geo.d2u, axis1=1, axis2=2)
    gradsq = np.sum(geo.du * geo.du, axis=1)
    hess_grad = np.einsum("iab,ib->ia", geo.d2u, geo.du)
    gradD = (ph * dph * rho)[:, None] * geo.du + rho ** 2 * hess_grad
    gradD /= D[:, None]
    grad_psi = (dph * rho)[:, None] * geo.du / D[:, None] \
        - ph[:, None] * gradD / (D * D)[:, None]
    div_term = (ph / D) * lap_u + np.sum(grad_psi * geo.du, axis=1)
    H_div = (n * dph * ph ** 2 + dph * rho ** 2 * gradsq) / (ph ** 2 * D) \
        - (rho / ph ** 2) * div_term
    return float(np.max(np.abs(geo.H - H_div)))


def weighted_curvature_integral(graph, grid, w, k, positive_part=False,
                                geo=None):
    """Integral of g(Phi) sigma_k(kappa) over M, optionally with H^+.

    positive_part replaces sigma_1 = H by max(H, 0); it is only meaningful
    at k = 1.
    """
    n = grid.n
    if not 0 <= k <= n:
        raise ValueError(f"sigma order k={k} outside [0, {n}]")
    if positive_part and k != 1:
        raise ValueError("positive_part applies only to k = 1")
    if geo is None:
        geo = surface_geometry(graph, grid)
    core = geo.H_plus if positive_part else geo.sigma[:, k]
    return grid.integrate(w(geo.Phi) * core * geo.area_factor)


def sphere_curvature_integral(sf, rho, w, k):
    """Closed form of the same integral on the geodesic sphere r = rho."""
    from math import comb
    ph, dph, Ph = sf.phi(rho), sf.dphi(rho), sf.Phi(rho)
    return comb(sf.n, k) * sf.sphere_area * ph ** (sf.n - k) * dph ** k * w(Ph)


def node_dump_rows(geo):
    """Per-node diagnostic rows (index, r, kappa, H, sigma) for debugging."""
    rows = []
    for i in range(len(geo.r)):
        row = {"node": i, "r": float(geo.r[i]), "H": float(geo.H[i])}
        for a, kap in enumerate(geo.kappa[i]):
            row[f"kappa{a + 1}"] = float(kap)
        for k in range(geo.sigma.shape[1]):
            row[f"sigma{k}"] = float(geo.sigma[i, k])
        rows.append(row)
    return rows
