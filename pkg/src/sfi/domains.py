"""Bulk and boundary functionals of the enclosed domain Omega.

Volume integrals reduce to the radial primitive P_n(r) = int_0^r phi^n,
known in closed form for every K, so bulk quantities are single angular
quadratures. Brute-force radial Gauss-Legendre versions are kept as
independent oracles. The barycenter is the Karcher mean of the enclosed
mass; Fraenkel asymmetry minimizes the symmetric-difference volume against
equal-volume geodesic balls over the center.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb

import numpy as np
from scipy.optimize import brentq, minimize

from sfi import graphgeom as gg
from sfi import model
from sfi import spherebasis as sb


def _graph_radii(graph, grid):
    return graph.radii(sb.values_on_grid(graph.u, grid))


def volume(graph, grid, geo=None):
    """Vol(Omega) via the closed-form radial primitive."""
    r = geo.r if geo is not None else _graph_radii(graph, grid)
    return grid.integrate(graph.sf.volume_primitive(r))


def weighted_volume(graph, grid, geo=None):
    """int_Omega phi'(r) dv = (n+1)^{-1} int phi^{n+1}(r(x)) dA."""
    sf = graph.sf
    r = geo.r if geo is not None else _graph_radii(graph, grid)
    return grid.integrate(sf.phi(r) ** (sf.n + 1)) / (sf.n + 1)


def _radial_rule(points):
    t, w = np.polynomial.legendre.leggauss(points)
    return 0.5 * (t + 1.0), 0.5 * w


def bulk_integral_bruteforce(graph, grid, integrand, radial_points=32):
    """Radial x angular quadrature of int_Omega f(r) dv (test oracle).

    integrand maps radii to values of f; the bulk measure is
    phi^n(r) dr dA.
    """
    sf = graph.sf
    R = _graph_radii(graph, grid)
    t, wt = _radial_rule(radial_points)
    r = R[:, None] * t[None, :]
    vals = integrand(r) * sf.phi(r) ** sf.n
    radial = R * (vals @ wt)
    return grid.integrate(radial)


def volume_bruteforce(graph, grid, radial_points=32):
    return bulk_integral_bruteforce(graph, grid, np.ones_like, radial_points)


def weighted_volume_bruteforce(graph, grid, radial_points=32):
    return bulk_integral_bruteforce(graph, grid, graph.sf.dphi, radial_points)


def quermassintegrals(graph, grid, geo=None):
    """All quermassintegrals W_{-1}..W_n as a dict keyed by the index."""
    if geo is None:
        geo = gg.surface_geometry(graph, grid)
    sf = graph.sf
    n = grid.n
    sig_ints = [grid.integrate(geo.sigma[:, k] * geo.area_factor)
                for k in range(n + 1)]
    W = {-1: volume(graph, grid, geo=geo), 0: sig_ints[0]}
    if n >= 1:
        W[1] = sig_ints[1] + sf.K * n * W[-1]
    for k in range(2, n + 1):
        W[k] = sig_ints[k] + sf.K * (n - k + 1) / (k - 1) * W[k - 2]
    return W


def ball_volume(sf, rho):
    return sf.sphere_area * sf.volume_primitive(rho)


def ball_weighted_volume(sf, rho):
    return sf.sphere_area * sf.phi(rho) ** (sf.n + 1) / (sf.n + 1)


def ball_quermassintegrals(sf, rho):
    """Closed-form W_{-1}..W_n of the geodesic ball of radius rho."""
    n = sf.n
    ph, dph = sf.phi(rho), sf.dphi(rho)
    sig_ints = [comb(n, k) * sf.sphere_area * ph ** (n - k) * dph ** k
                for k in range(n + 1)]
    W = {-1: ball_volume(sf, rho), 0: sig_ints[0]}
    if n >= 1:
        W[1] = sig_ints[1] + sf.K * n * W[-1]
    for k in range(2, n + 1):
        W[k] = sig_ints[k] + sf.K * (n - k + 1) / (k - 1) * W[k - 2]
    return W


def _monotone_radius_solve(fn, target, upper_cap):
    lo, hi = 1e-12, 0.5
    while fn(hi) < target:
        hi *= 1.8
        if hi > upper_cap:
            hi = upper_cap
            break
    hi = min(hi, upper_cap)
    if fn(hi) < target:
        raise ValueError("target exceeds the attainable range")
    return brentq(lambda r: fn(r) - target, lo, hi, xtol=1e-14, rtol=1e-15)


def radius_for_volume(sf, V):
    """Radius of the geodesic ball with Vol = V."""
    cap = sf.r_max - 1e-9 if np.isfinite(sf.r_max) else np.inf
    return _monotone_radius_solve(lambda r: ball_volume(sf, r), V, cap)


def radius_for_weighted_volume(sf, Wv):
    """Radius of the geodesic ball with weighted volume Wv.

    For K = +1 the weighted volume is only monotone up to rho = pi/2, so
    the solve is restricted to that range.
    """
    cap = np.pi / 2 if sf.K == 1 else np.inf
    return _monotone_radius_solve(lambda r: ball_weighted_volume(sf, r), Wv, cap)


def _bulk_mass_points(graph, grid, radial_points):
    sf = graph.sf
    R = _graph_radii(graph, grid)
    t, wt = _radial_rule(radial_points)
    r = R[:, None] * t[None, :]
    mass = (grid.weights[:, None] * R[:, None] * wt[None, :]
            * sf.phi(r) ** sf.n)
    pts = model.embed(sf, r, np.repeat(grid.nodes[:, None, :],
                                       radial_points, axis=1))
    return pts.reshape(-1, pts.shape[-1]), mass.reshape(-1)


def barycenter(graph, grid, radial_points=16, tol=1e-10, max_iter=100):
    """Karcher mean of the enclosed domain in ambient coordinates.

    Minimizes p -> int_Omega d(y, p)^2 dv by Riemannian fixed-point
    iteration; the energy gradient is -2 int log_p(y) dv, and convergence
    is declared when its norm drops below tol.
    """
    sf = graph.sf
    pts, mass = _bulk_mass_points(graph, grid, radial_points)
    total = float(np.sum(mass))
    p = model.origin(sf)
    for _ in range(max_iter):
        v = mass @ model.log_map(sf, p, pts) / total
        if 2.0 * total * np.linalg.norm(v) < tol * max(1.0, total):
            return p
        p = model.exp_map(sf, p, v)
        if sf.K == 1:
            p = p / np.linalg.norm(p)
        elif sf.K == -1:
            p = p / np.sqrt(p[0] ** 2 - np.sum(p[1:] ** 2))
    raise RuntimeError("barycenter iteration did not converge")


def symmetric_difference_to_ball(graph, grid, center_vec, rho_bar, radii=None):
    """Vol(Omega symmetric-difference ball(center, rho_bar)).

    center_vec is a model vector at the origin; the ball boundary is
    re-expressed as a radial graph about the origin, so the volume between
    the two profiles is an angular quadrature of |P_n(R) - P_n(R_ball)|.
    Returns +inf when the origin is not interior to the ball.
    """
    sf = graph.sf
    if np.linalg.norm(center_vec) >= 0.995 * rho_bar:
        return np.inf
    if radii is None:
        radii = _graph_radii(graph, grid)
    Rb = model.ball_radial_profile(sf, center_vec, rho_bar, grid.nodes)
    if not np.all(np.isfinite(Rb)):
        return np.inf
    gap = np.abs(sf.volume_primitive(radii) - sf.volume_primitive(Rb))
    return grid.integrate(gap)


def fraenkel_asymmetry(graph, grid, seed_center=None, options=None):
    """(alpha, center): minimal symmetric-difference volume to a ball.

    The comparison ball has the same volume as Omega; the center ranges
    over model vectors and is found by Nelder-Mead seeded at the
    barycenter. options overrides individual Nelder-Mead settings, e.g.
    a looser xatol when the seed is known to be nearly optimal.
    """
    sf = graph.sf
    radii = _graph_radii(graph, grid)
    rho_bar = radius_for_volume(sf, volume(graph, grid))
    if seed_center is None:
        seed_center = model.model_vector(sf, barycenter(graph, grid))
    def objective(c):
        return symmetric_difference_to_ball(graph, grid, c, rho_bar,
                                            radii=radii)
    opts = {"xatol": 1e-9, "fatol": 1e-12, "maxiter": 4000, "maxfev": 6000}
    if options:
        opts.update(options)
    res = minimize(objective, np.asarray(seed_center, dtype=float),
                   method="Nelder-Mead", options=opts)
    if not (res.success or res.fun < np.inf):
        raise RuntimeError("asymmetry center search did not converge")
    return float(res.fun), res.x


@dataclass(frozen=True)
class DomainFunctionals:
    """Bundle of bulk functionals with coarse quadrature-error estimates."""

    vol: float
    weighted_vol: float
    quermass: dict
    barycenter_point: np.ndarray = field(repr=False)
    vol_err: float = 0.0
    area_err: float = 0.0


def domain_functionals(graph, grid, refine_check=True):
    """Evaluate all domain functionals; error fields compare against a
    finer grid when refine_check is set."""
    geo = gg.surface_geometry(graph, grid)
    W = quermassintegrals(graph, grid, geo=geo)
    vol_err = area_err = 0.0
    if refine_check:
        fine = sb.build_grid(grid.n, grid.d_exact + 6)
        geo_f = gg.surface_geometry(graph, fine)
        vol_err = abs(volume(graph, fine, geo=geo_f) - W[-1])
        area_err = abs(fine.integrate(geo_f.area_factor) - W[0])
    return DomainFunctionals(
        vol=W[-1], weighted_vol=weighted_volume(graph, grid, geo=geo),
        quermass=W, barycenter_point=barycenter(graph, grid),
        vol_err=vol_err, area_err=area_err)
