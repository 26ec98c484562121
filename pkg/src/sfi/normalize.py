"""Normalization of radial graphs to the theorems' side conditions.

Two operations compose the pipeline: recentering moves the domain by an
ambient isometry until its barycenter sits at the origin, re-deriving the
radial profile by per-node ray shooting; radius matching then re-labels
the same surface as rho*(1 + u*) so the chosen constraint functional of
the enclosed domain equals its value on the comparison ball of radius
rho*. Matching is a pure re-parametrization, so it never moves the
barycenter, and the constraints are isometry-invariant except for the
weighted volume, whose anchor at the origin makes one extra outer pass
necessary at most.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from sfi import domains as dm
from sfi import graphgeom as gg
from sfi import model
from sfi import spherebasis as sb

BAR_TOL = 1e-9
OUT_OF_BAND_LIMIT = 1e-8


@dataclass(frozen=True)
class Constraint:
    """Constraint functional tag: quermassintegral W_j or weighted volume.

    j = -1 selects the volume. kind is "quermass" or "weighted_volume".
    """

    kind: str
    j: int = -1

    def __post_init__(self):
        if self.kind not in ("quermass", "weighted_volume"):
            raise ValueError(f"unknown constraint kind {self.kind!r}")

    @property
    def label(self):
        if self.kind == "weighted_volume":
            return "weighted_volume"
        return "volume" if self.j == -1 else f"W{self.j}"

    def of_graph(self, graph, grid, geo=None):
        if self.kind == "weighted_volume":
            return dm.weighted_volume(graph, grid, geo=geo)
        if self.j == -1:
            return dm.volume(graph, grid, geo=geo)
        return dm.quermassintegrals(graph, grid, geo=geo)[self.j]

    def of_ball(self, sf, rho):
        if self.kind == "weighted_volume":
            return dm.ball_weighted_volume(sf, rho)
        return dm.ball_quermassintegrals(sf, rho)[self.j]

    def ball_radius_cap(self, sf):
        if sf.K != 1:
            return np.inf
        return np.pi - 1e-9 if (self.kind == "quermass" and self.j == -1) \
            else np.pi / 2


def volume_constraint():
    return Constraint(kind="quermass", j=-1)


def weighted_volume_constraint():
    return Constraint(kind="weighted_volume")


def quermass_constraint(j):
    return Constraint(kind="quermass", j=j)


def parse_constraint(text):
    """Parse "volume", "weighted_volume" or "W<j>" into a Constraint."""
    t = text.strip().lower()
    if t == "volume":
        return volume_constraint()
    if t == "weighted_volume":
        return weighted_volume_constraint()
    if t.startswith("w"):
        try:
            return quermass_constraint(int(t[1:]))
        except ValueError:
            pass
    raise ValueError(f"unrecognized constraint {text!r}")


def match_radius(graph, grid, constraint, geo=None, value=None):
    """Re-label the surface as rho*(1+u*) with the constraint matched.

    Returns (rho_star, new_graph). The underlying surface is unchanged:
    rho*(1+u*) = rho(1+u) pointwise, only the splitting moves. value, if
    given, is the precomputed constraint value of the graph.
    """
    sf = graph.sf
    if value is None:
        value = constraint.of_graph(graph, grid, geo=geo)
    cap = constraint.ball_radius_cap(sf)
    lo = graph.rho
    hi = graph.rho
    f = lambda r: constraint.of_ball(sf, r) - value
    flo = f(lo)
    for _ in range(200):
        if flo <= 0:
            break
        lo *= 0.7
        flo = f(lo)
    fhi = f(hi)
    for _ in range(200):
        if fhi >= 0 or hi >= cap:
            break
        hi = min(hi * 1.3, cap)
        fhi = f(hi)
    if flo > 0 or fhi < 0:
        raise ValueError("constraint value not bracketed by ball radii")
    rho_star = brentq(f, lo, hi, xtol=1e-15, rtol=8.9e-16)
    ratio = graph.rho / rho_star
    coeffs = graph.u.coeffs * ratio
    coeffs[0] += (ratio - 1.0) * np.sqrt(sf.sphere_area)
    new_u = sb.from_coeffs(graph.u.basis, coeffs)
    return rho_star, gg.RadialGraph(sf=sf, rho=rho_star, u=new_u)


def reproject_after_isometry(graph, grid, iso):
    """Radial graph of iso(surface), by per-node secant ray shooting.

    Returns (new_graph, out_energy): the absolute L2 energy of the part
    of the re-derived profile that the harmonic basis cannot represent.
    """
    sf = graph.sf
    inv = iso.inverse()

    def shoot_residual(r):
        s, y = model.polar(sf, inv(model.embed(sf, r, grid.nodes)))
        return s - graph.radii(sb.evaluate(graph.u, y))

    r0 = graph.radii(sb.values_on_grid(graph.u, grid))
    f0 = shoot_residual(r0)
    r1 = r0 - f0  # residual has unit slope in r to leading order
    f1 = shoot_residual(r1)
    for _ in range(60):
        if np.max(np.abs(f1)) < 1e-14 * graph.rho:
            break
        denom = f1 - f0
        denom = np.where(np.abs(denom) > 1e-300, denom, 1.0)
        r2 = r1 - f1 * (r1 - r0) / denom
        r0, f0 = r1, f1
        r1 = r2
        f1 = shoot_residual(r1)
    samples = r1 / graph.rho - 1.0
    u_new = sb.project(samples, grid, graph.u.basis)
    resid = samples - sb.values_on_grid(u_new, grid)
    out_energy = grid.integrate(resid ** 2)
    return gg.RadialGraph(sf=sf, rho=graph.rho, u=u_new), out_energy


def recenter(graph, grid, tol=BAR_TOL, max_passes=30):
    """Translate the domain so its barycenter is the origin.

    Fixed-point iteration: translate by the current barycenter and
    re-derive the graph, until the model-coordinate displacement falls
    below tol. Returns (new_graph, displacement, out_of_band), the last
    being the worst per-pass out-of-band energy relative to the energy
    of the profile handed in (floored to absorb root-solve noise).
    """
    sf = graph.sf
    ref = max(grid.integrate(sb.values_on_grid(graph.u, grid) ** 2), 1e-16)
    worst_band = 0.0
    for _ in range(max_passes):
        bar = dm.barycenter(graph, grid)
        disp = float(np.linalg.norm(model.model_vector(sf, bar)))
        if disp < tol:
            return graph, disp, worst_band
        iso = model.translation_to_origin(sf, bar)
        graph, out_energy = reproject_after_isometry(graph, grid, iso)
        worst_band = max(worst_band, out_energy / ref)
        if worst_band > OUT_OF_BAND_LIMIT:
            raise RuntimeError(
                f"out-of-band energy ratio {worst_band:.3e} exceeds "
                f"{OUT_OF_BAND_LIMIT:.0e}; direction too rough for the basis")
    raise RuntimeError("recentering did not converge")


@dataclass(frozen=True)
class NormalizedGraph:
    """A graph satisfying bar = O and one matched constraint, with
    residual bookkeeping."""

    graph: gg.RadialGraph
    constraint: Constraint
    constraint_residual: float
    bar_displacement: float
    out_of_band: float
    norms: sb.SobolevNorms

    @property
    def rho(self):
        return self.graph.rho


def normalize(graph, grid, constraint, max_outer=5):
    """Recenter and match the constraint; returns a NormalizedGraph.

    One outer pass suffices for isometry-invariant constraints; the
    weighted volume needs a second because recentering moves its value.
    """
    band = 0.0
    current = graph
    for _ in range(max_outer):
        current, disp, b = recenter(current, grid, max_passes=30)
        band = max(band, b)
        value_before = constraint.of_graph(current, grid)
        rho_star, current = match_radius(current, grid, constraint,
                                         value=value_before)
        target = constraint.of_ball(current.sf, rho_star)
        resid = abs(value_before - target) / max(abs(target), 1e-300)
        bar_after = float(np.linalg.norm(model.model_vector(
            current.sf, dm.barycenter(current, grid))))
        if resid < 1e-10 and bar_after < 1e-8:
            return NormalizedGraph(
                graph=current, constraint=constraint,
                constraint_residual=resid, bar_displacement=bar_after,
                out_of_band=band,
                norms=sb.sobolev_norms(current.u, grid))
    raise RuntimeError("normalization did not reach joint tolerance")
