"""Quadrature grids on S^n and a harmonic-polynomial function basis.

Functions on the sphere are represented in a basis of homogeneous harmonic
polynomials restricted to S^n (spherical harmonics), L^2-orthonormalized
with exact monomial integrals. Keeping the ambient polynomial form gives
machine-precision covariant derivatives everywhere, with no chart
singularities: for a degree-d homogeneous extension U and a unit vector x,

    u = U(x),  grad u = tangential part of DU,
    Hess u(X, Y) = X . (D^2 U) Y - (x . DU) <X, Y>.

Grids are tensor products: Gauss-Jacobi nodes in each polar cosine (weight
(1 - t^2)^{(n-2)/2}, matching the slice measure) and uniform azimuth, so a
stated polynomial exactness degree holds by construction.
"""

from __future__ import annotations

import io
import json
import struct
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy import sparse
from scipy.linalg import cholesky, null_space, solve_triangular
from scipy.special import roots_jacobi

from sfi.spaceform import unit_sphere_area

SUPPORTED_DIMENSIONS = (2, 3, 4)


# ---------------------------------------------------------------------------
# monomial tables

class MonomialTable:
    """Graded monomial basis for polynomials of degree <= max_degree.

    Stores exponent rows in graded lexicographic order together with
    sparse differentiation matrices acting on coefficient vectors.
    """

    def __init__(self, nvars, max_degree):
        self.nvars = nvars
        self.max_degree = max_degree
        rows = []
        slices = []
        start = 0
        for d in range(max_degree + 1):
            block = sorted(_compositions(d, nvars), reverse=True)
            rows.extend(block)
            slices.append(slice(start, start + len(block)))
            start += len(block)
        self.exponents = np.array(rows, dtype=np.int64)
        self.degree_slices = slices
        self.index = {tuple(e): i for i, e in enumerate(rows)}
        self.size = len(rows)
        self._diff = [self._diff_matrix(j) for j in range(nvars)]
        self._second = {}

    def _diff_matrix(self, j):
        rows, cols, vals = [], [], []
        for i, e in enumerate(self.exponents):
            if e[j] == 0:
                continue
            tgt = list(e)
            tgt[j] -= 1
            rows.append(self.index[tuple(tgt)])
            cols.append(i)
            vals.append(float(e[j]))
        return sparse.csr_matrix((vals, (rows, cols)),
                                 shape=(self.size, self.size))

    def diff(self, j):
        return self._diff[j]

    def second_diff(self, j, k):
        key = (min(j, k), max(j, k))
        if key not in self._second:
            self._second[key] = (self._diff[key[0]] @ self._diff[key[1]]).tocsr()
        return self._second[key]

    def vandermonde(self, points):
        """Monomial values at points, shape (N, size)."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        powers = np.ones((pts.shape[0], self.nvars, self.max_degree + 1))
        for p in range(1, self.max_degree + 1):
            powers[:, :, p] = powers[:, :, p - 1] * pts
        out = np.ones((pts.shape[0], self.size))
        for j in range(self.nvars):
            out *= powers[:, j, self.exponents[:, j]]
        return out

    def sphere_integrals(self):
        """Exact integrals of each monomial over the unit sphere S^{nvars-1}."""
        from math import gamma
        vals = np.zeros(self.size)
        for i, e in enumerate(self.exponents):
            if np.any(e % 2):
                continue
            num = 2.0
            for a in e:
                num *= gamma((a + 1) / 2.0)
            vals[i] = num / gamma((e.sum() + self.nvars) / 2.0)
        return vals


def _compositions(total, parts):
    if parts == 1:
        yield (total,)
        return
    for head in range(total, -1, -1):
        for rest in _compositions(total - head, parts - 1):
            yield (head,) + rest


_TABLE_CACHE = {}


def monomial_table(nvars, max_degree):
    key = (nvars, max_degree)
    if key not in _TABLE_CACHE:
        _TABLE_CACHE[key] = MonomialTable(nvars, max_degree)
    return _TABLE_CACHE[key]


# ---------------------------------------------------------------------------
# quadrature grids

@dataclass(frozen=True)
class SphereGrid:
    """Tensor-product quadrature rule on S^n with per-node tangent frames."""

    n: int
    d_exact: int
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    frames: np.ndarray = field(repr=False)

    @property
    def node_count(self):
        return len(self.weights)

    @property
    def key(self):
        return (self.n, self.d_exact, self.node_count)

    def integrate(self, values):
        """Quadrature sum with fixed (pairwise) summation order."""
        return float(np.sum(self.weights * np.asarray(values)))


def _circle_rule(degree):
    m = degree + 1
    ang = 2.0 * np.pi * (np.arange(m) + 0.5) / m
    pts = np.column_stack([np.cos(ang), np.sin(ang)])
    return pts, np.full(m, 2.0 * np.pi / m)


def _sphere_rule(n, degree):
    if n == 1:
        return _circle_rule(degree)
    sub_pts, sub_w = _sphere_rule(n - 1, degree)
    nt = (degree + 2) // 2
    t, wt = roots_jacobi(nt, (n - 2) / 2.0, (n - 2) / 2.0)
    s = np.sqrt(1.0 - t * t)
    pts = np.concatenate([
        np.column_stack([np.full(len(sub_pts), ti),
                         si * sub_pts]) for ti, si in zip(t, s)])
    w = np.concatenate([wi * sub_w for wi in wt])
    return pts, w


def _build_frames(nodes):
    """Deterministic orthonormal tangent frames via Gram-Schmidt.

    The coordinate axis most aligned with the node is skipped; the
    remaining axes are projected and orthogonalized in index order.
    """
    npts, m = nodes.shape
    n = m - 1
    pivot = np.argmax(np.abs(nodes), axis=1)
    frames = np.empty((npts, n, m))
    for i in range(npts):
        x = nodes[i]
        cols = [j for j in range(m) if j != pivot[i]]
        basis = []
        for j in cols:
            v = -x[j] * x
            v[j] += 1.0
            for b in basis:
                v -= (v @ b) * b
            v /= np.linalg.norm(v)
            basis.append(v)
        frames[i] = np.array(basis)
    return frames


def build_grid(n, resolution):
    """Quadrature grid on S^n exact for polynomials of degree <= resolution."""
    if n not in SUPPORTED_DIMENSIONS:
        raise ValueError(f"unsupported dimension n={n}; expected one of "
                         f"{SUPPORTED_DIMENSIONS}")
    if resolution < 4:
        raise ValueError("resolution must be at least 4")
    nodes, weights = _sphere_rule(n, resolution)
    norms = np.linalg.norm(nodes, axis=1, keepdims=True)
    nodes = nodes / norms
    return SphereGrid(n=n, d_exact=resolution, nodes=nodes, weights=weights,
                      frames=_build_frames(nodes))


_VANDERMONDE_CACHE = {}


def grid_vandermonde(grid, table):
    key = (grid.key, table.nvars, table.max_degree)
    if key not in _VANDERMONDE_CACHE:
        _VANDERMONDE_CACHE[key] = table.vandermonde(grid.nodes)
    return _VANDERMONDE_CACHE[key]


_BASIS_VALUES_CACHE = {}


def grid_basis_values(grid, basis):
    """Basis element values at grid nodes, shape (nodes, size); cached
    since the product of the Vandermonde matrix with the basis
    coefficients is static per (grid, basis) pair."""
    key = (grid.key, basis.n, basis.d_max)
    if key not in _BASIS_VALUES_CACHE:
        V = grid_vandermonde(grid, basis.table)
        _BASIS_VALUES_CACHE[key] = V @ basis.coeffs.T
    return _BASIS_VALUES_CACHE[key]


# ---------------------------------------------------------------------------
# harmonic basis

@dataclass(frozen=True)
class HarmonicBasis:
    """L^2(S^n)-orthonormal homogeneous harmonic polynomials, degree <= d_max.

    coeffs rows are coefficient vectors over the graded monomial table of
    the same (n+1, d_max); degrees holds the homogeneity degree of each
    element.
    """

    n: int
    d_max: int
    coeffs: np.ndarray = field(repr=False)
    degrees: np.ndarray = field(repr=False)

    @property
    def size(self):
        return len(self.degrees)

    @property
    def table(self):
        return monomial_table(self.n + 1, self.d_max)

    @property
    def eigenvalues(self):
        """Laplace-Beltrami eigenvalues d(d + n - 1) per element."""
        d = self.degrees.astype(float)
        return d * (d + self.n - 1)

    def degree_block(self, d):
        return np.nonzero(self.degrees == d)[0]


def _laplacian_matrix(table, d):
    """Euclidean Laplacian from homogeneous degree d to degree d - 2."""
    src = table.degree_slices[d]
    dst = table.degree_slices[d - 2]
    exps = table.exponents[src]
    rows, cols, vals = [], [], []
    for i, e in enumerate(exps):
        for j in range(table.nvars):
            if e[j] >= 2:
                tgt = list(e)
                tgt[j] -= 2
                rows.append(table.index[tuple(tgt)] - dst.start)
                cols.append(i)
                vals.append(float(e[j] * (e[j] - 1)))
    return sparse.csr_matrix((vals, (rows, cols)),
                             shape=(dst.stop - dst.start,
                                    src.stop - src.start)).toarray()


def _fix_signs(columns):
    for i in range(columns.shape[1]):
        j = np.argmax(np.abs(columns[:, i]))
        if columns[j, i] < 0:
            columns[:, i] = -columns[:, i]
    return columns


def build_basis(n, d_max):
    """Construct the orthonormal spherical-harmonic basis up to degree d_max."""
    if n not in SUPPORTED_DIMENSIONS:
        raise ValueError(f"unsupported dimension n={n}; expected one of "
                         f"{SUPPORTED_DIMENSIONS}")
    table = monomial_table(n + 1, d_max)
    omega = unit_sphere_area(n)
    rows = []
    degrees = []
    for d in range(d_max + 1):
        block = table.degree_slices[d]
        if d == 0:
            col = np.array([[omega ** -0.5]])
        elif d == 1:
            col = np.eye(n + 1) * np.sqrt((n + 1) / omega)
        else:
            null = null_space(_laplacian_matrix(table, d))
            mono_ints = _pair_integrals(table, d)
            gram = null.T @ mono_ints @ null
            chol = cholesky(gram, lower=False)
            col = solve_triangular(chol, null.T, trans="T", lower=False).T
            col = _fix_signs(col)
        for i in range(col.shape[1]):
            row = np.zeros(table.size)
            row[block] = col[:, i]
            rows.append(row)
            degrees.append(d)
    return HarmonicBasis(n=n, d_max=d_max, coeffs=np.array(rows),
                         degrees=np.array(degrees, dtype=np.int64))


def _pair_integrals(table, d):
    """Matrix of \\int x^(a+b) dA over pairs of degree-d monomials."""
    from math import gamma
    exps = table.exponents[table.degree_slices[d]]
    td = len(exps)
    out = np.zeros((td, td))
    for i in range(td):
        for j in range(i, td):
            e = exps[i] + exps[j]
            if np.any(e % 2):
                continue
            num = 2.0
            for a in e:
                num *= gamma((a + 1) / 2.0)
            out[i, j] = out[j, i] = num / gamma((e.sum() + table.nvars) / 2.0)
    return out


# ---------------------------------------------------------------------------
# functions on the sphere

@dataclass(frozen=True)
class SphericalFunction:
    """Finite harmonic expansion u = sum a_k Y_k."""

    basis: HarmonicBasis
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        a = np.asarray(self.coeffs, dtype=float)
        if a.shape != (self.basis.size,):
            raise ValueError("coefficient vector does not match basis size")
        object.__setattr__(self, "coeffs", a.copy())

    @property
    def coeff_norm(self):
        """L^2 norm via Parseval (basis is orthonormal)."""
        return float(np.linalg.norm(self.coeffs))

    def scaled(self, c):
        return SphericalFunction(self.basis, self.coeffs * c)

    def plus(self, other):
        return SphericalFunction(self.basis, self.coeffs + other.coeffs)

    def polynomial_coeffs(self):
        return self.coeffs @ self.basis.coeffs

    def degree_energies(self):
        """ell^2 coefficient energy per harmonic degree, shape (d_max + 1,)."""
        out = np.zeros(self.basis.d_max + 1)
        np.add.at(out, self.basis.degrees, self.coeffs ** 2)
        return out


def zero_function(basis):
    return SphericalFunction(basis, np.zeros(basis.size))


def from_coeffs(basis, coeffs):
    return SphericalFunction(basis, np.asarray(coeffs, dtype=float))


def evaluate(u, points):
    """Values of u at arbitrary unit vectors (N, n+1) -> (N,)."""
    table = u.basis.table
    return table.vandermonde(points) @ u.polynomial_coeffs()


def values_on_grid(u, grid):
    return grid_vandermonde(grid, u.basis.table) @ u.polynomial_coeffs()


def eval_jet_all(u, grid):
    """Covariant 2-jet of u at every grid node.

    Returns (values (N,), gradient (N, n) in frame components,
    Hessian (N, n, n) in frame components).
    """
    table = u.basis.table
    V = grid_vandermonde(grid, u.basis.table)
    c = u.polynomial_coeffs()
    m = table.nvars
    vals = V @ c
    dc = np.array([table.diff(j) @ c for j in range(m)])
    amb_grad = V @ dc.T
    amb_hess = np.empty((len(V), m, m))
    for j in range(m):
        for k in range(j, m):
            col = V @ (table.second_diff(j, k) @ c)
            amb_hess[:, j, k] = col
            amb_hess[:, k, j] = col
    E = grid.frames
    grad = np.einsum("iam,im->ia", E, amb_grad)
    radial = np.einsum("im,im->i", grid.nodes, amb_grad)
    hess = np.einsum("iam,imk,ibk->iab", E, amb_hess, E)
    hess -= radial[:, None, None] * np.eye(grid.n)
    return vals, grad, hess


def eval_jet(u, grid, i):
    """Covariant 2-jet of u at node i: (value, gradient, Hessian in frame)."""
    vals, grad, hess = eval_jet_all(u, grid)
    return vals[i], grad[i], hess[i]


def project(samples, grid, basis):
    """Quadrature projection of node samples onto the basis."""
    if grid.d_exact < 2 * basis.d_max:
        raise ValueError("grid exactness must be at least twice the basis "
                         "degree for projection")
    B = grid_basis_values(grid, basis)
    weighted = grid.weights * np.asarray(samples, dtype=float)
    return SphericalFunction(basis, B.T @ weighted)


def laplacian(u):
    """Laplace-Beltrami of u, exact in the harmonic basis."""
    return SphericalFunction(u.basis, -u.basis.eigenvalues * u.coeffs)


class SobolevNorms(NamedTuple):
    l2: float
    grad_l2: float
    c1: float
    w2inf: float


def sobolev_norms(u, grid):
    """L^2, gradient L^2, C^1 and W^{2,inf} norms of u on a grid.

    Sup norms are maxima over grid nodes; the Hessian enters through its
    operator norm in the frame.
    """
    vals, grad, hess = eval_jet_all(u, grid)
    l2 = np.sqrt(max(grid.integrate(vals**2), 0.0))
    gn2 = np.sum(grad**2, axis=1)
    grad_l2 = np.sqrt(max(grid.integrate(gn2), 0.0))
    sup_u = float(np.max(np.abs(vals))) if len(vals) else 0.0
    sup_grad = float(np.sqrt(np.max(gn2)))
    c1 = max(sup_u, sup_grad)
    hess_op = float(np.max(np.abs(np.linalg.eigvalsh(hess))))
    return SobolevNorms(l2=float(l2), grad_l2=float(grad_l2), c1=c1,
                        w2inf=max(c1, hess_op))


# ---------------------------------------------------------------------------
# cache format: magic, version, JSON manifest, flat little-endian arrays

_MAGIC = b"SFIBASIS"
_VERSION = 1


def save_cache(path, grid, basis):
    """Write a grid/basis pair to the documented binary cache format."""
    arrays = {
        "nodes": grid.nodes, "weights": grid.weights, "frames": grid.frames,
        "coeffs": basis.coeffs, "degrees": basis.degrees.astype(np.float64),
    }
    meta = {
        "n": grid.n, "d_exact": grid.d_exact, "d_max": basis.d_max,
        "arrays": [{"name": k, "shape": list(v.shape)} for k, v in arrays.items()],
    }
    blob = json.dumps(meta).encode()
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<II", _VERSION, len(blob)))
        fh.write(blob)
        for v in arrays.values():
            fh.write(np.ascontiguousarray(v, dtype="<f8").tobytes())


def load_cache(path):
    """Read a cache file written by save_cache; returns (grid, basis)."""
    with open(path, "rb") as fh:
        data = fh.read()
    buf = io.BytesIO(data)
    if buf.read(len(_MAGIC)) != _MAGIC:
        raise ValueError("not a basis cache file")
    version, blob_len = struct.unpack("<II", buf.read(8))
    if version != _VERSION:
        raise ValueError(f"unsupported cache version {version}")
    meta = json.loads(buf.read(blob_len))
    arrays = {}
    for spec in meta["arrays"]:
        count = int(np.prod(spec["shape"])) if spec["shape"] else 1
        flat = np.frombuffer(buf.read(8 * count), dtype="<f8")
        arrays[spec["name"]] = flat.reshape(spec["shape"]).astype(float)
    grid = SphereGrid(n=meta["n"], d_exact=meta["d_exact"],
                      nodes=arrays["nodes"], weights=arrays["weights"],
                      frames=arrays["frames"])
    basis = HarmonicBasis(n=meta["n"], d_max=meta["d_max"],
                          coeffs=arrays["coeffs"],
                          degrees=arrays["degrees"].astype(np.int64))
    return grid, basis


def default_resolution(d_max):
    """Grid exactness with headroom for curvature-weighted integrands."""
    return 2 * d_max + 8
