"""Tests for sphere quadrature grids and the harmonic basis."""

import math

import numpy as np
import pytest

from sfi import spherebasis as sb
from sfi.spaceform import unit_sphere_area


@pytest.fixture(scope="module")
def grid3():
    return sb.build_grid(3, 20)


@pytest.fixture(scope="module")
def basis3():
    return sb.build_basis(3, 5)


class TestGrid:
    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_total_weight(self, n):
        g = sb.build_grid(n, 10)
        assert g.integrate(np.ones(g.node_count)) == pytest.approx(
            unit_sphere_area(n), rel=1e-12)

    def test_unit_nodes_and_frames(self, grid3):
        assert np.allclose(np.linalg.norm(grid3.nodes, axis=1), 1.0, atol=1e-14)
        E = grid3.frames
        gram = np.einsum("iam,ibm->iab", E, E)
        assert np.allclose(gram, np.eye(3), atol=1e-12)
        tangency = np.einsum("iam,im->ia", E, grid3.nodes)
        assert np.allclose(tangency, 0.0, atol=1e-12)

    def test_spec_values(self):
        g2 = sb.build_grid(2, 16)
        assert g2.integrate(np.ones(g2.node_count)) == pytest.approx(
            4 * math.pi, rel=1e-12)
        g3 = sb.build_grid(3, 16)
        assert g3.integrate(g3.nodes[:, 0] ** 2) == pytest.approx(
            math.pi**2 / 2, rel=1e-12)
        g2b = sb.build_grid(2, 8)
        assert g2b.integrate(g2b.nodes[:, 2] ** 8) == pytest.approx(
            4 * math.pi / 9, rel=1e-12)

    @pytest.mark.parametrize("n", [2, 3])
    def test_monomial_exactness(self, n):
        res = 9
        g = sb.build_grid(n, res)
        table = sb.monomial_table(n + 1, res)
        vander = table.vandermonde(g.nodes)
        exact = table.sphere_integrals()
        quad = vander.T @ (g.weights)
        scale = unit_sphere_area(n)
        assert np.allclose(quad, exact, atol=1e-12 * scale)

    def test_errors(self):
        with pytest.raises(ValueError):
            sb.build_grid(5, 10)
        with pytest.raises(ValueError):
            sb.build_grid(3, 3)

    def test_vandermonde_cache(self, grid3):
        t = sb.monomial_table(4, 5)
        a = sb.grid_vandermonde(grid3, t)
        b = sb.grid_vandermonde(grid3, t)
        assert a is b


class TestBasis:
    def test_orthonormal(self, grid3, basis3):
        V = sb.grid_vandermonde(grid3, basis3.table)
        Y = V @ basis3.coeffs.T
        gram = Y.T @ (grid3.weights[:, None] * Y)
        assert np.allclose(gram, np.eye(basis3.size), atol=1e-9)

    def test_dimension_counts(self, basis3):
        for d in range(basis3.d_max + 1):
            assert len(basis3.degree_block(d)) == (d + 1) ** 2

    def test_constant_element(self, basis3):
        e0 = sb.from_coeffs(basis3, np.eye(basis3.size)[0])
        pts = np.eye(4)
        vals = sb.evaluate(e0, pts)
        assert np.allclose(vals, unit_sphere_area(3) ** -0.5, atol=1e-14)

    def test_degree_one_spans_coordinates(self, basis3):
        rng = np.random.default_rng(0)
        pts = rng.standard_normal((10, 4))
        pts /= np.linalg.norm(pts, axis=1, keepdims=True)
        block = basis3.degree_block(1)
        scale = math.sqrt(4 / unit_sphere_area(3))
        for pos, idx in enumerate(block):
            e = sb.from_coeffs(basis3, np.eye(basis3.size)[idx])
            assert np.allclose(sb.evaluate(e, pts), scale * pts[:, pos],
                               atol=1e-12)

    def test_eigenfunction_property(self, grid3, basis3):
        rng = np.random.default_rng(1)
        for d in [2, 3, 5]:
            block = basis3.degree_block(d)
            a = np.zeros(basis3.size)
            a[block] = rng.standard_normal(len(block))
            u = sb.from_coeffs(basis3, a)
            vals, _, hess = sb.eval_jet_all(u, grid3)
            lam = d * (d + 3 - 1)
            assert np.allclose(np.trace(hess, axis1=1, axis2=2), -lam * vals,
                               atol=1e-9 * max(1.0, np.max(np.abs(vals))))


class TestJets:
    def test_coordinate_function(self, grid3, basis3):
        # u = x_0 restricted to the sphere
        idx = basis3.degree_block(1)[0]
        a = np.zeros(basis3.size)
        a[idx] = math.sqrt(unit_sphere_area(3) / 4)
        u = sb.from_coeffs(basis3, a)
        val = sb.evaluate(u, np.eye(4)[1][None, :])[0]
        assert abs(float(val)) < 1e-14
        vals, grad, _ = sb.eval_jet_all(u, grid3)
        assert np.allclose(vals, grid3.nodes[:, 0], atol=1e-12)
        gn2 = np.sum(grad**2, axis=1)
        assert np.allclose(gn2, 1.0 - grid3.nodes[:, 0] ** 2, atol=1e-12)

    def test_finite_difference_oracle(self, grid3, basis3):
        rng = np.random.default_rng(7)
        a = rng.standard_normal(basis3.size)
        u = sb.from_coeffs(basis3, a / np.linalg.norm(a))
        i = 101
        x = grid3.nodes[i]
        E = grid3.frames[i]
        val, grad, hess = sb.eval_jet(u, grid3, i)

        def along(w, t):
            pts = np.cos(t)[:, None] * x + np.sin(t)[:, None] * w
            return sb.evaluate(u, pts)

        h = 7e-3
        steps = np.array([-2.0, -1.0, 1.0, 2.0]) * h
        d1 = np.array([1.0, -8.0, 8.0, -1.0]) / (12 * h)
        d2 = np.array([-1.0, 16.0, 16.0, -1.0]) / (12 * h * h)
        center = -30.0 / (12 * h * h)
        for a in range(3):
            fd = float(d1 @ along(E[a], steps))
            assert grad[a] == pytest.approx(fd, abs=1e-6)
            fd2 = float(d2 @ along(E[a], steps)) + center * val
            assert hess[a, a] == pytest.approx(fd2, abs=1e-6)
        for a in range(3):
            for b in range(a + 1, 3):
                wp = (E[a] + E[b]) / math.sqrt(2)
                wm = (E[a] - E[b]) / math.sqrt(2)
                sp = float(d2 @ along(wp, steps)) + center * val
                sm = float(d2 @ along(wm, steps)) + center * val
                assert hess[a, b] == pytest.approx((sp - sm) / 2, abs=1e-6)

    def test_single_node_matches_batch(self, grid3, basis3):
        rng = np.random.default_rng(3)
        u = sb.from_coeffs(basis3, rng.standard_normal(basis3.size))
        vals, grad, hess = sb.eval_jet_all(u, grid3)
        v, g, h = sb.eval_jet(u, grid3, 17)
        assert v == vals[17]
        assert np.array_equal(g, grad[17])
        assert np.array_equal(h, hess[17])


class TestProjection:
    def test_roundtrip(self, grid3, basis3):
        rng = np.random.default_rng(5)
        a = rng.standard_normal(basis3.size)
        u = sb.from_coeffs(basis3, a)
        back = sb.project(sb.values_on_grid(u, grid3), grid3, basis3)
        assert np.allclose(back.coeffs, a, atol=1e-9)

    def test_zero(self, grid3, basis3):
        out = sb.project(np.zeros(grid3.node_count), grid3, basis3)
        assert np.allclose(out.coeffs, 0.0)

    def test_two_mode_combination(self, grid3, basis3):
        a = np.zeros(basis3.size)
        a[2] = 3.0
        a[7] = 0.5
        u = sb.from_coeffs(basis3, a)
        out = sb.project(sb.values_on_grid(u, grid3), grid3, basis3)
        assert np.allclose(out.coeffs, a, atol=1e-9)

    def test_exactness_precondition(self, basis3):
        small = sb.build_grid(3, 8)
        with pytest.raises(ValueError):
            sb.project(np.zeros(small.node_count), small, basis3)

    def test_parseval(self, grid3, basis3):
        rng = np.random.default_rng(9)
        u = sb.from_coeffs(basis3, rng.standard_normal(basis3.size))
        norms = sb.sobolev_norms(u, grid3)
        assert norms.l2 == pytest.approx(u.coeff_norm, rel=1e-9)


class TestNormsAndSpectra:
    def test_degree_one_rayleigh(self, grid3, basis3):
        a = np.zeros(basis3.size)
        a[1] = 1.0
        u = sb.from_coeffs(basis3, a)
        norms = sb.sobolev_norms(u, grid3)
        assert norms.grad_l2**2 == pytest.approx(3 * norms.l2**2, rel=1e-10)

    def test_degree_two_rayleigh(self, grid3, basis3):
        a = np.zeros(basis3.size)
        a[basis3.degree_block(2)[0]] = 1e-3
        u = sb.from_coeffs(basis3, a)
        norms = sb.sobolev_norms(u, grid3)
        assert norms.grad_l2**2 / norms.l2**2 == pytest.approx(8.0, rel=1e-10)

    def test_zero_function(self, grid3, basis3):
        norms = sb.sobolev_norms(sb.zero_function(basis3), grid3)
        assert norms == (0.0, 0.0, 0.0, 0.0)

    def test_laplacian_coefficients(self, grid3, basis3):
        rng = np.random.default_rng(13)
        u = sb.from_coeffs(basis3, rng.standard_normal(basis3.size))
        _, _, hess = sb.eval_jet_all(u, grid3)
        lap_vals = sb.values_on_grid(sb.laplacian(u), grid3)
        assert np.allclose(np.trace(hess, axis1=1, axis2=2), lap_vals,
                           atol=1e-9)

    def test_poincare_inequality(self, grid3, basis3):
        rng = np.random.default_rng(17)
        low = basis3.degree_block(0).tolist() + basis3.degree_block(1).tolist()
        for _ in range(20):
            a = rng.standard_normal(basis3.size)
            a[low] = 0.0
            u = sb.from_coeffs(basis3, a)
            norms = sb.sobolev_norms(u, grid3)
            assert norms.grad_l2**2 >= 2 * 4 * norms.l2**2 * (1 - 1e-12)

    def test_poincare_equality_on_degree_two(self, grid3, basis3):
        rng = np.random.default_rng(19)
        a = np.zeros(basis3.size)
        block = basis3.degree_block(2)
        a[block] = rng.standard_normal(len(block))
        u = sb.from_coeffs(basis3, a)
        norms = sb.sobolev_norms(u, grid3)
        assert norms.grad_l2**2 == pytest.approx(8 * norms.l2**2, rel=1e-10)

    def test_hessian_trace_integral_vanishes(self, grid3, basis3):
        rng = np.random.default_rng(23)
        u = sb.from_coeffs(basis3, rng.standard_normal(basis3.size))
        _, _, hess = sb.eval_jet_all(u, grid3)
        total = grid3.integrate(np.trace(hess, axis1=1, axis2=2))
        assert abs(total) < 1e-10 * u.coeff_norm

    def test_degree_energies(self, basis3):
        a = np.zeros(basis3.size)
        a[0] = 2.0
        a[basis3.degree_block(3)[1]] = 1.5
        u = sb.from_coeffs(basis3, a)
        e = u.degree_energies()
        assert e[0] == pytest.approx(4.0)
        assert e[3] == pytest.approx(2.25)
        assert np.sum(e) == pytest.approx(u.coeff_norm**2)


class TestCache:
    def test_roundtrip(self, tmp_path, grid3, basis3):
        path = tmp_path / "basis.bin"
        sb.save_cache(path, grid3, basis3)
        g2, b2 = sb.load_cache(path)
        assert g2.key == grid3.key
        assert np.array_equal(g2.nodes, grid3.nodes)
        assert np.array_equal(g2.weights, grid3.weights)
        assert np.array_equal(b2.coeffs, basis3.coeffs)
        assert np.array_equal(b2.degrees, basis3.degrees)

    def test_resave_identical(self, tmp_path, grid3, basis3):
        p1 = tmp_path / "a.bin"
        p2 = tmp_path / "b.bin"
        sb.save_cache(p1, grid3, basis3)
        g2, b2 = sb.load_cache(p1)
        sb.save_cache(p2, g2, b2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_bad_magic(self, tmp_path):
        p = tmp_path / "junk.bin"
        p.write_bytes(b"NOTACACHE" + b"\x00" * 16)
        with pytest.raises(ValueError):
            sb.load_cache(p)
