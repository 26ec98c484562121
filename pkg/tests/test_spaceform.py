"""Tests for the space-form primitives and weight functions."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from sfi.spaceform import (
    SpaceForm,
    WeightFunction,
    check_weight,
    default_weight_set,
    phi_triple,
    unit_sphere_area,
)

ALL_K = [-1, 0, 1]


def make(K, n=3):
    return SpaceForm(K=K, n=n)


class TestSphereArea:
    def test_known_values(self):
        assert unit_sphere_area(1) == pytest.approx(2 * math.pi)
        assert unit_sphere_area(2) == pytest.approx(4 * math.pi)
        assert unit_sphere_area(3) == pytest.approx(2 * math.pi**2)
        assert unit_sphere_area(4) == pytest.approx(8 * math.pi**2 / 3)

    def test_property(self):
        sf = make(0, n=4)
        assert sf.sphere_area == pytest.approx(unit_sphere_area(4))


class TestPhi:
    @pytest.mark.parametrize("K", ALL_K)
    def test_origin_values(self, K):
        sf = make(K)
        assert sf.phi(0.0) == 0.0
        assert sf.dphi(0.0) == 1.0
        assert sf.Phi(0.0) == 0.0

    @pytest.mark.parametrize("K", ALL_K)
    def test_structure_identity(self, K):
        sf = make(K)
        r = np.linspace(0.01, 2.5 if K != 1 else 3.0, 40)
        assert np.allclose(sf.dphi(r) ** 2 + K * sf.phi(r) ** 2, 1.0, atol=1e-14)

    @pytest.mark.parametrize("K", ALL_K)
    def test_Phi_primitive_of_phi(self, K):
        sf = make(K)
        for r in [0.3, 0.9, 1.7]:
            val, _ = quad(sf.phi, 0.0, r)
            assert sf.Phi(r) == pytest.approx(val, abs=1e-12)

    def test_flat_closed_forms(self):
        sf = make(0)
        r = np.array([0.2, 1.0, 3.7])
        assert np.allclose(sf.phi(r), r)
        assert np.allclose(sf.dphi(r), 1.0)
        assert np.allclose(sf.Phi(r), r**2 / 2)

    def test_domain_validation(self):
        with pytest.raises(ValueError):
            make(1).phi(3.5)
        with pytest.raises(ValueError):
            make(-1).phi(-0.1)
        make(-1).phi(25.0)

    def test_r_max(self):
        assert make(1).r_max == pytest.approx(math.pi)
        assert make(0).r_max == math.inf
        assert make(-1).r_max == math.inf

    def test_invalid_construction(self):
        with pytest.raises(ValueError):
            SpaceForm(K=2, n=3)
        with pytest.raises(ValueError):
            SpaceForm(K=0, n=1)

    def test_phi_triple(self):
        sf = make(-1)
        ph, dph, Ph = phi_triple(sf, 0.8)
        assert ph == pytest.approx(math.sinh(0.8))
        assert dph == pytest.approx(math.cosh(0.8))
        assert Ph == pytest.approx(math.cosh(0.8) - 1.0)


class TestVolumePrimitive:
    @pytest.mark.parametrize("K", ALL_K)
    @pytest.mark.parametrize("n", [0, 1, 2, 3, 4, 5, 6])
    def test_against_quadrature(self, K, n):
        sf = SpaceForm(K=K, n=max(n, 2))
        for r in [0.15, 0.8, 1.9]:
            val, _ = quad(lambda t: sf.phi(t) ** n, 0.0, r)
            assert sf.volume_primitive(r, n=n) == pytest.approx(val, rel=1e-12, abs=1e-14)

    def test_flat_ball_volume(self):
        sf = SpaceForm(K=0, n=2)
        rho = 1.3
        vol = unit_sphere_area(2) * sf.volume_primitive(rho)
        assert vol == pytest.approx(4 * math.pi * rho**3 / 3)

    def test_default_power(self):
        sf = make(-1, n=4)
        assert sf.volume_primitive(1.1) == sf.volume_primitive(1.1, n=4)

    @given(r=st.floats(0.05, 2.8), K=st.sampled_from(ALL_K))
    @settings(max_examples=25, deadline=None)
    def test_derivative_is_phi_power(self, r, K):
        sf = SpaceForm(K=K, n=5)
        h = 1e-6
        fd = (sf.volume_primitive(r + h) - sf.volume_primitive(r - h)) / (2 * h)
        assert fd == pytest.approx(sf.phi(r) ** 5, rel=1e-7, abs=1e-9)


class TestWeightFunction:
    def fd_check(self, w, s_vals):
        h = 1e-5
        for s in s_vals:
            for order in (1, 2):
                fd = (w.deriv(s + h, order - 1) - w.deriv(s - h, order - 1)) / (2 * h)
                assert w.deriv(s, order) == pytest.approx(fd, rel=5e-9, abs=5e-9)

    def test_constant(self):
        w = WeightFunction.constant(2.5)
        assert w(3.0) == 2.5
        assert w.deriv(3.0, 1) == 0.0
        assert w.deriv(3.0, 3) == 0.0

    def test_power_and_affine(self):
        s_vals = [0.3, 1.1, 2.2]
        self.fd_check(WeightFunction.power(1.0), s_vals)
        self.fd_check(WeightFunction.power(2.0), s_vals)
        self.fd_check(WeightFunction.affine(), s_vals)
        self.fd_check(WeightFunction.shifted_power(2.0), s_vals)
        self.fd_check(WeightFunction.shifted_power(1.5), s_vals)

    def test_power_values(self):
        w = WeightFunction.power(2.0)
        assert w(1.5) == pytest.approx(2.25)
        assert w.deriv(1.5, 1) == pytest.approx(3.0)
        assert w.deriv(1.5, 2) == pytest.approx(2.0)
        assert w.deriv(1.5, 3) == pytest.approx(0.0)

    def test_power_alpha_below_one_rejected(self):
        with pytest.raises(ValueError):
            WeightFunction.power(0.5)

    def test_scaled(self):
        w = WeightFunction.affine().scaled(3.0)
        assert w(2.0) == pytest.approx(9.0)
        assert w.deriv(2.0, 1) == pytest.approx(3.0)

    def test_custom_label(self):
        w = WeightFunction.custom(lambda s: s + 1, lambda s: 1.0,
                                  lambda s: 0.0, lambda s: 0.0, label="lin")
        assert w.label == "lin"
        assert w(1.0) == 2.0


class TestWeightFlags:
    GRID = np.linspace(0.05, 2.0, 60)

    def test_constant_flags(self):
        f = check_weight(WeightFunction.constant(1.0), self.GRID)
        assert f.positive and f.monotone and f.convex
        assert not f.hyperbolic_admissible

    def test_power_one_flags(self):
        f = check_weight(WeightFunction.power(1.0), self.GRID)
        assert f.positive and f.monotone and f.convex
        assert f.hyperbolic_admissible

    def test_affine_flags(self):
        f = check_weight(WeightFunction.affine(), self.GRID)
        assert f.positive and f.monotone and f.convex
        assert f.hyperbolic_admissible

    def test_shifted_square_flags(self):
        f = check_weight(WeightFunction.shifted_power(2.0), self.GRID)
        assert f.positive and f.monotone and f.convex
        assert f.hyperbolic_admissible

    def test_decreasing_weight(self):
        w = WeightFunction.custom(lambda s: 1.0 / (1.0 + s),
                                  lambda s: -1.0 / (1.0 + s) ** 2,
                                  lambda s: 2.0 / (1.0 + s) ** 3,
                                  lambda s: -6.0 / (1.0 + s) ** 4)
        f = check_weight(w, self.GRID)
        assert f.positive and not f.monotone

    def test_grid_with_zero_breaks_strict_positivity(self):
        f = check_weight(WeightFunction.power(1.0), np.linspace(0.0, 1.0, 5))
        assert not f.positive

    def test_default_set(self):
        ws = default_weight_set()
        assert len(ws) == 4
        labels = [w.label for w in ws]
        assert len(set(labels)) == 4

    def test_bad_grid(self):
        with pytest.raises(ValueError):
            check_weight(WeightFunction.constant(1.0), np.array([]))
        with pytest.raises(ValueError):
            check_weight(WeightFunction.constant(1.0), np.array([-0.1, 0.5]))
