"""Tests for the ambient coordinate models and isometries."""

import numpy as np
import pytest

from sfi import model
from sfi.spaceform import SpaceForm

ALL_K = [-1, 0, 1]


def random_directions(rng, count, n):
    x = rng.standard_normal((count, n + 1))
    return x / np.linalg.norm(x, axis=1, keepdims=True)


@pytest.fixture(params=ALL_K, ids=["hyp", "flat", "sph"])
def sf(request):
    return SpaceForm(K=request.param, n=3)


class TestEmbedPolar:
    def test_roundtrip(self, sf):
        rng = np.random.default_rng(11)
        x = random_directions(rng, 50, sf.n)
        r = rng.uniform(0.1, 2.0, 50)
        y = model.embed(sf, r, x)
        r2, x2 = model.polar(sf, y)
        assert np.allclose(r2, r, atol=1e-12)
        assert np.allclose(x2, x, atol=1e-12)

    def test_origin_distance(self, sf):
        rng = np.random.default_rng(5)
        x = random_directions(rng, 20, sf.n)
        r = rng.uniform(0.05, 1.8, 20)
        y = model.embed(sf, r, x)
        d = model.distance(sf, y, model.origin(sf))
        assert np.allclose(d, r, atol=1e-12)

    def test_on_quadric(self, sf):
        if sf.K == 0:
            return
        rng = np.random.default_rng(7)
        x = random_directions(rng, 30, sf.n)
        y = model.embed(sf, rng.uniform(0.1, 2.0, 30), x)
        if sf.K == -1:
            q = -y[:, 0] ** 2 + np.sum(y[:, 1:] ** 2, axis=1)
            assert np.allclose(q, -1.0, atol=1e-12)
        else:
            assert np.allclose(np.sum(y**2, axis=1), 1.0, atol=1e-12)


class TestExpLog:
    def test_roundtrip(self, sf):
        rng = np.random.default_rng(3)
        p = model.embed(sf, 0.7, random_directions(rng, 1, sf.n))[0]
        y = model.embed(sf, rng.uniform(0.2, 1.5, 25),
                        random_directions(rng, 25, sf.n))
        v = model.log_map(sf, p, y)
        back = model.exp_map(sf, p, v)
        assert np.allclose(back, y, atol=1e-10)

    def test_log_norm_is_distance(self, sf):
        rng = np.random.default_rng(9)
        p = model.embed(sf, 0.4, random_directions(rng, 1, sf.n))[0]
        y = model.embed(sf, rng.uniform(0.2, 1.5, 25),
                        random_directions(rng, 25, sf.n))
        v = model.log_map(sf, p, y)
        d = model.distance(sf, y, p)
        if sf.K == -1:
            norm = np.sqrt(np.maximum(
                -v[:, 0] ** 2 + np.sum(v[:, 1:] ** 2, axis=1), 0.0))
        else:
            norm = np.linalg.norm(v, axis=1)
        assert np.allclose(norm, d, atol=1e-10)

    def test_log_at_base_is_zero(self, sf):
        p = model.origin(sf)
        v = model.log_map(sf, p, p[None, :])
        assert np.allclose(v, 0.0, atol=1e-14)


class TestIsometry:
    def test_moves_point_to_origin(self, sf):
        rng = np.random.default_rng(21)
        p = model.embed(sf, 0.9, random_directions(rng, 1, sf.n))[0]
        iso = model.translation_to_origin(sf, p)
        d = model.distance(sf, iso(p), model.origin(sf))
        assert abs(float(d)) < 1e-12

    def test_preserves_distances(self, sf):
        rng = np.random.default_rng(23)
        p = model.embed(sf, 0.6, random_directions(rng, 1, sf.n))[0]
        y = model.embed(sf, rng.uniform(0.1, 1.9, 40),
                        random_directions(rng, 40, sf.n))
        iso = model.translation_to_origin(sf, p)
        before = model.distance(sf, y[:20], y[20:])
        after = model.distance(sf, iso(y[:20]), iso(y[20:]))
        assert np.allclose(after, before, atol=1e-11)

    def test_inverse(self, sf):
        rng = np.random.default_rng(29)
        p = model.embed(sf, 1.1, random_directions(rng, 1, sf.n))[0]
        y = model.embed(sf, rng.uniform(0.1, 1.5, 15),
                        random_directions(rng, 15, sf.n))
        iso = model.translation_to_origin(sf, p)
        back = iso.inverse()(iso(y))
        assert np.allclose(back, y, atol=1e-11)

    def test_identity(self, sf):
        iso = model.identity_isometry(sf)
        y = model.embed(sf, 0.8, np.eye(sf.n + 1))
        assert np.allclose(iso(y), y)

    def test_near_origin_point(self, sf):
        iso = model.translation_to_origin(sf, model.origin(sf))
        y = model.embed(sf, 0.5, np.eye(sf.n + 1))
        assert np.allclose(iso(y), y, atol=1e-12)


class TestBallProfile:
    def test_centered_ball(self, sf):
        rng = np.random.default_rng(31)
        x = random_directions(rng, 20, sf.n)
        R = model.ball_radial_profile(sf, np.zeros(sf.n + 1), 0.9, x)
        assert np.allclose(R, 0.9, atol=1e-12)

    def test_profile_lies_on_sphere(self, sf):
        rng = np.random.default_rng(37)
        x = random_directions(rng, 60, sf.n)
        c = np.array([0.08, -0.05, 0.03, 0.02])
        rho_bar = 0.85
        R = model.ball_radial_profile(sf, c, rho_bar, x)
        assert np.all(np.isfinite(R))
        assert np.all(R > 0)
        y = model.embed(sf, R, x)
        center = model.exp_map(sf, model.origin(sf),
                               model.origin_tangent(sf, c))
        d = model.distance(sf, y, center)
        assert np.allclose(d, rho_bar, atol=1e-10)

    def test_flat_profile_exact(self):
        sf = SpaceForm(K=0, n=3)
        rng = np.random.default_rng(41)
        x = random_directions(rng, 30, sf.n)
        c = np.array([0.1, 0.0, -0.06, 0.02])
        R = model.ball_radial_profile(sf, c, 1.2, x)
        assert np.allclose(np.linalg.norm(R[:, None] * x - c, axis=1), 1.2,
                           atol=1e-12)


class TestOriginTangent:
    def test_embedding_of_model_vector(self, sf):
        c = np.array([0.2, -0.1, 0.05, 0.0])
        v = model.origin_tangent(sf, c)
        p = model.exp_map(sf, model.origin(sf), v)
        d = model.distance(sf, p, model.origin(sf))
        assert float(d) == pytest.approx(np.linalg.norm(c), abs=1e-12)
