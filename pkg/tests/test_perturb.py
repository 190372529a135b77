"""Perturbation sampler: membership, uniformity, determinism."""

import numpy as np
import pytest
from scipy import stats

from probcert.perturb import Metric, sample_ball
from probcert.streams import Namespace, stream_for_point


class TestMembership:
    def test_linf_one_million_draws(self):
        rng = stream_for_point(42, 0)
        x = np.array([0.3, 0.6, 0.5])
        eps = 0.07
        pts = sample_ball(x, eps, Metric.LINF, rng, 1_000_000)
        assert pts.shape == (1_000_000, 3)
        assert np.all(np.abs(pts - x).max(axis=1) <= eps + 1e-12)
        assert np.all(pts >= 0.0) and np.all(pts <= 1.0)

    def test_l2_one_million_draws(self):
        rng = stream_for_point(42, 1)
        x = np.array([0.5, 0.5, 0.5, 0.5])
        eps = 0.2
        pts = sample_ball(x, eps, Metric.L2, rng, 1_000_000)
        assert np.all(np.linalg.norm(pts - x, axis=1) <= eps + 1e-12)

    def test_clipping_near_boundary(self):
        """A center near the domain edge still yields in-domain samples."""
        rng = stream_for_point(7, 0)
        x = np.array([0.01, 0.99])
        pts = sample_ball(x, 0.05, Metric.LINF, rng, 10_000)
        assert pts.min() >= 0.0 and pts.max() <= 1.0
        assert np.all(np.abs(pts - x).max(axis=1) <= 0.05 + 1e-12)
        # mass actually lands on the clipped faces
        assert np.any(pts[:, 0] == 0.0)
        assert np.any(pts[:, 1] == 1.0)

    def test_epsilon_zero(self):
        rng = stream_for_point(7, 1)
        x = np.array([0.4, 0.2])
        pts = sample_ball(x, 0.0, Metric.LINF, rng, 100)
        np.testing.assert_array_equal(pts, np.tile(x, (100, 1)))


class TestUniformity:
    """Goodness of fit at the 1 percent level on interior centers."""

    def test_linf_componentwise_ks(self):
        rng = stream_for_point(1234, 0)
        x = np.array([0.5, 0.4])
        eps = 0.1
        pts = sample_ball(x, eps, Metric.LINF, rng, 200_000)
        for j in range(2):
            u = (pts[:, j] - (x[j] - eps)) / (2 * eps)
            res = stats.kstest(u, "uniform")
            assert res.pvalue > 0.01, (j, res)

    def test_l2_radius_law(self):
        """(r/eps)^d is uniform when the ball is sampled uniformly."""
        rng = stream_for_point(1234, 1)
        d = 3
        x = np.full(d, 0.5)
        eps = 0.3
        pts = sample_ball(x, eps, Metric.L2, rng, 200_000)
        r = np.linalg.norm(pts - x, axis=1)
        res = stats.kstest((r / eps) ** d, "uniform")
        assert res.pvalue > 0.01, res

    def test_l2_direction_symmetry(self):
        rng = stream_for_point(99, 2)
        x = np.full(2, 0.5)
        pts = sample_ball(x, 0.2, Metric.L2, rng, 200_000)
        angles = np.arctan2(pts[:, 1] - 0.5, pts[:, 0] - 0.5)
        res = stats.kstest((angles + np.pi) / (2 * np.pi), "uniform")
        assert res.pvalue > 0.01, res


class TestDeterminism:
    def test_same_stream_same_sequence(self):
        x = np.array([0.3, 0.7])
        a = sample_ball(x, 0.05, Metric.LINF, stream_for_point(5, 17), 1000)
        b = sample_ball(x, 0.05, Metric.LINF, stream_for_point(5, 17), 1000)
        np.testing.assert_array_equal(a, b)

    def test_streams_differ_across_points_and_namespaces(self):
        x = np.array([0.3, 0.7])
        a = sample_ball(x, 0.05, Metric.LINF, stream_for_point(5, 17), 10)
        b = sample_ball(x, 0.05, Metric.LINF, stream_for_point(5, 18), 10)
        c = sample_ball(
            x, 0.05, Metric.LINF, stream_for_point(5, 17, Namespace.ORACLE), 10
        )
        assert not np.array_equal(a, b)
        assert not np.array_equal(a, c)

    def test_seed_changes_stream(self):
        x = np.array([0.3, 0.7])
        a = sample_ball(x, 0.05, Metric.LINF, stream_for_point(5, 0), 10)
        b = sample_ball(x, 0.05, Metric.LINF, stream_for_point(6, 0), 10)
        assert not np.array_equal(a, b)


class TestValidation:
    def test_bad_epsilon(self):
        with pytest.raises(ValueError):
            sample_ball(np.array([0.5]), -0.1, Metric.LINF, stream_for_point(1, 0), 1)

    def test_bad_shape(self):
        with pytest.raises(ValueError):
            sample_ball(np.zeros((2, 2)), 0.1, Metric.LINF, stream_for_point(1, 0), 1)

    def test_stream_index_range(self):
        with pytest.raises(ValueError):
            stream_for_point(1, -1)
        with pytest.raises(ValueError):
            stream_for_point(1, 1 << 48)
