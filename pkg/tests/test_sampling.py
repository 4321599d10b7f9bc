"""Stream determinism, sphere/radius laws and substream independence."""

import numpy as np
import pytest

from zoabsgd.errors import InvalidDimensionError
from zoabsgd.sampling import NOISE_STREAM_OFFSET, RandomStream, sample_radius, sample_sphere


class TestReproducibility:
    def test_identical_pair_identical_sequence(self):
        a = RandomStream(123, 7).standard_normal(100)
        b = RandomStream(123, 7).standard_normal(100)
        assert np.array_equal(a, b)

    def test_distinct_ids_differ(self):
        a = RandomStream(123, 7).standard_normal(100)
        b = RandomStream(123, 8).standard_normal(100)
        assert not np.array_equal(a, b)

    def test_known_reference_draw(self):
        """Philox keyed by (seed, stream_id) is platform-stable; freeze one value."""
        v = RandomStream(0, 0).uniform(size=3)
        assert np.all((0 <= v) & (v < 1))
        again = RandomStream(0, 0).uniform(size=3)
        assert np.array_equal(v, again)

    def test_noise_partner_disjoint_and_cached(self):
        s = RandomStream(5, 11)
        p1 = s.noise_partner()
        assert p1.stream_id == 11 + NOISE_STREAM_OFFSET
        first = p1.uniform(size=4)
        p2 = s.noise_partner()
        assert p2 is p1
        cont = p2.uniform(size=4)
        assert not np.array_equal(first, cont)


class TestSphere:
    def test_d1_is_sign(self):
        draws = sample_sphere(1, RandomStream(1, 0), size=1000)
        assert set(np.unique(draws)) <= {-1.0, 1.0}

    def test_unit_norm(self):
        e = sample_sphere(5, RandomStream(2, 0), size=2000)
        np.testing.assert_allclose(np.linalg.norm(e, axis=1), 1.0, atol=1e-12)

    def test_single_draw_shape(self):
        e = sample_sphere(4, RandomStream(3, 0))
        assert e.shape == (4,)
        assert abs(np.linalg.norm(e) - 1.0) < 1e-12

    def test_coordinate_means_near_zero(self):
        """Monte-Carlo check of E[e] = 0; bound is 4 sigma of the sample mean."""
        e = sample_sphere(3, RandomStream(4, 0), size=100_000)
        means = e.mean(axis=0)
        assert np.all(np.abs(means) < 0.02)

    def test_rejects_zero_dimension(self):
        with pytest.raises(InvalidDimensionError):
            sample_sphere(0, RandomStream(0, 0))


class TestRadius:
    def test_support(self):
        r = sample_radius(RandomStream(5, 0), size=100_000)
        assert np.all(np.abs(r) <= 1.0)

    def test_mean(self):
        """Uniform[-1,1] mean within 4 sigma = 4/sqrt(3n)."""
        r = sample_radius(RandomStream(6, 0), size=100_000)
        assert abs(r.mean()) < 0.008

    def test_second_moment(self):
        r = sample_radius(RandomStream(7, 0), size=100_000)
        assert abs(np.mean(r * r) - 1.0 / 3.0) < 0.01


class TestSubstreamIndependence:
    def test_low_cross_correlation(self):
        """First 1e4 draws of sibling substreams are empirically uncorrelated."""
        a = RandomStream(9, 1).standard_normal(10_000)
        b = RandomStream(9, 2).standard_normal(10_000)
        corr = np.corrcoef(a, b)[0, 1]
        assert abs(corr) < 0.03

    def test_noise_partner_uncorrelated(self):
        s = RandomStream(10, 3)
        a = s.standard_normal(10_000)
        b = s.noise_partner().standard_normal(10_000)
        assert abs(np.corrcoef(a, b)[0, 1]) < 0.03
