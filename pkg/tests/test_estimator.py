"""Two-point estimator: exact identities, moment bounds and scaling laws."""

import math

import numpy as np
import pytest

from mc_oracles import fit_loglog_slope, mc_bias, mc_mean

from zoabsgd.errors import ParameterError
from zoabsgd.estimator import EstimatorConfig, batched_grad, certify_moments, kernel_grad
from zoabsgd.kernels import build_kernel, eval_kernel
from zoabsgd.oracles import NoiseModel, ZeroOrderOracle
from zoabsgd.problems import get_problem, make_quadratic
from zoabsgd.sampling import RandomStream

NO_NOISE = NoiseModel("none", 0.0)


def _cfg(h=0.1, B=1, beta=2.0):
    return EstimatorConfig(h=h, B=B, kernel=build_kernel(beta))


class TestKernelGrad:
    def test_symmetric_point_gives_zero(self):
        """A symmetric difference of an even function around its center is zero."""
        p = make_quadratic(3, [2.0, 2.0, 2.0])
        s = RandomStream(0, 0)
        e = s.sphere(3)
        g = kernel_grad(p, NO_NOISE, _cfg(), p.x_star, e, 0.7, s.noise_partner())
        np.testing.assert_array_equal(g, np.zeros(3))

    def test_locally_linear_closed_form(self):
        """On a quadratic the difference is exactly linear in the gradient:
        g = d <grad f(x), e> r K(r) e, i.e. 3 d r^2 <grad, e> e for order 2."""
        p = make_quadratic(2, [1.0, 3.0])
        x = np.array([0.4, -1.1])
        s = RandomStream(1, 0)
        e = s.sphere(2)
        r = 0.6
        g = kernel_grad(p, NO_NOISE, _cfg(h=0.05), x, e, r, s.noise_partner())
        expected = 2 * (p.grad(x) @ e) * r * eval_kernel(_cfg().kernel, r) * e
        np.testing.assert_allclose(g, expected, rtol=1e-9)
        np.testing.assert_allclose(g, 3 * 2 * r**2 * (p.grad(x) @ e) * e, rtol=1e-9)

    def test_output_parallel_to_direction(self):
        p = get_problem("quartic-mix-d3")
        s = RandomStream(2, 0)
        for k in range(20):
            e = s.sphere(3)
            r = float(s.radius())
            g = kernel_grad(p, NoiseModel("uniform", 0.1), _cfg(), np.ones(3), e, r,
                            s.noise_partner())
            cross = g - (g @ e) * e
            assert np.linalg.norm(cross) < 1e-12 * (1 + np.linalg.norm(g))

    def test_constant_mean_offset_cancels(self):
        """With xi = delta on both sides the estimate equals its noiseless value."""
        p = get_problem("quartic-mix-d2")
        x = np.array([0.5, 0.25])
        s = RandomStream(3, 0)
        e = s.sphere(2)
        r = 0.45
        noisy = kernel_grad(p, NoiseModel("constant", 5.0), _cfg(), x, e, r,
                            RandomStream(3, 1))
        clean = kernel_grad(p, NO_NOISE, _cfg(), x, e, r, RandomStream(3, 2))
        # cancellation is algebraically exact; adding the offset costs a few ulps
        np.testing.assert_allclose(noisy, clean, rtol=1e-12)

    def test_quadratic_mc_mean_matches_gradient(self):
        """Brute-force Monte-Carlo mean is within 4 sigma of the analytic gradient."""
        p = get_problem("quadratic-d2-cond10")
        x = np.array([0.8, 0.6])
        mean, stderr = mc_mean(p.f, x, build_kernel(2.0).coeffs, 0.1, 200_000,
                               np.random.default_rng(9))
        assert np.linalg.norm(mean - p.grad(x)) <= 4 * stderr

    def test_input_validation(self):
        p = get_problem("quadratic-d2-cond10")
        s = RandomStream(4, 0)
        with pytest.raises(ParameterError):
            kernel_grad(p, NO_NOISE, _cfg(), np.ones(2), np.array([1.0, 1.0]), 0.5, s)
        with pytest.raises(ParameterError):
            kernel_grad(p, NO_NOISE, _cfg(), np.ones(2), np.array([1.0, 0.0]), 1.5, s)
        with pytest.raises(ParameterError):
            EstimatorConfig(h=0.0, B=1, kernel=build_kernel(2.0))


class TestBatchedGrad:
    def test_batch_of_one_equals_single_draw(self):
        """B=1 batched estimate reproduces kernel_grad fed the same substream."""
        p = get_problem("quadratic-d2-cond10")
        noise = NoiseModel("uniform", 0.05)
        cfg = _cfg(h=0.2, B=1)
        x = np.array([1.0, -0.5])
        got = batched_grad(p, noise, cfg, x, RandomStream(5, 17))
        ref_stream = RandomStream(5, 17)
        e = ref_stream.sphere(2, size=1)[0]
        r = float(ref_stream.radius(size=1)[0])
        expected = kernel_grad(p, noise, cfg, x, e, r, ref_stream.noise_partner())
        np.testing.assert_allclose(got, expected, rtol=1e-12)

    def test_variance_scales_inverse_batch(self):
        """Var[batched] tracks (1/B) x single-sample variance within [0.7, 1.4]."""
        p = get_problem("quadratic-d2-cond10")
        cfg_b = {b: _cfg(h=0.05, B=b) for b in (1, 4, 16, 64)}
        x = np.array([1.0, 1.0])
        reps = 2000
        variances = {}
        for b, cfg in cfg_b.items():
            draws = np.array([
                batched_grad(p, NO_NOISE, cfg, x, RandomStream(100 + b, k))
                for k in range(reps)
            ])
            variances[b] = draws.var(axis=0).sum()
        for b in (4, 16, 64):
            ratio = variances[1] / (b * variances[b])
            assert 0.7 <= ratio <= 1.4, (b, ratio)

    def test_zero_for_symmetric_batch(self):
        p = make_quadratic(2, [3.0, 3.0])
        g = batched_grad(p, NO_NOISE, _cfg(B=8), p.x_star, RandomStream(6, 0))
        np.testing.assert_array_equal(g, np.zeros(2))


class TestCertifyMoments:
    def test_report_fields_finite(self):
        p = get_problem("quadratic-d2-cond10")
        rep = certify_moments(p, NoiseModel("uniform", 0.01), _cfg(h=0.1),
                              np.ones(2), 20_000, stream=RandomStream(7, 0))
        for v in rep.to_dict().values():
            assert np.isfinite(v)
        assert rep.n_samples == 20_000

    def test_requires_enough_samples(self):
        p = get_problem("quadratic-d2-cond10")
        with pytest.raises(ParameterError):
            certify_moments(p, NO_NOISE, _cfg(), np.ones(2), 100)

    def test_quadratic_zero_bias(self):
        """Two-point estimates of a quadratic are exactly unbiased."""
        p = get_problem("quadratic-d2-cond10")
        rep = certify_moments(p, NO_NOISE, _cfg(h=0.3), np.array([0.5, -0.5]),
                              100_000, stream=RandomStream(8, 0))
        assert rep.bias_norm <= 4 * rep.bias_stderr

    @pytest.mark.parametrize("d,h,delta", [
        (2, 0.05, 0.0), (2, 0.2, 0.01), (4, 0.1, 0.001),
        (4, 0.4, 0.05), (8, 0.1, 0.01),
    ])
    def test_second_moment_within_bound(self, d, h, delta):
        """E||g||^2 <= 4 d kappa ||grad||^2 + 4 d kappa L^2 h^2 + kappa d^2 delta^2/h^2."""
        p = get_problem(f"quadratic-d{d}-cond10")
        noise = NoiseModel("uniform", delta) if delta else NO_NOISE
        rep = certify_moments(p, noise, _cfg(h=h), p.x_star + 0.5 * np.ones(d) / math.sqrt(d),
                              30_000, stream=RandomStream(d, int(h * 100)))
        assert rep.second_moment <= rep.bound_second + 4 * rep.second_stderr

    def test_bias_within_bound_quartic(self):
        """Measured bias respects kappa_beta L_beta h^(beta-1) on the quartic."""
        p = get_problem("quartic-mix-d2")
        x = np.array([0.6, -0.4])
        for beta in (2.0, 4.0):
            rep = certify_moments(p, NO_NOISE, _cfg(h=0.2, beta=beta), x, 50_000,
                                  stream=RandomStream(9, int(beta)))
            assert rep.bias_norm <= rep.bound_bias + 4 * rep.bias_stderr


class TestBiasOrder:
    HS = [0.4, 0.2, 0.1, 0.05]

    def test_slope_beta2_quartic(self):
        """Bias decays at order h^2 for the order-2 kernel on the quartic
        (the kernel's surviving cubic moment couples to the cubic Taylor term)."""
        p = get_problem("quartic-mix-d2")
        x = np.array([0.6, -0.4])
        coeffs = build_kernel(2.0).coeffs
        rng = np.random.default_rng(10)
        biases = [mc_bias(p.f, p.grad(x), x, coeffs, h, 200_000, rng)[0]
                  for h in self.HS]
        slope = fit_loglog_slope(self.HS, biases)
        assert slope >= 2.0 - 0.5

    def test_beta4_quartic_exactly_unbiased(self):
        """The order-4 kernel annihilates the cubic moment and a quartic has no
        fifth derivative, so its bias vanishes identically at every h."""
        p = get_problem("quartic-mix-d2")
        x = np.array([0.6, -0.4])
        coeffs = build_kernel(4.0).coeffs
        rng = np.random.default_rng(11)
        y = x - p.x_star
        d3 = 24.0 * 1.0 * y  # diag of D^3 for c4 = 1
        for h in self.HS:
            bias, stderr = mc_bias(p.f, p.grad(x), x, coeffs, h, 100_000, rng,
                                   d3_diag=d3)
            assert bias <= 6 * stderr + 1e-13

    def test_slope_beta4_smooth(self):
        """On a C-infinity non-polynomial objective the order-4 kernel's bias
        decays at order >= beta - 1."""
        p = get_problem("smooth-mix-d2")
        x = np.array([0.9, -0.7])
        coeffs = build_kernel(4.0).coeffs
        rng = np.random.default_rng(12)
        c = p.params[1]
        d3 = c * np.sinh(x - p.x_star)
        biases = [mc_bias(p.f, p.grad(x), x, coeffs, h, 200_000, rng, d3_diag=d3)[0]
                  for h in self.HS]
        slope = fit_loglog_slope(self.HS, biases)
        assert slope >= 4.0 - 1.5
