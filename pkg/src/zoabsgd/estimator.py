"""Two-point kernel gradient estimator and its moment certification.

The estimate at x from direction e (unit sphere), radius r in [-1, 1] and
smoothing parameter h is

    g = d * (F(x + h r e) - F(x - h r e)) / (2 h) * K(r) * e,

with F a noisy value oracle queried twice with independent noise draws.
Averaging B independent such estimates gives the batched form.  Expected
moments obey: bias <= kappa_beta * L_beta * h^(beta-1) and
E||g||^2 <= 4 d kappa ||grad f||^2 + 4 d kappa L^2 h^2 + kappa d^2 delta^2 / h^2,
which ``certify_moments`` checks empirically against Monte-Carlo estimates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, UnsupportedCertificationError
from .kernels import KernelSpec, eval_kernel
from .oracles import NoiseModel, ZeroOrderOracle, zo_eval
from .problems import Problem
from .sampling import RandomStream

__all__ = [
    "EstimatorConfig",
    "MomentReport",
    "kernel_grad",
    "batched_grad",
    "certify_moments",
]


@dataclass(frozen=True)
class EstimatorConfig:
    """Smoothing parameter, batch size and kernel for one estimator."""

    h: float
    B: int
    kernel: KernelSpec

    def __post_init__(self):
        if self.h <= 0:
            raise ParameterError(f"smoothing parameter must be > 0, got {self.h}")
        if int(self.B) < 1:
            raise ParameterError(f"batch size must be >= 1, got {self.B}")


@dataclass(frozen=True)
class MomentReport:
    """Monte-Carlo bias/second-moment estimates next to their closed-form bounds."""

    bias_norm: float
    second_moment: float
    bound_bias: float
    bound_second: float
    n_samples: int
    bias_stderr: float
    second_stderr: float

    def to_dict(self) -> dict:
        return {
            "bias_norm": self.bias_norm,
            "second_moment": self.second_moment,
            "bound_bias": self.bound_bias,
            "bound_second": self.bound_second,
            "n_samples": self.n_samples,
            "bias_stderr": self.bias_stderr,
            "second_stderr": self.second_stderr,
        }


def kernel_grad(problem: Problem, noise: NoiseModel, cfg: EstimatorConfig,
                x, e, r: float, stream: RandomStream) -> np.ndarray:
    """Single two-point estimate; ``stream`` supplies the two noise draws."""
    if cfg.h == 0:
        raise ParameterError("smoothing parameter h must be non-zero")
    e = np.asarray(e, dtype=float)
    if abs(float(np.linalg.norm(e)) - 1.0) > 1e-9:
        raise ParameterError("direction e must be a unit vector")
    if abs(r) > 1.0:
        raise ParameterError("radius r must lie in [-1, 1]")
    x = np.asarray(x, dtype=float)
    d = problem.dim
    h = cfg.h
    f_plus = zo_eval(problem, noise, x + h * r * e, stream)
    f_minus = zo_eval(problem, noise, x - h * r * e, stream)
    k_val = eval_kernel(cfg.kernel, r)
    return d * (f_plus - f_minus) / (2.0 * h) * k_val * e


def batched_grad(problem: Problem, noise: NoiseModel, cfg: EstimatorConfig,
                 x, stream: RandomStream, *,
                 oracle: ZeroOrderOracle | None = None) -> np.ndarray:
    """Mean of B independent two-point estimates.

    Directions and radii come from ``stream``; the 2B noise draws come from
    its cached noise partner so they stay independent of the geometry.  When
    ``oracle`` is given, function values are routed through it so oracle-call
    accounting sees exactly 2B evaluations.
    """
    g, _ = _sample_batch(problem, noise, cfg, np.asarray(x, dtype=float),
                         stream, cfg.B, oracle=oracle)
    return g.mean(axis=0)


def certify_moments(problem: Problem, noise: NoiseModel, cfg: EstimatorConfig,
                    x, n_samples: int, stream: RandomStream | None = None) -> MomentReport:
    """Monte-Carlo bias and second moment with their closed-form bounds.

    The bias bound uses the Hoelder constant at the kernel's order; the
    second-moment bound uses the gradient-Lipschitz constant L.  Standard
    errors let callers keep Monte-Carlo slack explicit.
    """
    if n_samples < 10_000:
        raise ParameterError("certification needs at least 1e4 samples")
    if problem.grad is None:
        raise UnsupportedCertificationError("problem lacks an analytic gradient")
    x = np.asarray(x, dtype=float)
    if stream is None:
        stream = RandomStream(0, 0)
    d = problem.dim
    grad = np.asarray(problem.grad(x), dtype=float)

    total = np.zeros(d)
    total_sq = np.zeros(d)
    total_norm2 = 0.0
    total_norm4 = 0.0
    done = 0
    chunk = 200_000
    while done < n_samples:
        n = min(chunk, n_samples - done)
        g, _ = _sample_batch(problem, noise, cfg, x, stream, n)
        total += g.sum(axis=0)
        total_sq += (g * g).sum(axis=0)
        norms2 = np.sum(g * g, axis=1)
        total_norm2 += norms2.sum()
        total_norm4 += (norms2 * norms2).sum()
        done += n

    mean = total / done
    coord_var = np.maximum(total_sq / done - mean * mean, 0.0)
    bias = mean - grad
    bias_norm = float(np.linalg.norm(bias))
    bias_stderr = float(math.sqrt(coord_var.sum() / done))
    second = total_norm2 / done
    second_var = max(total_norm4 / done - second * second, 0.0)
    second_stderr = float(math.sqrt(second_var / done))

    kern = cfg.kernel
    l_beta = problem.holder_constant(kern.beta)
    bound_bias = kern.kappa_beta * l_beta * cfg.h ** (kern.beta - 1.0)
    grad_sq = float(grad @ grad)
    bound_second = (4.0 * d * kern.kappa * grad_sq
                    + 4.0 * d * kern.kappa * problem.L**2 * cfg.h**2
                    + kern.kappa * d**2 * noise.delta**2 / cfg.h**2)
    return MomentReport(
        bias_norm=bias_norm,
        second_moment=float(second),
        bound_bias=float(bound_bias),
        bound_second=float(bound_second),
        n_samples=done,
        bias_stderr=bias_stderr,
        second_stderr=second_stderr,
    )


def _sample_batch(problem, noise, cfg, x, stream, n, *, oracle=None):
    """n independent estimates as rows; returns (g, directions)."""
    d = problem.dim
    h = cfg.h
    e = stream.sphere(d, size=n)
    r = stream.radius(size=n)
    x_plus = x + h * r[:, None] * e
    x_minus = x - h * r[:, None] * e
    partner = stream.noise_partner()
    if oracle is not None:
        f_plus = oracle.value_batch(x_plus, partner)
        f_minus = oracle.value_batch(x_minus, partner)
    else:
        xi = noise.draw(partner, size=(2, n))
        f_plus = np.asarray(problem.f(x_plus), dtype=float) + xi[0]
        f_minus = np.asarray(problem.f(x_minus), dtype=float) + xi[1]
    k_vals = eval_kernel(cfg.kernel, r)
    scale = d * (f_plus - f_minus) / (2.0 * h) * k_vals
    return scale[:, None] * e, e
