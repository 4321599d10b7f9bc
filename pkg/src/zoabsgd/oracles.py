"""Function-value and synthetic gradient oracles.

``ZeroOrderOracle`` returns noisy objective values f(x) + xi where the
noise second moment is bounded by delta^2; it is the only access the
derivative-free algorithm gets.  ``BiasedGradOracle`` is a synthetic
first-order oracle (analytic gradient plus a bounded deterministic bias
and zero-mean noise) used to validate the accelerated core in isolation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import EvaluationError, ParameterError
from .problems import Problem
from .sampling import RandomStream

__all__ = ["NoiseModel", "ZeroOrderOracle", "zo_eval", "BiasedGradOracle"]

_KINDS = ("none", "uniform", "gaussian-clipped", "constant")


@dataclass(frozen=True)
class NoiseModel:
    """Additive value-noise law with E[xi^2] <= delta^2.

    Kinds:
        none: exact values.
        uniform: Uniform[-sqrt(3) delta, sqrt(3) delta]; saturates the
            second-moment bound exactly, making noise-threshold sweeps sharp.
        gaussian-clipped: delta * clip(N(0,1), +-3); second moment < delta^2.
        constant: xi = delta on every call.  The mean is not zero, which the
            two-point difference must cancel; kept for adversarial-mean tests.
    """

    kind: str = "uniform"
    delta: float = 0.0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ParameterError(f"noise kind must be one of {_KINDS}, got {self.kind!r}")
        if self.delta < 0:
            raise ParameterError(f"noise level must be >= 0, got {self.delta}")

    def draw(self, stream: RandomStream, size=None):
        if self.kind == "none" or self.delta == 0.0:
            return 0.0 if size is None else np.zeros(size)
        if self.kind == "uniform":
            half = math.sqrt(3.0) * self.delta
            return stream.uniform(-half, half, size)
        if self.kind == "gaussian-clipped":
            return self.delta * np.clip(stream.standard_normal(size), -3.0, 3.0)
        return self.delta if size is None else np.full(size, self.delta)


class ZeroOrderOracle:
    """Noisy function-value access with per-run call accounting."""

    def __init__(self, problem: Problem, noise: NoiseModel):
        self.problem = problem
        self.noise = noise
        self.calls = 0

    def value(self, x, stream: RandomStream) -> float:
        self.calls += 1
        fx = float(self.problem.f(x))
        if not math.isfinite(fx):
            raise EvaluationError("objective returned a non-finite value", x=np.array(x))
        return fx + float(np.asarray(self.noise.draw(stream)))

    def value_batch(self, X, stream: RandomStream) -> np.ndarray:
        """Values at the rows of X, one independent noise draw per row."""
        X = np.asarray(X, dtype=float)
        self.calls += X.shape[0]
        fx = np.asarray(self.problem.f(X), dtype=float)
        if not np.all(np.isfinite(fx)):
            bad = X[~np.isfinite(fx)][0]
            raise EvaluationError("objective returned a non-finite value", x=bad)
        return fx + self.noise.draw(stream, size=X.shape[0])


def zo_eval(problem: Problem, noise: NoiseModel, x, stream: RandomStream) -> float:
    """One noisy objective value; stateless convenience over ZeroOrderOracle."""
    fx = float(problem.f(x))
    if not math.isfinite(fx):
        raise EvaluationError("objective returned a non-finite value", x=np.array(x))
    return fx + float(np.asarray(noise.draw(stream)))


@dataclass
class BiasedGradOracle:
    """Analytic gradient plus bounded deterministic bias and zero-mean noise.

    Returns grad f(x) + bias_fn(x) + zeta with E||zeta||^2 = noise_sigma2.
    ``strong_growth_constants`` reports (rho, sigma^2) under which
    E||g||^2 <= rho ||grad f||^2 + sigma^2 holds: (1, sigma2) when the bias
    is zero, else (2, 2 delta^2 + sigma2) via the squared-sum inequality.
    """

    problem: Problem
    delta_bias: float = 0.0
    noise_sigma2: float = 0.0
    bias_fn: Callable[[np.ndarray], np.ndarray] | None = None
    calls: int = field(default=0, init=False)

    def __post_init__(self):
        if self.delta_bias < 0 or self.noise_sigma2 < 0:
            raise ParameterError("delta_bias and noise_sigma2 must be >= 0")
        if self.bias_fn is None and self.delta_bias > 0:
            d = self.problem.dim
            e1 = np.zeros(d)
            e1[0] = self.delta_bias
            self.bias_fn = lambda x: e1

    def __call__(self, x, stream: RandomStream) -> np.ndarray:
        self.calls += 1
        g = np.asarray(self.problem.grad(x), dtype=float).copy()
        if self.bias_fn is not None:
            g += self.bias_fn(x)
        if self.noise_sigma2 > 0:
            scale = math.sqrt(self.noise_sigma2 / self.problem.dim)
            g += scale * stream.standard_normal(self.problem.dim)
        return g

    def strong_growth_constants(self) -> tuple[float, float]:
        if self.delta_bias == 0 and self.bias_fn is None:
            return 1.0, self.noise_sigma2
        return 2.0, 2.0 * self.delta_bias**2 + self.noise_sigma2
