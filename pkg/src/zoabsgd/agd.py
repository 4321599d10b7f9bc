"""Accelerated stochastic gradient core for biased, batched oracles.

Three sequences are maintained:

    y_k = alpha_k z_k + (1 - alpha_k) x_k
    x_{k+1} = y_k - eta g_k
    z_{k+1} = beta_k z_k + (1 - beta_k) y_k - gamma eta g_k

with the constant-gamma schedule for a mu-strongly convex, L-smooth
objective under the strong growth condition E||g||^2 <= rho ||grad f||^2
+ sigma^2 and batch size B:

    rho_tilde = max(1, rho / B)
    eta       <= 1 / (2 rho_tilde L)
    gamma     = 1 / sqrt(2 mu eta rho_tilde)
    beta_k    = 1 - sqrt(mu eta / (2 rho_tilde))
    b_{k+1}   = b_k / sqrt(beta_k),  b_0 = sqrt(2 mu)
    a_{k+1}   = gamma sqrt(eta rho_tilde) b_{k+1},  a_0 = 1
    alpha_k   = gamma beta_k b_{k+1}^2 eta / (gamma beta_k b_{k+1}^2 eta + 2 a_k^2)

b_k grows geometrically, so the scalar sequences are kept in log space.
With these choices alpha_k is the constant 1 / (1 + 2 rho_tilde gamma).
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .errors import DivergenceError, ParameterError
from .problems import Problem

__all__ = ["AGDParams", "AGDState", "Trace", "make_params", "alpha_k",
           "initial_state", "agd_step", "run_agd"]


@dataclass(frozen=True)
class AGDParams:
    """Constant-gamma schedule constants."""

    mu: float
    L: float
    rho: float
    B: int
    rho_tilde: float
    eta: float
    gamma: float
    beta_k: float
    a0: float = 1.0
    b0: float = 0.0

    @property
    def alpha(self) -> float:
        """alpha_k is k-independent under the constant-gamma schedule."""
        return 1.0 / (1.0 + 2.0 * self.rho_tilde * self.gamma)

    @property
    def contraction(self) -> float:
        """Per-iteration factor 1 - sqrt(mu eta / (2 rho_tilde))."""
        return self.beta_k

    def to_dict(self) -> dict:
        return {
            "mu": self.mu, "L": self.L, "rho": self.rho, "B": self.B,
            "rho_tilde": self.rho_tilde, "eta": self.eta, "gamma": self.gamma,
            "beta_k": self.beta_k, "alpha": self.alpha, "a0": self.a0, "b0": self.b0,
        }


def make_params(mu: float, L: float, rho: float, B: int,
                eta_override: float | None = None) -> AGDParams:
    """Schedule constants for given problem constants and batch size.

    eta defaults to its admissible cap 1 / (2 rho_tilde L); an override is
    clipped to that cap.
    """
    if mu <= 0:
        raise ParameterError(f"mu must be > 0, got {mu}")
    if L < mu:
        raise ParameterError(f"L must be >= mu, got L={L}, mu={mu}")
    if rho < 0:
        raise ParameterError(f"rho must be >= 0, got {rho}")
    if int(B) < 1:
        raise ParameterError(f"batch size must be >= 1, got {B}")
    rho_tilde = max(1.0, rho / B)
    eta_cap = 1.0 / (2.0 * rho_tilde * L)
    if eta_override is None:
        eta = eta_cap
    else:
        if eta_override <= 0:
            raise ParameterError(f"eta override must be > 0, got {eta_override}")
        eta = min(eta_override, eta_cap)
    gamma = 1.0 / math.sqrt(2.0 * mu * eta * rho_tilde)
    beta_k = 1.0 - math.sqrt(mu * eta / (2.0 * rho_tilde))
    return AGDParams(mu=mu, L=L, rho=rho, B=int(B), rho_tilde=rho_tilde,
                     eta=eta, gamma=gamma, beta_k=beta_k,
                     a0=1.0, b0=math.sqrt(2.0 * mu))


def alpha_k(params: AGDParams, a_k: float, b_k1: float) -> float:
    """Mixing weight gamma beta b_{k+1}^2 eta / (gamma beta b_{k+1}^2 eta + 2 a_k^2)."""
    if a_k <= 0 or b_k1 <= 0:
        raise ParameterError("sequence values must be positive")
    num = params.gamma * params.beta_k * b_k1 * b_k1 * params.eta
    return num / (num + 2.0 * a_k * a_k)


@dataclass(frozen=True)
class AGDState:
    """Iterate triple and the (log-space) scalar sequences."""

    k: int
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    log_a: float
    log_b: float

    @property
    def a_k(self) -> float:
        return math.exp(self.log_a)

    @property
    def b_k(self) -> float:
        return math.exp(self.log_b)


def initial_state(params: AGDParams, x0) -> AGDState:
    x0 = np.asarray(x0, dtype=float)
    return AGDState(k=0, x=x0.copy(), y=x0.copy(), z=x0.copy(),
                    log_a=math.log(params.a0), log_b=math.log(params.b0))


def agd_step(state: AGDState, params: AGDParams, g) -> AGDState:
    """One three-sequence update consuming the gradient estimate ``g``."""
    g = np.asarray(g, dtype=float)
    if not np.all(np.isfinite(g)):
        raise DivergenceError("non-finite gradient estimate", trace=None)
    log_b_next = state.log_b - 0.5 * math.log(params.beta_k)
    # alpha in log space: 1 / (1 + 2 a_k^2 / (gamma beta b_{k+1}^2 eta))
    log_ratio = (math.log(2.0) + 2.0 * state.log_a
                 - math.log(params.gamma * params.beta_k * params.eta)
                 - 2.0 * log_b_next)
    alpha = 1.0 / (1.0 + math.exp(log_ratio))
    y = alpha * state.z + (1.0 - alpha) * state.x
    x_next = y - params.eta * g
    z_next = params.beta_k * state.z + (1.0 - params.beta_k) * y \
        - params.gamma * params.eta * g
    log_a_next = math.log(params.gamma * math.sqrt(params.eta * params.rho_tilde)) \
        + log_b_next
    return AGDState(k=state.k + 1, x=x_next, y=y, z=z_next,
                    log_a=log_a_next, log_b=log_b_next)


@dataclass
class Trace:
    """Per-iteration diagnostics for one run."""

    k: np.ndarray
    f_gap: np.ndarray
    dist_to_opt: np.ndarray
    oracle_calls: np.ndarray
    wall_ns: np.ndarray

    def __len__(self):
        return len(self.k)

    def plateau(self, fraction: float = 0.1) -> float:
        """Median f-gap over the trailing fraction of the trace."""
        n = max(1, int(len(self.f_gap) * fraction))
        return float(np.median(self.f_gap[-n:]))


def run_agd(problem: Problem, grad_fn, params: AGDParams, n_iters: int, x0,
            *, calls_per_iter: int = 0, guard_factor: float = 1e6,
            record_timing: bool = False):
    """Run ``n_iters`` steps pulling one gradient estimate per step.

    ``grad_fn(x, k)`` supplies the estimate for iteration k at the current
    iterate.  Divergence (non-finite iterates, or distance to the optimum
    beyond ``guard_factor`` times the initial distance) raises
    DivergenceError carrying the partial trace.  Returns (x_N, Trace).
    """
    if n_iters < 1:
        raise ParameterError(f"iteration count must be >= 1, got {n_iters}")
    state = initial_state(params, x0)
    x_star = problem.x_star
    r0 = float(np.linalg.norm(state.x - x_star))
    guard = guard_factor * max(r0, 1.0)
    ks = np.arange(1, n_iters + 1)
    f_gap = np.empty(n_iters)
    dist = np.empty(n_iters)
    calls = np.empty(n_iters, dtype=np.int64)
    wall = np.zeros(n_iters, dtype=np.int64)
    t0 = time.perf_counter_ns()
    for k in range(n_iters):
        g = grad_fn(state.x, k)
        try:
            state = agd_step(state, params, g)
        except DivergenceError as exc:
            exc.trace = _partial_trace(ks, f_gap, dist, calls, wall, k)
            raise
        f_gap[k] = problem.f_gap(state.x)
        dist[k] = float(np.linalg.norm(state.x - x_star))
        calls[k] = (k + 1) * calls_per_iter
        if record_timing:
            wall[k] = time.perf_counter_ns() - t0
        if not math.isfinite(dist[k]) or dist[k] > guard:
            raise DivergenceError(
                f"iterate left the safety ball at step {k + 1}",
                trace=_partial_trace(ks, f_gap, dist, calls, wall, k + 1),
            )
    return state.x, Trace(k=ks, f_gap=f_gap, dist_to_opt=dist,
                          oracle_calls=calls, wall_ns=wall)


def _partial_trace(ks, f_gap, dist, calls, wall, n):
    return Trace(k=ks[:n], f_gap=f_gap[:n], dist_to_opt=dist[:n],
                 oracle_calls=calls[:n], wall_ns=wall[:n])
