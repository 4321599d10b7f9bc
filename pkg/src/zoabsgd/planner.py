"""Parameter planner: smoothing radius, iteration budget and noise ceiling.

Four regimes split on how the batch size B compares with 4 d kappa (the
growth constant of the kernel estimator):

    B = 1            h ~ (eps sqrt(mu))^(1/2)        N ~ sqrt(d^2 L / mu) log(1/eps)
    1 < B < 4 d k    h ~ (eps sqrt(mu))^(1/2)        N ~ sqrt(d^2 L / (B^2 mu)) log(1/eps)
    B = 4 d k        h ~ (eps sqrt(mu))^(1/2)        N ~ sqrt(L / mu) log(1/eps)
    B > 4 d k        h ~ (eps sqrt(mu))^(1/(2(b-1))) N ~ sqrt(L / mu) log(1/eps)

The tolerable noise level is eps sqrt(mu) / sqrt(d) in the first three
regimes and (eps sqrt(mu))^(beta/(2(beta-1))) sqrt(B) / d when
overbatching; estimator evaluations N * B stay constant across the first
three regimes.  ``batch_for_noise`` inverts the last formula: the batch
size needed to tolerate a given noise level.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ParameterError
from .kernels import build_kernel

__all__ = ["Plan", "plan", "batch_for_noise", "batch_threshold"]

REGIME_B_EQ_1 = "B_eq_1"
REGIME_B_LT = "B_lt_4dk"
REGIME_B_EQ = "B_eq_4dk"
REGIME_B_GT = "B_gt_4dk"


@dataclass(frozen=True)
class Plan:
    """Planned run parameters for one (problem, accuracy, batch) choice."""

    regime: str
    h: float
    n_iters: int
    t_evals: int            # estimator evaluations, N * B
    t_oracle_calls: int     # physical function evaluations, 2 N B
    delta_max: float
    kappa: float
    kappa_beta: float
    rho: float              # 4 d kappa
    rho_tilde: float
    batch_threshold: int    # round(4 d kappa)
    beta: float
    d: int
    mu: float
    L: float
    eps: float
    B: int
    c_h: float
    initial_gap: float

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in (
            "regime", "h", "n_iters", "t_evals", "t_oracle_calls", "delta_max",
            "kappa", "kappa_beta", "rho", "rho_tilde", "batch_threshold",
            "beta", "d", "mu", "L", "eps", "B", "c_h", "initial_gap")}


def batch_threshold(beta: float, d: int) -> int:
    """round(4 d kappa) for the order-``beta`` kernel."""
    return max(1, round(4.0 * d * build_kernel(beta).kappa))


def plan(beta: float, d: int, mu: float, L: float, eps: float, B: int,
         c_h: float = 1.0, initial_gap: float = 1.0) -> Plan:
    """Select regime, smoothing parameter, iteration count and noise ceiling.

    ``c_h`` scales the smoothing parameter (the theory fixes only its
    scaling in eps and mu); ``initial_gap`` is the f-gap estimate entering
    the logarithmic factor.
    """
    if eps <= 0:
        raise ParameterError(f"target accuracy must be > 0, got {eps}")
    if mu <= 0 or L < mu:
        raise ParameterError(f"need 0 < mu <= L, got mu={mu}, L={L}")
    if int(B) < 1:
        raise ParameterError(f"batch size must be >= 1, got {B}")
    if d < 1:
        raise ParameterError(f"dimension must be >= 1, got {d}")
    if c_h <= 0:
        raise ParameterError(f"c_h must be > 0, got {c_h}")
    B = int(B)
    kern = build_kernel(beta)
    rho = 4.0 * d * kern.kappa
    thresh = max(1, round(rho))
    if B > thresh:
        regime = REGIME_B_GT
        h = c_h * (eps * math.sqrt(mu)) ** (1.0 / (2.0 * (beta - 1.0)))
        delta_max = (eps * math.sqrt(mu)) ** (beta / (2.0 * (beta - 1.0))) \
            * math.sqrt(B) / d
    else:
        regime = REGIME_B_EQ if B == thresh else (REGIME_B_EQ_1 if B == 1 else REGIME_B_LT)
        h = c_h * math.sqrt(eps * math.sqrt(mu))
        delta_max = eps * math.sqrt(mu) / math.sqrt(d)
    rho_tilde = max(1.0, rho / B)
    log_factor = max(1.0, math.log(max(initial_gap, eps * math.e) / eps))
    n_iters = max(1, math.ceil(math.sqrt(rho_tilde**2 * L / mu) * log_factor))
    return Plan(
        regime=regime, h=h, n_iters=n_iters, t_evals=n_iters * B,
        t_oracle_calls=2 * n_iters * B, delta_max=delta_max,
        kappa=kern.kappa, kappa_beta=kern.kappa_beta, rho=rho,
        rho_tilde=rho_tilde, batch_threshold=thresh,
        beta=float(beta), d=int(d), mu=float(mu), L=float(L), eps=float(eps),
        B=B, c_h=float(c_h), initial_gap=float(initial_gap),
    )


def batch_for_noise(beta: float, d: int, mu: float, eps: float, delta: float) -> int:
    """Smallest planned batch size whose noise ceiling covers ``delta``.

    B = max(4 d kappa, ceil(kappa d^2 delta^2 / (eps sqrt(mu))^(beta/(beta-1)))).
    Plans built with this B satisfy delta_max >= delta.
    """
    if delta <= 0:
        raise ParameterError(f"noise level must be > 0, got {delta}")
    if eps <= 0 or mu <= 0:
        raise ParameterError("eps and mu must be > 0")
    kern = build_kernel(beta)
    thresh = max(1, round(4.0 * d * kern.kappa))
    if delta <= eps * math.sqrt(mu) / math.sqrt(d):
        return thresh  # covered without overbatching
    needed = kern.kappa * d**2 * delta**2 / (eps * math.sqrt(mu)) ** (beta / (beta - 1.0))
    # Force the overbatching regime: at B = thresh the ceiling reverts to the
    # sub-threshold formula, which no longer covers delta.
    return max(thresh + 1, math.ceil(needed))
