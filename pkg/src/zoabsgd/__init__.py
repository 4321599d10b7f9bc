"""Zero-order accelerated batched SGD with kernel gradient smoothing.

Derivative-free minimization of strongly convex objectives through a noisy
value oracle: gradients are estimated from paired evaluations at
x +- h r e weighted by a higher-order smoothing kernel, batched, and fed
to an accelerated three-sequence update.  A planner picks the smoothing
radius, iteration budget and tolerable noise level for any batch-size
regime, and the run harness verifies the convergence, error-floor and
noise-threshold behaviour empirically.
"""

__version__ = "0.1.0"

from .agd import AGDParams, AGDState, Trace, agd_step, alpha_k, initial_state, make_params, run_agd
from .estimator import EstimatorConfig, MomentReport, batched_grad, certify_moments, kernel_grad
from .kernels import KernelSpec, build_kernel, eval_kernel, kernel_moment
from .oracles import BiasedGradOracle, NoiseModel, ZeroOrderOracle, zo_eval
from .planner import Plan, batch_for_noise, batch_threshold, plan
from .problems import Problem, get_problem, make_quadratic, make_quartic_mix, make_smooth_mix
from .runner import RunConfig, RunSummary, rate_study, run_zoabsgd, sweep_batch, sweep_noise
from .sampling import RandomStream, sample_radius, sample_sphere

__all__ = [
    "__version__",
    "AGDParams", "AGDState", "Trace", "agd_step", "alpha_k", "initial_state",
    "make_params", "run_agd",
    "EstimatorConfig", "MomentReport", "batched_grad", "certify_moments", "kernel_grad",
    "KernelSpec", "build_kernel", "eval_kernel", "kernel_moment",
    "BiasedGradOracle", "NoiseModel", "ZeroOrderOracle", "zo_eval",
    "Plan", "batch_for_noise", "batch_threshold", "plan",
    "Problem", "get_problem", "make_quadratic", "make_quartic_mix", "make_smooth_mix",
    "RunConfig", "RunSummary", "rate_study", "run_zoabsgd", "sweep_batch", "sweep_noise",
    "RandomStream", "sample_radius", "sample_sphere",
]
