"""Run harness: single runs, batch/noise sweeps and rate studies.

A run is fully determined by its ``RunConfig``: the planner picks the
smoothing parameter and iteration budget for the configured accuracy and
batch size, the schedule constants come from the problem's certified
(mu, L) with growth constant rho = 4 d kappa, and every random draw is a
function of (seed, iteration index).  Traces are written as CSV with the
full config embedded in comment headers; summaries as JSON.  Sweep rows
are appended atomically so an interrupted sweep never corrupts finished
rows.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import asdict, dataclass, replace
from pathlib import Path

import numpy as np

from . import __version__
from .agd import Trace, make_params
from .backend import active_backend, get_chunk_runner
from .errors import ParameterError
from .kernels import build_kernel
from .oracles import NoiseModel
from .planner import Plan, batch_threshold, plan
from .problems import get_problem
from .sampling import NOISE_STREAM_OFFSET, RandomStream

__all__ = ["RunConfig", "RunSummary", "run_zoabsgd", "sweep_batch",
           "sweep_noise", "rate_study", "iterations_to_eps"]

TRACE_FIELDS = ("k", "f_gap", "dist_to_opt", "oracle_calls", "wall_ns")


@dataclass(frozen=True)
class RunConfig:
    """Everything needed to reproduce one run."""

    problem: str = "quadratic-d2-cond10"
    beta: float = 2.0
    B: int = 0                      # 0 selects the planner threshold 4 d kappa
    delta: float = 0.0
    eps: float = 1e-4
    seed: int = 0
    noise_kind: str = "uniform"
    n_override: int | None = None
    h_override: float | None = None
    c_h: float = 1.0
    x0_offset: float = 1.0          # distance of x0 from the minimizer
    guard_factor: float = 1e6
    chunk_size: int = 256
    record_timing: bool = False     # wall_ns stays 0 (byte-reproducible traces) unless set
    out: str | None = None

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ParameterError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)


@dataclass(frozen=True)
class RunSummary:
    """Outcome of one run, serialized next to its trace."""

    config: dict
    plan: dict
    iterations: int
    estimator_evals: int            # N * B
    oracle_calls: int               # 2 N B physical evaluations
    final_f_gap: float
    final_dist: float
    plateau: float
    diverged: bool
    wall_time_s: float
    backend: str
    version: str = __version__

    def to_dict(self) -> dict:
        return asdict(self)


def run_zoabsgd(cfg: RunConfig, return_trace: bool = False):
    """Execute one planned run; returns RunSummary (and the Trace if asked).

    Pipeline per iteration k: draw B unit directions and radii from stream
    (seed, k) and 2B noise values from stream (seed, noise offset + k),
    form the batched kernel estimate at x_k, then apply the three-sequence
    update.  Divergence stops the run early with the partial trace kept.
    """
    problem = get_problem(cfg.problem)
    d = problem.dim
    B = int(cfg.B) if cfg.B else batch_threshold(cfg.beta, d)
    if B < 1:
        raise ParameterError(f"batch size must be >= 1, got {B}")
    kern = build_kernel(cfg.beta)
    x0 = problem.x_star + cfg.x0_offset * np.ones(d) / math.sqrt(d)
    gap0 = problem.f_gap(x0)
    the_plan = plan(cfg.beta, d, problem.mu, problem.L, cfg.eps, B,
                    c_h=cfg.c_h, initial_gap=gap0)
    h = cfg.h_override if cfg.h_override else the_plan.h
    n_iters = cfg.n_override if cfg.n_override else the_plan.n_iters
    if n_iters < 1:
        raise ParameterError(f"iteration count must be >= 1, got {n_iters}")
    params = make_params(problem.mu, problem.L, rho=the_plan.rho, B=B)
    noise = NoiseModel(cfg.noise_kind, cfg.delta)

    x = x0.copy()
    y = x0.copy()
    z = x0.copy()
    f_gap = np.empty(n_iters)
    dist = np.empty(n_iters)
    wall = np.zeros(n_iters, dtype=np.int64)
    guard = cfg.guard_factor * max(float(np.linalg.norm(x0 - problem.x_star)), 1.0)
    runner = get_chunk_runner()
    coeffs = np.ascontiguousarray(kern.coeffs)

    done = 0
    diverged = False
    t0 = time.perf_counter_ns()
    while done < n_iters and not diverged:
        n = min(cfg.chunk_size, n_iters - done)
        E = np.empty((n, B, d))
        R = np.empty((n, B))
        XI = np.empty((n, 2, B))
        for j in range(n):
            k = done + j
            s = RandomStream(cfg.seed, k)
            E[j] = s.sphere(d, size=B)
            R[j] = s.radius(size=B)
            XI[j] = noise.draw(RandomStream(cfg.seed, NOISE_STREAM_OFFSET + k),
                               size=(2, B))
        n_done, div = runner(problem.kind, problem.params, problem.x_star,
                             problem.f_star, x, y, z,
                             params.eta, params.gamma, params.beta_k, params.alpha,
                             h, coeffs, E, R, XI, guard,
                             f_gap[done:done + n], dist[done:done + n])
        done += n_done
        diverged = bool(div)
        if cfg.record_timing:
            wall[done - n_done:done] = time.perf_counter_ns() - t0
    wall_time_s = (time.perf_counter_ns() - t0) / 1e9

    trace = Trace(k=np.arange(1, done + 1), f_gap=f_gap[:done],
                  dist_to_opt=dist[:done],
                  oracle_calls=2 * B * np.arange(1, done + 1, dtype=np.int64),
                  wall_ns=wall[:done])
    summary = RunSummary(
        config=cfg.to_dict(), plan=the_plan.to_dict(),
        iterations=done, estimator_evals=done * B, oracle_calls=2 * done * B,
        final_f_gap=float(trace.f_gap[-1]), final_dist=float(trace.dist_to_opt[-1]),
        plateau=trace.plateau(), diverged=diverged,
        wall_time_s=wall_time_s, backend=active_backend(),
    )
    if cfg.out:
        write_trace(Path(f"{cfg.out}.trace.csv"), cfg, params, the_plan, trace)
        write_summary(Path(f"{cfg.out}.summary.json"), summary)
    if return_trace:
        return summary, trace
    return summary


def write_trace(path: Path, cfg: RunConfig, params, the_plan: Plan, trace: Trace):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        fh.write(f"# zoabsgd-version: {__version__}\n")
        fh.write(f"# config: {json.dumps(cfg.to_dict(), sort_keys=True)}\n")
        fh.write(f"# params: {json.dumps(params.to_dict(), sort_keys=True)}\n")
        fh.write(f"# plan: {json.dumps(the_plan.to_dict(), sort_keys=True)}\n")
        fh.write(f"# seed: {cfg.seed}\n")
        fh.write(",".join(TRACE_FIELDS) + "\n")
        for i in range(len(trace)):
            fh.write(f"{trace.k[i]},{trace.f_gap[i]!r},{trace.dist_to_opt[i]!r},"
                     f"{trace.oracle_calls[i]},{trace.wall_ns[i]}\n")


def write_summary(path: Path, summary: RunSummary):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(summary.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def append_rows(path: Path, fieldnames, rows, meta: dict):
    """Append table rows with flush-per-row so prior rows survive a crash."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fresh = not path.exists()
    with open(path, "a") as fh:
        if fresh:
            fh.write(f"# zoabsgd-version: {__version__}\n")
            for key, value in meta.items():
                fh.write(f"# {key}: {json.dumps(value, sort_keys=True)}\n")
            fh.write(",".join(fieldnames) + "\n")
            fh.flush()
        for row in rows:
            fh.write(",".join(repr(row[name]) if isinstance(row[name], float)
                              else str(row[name]) for name in fieldnames) + "\n")
            fh.flush()


def iterations_to_eps(trace: Trace, eps: float):
    """First iteration whose f-gap is <= eps, or None."""
    hits = np.nonzero(trace.f_gap <= eps)[0]
    return int(hits[0] + 1) if len(hits) else None


def _seeded(cfg: RunConfig, seed: int, **changes) -> RunConfig:
    return replace(cfg, seed=seed, out=None, **changes)


def sweep_batch(cfg: RunConfig, b_values, seeds=tuple(range(10)),
                n_override: int | None = None, out: str | None = None):
    """Plateau level per batch size at fixed noise; rows (B, plateau, N, T).

    Each run goes to 2x the planned iteration count unless overridden so the
    plateau (median of the trailing 10% of the trace) is an asymptote, not a
    transient.  The plateau reported per B is the median across seeds.
    """
    rows = []
    for b in b_values:
        if b < 1:
            raise ParameterError(f"batch sizes must be >= 1, got {b}")
        n_run = n_override or 2 * run_zoabsgd_plan_iters(replace(cfg, B=int(b)))
        plateaus = []
        t_used = 0
        for seed in seeds:
            run_cfg = _seeded(cfg, seed, B=int(b), n_override=n_run)
            summary, trace = run_zoabsgd(run_cfg, return_trace=True)
            plateaus.append(trace.plateau() if not summary.diverged else math.inf)
            t_used = summary.estimator_evals
        rows.append({"B": int(b), "plateau": float(np.median(plateaus)),
                     "n_iters": n_run, "t_evals": t_used, "seeds": len(list(seeds))})
    if out:
        append_rows(Path(out), ("B", "plateau", "n_iters", "t_evals", "seeds"),
                    rows, {"config": cfg.to_dict(), "kind": "sweep-batch"})
    return rows


def sweep_noise(cfg: RunConfig, deltas, seeds=tuple(range(20)),
                n_override: int | None = None, out: str | None = None):
    """Success rate and plateau per noise level; rows (delta, success, plateau).

    Success means the final iterate's f-gap is <= the configured eps; a
    diverged run counts as failure.  Runs go to 2x the planned iteration
    count unless overridden, so failures measure the noise floor rather
    than an unfinished transient.
    """
    deltas = list(deltas)
    if any(dv < 0 for dv in deltas) or deltas != sorted(deltas):
        raise ParameterError("noise levels must be non-negative and ascending")
    rows = []
    for delta in deltas:
        successes = 0
        plateaus = []
        for seed in seeds:
            run_cfg = _seeded(cfg, seed, delta=float(delta))
            base_plan_n = run_zoabsgd_plan_iters(run_cfg)
            run_cfg = replace(run_cfg, n_override=n_override or 2 * base_plan_n)
            summary, trace = run_zoabsgd(run_cfg, return_trace=True)
            ok = (not summary.diverged) and summary.final_f_gap <= cfg.eps
            successes += bool(ok)
            plateaus.append(trace.plateau() if not summary.diverged else math.inf)
        n_seeds = len(list(seeds))
        rows.append({"delta": float(delta), "success_rate": successes / n_seeds,
                     "plateau": float(np.median(plateaus)), "seeds": n_seeds})
    if out:
        append_rows(Path(out), ("delta", "success_rate", "plateau", "seeds"),
                    rows, {"config": cfg.to_dict(), "kind": "sweep-noise"})
    return rows


def run_zoabsgd_plan_iters(cfg: RunConfig) -> int:
    """Planned iteration count for a config without running it."""
    problem = get_problem(cfg.problem)
    B = int(cfg.B) if cfg.B else batch_threshold(cfg.beta, problem.dim)
    x0 = problem.x_star + cfg.x0_offset * np.ones(problem.dim) / math.sqrt(problem.dim)
    the_plan = plan(cfg.beta, problem.dim, problem.mu, problem.L, cfg.eps, B,
                    c_h=cfg.c_h, initial_gap=problem.f_gap(x0))
    return the_plan.n_iters


def rate_study(mode: str = "cond", conds=(10, 100, 1000), dims=(2, 4, 8),
               eps: float = 1e-6, beta: float = 2.0, seeds=tuple(range(5)),
               out: str | None = None):
    """Iteration-count scaling study.

    mode="cond": quadratics in d=2 with condition numbers ``conds`` at the
    batch threshold; fits log N against log sqrt(L/mu).
    mode="dim": identity-spectrum quadratics over ``dims`` at B=1; fits
    log N against log d and reports estimator evaluations next to the
    batch-threshold run's for the same dimension.
    """
    rows = []
    if mode == "cond":
        xs, ys = [], []
        for cond in conds:
            cfg = RunConfig(problem=f"quadratic-d2-cond{int(cond)}", beta=beta,
                            B=0, delta=0.0, eps=eps)
            n_med, t_evals = _median_iters_to_eps(cfg, seeds, eps)
            rows.append({"cond": int(cond), "n_iters": n_med, "t_evals": t_evals,
                         "seeds": len(list(seeds))})
            xs.append(0.5 * math.log(cond))
            ys.append(math.log(n_med))
        exponent = float(np.polyfit(xs, ys, 1)[0])
        fieldnames = ("cond", "n_iters", "t_evals", "seeds")
    elif mode == "dim":
        xs, ys = [], []
        for d in dims:
            cfg1 = RunConfig(problem=f"quadratic-d{int(d)}-cond1", beta=beta,
                             B=1, delta=0.0, eps=eps)
            n1, t1 = _median_iters_to_eps(cfg1, seeds, eps)
            cfgk = replace(cfg1, B=0)
            nk, tk = _median_iters_to_eps(cfgk, seeds, eps)
            rows.append({"d": int(d), "n_iters_b1": n1, "t_evals_b1": t1,
                         "n_iters_bk": nk, "t_evals_bk": tk,
                         "t_ratio": t1 / tk, "seeds": len(list(seeds))})
            xs.append(math.log(d))
            ys.append(math.log(n1))
        exponent = float(np.polyfit(xs, ys, 1)[0])
        fieldnames = ("d", "n_iters_b1", "t_evals_b1", "n_iters_bk",
                      "t_evals_bk", "t_ratio", "seeds")
    else:
        raise ParameterError(f"mode must be 'cond' or 'dim', got {mode!r}")
    if out:
        append_rows(Path(out), fieldnames, rows,
                    {"kind": f"rate-study-{mode}", "exponent": exponent, "eps": eps})
    return rows, exponent


def _median_iters_to_eps(cfg: RunConfig, seeds, eps: float):
    """Median iterations to reach eps over seeds, running 4x the plan."""
    plan_n = run_zoabsgd_plan_iters(cfg)
    iters = []
    b_used = None
    for seed in seeds:
        run_cfg = _seeded(cfg, seed, n_override=4 * plan_n)
        summary, trace = run_zoabsgd(run_cfg, return_trace=True)
        hit = iterations_to_eps(trace, eps)
        iters.append(hit if hit is not None else summary.iterations)
        b_used = summary.plan["B"]
    n_med = int(np.median(iters))
    return n_med, n_med * b_used
