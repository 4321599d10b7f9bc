"""Command-line interface.

Subcommands: kernel-info, plan, estimate-check, run, sweep-batch,
sweep-noise, rate-study.  A flat TOML config file can preset any flag of
``run`` and the sweeps; explicit flags win.  Exit codes: 0 success,
2 divergence, 3 configuration error.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .errors import DivergenceError, ParameterError
from .estimator import EstimatorConfig, certify_moments
from .kernels import build_kernel, kernel_moment
from .oracles import NoiseModel
from .planner import batch_for_noise, plan
from .problems import get_problem
from .runner import RunConfig, rate_study, run_zoabsgd, sweep_batch, sweep_noise
from .sampling import RandomStream

EXIT_OK = 0
EXIT_DIVERGED = 2
EXIT_CONFIG = 3


class _Parser(argparse.ArgumentParser):
    # argparse exits with code 2 on bad flags; 2 means divergence here.
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)


def _load_config(path: str) -> dict:
    try:
        import tomllib
    except ImportError:
        import tomli as tomllib
    with open(path, "rb") as fh:
        return tomllib.load(fh)


def _emit(obj):
    print(json.dumps(obj, indent=2, sort_keys=True, default=_jsonify))


def _jsonify(value):
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    raise TypeError(f"not JSON serializable: {type(value)}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="zoabsgd", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("kernel-info", help="kernel coefficients, constants and moments")
    p.add_argument("--beta", type=float, required=True)

    p = sub.add_parser("plan", help="regime, h, N, T and the noise ceiling")
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--mu", type=float, required=True)
    p.add_argument("--L", type=float, required=True)
    p.add_argument("--eps", type=float, required=True)
    group = p.add_mutually_exclusive_group()
    group.add_argument("--batch", type=int, help="batch size B")
    group.add_argument("--delta", type=float, help="noise level to tolerate")
    p.add_argument("--c-h", type=float, default=1.0)
    p.add_argument("--initial-gap", type=float, default=1.0)

    p = sub.add_parser("estimate-check", help="Monte-Carlo moment report vs bounds")
    p.add_argument("--problem", required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--h", type=float, required=True)
    p.add_argument("--delta", type=float, default=0.0)
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--offset", type=float, default=1.0,
                   help="distance of the probe point from the minimizer")

    for name in ("run", "sweep-batch", "sweep-noise"):
        p = sub.add_parser(name)
        p.add_argument("--config", help="flat TOML file with run keys; flags win")
        p.add_argument("--problem")
        p.add_argument("--beta", type=float)
        p.add_argument("--batch", type=int, dest="B")
        p.add_argument("--delta", type=float)
        p.add_argument("--eps", type=float)
        p.add_argument("--seed", type=int)
        p.add_argument("--noise-kind", dest="noise_kind")
        p.add_argument("--iters", type=int, dest="n_override")
        p.add_argument("--h", type=float, dest="h_override")
        p.add_argument("--c-h", type=float, dest="c_h")
        p.add_argument("--x0-offset", type=float, dest="x0_offset")
        p.add_argument("--timing", action="store_true", dest="record_timing",
                       default=None)
        p.add_argument("--out")
        if name == "sweep-batch":
            p.add_argument("--batches", type=int, nargs="+", required=True)
            p.add_argument("--seeds", type=int, default=10)
        if name == "sweep-noise":
            p.add_argument("--deltas", type=float, nargs="+", required=True)
            p.add_argument("--seeds", type=int, default=20)

    p = sub.add_parser("rate-study", help="iteration-count scaling study")
    p.add_argument("--mode", choices=("cond", "dim"), default="cond")
    p.add_argument("--eps", type=float, default=1e-6)
    p.add_argument("--beta", type=float, default=2.0)
    p.add_argument("--seeds", type=int, default=5)
    p.add_argument("--conds", type=int, nargs="+", default=[10, 100, 1000])
    p.add_argument("--dims", type=int, nargs="+", default=[2, 4, 8])
    p.add_argument("--out")
    return parser


def _run_config_from(args) -> RunConfig:
    data = {}
    if getattr(args, "config", None):
        data.update(_load_config(args.config))
    for key in ("problem", "beta", "B", "delta", "eps", "seed", "noise_kind",
                "n_override", "h_override", "c_h", "x0_offset", "record_timing",
                "out"):
        value = getattr(args, key, None)
        if value is not None:
            data[key] = value
    return RunConfig.from_dict(data)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _dispatch(args)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_CONFIG
    except (ParameterError, FileNotFoundError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DivergenceError as exc:
        print(f"diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGED


def _dispatch(args) -> int:
    if args.command == "kernel-info":
        kern = build_kernel(args.beta)
        _emit({
            "beta": kern.beta,
            "degree": kern.degree,
            "coeffs": kern.coeffs,
            "kappa": kern.kappa,
            "kappa_beta": kern.kappa_beta,
            "moments": {str(j): kernel_moment(kern, j) for j in range(kern.degree + 1)},
        })
        return EXIT_OK

    if args.command == "plan":
        batch = args.batch
        if batch is None and args.delta is not None:
            batch = batch_for_noise(args.beta, args.dim, args.mu, args.eps, args.delta)
        if batch is None:
            batch = 0
        if batch == 0:
            from .planner import batch_threshold
            batch = batch_threshold(args.beta, args.dim)
        _emit(plan(args.beta, args.dim, args.mu, args.L, args.eps, batch,
                   c_h=args.c_h, initial_gap=args.initial_gap).to_dict())
        return EXIT_OK

    if args.command == "estimate-check":
        problem = get_problem(args.problem)
        kern = build_kernel(args.beta)
        cfg = EstimatorConfig(h=args.h, B=1, kernel=kern)
        noise = NoiseModel("uniform" if args.delta > 0 else "none", args.delta)
        x = problem.x_star + args.offset * np.ones(problem.dim) / np.sqrt(problem.dim)
        report = certify_moments(problem, noise, cfg, x, args.samples,
                                 stream=RandomStream(args.seed, 0))
        _emit(report.to_dict())
        return EXIT_OK

    if args.command == "run":
        summary = run_zoabsgd(_run_config_from(args))
        _emit(summary.to_dict())
        return EXIT_DIVERGED if summary.diverged else EXIT_OK

    if args.command == "sweep-batch":
        cfg = _run_config_from(args)
        rows = sweep_batch(cfg, args.batches, seeds=tuple(range(args.seeds)),
                           n_override=cfg.n_override, out=args.out)
        _emit(rows)
        return EXIT_OK

    if args.command == "sweep-noise":
        cfg = _run_config_from(args)
        rows = sweep_noise(cfg, args.deltas, seeds=tuple(range(args.seeds)),
                           n_override=cfg.n_override, out=args.out)
        _emit(rows)
        return EXIT_OK

    if args.command == "rate-study":
        rows, exponent = rate_study(mode=args.mode, conds=tuple(args.conds),
                                    dims=tuple(args.dims), eps=args.eps,
                                    beta=args.beta, seeds=tuple(range(args.seeds)),
                                    out=args.out)
        _emit({"rows": rows, "exponent": exponent})
        return EXIT_OK

    raise ParameterError(f"unknown command {args.command!r}")


if __name__ == "__main__":
    raise SystemExit(main())
