"""Command-line entry point: ``ppwass {d1,wp,sample,bounds,run,fit}``."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .bounds import RateParams, evaluate_all
from .counting_measure import CountingMeasure, d1
from .experiments import ABSCISSAE, ExperimentConfig, dump_samples, fit_rate, run
from .ground_space import BOX, FINITE, INTERVAL, GroundSpace
from .pp_wasserstein import EmpiricalLaw, UnsupportedWeightsError, wp_equal, wp_general, wp_record


def _space_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--space", choices=[INTERVAL, BOX, FINITE], default=INTERVAL)
    p.add_argument("--T", type=float, default=1.0, help="side length of the interval or box")
    p.add_argument("--d", type=int, default=2, help="box dimension")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--cost-csv", help="distance table for a finite space")
    p.add_argument("--anchor", type=int, default=0)


def _space(args) -> GroundSpace:
    if args.space == INTERVAL:
        return GroundSpace.interval(args.T, args.alpha)
    if args.space == BOX:
        return GroundSpace.box(args.d, args.T, args.alpha)
    if not args.cost_csv:
        raise SystemExit("--cost-csv is required for a finite space")
    return GroundSpace.finite_from_csv(args.cost_csv, args.alpha, args.anchor)


def _measure(text: str) -> CountingMeasure:
    """Inline JSON array, or a path to a file holding one."""
    path = Path(text)
    if path.exists():
        text = path.read_text()
    return CountingMeasure(json.loads(text))


def _emit(obj) -> None:
    print(json.dumps(obj, sort_keys=True))


def cmd_d1(args) -> int:
    _emit({"d1": d1(_space(args), _measure(args.mu1), _measure(args.mu2))})
    return 0


def cmd_wp(args) -> int:
    space = _space(args)
    a, b = EmpiricalLaw.from_jsonl(args.law1), EmpiricalLaw.from_jsonl(args.law2)
    if len(a) == len(b) and a.is_uniform and b.is_uniform:
        value = wp_equal(space, a, b, args.p)
    else:
        try:
            value = wp_general(space, a, b, args.p)
        except UnsupportedWeightsError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
    _emit(wp_record(value, args.p, "given_laws", max(len(a), len(b)), args.seed))
    return 0


def cmd_sample(args) -> int:
    cfg = ExperimentConfig.from_json(args.config) if args.config else ExperimentConfig(
        space_kind=args.space, T=args.T, d=args.d, alpha=args.alpha, sampler=args.sampler,
        rate=args.rate, nu=args.nu, branching=args.branching, decay=args.decay)
    cfg = cfg.replace(master_seed=args.seed)
    out = Path(args.out or "samples.jsonl")
    if out.suffix != ".jsonl":
        out.mkdir(parents=True, exist_ok=True)
        out = out / "samples.jsonl"
    dump_samples(cfg, args.count, out)
    _emit({"path": str(out), "count": args.count, "master_seed": args.seed})
    return 0


def cmd_bounds(args) -> int:
    params = RateParams(p=args.p, kappa=args.kappa, dim_m=args.dim, lambda_tail=args.lambda_tail,
                        k1=args.k1, sigma=args.sigma, k2=args.k2, alpha=args.alpha, diam=args.diam)
    for n in args.n:
        for rec in evaluate_all(n, params, eps=args.eps, poisson_rate=args.poisson_rate, chi=args.chi):
            _emit(rec)
    return 0


def cmd_run(args) -> int:
    cfg = ExperimentConfig.from_json(args.config)
    changes = {}
    if args.seed is not None:
        changes["master_seed"] = args.seed
    if args.threads is not None:
        changes["threads"] = args.threads
    if changes:
        cfg = cfg.replace(**changes)
    result = run(cfg, args.out)
    if cfg.experiment == "convergence":
        for row in result["aggregate"]:
            _emit(row)
    elif cfg.experiment == "concentration":
        for row in result["table"]:
            _emit(row)
    elif cfg.experiment == "campbell":
        _emit(result)
    else:
        for row in result:
            _emit(row)
    return 0


def cmd_fit(args) -> int:
    slope, intercept, r2 = fit_rate(args.aggregate, args.abscissa)
    _emit({"abscissa": args.abscissa, "slope": slope, "intercept": intercept, "r_squared": r2})
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="master seed")
    common.add_argument("--threads", type=int, default=None, help="worker threads for replications")
    common.add_argument("--out", default=None, help="output directory or file")

    parser = argparse.ArgumentParser(prog="ppwass", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("d1", parents=[common], help="distance between two counting measures")
    p.add_argument("mu1", help="JSON point array or file")
    p.add_argument("mu2")
    _space_args(p)
    p.set_defaults(func=cmd_d1)

    p = sub.add_parser("wp", parents=[common], help="W_p between two JSONL laws")
    p.add_argument("law1")
    p.add_argument("law2")
    p.add_argument("--p", type=float, default=1.0)
    _space_args(p)
    p.set_defaults(func=cmd_wp)

    p = sub.add_parser("sample", parents=[common], help="dump sampler draws to JSONL")
    p.add_argument("--config", help="experiment config supplying space and sampler")
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--sampler", choices=["poisson", "hawkes"], default="poisson")
    p.add_argument("--rate", type=float, default=1.0, help="Poisson mean count")
    p.add_argument("--nu", type=float, default=1.0)
    p.add_argument("--branching", type=float, default=0.5)
    p.add_argument("--decay", type=float, default=2.0)
    _space_args(p)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("bounds", help="closed-form bounds")
    bsub = p.add_subparsers(dest="action", required=True)
    e = bsub.add_parser("eval", parents=[common], help="print one JSON record per formula")
    e.add_argument("--n", type=float, nargs="+", required=True)
    e.add_argument("--p", type=float, default=1.0)
    e.add_argument("--kappa", type=float, default=0.1)
    e.add_argument("--dim", type=float, default=1.0)
    e.add_argument("--lambda-tail", type=float, default=1.0)
    e.add_argument("--k1", type=float, default=1.0)
    e.add_argument("--sigma", type=float, default=1.0)
    e.add_argument("--k2", type=float, default=2.0)
    e.add_argument("--alpha", type=float, default=1.0)
    e.add_argument("--diam", type=float, default=1.0)
    e.add_argument("--chi", type=float, default=0.0)
    e.add_argument("--eps", type=float, default=None)
    e.add_argument("--poisson-rate", type=float, default=None)
    e.set_defaults(func=cmd_bounds)

    p = sub.add_parser("run", parents=[common], help="run an experiment from a JSON config")
    p.add_argument("config")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("fit", parents=[common], help="fit the log-mean decay of an aggregate CSV")
    p.add_argument("aggregate")
    p.add_argument("--abscissa", choices=ABSCISSAE, default="sqrt_log_n")
    p.set_defaults(func=cmd_fit)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "seed", None) is None and args.command in ("wp", "sample"):
        args.seed = 0
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
