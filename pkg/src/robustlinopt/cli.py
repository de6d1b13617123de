"""Command-line entry point.

    robustlinopt run CONFIG [--out DIR] [--check-lemmas] [--seed-offset K]
    robustlinopt sweep CONFIG [--out DIR] [--jobs N] [--check-lemmas] [--seed-offset K] [--traces]
    robustlinopt ellipsoid POLYTOPE_JSON [--mode MODE]

Exit codes: 0 success, 2 invalid input, 1 runtime failure.
The ROBUSTLINOPT_OUT environment variable overrides the config's out_dir;
``--out`` overrides both.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import geometry, harness
from .config import load_config
from .errors import ConfigError, RobustLinOptError

ENV_OUT = "ROBUSTLINOPT_OUT"
EXIT_OK, EXIT_RUNTIME, EXIT_INVALID = 0, 1, 2


def _out_dir(args, cfg) -> Path:
    if args.out:
        return Path(args.out)
    if os.environ.get(ENV_OUT):
        return Path(os.environ[ENV_OUT])
    return Path(cfg.out_dir or "out")


def _invalid(msg: str) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return EXIT_INVALID


def _prepare(cfg):
    """Build the instance up front so bad inputs exit with code 2."""
    try:
        return harness.build_instance(cfg)
    except (RobustLinOptError, ValueError) as exc:
        raise ConfigError(f"instance: {exc}", field="instance") from exc


def cmd_run(args) -> int:
    try:
        cfg = load_config(args.config)
        prepared = _prepare(cfg)
        harness.build_strategy(cfg, prepared[0])
    except ConfigError as exc:
        return _invalid(str(exc))
    except ValueError as exc:
        return _invalid(f"corruption: {exc}")
    out = _out_dir(args, cfg)
    summary = []
    try:
        for s in cfg.seeds:
            seed = s + args.seed_offset
            res = harness.run_experiment(cfg, seed, check_lemmas=True, prepared=prepared)
            harness.write_run(res, out)
            summary.append({"seed": seed, "final_regret": res.trace.final_regret,
                            "total_corruption": res.ledger.total})
        (out / "run_summary.json").write_text(json.dumps(
            {"algorithm": cfg.algorithm.name, "T": cfg.T, "gap": prepared[0].gap,
             "basis": prepared[1].to_dict(), "runs": summary}, indent=2, sort_keys=True))
    except Exception as exc:  # noqa: BLE001 - report and map to the runtime exit code
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    print(f"wrote {len(summary)} run(s) to {out}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    try:
        cfg = load_config(args.config, sweep=True)
        for cell in harness.sweep_cells(cfg):
            harness.build_strategy(cell, _prepare(cell)[0])
    except ConfigError as exc:
        return _invalid(str(exc))
    except ValueError as exc:
        return _invalid(f"corruption: {exc}")
    out = _out_dir(args, cfg)
    out.mkdir(parents=True, exist_ok=True)
    try:
        result, reports = harness.sweep(cfg, jobs=args.jobs, seed_offset=args.seed_offset,
                                        check_lemmas=args.check_lemmas,
                                        trace_dir=out / "traces" if args.traces else None)
        result.to_csv(out / "sweep_summary.csv")
        result.aggregate_to_csv(out / "sweep_aggregate.csv")
        if args.check_lemmas:
            lemma_dir = out / "lemmas"
            lemma_dir.mkdir(exist_ok=True)
            for row, rep in zip(result.rows, reports):
                name = f"C{row['C']:g}_d{row['d']}_{row['algorithm']}_seed{row['seed']}.json"
                (lemma_dir / name).write_text(json.dumps(rep, indent=2, sort_keys=True))
    except Exception as exc:  # noqa: BLE001
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    print(f"summarized {len(result.rows)} cell runs in {out / 'sweep_summary.csv'}")
    return EXIT_OK


def cmd_ellipsoid(args) -> int:
    try:
        poly = geometry.load_polytope(args.polytope)
    except FileNotFoundError:
        return _invalid(f"no such file {args.polytope}")
    except (RobustLinOptError, ValueError, KeyError) as exc:
        return _invalid(f"polytope: {exc}")
    try:
        E = geometry.inscribed_ellipsoid(poly)
        geometry.exploration_basis(poly, E, args.mode)
    except RobustLinOptError as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    print(json.dumps(E.to_dict(), indent=2))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="robustlinopt", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("config", help="experiment config (JSON)")
    common.add_argument("--out", help="output directory")
    common.add_argument("--seed-offset", type=int, default=0, help="added to every seed")

    r = sub.add_parser("run", parents=[common], help="run one experiment per configured seed")
    r.add_argument("--check-lemmas", action="store_true", help="accepted for symmetry; run always writes lemma reports")
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("sweep", parents=[common], help="run a grid of experiments")
    s.add_argument("--jobs", type=int, default=1, help="worker processes")
    s.add_argument("--check-lemmas", action="store_true", help="write a lemma report per cell")
    s.add_argument("--traces", action="store_true", help="also write per-cell traces")
    s.set_defaults(func=cmd_sweep)

    e = sub.add_parser("ellipsoid", help="inscribed ellipsoid of a polytope file")
    e.add_argument("polytope")
    e.add_argument("--mode", choices=geometry.MODES, default="weak_ellipsoid")
    e.set_defaults(func=cmd_ellipsoid)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "jobs", 1) < 1:
        return _invalid("--jobs must be >= 1")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
