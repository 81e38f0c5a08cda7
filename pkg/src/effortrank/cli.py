"""effortrank command line: run, sweep-zeta, synth, stats, minor-chaos-demo.

Exit status: 0 success, 1 configuration error, 2 runtime failure.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from . import learners as L
from . import minor_chaos
from .runner import (
    DEFAULT_SWEEP, ConfigError, ResultTable, RunConfig, format_summary, run_experiment, summarize,
    sweep_zeta, synthetic_benchmark, write_run, write_summary, write_synthetic_benchmark,
)
from .strategies import DEFAULT_THRESHOLD, DEFAULT_ZETA, STRATEGIES

log = logging.getLogger("effortrank")

SEED_ENV = "EFFORTRANK_SEED"
BUILTIN_MANIFEST = "builtin"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(f"{self.prog}: {message}")


def _add_run_flags(p, sweep=False):
    p.add_argument("--config", help="flat key = value config file; flags override its entries")
    p.add_argument("--manifest", help=f"manifest file (source, train, test per line) or "
                                      f"'{BUILTIN_MANIFEST}' for the shipped 61-pair setup")
    p.add_argument("--data-dir", help="dataset root: <data-dir>/<source>/<name>.csv (default: data)")
    p.add_argument("--schema", help="JSON file mapping source tag to column schema")
    p.add_argument("--learners", help="comma-separated learner tags (default: lr); available: "
                                      + ", ".join(L.LEARNER_TAGS))
    p.add_argument("--strategies", help="comma-separated strategies (default: all of "
                                        + ", ".join(STRATEGIES) + ")")
    p.add_argument("--zeta", type=float, help=f"EA-Z probability floor (default: {DEFAULT_ZETA})")
    if sweep:
        p.add_argument("--grid", default=",".join(f"{z:g}" for z in DEFAULT_SWEEP),
                       help="comma-separated, strictly increasing zeta values")
    p.add_argument("--threshold", type=float,
                   help=f"classification threshold for Label/LOC and CBS+ (default: {DEFAULT_THRESHOLD})")
    p.add_argument("--seed", type=int, help=f"master seed (default: ${SEED_ENV} or 0)")
    p.add_argument("--repetitions", type=int, help="repetitions per (pair, learner) (default: 1)")
    p.add_argument("--k", type=int, help=f"neighbours for ibk/knn (default: {L.DEFAULT_K})")
    p.add_argument("--tree-count", type=int,
                   help=f"trees of a standalone random forest (default: {L.DEFAULT_TREES})")
    p.add_argument("--nested-tree-count", type=int,
                   help=f"trees of a random forest inside ubag/ubst (default: {L.DEFAULT_NESTED_TREES})")
    p.add_argument("--ir", type=float,
                   help=f"minority/majority ratio of each under-sample (default: {L.DEFAULT_IR:g})")
    p.add_argument("--members", type=int, dest="n_members",
                   help=f"bags of ubag / rounds of ubst (default: {L.DEFAULT_MEMBERS})")
    p.add_argument("--external", action="append", metavar="TAG=TEMPLATE",
                   help="precomputed probabilities for learner TAG; TEMPLATE contains {dataset}")
    p.add_argument("--no-log-transform", action="store_true", help="keep raw feature values")
    p.add_argument("--keep-zero-effort", action="store_true", help="do not drop zero-effort modules")
    p.add_argument("--jobs", type=int, help="worker processes (default: 1)")
    p.add_argument("--out", help="output directory (required)")


def build_parser():
    parser = _Parser(prog="effortrank", description="Effort-aware defect prediction benchmark.")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging on stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    _add_run_flags(sub.add_parser("run", help="run the pair x learner x strategy matrix"))
    _add_run_flags(sub.add_parser("sweep-zeta", help="run with EA-Z evaluated over a zeta grid"),
                   sweep=True)

    p = sub.add_parser("synth", help="write a synthetic benchmark (datasets + manifest)")
    p.add_argument("--pairs", type=int, default=30, help="number of train/test pairs (default: 30)")
    p.add_argument("--n", type=int, default=300, help="modules per dataset (default: 300)")
    p.add_argument("--defect-rate", type=float, default=0.2, help="expected defective share (default: 0.2)")
    p.add_argument("--noise", type=float, default=1.0, help="feature noise level (default: 1.0)")
    p.add_argument("--skew-min", type=float, default=2.0, help="smallest effort skewness (default: 2)")
    p.add_argument("--skew-max", type=float, default=50.0, help="largest effort skewness (default: 50)")
    p.add_argument("--seed", type=int, help=f"seed (default: ${SEED_ENV} or 0)")
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("stats", help="summarize an existing results.csv")
    p.add_argument("--results", required=True, help="results.csv written by run / sweep-zeta")
    p.add_argument("--out", help="directory for summary files (default: print only)")
    p.add_argument("--zeta", type=float, help="EA-Z zeta to compare (default: 0.05 if present)")
    p.add_argument("--fdr", choices=("bh", "by"), default="bh", help="FDR procedure (default: bh)")
    p.add_argument("--one-sided", action="store_true",
                   help="test whether EA-Z is better instead of two-sided")

    p = sub.add_parser("minor-chaos-demo", help="print the four-module ranking-instability example")
    p.add_argument("--zeta", type=float, default=DEFAULT_ZETA, help=f"EA-Z zeta (default: {DEFAULT_ZETA})")
    return parser


def _env_seed():
    value = os.environ.get(SEED_ENV)
    if value is None:
        return None
    try:
        return int(value)
    except ValueError:
        raise ConfigError(f"{SEED_ENV} must be an integer, got {value!r}") from None


def config_from_args(args, sweep=False) -> RunConfig:
    text = ""
    if args.config:
        if not Path(args.config).is_file():
            raise ConfigError(f"--config: file not found: {args.config}")
        text = Path(args.config).read_text(encoding="utf-8")
    manifest = args.manifest
    if manifest is None and "manifest" not in text:
        raise ConfigError("--manifest is required (a manifest file, or 'builtin')")
    if manifest is not None and manifest != BUILTIN_MANIFEST and not Path(manifest).is_file():
        raise ConfigError(f"--manifest: file not found: {manifest}")
    seed = args.seed if args.seed is not None else _env_seed()
    overrides = dict(
        manifest="" if manifest == BUILTIN_MANIFEST else manifest,
        data_dir=args.data_dir, schema=args.schema, learners=args.learners,
        strategies=args.strategies, zeta=args.zeta, threshold=args.threshold, seed=seed,
        repetitions=args.repetitions, k=args.k, tree_count=args.tree_count,
        nested_tree_count=args.nested_tree_count, ir=args.ir, n_members=args.n_members,
        jobs=args.jobs, out=args.out,
        external=",".join(args.external) if args.external else None,
    )
    if sweep:
        overrides["zeta_grid"] = args.grid
    if args.no_log_transform:
        overrides["log_transform"] = False
    if args.keep_zero_effort:
        overrides["drop_zero_effort"] = False
    cfg = RunConfig.from_text(text, **overrides)
    if not cfg.out:
        raise ConfigError("--out is required")
    if cfg.schema and not Path(cfg.schema).is_file():
        raise ConfigError(f"--schema: file not found: {cfg.schema}")
    return cfg


def _cmd_run(args, sweep=False):
    cfg = config_from_args(args, sweep=sweep)
    try:
        rt = sweep_zeta(cfg) if sweep else run_experiment(cfg)
    except FileNotFoundError as exc:
        raise ConfigError(str(exc)) from None
    summary = write_run(cfg, rt, cfg.out)
    if rt.errored:
        log.warning("%d of %d result rows errored; see the status/detail columns", len(rt.errored), len(rt))
    sys.stdout.write(format_summary(summary))
    return 0


def _cmd_synth(args):
    seed = args.seed if args.seed is not None else (_env_seed() or 0)
    if args.pairs < 1:
        raise ConfigError("--pairs must be >= 1")
    try:
        manifest, datasets = synthetic_benchmark(
            args.pairs, seed=seed, skew_range=(args.skew_min, args.skew_max),
            n=args.n, defect_rate=args.defect_rate, noise=args.noise,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    path = write_synthetic_benchmark(args.out, manifest, datasets)
    sys.stdout.write(f"{path}\n")
    return 0


def _cmd_stats(args):
    if not Path(args.results).is_file():
        raise ConfigError(f"--results: file not found: {args.results}")
    rt = ResultTable.read(args.results)
    summary = summarize(rt, zeta=args.zeta, fdr_method=args.fdr,
                        alternative="greater" if args.one_sided else "two-sided")
    if args.out:
        write_summary(summary, rt, args.out)
    sys.stdout.write(format_summary(summary))
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "sweep-zeta":
            return _cmd_run(args, sweep=True)
        if args.command == "synth":
            return _cmd_synth(args)
        if args.command == "stats":
            return _cmd_stats(args)
        if args.command == "minor-chaos-demo":
            if not 0.0 < args.zeta < 1.0:
                raise ConfigError("--zeta must lie in (0, 1)")
            sys.stdout.write(minor_chaos.report(zeta=args.zeta) + "\n")
            return 0
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - reported as a runtime failure
        log.debug("runtime failure", exc_info=True)
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    return 2


if __name__ == "__main__":
    sys.exit(main())
