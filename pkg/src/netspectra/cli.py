"""Command-line entry point: ``analyze``, ``synth`` and ``nulldiag``."""

from __future__ import annotations

import argparse
import csv
import itertools
import logging
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

from .graph import GraphError, load_edge_list, load_les_miserables
from .nullmodels import FULL_WCM, SPARSE_WCM, NullModelError, NullModelSpec, dump_samples
from .pipeline import (CLUSTER_METHODS, DIAGNOSTIC_COLUMNS, NULL_ALIASES, RunConfig, analyze,
                       max_count_error, null_weight_diagnostic)
from .report import write_outputs
from .synthetic import SweepConfig, SyntheticSpec, sweep_detection, write_sweep_csv

log = logging.getLogger("netspectra")

BUNDLED = "lesmis"
BOUNDS = ("mean", "ci", "ttest", "perm")


def _load(path: str | None, symmetrize: bool):
    if path is None or path == BUNDLED:
        return load_les_miserables(), BUNDLED
    with open(path, encoding="utf-8") as fh:
        return load_edge_list(fh, directed_symmetrize=symmetrize), path


def _null_args(p: argparse.ArgumentParser, default_null: str = "sparse") -> None:
    p.add_argument("--null", default=default_null, choices=["wcm", "sparse"],
                   help="null model: full weighted configuration model or sparse WCM")
    p.add_argument("--samples", type=int, default=100, help="number of null samples N")
    p.add_argument("--kappa", type=float, default=1.0, help="weight scaling for real weights")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1, help="worker threads for the sample loop")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="netspectra", description=__doc__)
    parser.add_argument("--log-level", default="WARNING")
    sub = parser.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="run the full pipeline on an edge list")
    a.add_argument("--input", default=None,
                   help=f"edge-list file (default: bundled network '{BUNDLED}')")
    a.add_argument("--symmetrize", action="store_true",
                   help="treat the edge list as directed and use (W + W^T)/2")
    _null_args(a)
    a.add_argument("--sampler", default="poisson", choices=["poisson", "stub_matching"])
    a.add_argument("--bound", default="mean", choices=BOUNDS)
    a.add_argument("--alpha", type=float, default=0.975)
    a.add_argument("--cluster", default="consensus", choices=CLUSTER_METHODS)
    a.add_argument("--restarts", type=int, default=100, help="k-means restarts p")
    a.add_argument("--dump-samples", action="store_true",
                   help="also write every null sample as samples/sample_<i>.tsv")
    a.add_argument("--out", required=True, help="output directory")

    s = sub.add_parser("synth", help="detection sweep over synthetic block models")
    s.add_argument("--n", type=int, default=400)
    s.add_argument("--groups", type=int, default=4)
    s.add_argument("--p-within", type=float, nargs="+", default=[0.05, 0.1, 0.15, 0.2])
    s.add_argument("--p-between", type=float, default=0.05)
    s.add_argument("--p-noise", type=float, nargs="+", default=[0.0])
    s.add_argument("--f-noise", type=float, nargs="+", default=[0.0])
    s.add_argument("--lambda-s", type=float, default=200.0)
    s.add_argument("--replicates", type=int, default=50)
    s.add_argument("--paper-scale", action="store_true", help="100 networks per grid point")
    _null_args(s)
    s.add_argument("--bound", default="mean", choices=BOUNDS)
    s.add_argument("--alpha", type=float, default=0.975)
    s.add_argument("--cluster", default="kmeans", choices=CLUSTER_METHODS)
    s.add_argument("--restarts", type=int, default=100)
    s.add_argument("--no-timing", action="store_true",
                   help="write runtime_ms as 0 so output is byte-reproducible")
    s.add_argument("--out", default="-", help="CSV path ('-' for stdout)")

    d = sub.add_parser("nulldiag", help="weight-distribution error of sampled null models")
    d.add_argument("--input", default=None,
                   help=f"edge-list file (default: bundled network '{BUNDLED}')")
    d.add_argument("--symmetrize", action="store_true")
    d.add_argument("--null", default="both", choices=["wcm", "sparse", "both"])
    d.add_argument("--samples", type=int, default=100)
    d.add_argument("--kappa", type=float, default=1.0)
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--out", default="-", help="CSV path ('-' for stdout)")
    return parser


def _open_out(path: str):
    if path == "-":
        return sys.stdout, False
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    return open(path, "w", newline="", encoding="utf-8"), True


def cmd_analyze(args) -> int:
    g, source = _load(args.input, args.symmetrize)
    config = RunConfig(null=args.null, num_samples=args.samples, kappa=args.kappa,
                       sampler=args.sampler, seed=args.seed, bound=args.bound,
                       alpha=args.alpha, cluster=args.cluster, restarts=args.restarts,
                       jobs=args.jobs)
    t0 = time.perf_counter()
    res = analyze(g, config)
    out = Path(args.out)
    report = write_outputs(res, config, out, source)
    if args.dump_samples:
        dump_samples(res.ensemble, out / "samples")
    elapsed = time.perf_counter() - t0
    # wall-clock details live outside report.json so the report stays reproducible
    stamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
    with open(out / "run.log", "w", encoding="utf-8") as fh:
        fh.write(f"finished {stamp}\nelapsed_seconds {elapsed:.3f}\njobs {args.jobs}\n")
    spec = report["spectral"]
    print(f"structure={report['structure']} d_pos={spec['d_pos']} d_neg={spec['d_neg']} "
          f"-> {out}")
    return 0


def cmd_synth(args) -> int:
    replicates = 100 if args.paper_scale else args.replicates
    grid = [SyntheticSpec(n=args.n, g=args.groups, p_within=pw, p_between=args.p_between,
                          p_noise=pn, f_noise=fn, lambda_s=args.lambda_s)
            for pw, pn, fn in itertools.product(args.p_within, args.p_noise, args.f_noise)]
    config = SweepConfig(null=NULL_ALIASES[args.null], num_samples=args.samples,
                         kappa=args.kappa, bound=args.bound, alpha=args.alpha,
                         cluster=args.cluster, restarts=args.restarts, replicates=replicates,
                         seed=args.seed, jobs=args.jobs, timing=not args.no_timing)
    rows = sweep_detection(grid, config, progress=lambda msg: print(msg, file=sys.stderr))
    fh, close = _open_out(args.out)
    try:
        write_sweep_csv(rows, fh)
    finally:
        if close:
            fh.close()
    return 0


def cmd_nulldiag(args) -> int:
    g, _ = _load(args.input, args.symmetrize)
    kinds = [FULL_WCM, SPARSE_WCM] if args.null == "both" else [NULL_ALIASES[args.null]]
    rows = []
    for kind in kinds:
        spec = NullModelSpec(kind=kind, num_samples=args.samples, kappa=args.kappa,
                             seed=args.seed)
        part = null_weight_diagnostic(g, spec)
        errors = max_count_error(part)
        print(f"{kind}: mean max |count difference| = "
              f"{sum(errors.values()) / len(errors):.2f}", file=sys.stderr)
        rows += part
    fh, close = _open_out(args.out)
    try:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(DIAGNOSTIC_COLUMNS)
        for r in rows:
            writer.writerow([repr(r[c]) if isinstance(r[c], float) else r[c]
                             for c in DIAGNOSTIC_COLUMNS])
    finally:
        if close:
            fh.close()
    return 0


COMMANDS = {"analyze": cmd_analyze, "synth": cmd_synth, "nulldiag": cmd_nulldiag}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=args.log_level.upper(), format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (GraphError, NullModelError, ValueError, OSError) as exc:
        print(f"netspectra {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
