"""Command-line front end: select, metrics, sweep, gen, bench, angles.

Exit codes are a stable contract: 0 on success, 1 on any domain or data
error (bad file, degenerate geometry, ...), 2 on flag misuse. Every
subcommand is deterministic given its flags; seeds are flags, and no
environment variables are consulted. Resolved parameter values are echoed
into output files (as ``#`` comment lines in CSVs, as a ``provenance``
object in selection documents) so results stay attributable.
"""

from __future__ import annotations

import argparse
import statistics
import sys
import time

from . import io as tpio
from .core import DEFAULT_EPSILON, as_importance
from .errors import TokenPruneError
from .metrics import (
    HopkinsConfig,
    TradeoffPoint,
    dominance_report,
    angle_histogram,
    hopkins_statistic,
    importance_retention,
    pareto_frontier,
)
from .selectors import (
    ALL_METHODS,
    LAMBDA_METHODS,
    SelectorConfig,
    run_selector,
    select_mmr,
    select_mmr_naive,
)
from .synth import ManifoldSpec, generate_manifold

DEFAULT_LAMBDA = 0.5
DEFAULT_HOPKINS_TRIALS = 16
DEFAULT_SEED = 0


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def _unsigned_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {v}")
    return v


def _unit_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not 0.0 <= v <= 1.0:
        raise argparse.ArgumentTypeError(f"expected a value in [0, 1], got {v}")
    return v


def _positive_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if v <= 0.0:
        raise argparse.ArgumentTypeError(f"expected a positive value, got {v}")
    return v


def _method_list(text: str) -> list[str]:
    methods = [m.strip() for m in text.split(",") if m.strip()]
    if not methods:
        raise argparse.ArgumentTypeError("expected a comma-separated method list")
    for m in methods:
        if m not in ALL_METHODS:
            raise argparse.ArgumentTypeError(
                f"unknown method {m!r}; choose from {', '.join(ALL_METHODS)}"
            )
    return methods


def _lambda_grid(text: str) -> list[float]:
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected start:stop:step, got {text!r}")
    try:
        start, stop, step = (float(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"non-numeric grid component in {text!r}") from None
    if step <= 0.0 or stop < start:
        raise argparse.ArgumentTypeError(f"grid needs step > 0 and stop >= start, got {text!r}")
    count = int(round((stop - start) / step)) + 1
    values = [start + i * step for i in range(count)]
    values = [v for v in values if v <= stop + 1e-12]
    if any(not 0.0 <= v <= 1.0 for v in values):
        raise argparse.ArgumentTypeError(f"lambda grid {text!r} leaves [0, 1]")
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tokenprune",
        description="Prune N feature vectors down to K, balancing importance and diversity.",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("select", help="run one selection strategy",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("--features", required=True, help="FMAT or CSV feature matrix")
    p.add_argument("--importance", required=True, help="FVEC or CSV raw importance scores")
    p.add_argument("--method", required=True, choices=ALL_METHODS)
    p.add_argument("--k", required=True, type=_positive_int, help="selection budget")
    p.add_argument("--lambda", dest="lam", type=_unit_float, default=DEFAULT_LAMBDA,
                   help="importance/diversity trade-off weight")
    p.add_argument("--seed", type=_unsigned_int, default=DEFAULT_SEED)
    p.add_argument("--out", required=True, help="selection document to write")
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("metrics", help="hopkins + retention of a stored selection",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("--features", required=True)
    p.add_argument("--importance", required=True)
    p.add_argument("--selection", required=True)
    p.add_argument("--hopkins-trials", type=_positive_int, default=DEFAULT_HOPKINS_TRIALS)
    p.add_argument("--seed", type=_unsigned_int, default=DEFAULT_SEED)
    p.add_argument("--out", default=None, help="optional CSV row destination")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("sweep", help="method x lambda sweep to a trade-off CSV",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("--features", required=True)
    p.add_argument("--importance", required=True)
    p.add_argument("--k", required=True, type=_positive_int)
    p.add_argument("--methods", required=True, type=_method_list,
                   help="comma-separated subset of: " + ", ".join(ALL_METHODS))
    p.add_argument("--lambda-grid", dest="lambda_grid", type=_lambda_grid, default="0.1:0.9:0.1",
                   help="start:stop:step, applied to lambda-dependent methods")
    p.add_argument("--seed", type=_unsigned_int, default=DEFAULT_SEED)
    p.add_argument("--out", required=True, help="sweep CSV to write")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("gen", help="generate a synthetic clustered fixture",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("--n", required=True, type=_positive_int, help="token count")
    p.add_argument("--dim", required=True, type=_positive_int)
    p.add_argument("--clusters", type=_positive_int, default=8)
    p.add_argument("--spread", type=_positive_float, default=0.35,
                   help="within-cluster standard deviation")
    p.add_argument("--non-negative", dest="non_negative", action="store_true",
                   help="shift features into the non-negative orthant")
    p.add_argument("--seed", type=_unsigned_int, default=DEFAULT_SEED)
    p.add_argument("--out-prefix", dest="out_prefix", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("bench", help="time the incremental MMR against the from-scratch variant",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("--n", required=True, type=_positive_int)
    p.add_argument("--dim", required=True, type=_positive_int)
    p.add_argument("--k", required=True, type=_positive_int)
    p.add_argument("--reps", type=_positive_int, default=3)
    p.add_argument("--seed", type=_unsigned_int, default=DEFAULT_SEED)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("angles", help="pairwise-angle histogram of a feature matrix",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("--features", required=True)
    p.add_argument("--bins", type=_positive_int, default=60)
    p.add_argument("--max-pairs", dest="max_pairs", type=_positive_int, default=2_000_000)
    p.add_argument("--out", required=True, help="histogram CSV to write")
    p.set_defaults(func=cmd_angles)

    return parser


def cmd_select(args: argparse.Namespace) -> int:
    features = tpio.read_features(args.features)
    scores = tpio.read_importance(args.importance)
    cfg = SelectorConfig(k=args.k, lam=args.lam, rng_seed=args.seed)
    start = time.perf_counter()
    selection = run_selector(args.method, features, scores, cfg)
    elapsed = time.perf_counter() - start
    provenance = {"lambda": args.lam, "seed": args.seed, "epsilon": DEFAULT_EPSILON}
    tpio.write_selection(selection, args.out, provenance=provenance)
    print(f"method={selection.method} k={selection.k} wall_time_s={elapsed:.6f}")
    return 0


def cmd_metrics(args: argparse.Namespace) -> int:
    features = tpio.read_features(args.features)
    scores = as_importance(tpio.read_importance(args.importance), features.n_tokens)
    selection = tpio.read_selection(args.selection)
    hcfg = HopkinsConfig(rng_seed=args.seed, n_trials=args.hopkins_trials)
    hopkins = hopkins_statistic(features, selection, hcfg)
    retention = importance_retention(scores, selection)
    print(f"hopkins={hopkins!r} retention={retention!r}")
    if args.out:
        point = TradeoffPoint(selection.method, selection.lam, hopkins, retention)
        tpio.write_sweep_csv(
            [point], args.out,
            comments=[f"metrics seed={args.seed} hopkins_trials={args.hopkins_trials}"],
        )
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    features = tpio.read_features(args.features)
    scores = as_importance(tpio.read_importance(args.importance), features.n_tokens)
    grid = args.lambda_grid if isinstance(args.lambda_grid, list) else _lambda_grid(args.lambda_grid)
    hcfg = HopkinsConfig(rng_seed=args.seed, n_trials=DEFAULT_HOPKINS_TRIALS)
    rows: list[TradeoffPoint] = []
    for method in sorted(set(args.methods)):
        lams = grid if method in LAMBDA_METHODS else [None]
        for lam in lams:
            cfg = SelectorConfig(
                k=args.k,
                lam=DEFAULT_LAMBDA if lam is None else lam,
                rng_seed=args.seed,
            )
            selection = run_selector(method, features, scores, cfg)
            hopkins = hopkins_statistic(features, selection, hcfg)
            retention = importance_retention(scores, selection)
            rows.append(TradeoffPoint(method, lam, hopkins, retention))
    comments = [
        f"sweep k={args.k} seed={args.seed} hopkins_trials={DEFAULT_HOPKINS_TRIALS}",
        "methods=" + ",".join(sorted(set(args.methods))),
    ]
    tpio.write_sweep_csv(rows, args.out, comments=comments)
    mmr_rows = [p for p in rows if p.method == "mmr"]
    hybrid_rows = [p for p in rows if p.method == "hybrid"]
    if mmr_rows:
        frontier = pareto_frontier(mmr_rows)
        for p in frontier:
            lam = "" if p.lam is None else f"{p.lam:.9g}"
            print(f"frontier method={p.method} lambda={lam} hopkins={p.hopkins!r} retention={p.retention!r}")
        if hybrid_rows:
            report = dominance_report(frontier, hybrid_rows)
            print(
                f"dominance dominated={report.dominated_count} total={report.total}"
                f" fraction={report.fraction!r}"
            )
    print(f"rows={len(rows)} out={args.out}")
    return 0


def cmd_gen(args: argparse.Namespace) -> int:
    spec = ManifoldSpec(
        n_tokens=args.n,
        dim=args.dim,
        n_clusters=args.clusters,
        cluster_spread=args.spread,
        non_negative=args.non_negative,
        rng_seed=args.seed,
    )
    manifold = generate_manifold(spec)
    fmat = args.out_prefix + ".fmat"
    fvec = args.out_prefix + ".fvec"
    labels = args.out_prefix + ".labels.csv"
    tpio.write_features(manifold.features, fmat)
    tpio.write_importance(manifold.importance, fvec)
    tpio._atomic_write(labels, "".join(f"{int(v)}\n" for v in manifold.labels).encode("ascii"))
    print(
        f"n={args.n} dim={args.dim} clusters={args.clusters} seed={args.seed}"
        f" regenerated_rows={manifold.regenerated_rows}"
    )
    print(f"wrote {fmat} {fvec} {labels}")
    return 0


def cmd_bench(args: argparse.Namespace) -> int:
    spec = ManifoldSpec(
        n_tokens=args.n,
        dim=args.dim,
        n_clusters=min(8, args.n),
        rng_seed=args.seed,
    )
    manifold = generate_manifold(spec)
    cfg = SelectorConfig(k=args.k, lam=DEFAULT_LAMBDA, rng_seed=args.seed)
    fast = select_mmr(manifold.features, manifold.importance, cfg)
    naive = select_mmr_naive(manifold.features, manifold.importance, cfg)
    if fast.indices != naive.indices or fast.step_scores != naive.step_scores:
        raise TokenPruneError(
            "incremental and from-scratch MMR disagree; refusing to benchmark"
        )
    fast_times = []
    naive_times = []
    for _ in range(args.reps):
        t0 = time.perf_counter()
        select_mmr(manifold.features, manifold.importance, cfg)
        fast_times.append(time.perf_counter() - t0)
    for _ in range(args.reps):
        t0 = time.perf_counter()
        select_mmr_naive(manifold.features, manifold.importance, cfg)
        naive_times.append(time.perf_counter() - t0)
    fast_med = statistics.median(fast_times)
    naive_med = statistics.median(naive_times)
    speedup = naive_med / fast_med
    print(f"n={args.n} dim={args.dim} k={args.k} reps={args.reps} outputs_equal=true")
    print(
        f"mmr_median_s={fast_med:.6f} mmr_naive_median_s={naive_med:.6f}"
        f" speedup={speedup:.2f}"
    )
    return 0


def cmd_angles(args: argparse.Namespace) -> int:
    features = tpio.read_features(args.features)
    hist = angle_histogram(features, n_bins=args.bins, max_pairs=args.max_pairs)
    lines = [f"# angles bins={args.bins} max_pairs={args.max_pairs}"]
    lines.append("bin_low_deg,bin_high_deg,count")
    for b in range(hist.counts.size):
        lo = hist.bin_edges[b]
        hi = hist.bin_edges[b + 1]
        lines.append(f"{lo:.9g},{hi:.9g},{int(hist.counts[b])}")
    lines.append(f"mass_above_90={hist.mass_above_90!r}")
    tpio._atomic_write(args.out, ("\n".join(lines) + "\n").encode("ascii"))
    print(f"pairs={hist.n_pairs} mass_above_90={hist.mass_above_90!r} out={args.out}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except TokenPruneError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
