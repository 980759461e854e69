"""Command-line harness: build, refine and benchmark DEG indexes.

CSV goes to stdout (or ``--out``); progress and reports go to stderr.
"""
import argparse
import logging
import sys
import time

import numpy as np

from . import bench
from .analysis import brute_force_knn, graph_stats, settled_report, verify_cut_bound
from .construction import BuildParams, build, random_regular_graph
from .datasets import make_sift_like
from .errors import DEGError, DimensionMismatch, KTooLarge, TooLargeToEnumerate
from .optimization import refine_for
from .persistence import load_graph, read_fvecs, read_ivecs, save_graph, write_fvecs

log = logging.getLogger("degindex")

METRIC_FLAGS = {"l2": "sqeuclidean", "angular": "angular"}


def _float_list(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated numbers, got {text!r}")


def _int_list(text):
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated integers, got {text!r}")


def _add_build_flags(p, with_ext=True):
    p.add_argument("--degree", type=int, default=30)
    if with_ext:
        p.add_argument("--k-ext", type=int, default=60)
        p.add_argument("--eps-ext", type=float, default=0.2)
        p.add_argument("--scheme", choices="ABCD", default="C")
        p.add_argument("--mrng", choices=("on", "off"), default="on")
    _add_opt_flags(p)


def _add_opt_flags(p):
    p.add_argument("--k-opt", type=int, default=30)
    p.add_argument("--eps-opt", type=float, default=0.001)
    p.add_argument("--i-opt", type=int, default=5)
    p.add_argument("--gain-metric", choices=("raw", "sqrt"), default="raw")


def _add_data_flags(p):
    p.add_argument("--metric", choices=sorted(METRIC_FLAGS), default="l2")
    p.add_argument("--limit", type=int, default=None, help="read only the first N base rows")


def make_parser():
    parser = argparse.ArgumentParser(prog="degindex", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="build a graph from an .fvecs file")
    p.add_argument("base")
    p.add_argument("--out", required=True, help="graph file to write")
    p.add_argument("--seed", type=int, default=0)
    _add_build_flags(p)
    _add_data_flags(p)

    p = sub.add_parser("refine", help="continue edge optimization on a saved graph")
    p.add_argument("graph")
    budget = p.add_mutually_exclusive_group(required=True)
    budget.add_argument("--iterations", type=int)
    budget.add_argument("--seconds", type=float)
    p.add_argument("--out", help="destination (defaults to overwriting the input)")
    p.add_argument("--seed", type=int, default=0)
    _add_opt_flags(p)

    p = sub.add_parser("random-graph", help="random connected regular graph over a dataset")
    p.add_argument("base")
    p.add_argument("--out", required=True)
    p.add_argument("--degree", type=int, default=30)
    p.add_argument("--seed", type=int, default=0)
    _add_data_flags(p)

    p = sub.add_parser("search-bench", help="recall and throughput over an eps sweep")
    p.add_argument("graph")
    p.add_argument("queries")
    truth = p.add_mutually_exclusive_group()
    truth.add_argument("--gt", help="ground truth .ivecs")
    truth.add_argument("--brute-force", action="store_true",
                       help="compute ground truth by exact scan (the default without --gt)")
    p.add_argument("--baseline", action="store_true", help="append an exact-scan timing row")
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--eps-sweep", type=_float_list, default=list(bench.EPS_LADDER))
    p.add_argument("--limit", type=int, default=None, help="use only the first N queries")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")

    p = sub.add_parser("explore-bench", help="queries are indexed vertices seeded at themselves")
    p.add_argument("graph")
    p.add_argument("--k", type=int, default=100)
    p.add_argument("--n-queries", type=int, default=1000)
    p.add_argument("--eps-sweep", type=_float_list, default=list(bench.EPS_LADDER))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")

    p = sub.add_parser("stats", help="degree, source and reachability statistics")
    p.add_argument("graph")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")

    p = sub.add_parser("verify", help="check structural invariants; exit 1 on violation")
    p.add_argument("graph")
    p.add_argument("--enum-limit", type=int, default=16,
                   help="enumerate cut sets only for graphs with at most this many vertices")

    p = sub.add_parser("scaling", help="build on growing subsamples and time search")
    p.add_argument("base")
    p.add_argument("queries")
    p.add_argument("--sizes", type=_int_list, required=True)
    p.add_argument("--target", type=float, default=0.99)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    _add_build_flags(p)
    _add_data_flags(p)

    p = sub.add_parser("make-data", help="write a synthetic SIFT-like base and query set")
    p.add_argument("base")
    p.add_argument("queries")
    p.add_argument("--n", type=int, default=10000)
    p.add_argument("--n-queries", type=int, default=1000)
    p.add_argument("--dim", type=int, default=128)
    p.add_argument("--seed", type=int, default=0)
    return parser


def _params(args, parser):
    if args.degree < 4 or args.degree % 2:
        parser.error(f"--degree must be even and at least 4, got {args.degree}")
    try:
        return BuildParams(
            d=args.degree, k_ext=getattr(args, "k_ext", 2 * args.degree),
            eps_ext=getattr(args, "eps_ext", 0.2), k_opt=args.k_opt, eps_opt=args.eps_opt,
            i_opt=args.i_opt, scheme=getattr(args, "scheme", "C"),
            use_mrng=getattr(args, "mrng", "on") == "on", gain_metric=args.gain_metric,
        )
    except ValueError as exc:
        parser.error(str(exc))


def _read_base(args):
    X = read_fvecs(args.base, limit=args.limit)
    log.info("read %d x %d from %s", X.shape[0], X.shape[1], args.base)
    return X


def cmd_build(args, parser):
    params = _params(args, parser)
    X = _read_base(args)
    t0 = time.perf_counter()
    graph = build(X, params, metric=METRIC_FLAGS[args.metric])
    secs = time.perf_counter() - t0
    save_graph(graph, args.out, include_weights=True)
    log.info("built %d vertices in %.2fs (%.3f ms/vertex), wrote %s", graph.size, secs,
             1000 * secs / max(graph.size, 1), args.out)
    bench.write_csv([{"n": graph.size, "degree": graph.d, "build_time": secs,
                      "edges": graph.edge_count(), "settled": int(settled_report(graph).ok)}])
    return 0


def cmd_refine(args, parser):
    graph = load_graph(args.graph)
    graph.require_mutable()
    rep = refine_for(graph, iterations=args.iterations, seconds=args.seconds, rng=args.seed,
                     i_opt=args.i_opt, k_opt=args.k_opt, eps_opt=args.eps_opt,
                     gain_metric=args.gain_metric)
    save_graph(graph, args.out or args.graph, include_weights=True)
    log.info("and_before=%.6g and_after=%.6g commits=%d", rep.and_before, rep.and_after,
             rep.commits)
    bench.write_csv([vars(rep)])
    return 0


def cmd_random_graph(args, parser):
    if args.degree < 4 or args.degree % 2:
        parser.error(f"--degree must be even and at least 4, got {args.degree}")
    X = _read_base(args)
    graph = random_regular_graph(X, args.degree, seed=args.seed, metric=METRIC_FLAGS[args.metric])
    save_graph(graph, args.out, include_weights=True)
    log.info("wrote random %d-regular graph on %d vertices to %s", graph.d, graph.size, args.out)
    return 0


def cmd_search_bench(args, parser):
    graph = load_graph(args.graph)
    Q = read_fvecs(args.queries, limit=args.limit)
    if Q.shape[1] != graph.store.dim:
        raise DimensionMismatch(f"queries have dim {Q.shape[1]}, graph has {graph.store.dim}")
    if args.k > graph.size:
        raise KTooLarge(f"k={args.k} exceeds the {graph.size} indexed vertices")
    if args.gt:
        truth = read_ivecs(args.gt, limit=args.limit)
        if truth.shape[0] != Q.shape[0] or truth.shape[1] < args.k:
            parser.error("ground truth must have one row per query and at least k columns")
        truth = truth[:, : args.k]
    else:
        truth, _ = brute_force_knn(graph.store, Q, args.k)
    rows = bench.search_bench(graph, Q, truth, args.k, args.eps_sweep)
    if args.baseline:
        rows.append(bench.brute_force_row(graph.store, Q, args.k))
    bench.write_csv(rows, args.out, bench.SEARCH_COLUMNS)
    return 0


def cmd_explore_bench(args, parser):
    graph = load_graph(args.graph)
    if args.k >= graph.size:
        raise KTooLarge(f"k={args.k} needs more than {graph.size} indexed vertices")
    nq = min(args.n_queries, graph.size)
    qids = np.sort(np.random.default_rng(args.seed).choice(graph.size, size=nq, replace=False))
    truth, _ = brute_force_knn(graph.store, graph.store.vectors[qids], args.k, exclude=qids)
    rows = bench.explore_bench(graph, qids, truth, args.k, args.eps_sweep)
    bench.write_csv(rows, args.out, bench.SEARCH_COLUMNS)
    return 0


def cmd_stats(args, parser):
    graph = load_graph(args.graph)
    stats = graph_stats(graph, rng=args.seed)
    sys.stderr.write(stats.to_text())
    if args.out:
        with open(args.out, "w") as f:
            f.write(stats.to_csv())
    else:
        sys.stdout.write(stats.to_csv())
    return 0


def cmd_verify(args, parser):
    graph = load_graph(args.graph)
    rep = settled_report(graph)
    ok = rep.ok
    print(f"settled: {'ok' if rep.ok else 'FAIL'} {rep}")
    if graph.size <= args.enum_limit:
        if rep.ok:
            try:
                cut = verify_cut_bound(graph)
                print(f"cut bound: {'ok' if cut.ok else 'FAIL'} "
                      f"({cut.subsets_checked} subsets, {len(cut.violations)} violations)")
                ok = ok and cut.ok
            except TooLargeToEnumerate as exc:
                print(f"cut bound: skipped ({exc})")
    else:
        print(f"cut bound: skipped ({graph.size} vertices > --enum-limit {args.enum_limit})")
    return 0 if ok else 1


def cmd_scaling(args, parser):
    params = _params(args, parser)
    X = _read_base(args)
    Q = read_fvecs(args.queries)
    rows = bench.scaling_bench(X, Q, args.sizes, params, k=args.k, target=args.target,
                               metric=METRIC_FLAGS[args.metric], seed=args.seed)
    bench.write_csv(rows, args.out, bench.SCALING_COLUMNS)
    return 0


def cmd_make_data(args, parser):
    X, Q = make_sift_like(args.n, args.n_queries, dim=args.dim, seed=args.seed)
    write_fvecs(args.base, X)
    write_fvecs(args.queries, Q)
    log.info("wrote %d base and %d query vectors", len(X), len(Q))
    return 0


COMMANDS = {
    "build": cmd_build,
    "refine": cmd_refine,
    "random-graph": cmd_random_graph,
    "search-bench": cmd_search_bench,
    "explore-bench": cmd_explore_bench,
    "stats": cmd_stats,
    "verify": cmd_verify,
    "scaling": cmd_scaling,
    "make-data": cmd_make_data,
}


def main(argv=None):
    parser = make_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args, parser)
    except (DEGError, OSError) as exc:
        log.error("%s", exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
