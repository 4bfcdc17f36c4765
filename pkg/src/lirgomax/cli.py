"""Command-line front end.

Exit codes: 0 success, 2 usage or input error, 3 numerical non-convergence,
4 verification failure.
"""
from __future__ import annotations

import argparse
import contextlib
import logging
import sys
from pathlib import Path

import numpy as np

from . import export, oracle, regomax, response
from .gmatrix import ConvergenceError, GoogleOperator, cheirank, pagerank, rank_order
from .graph import DirectedGraph, EdgeListError, LabelMap, load_edge_list, load_labels, transpose
from .network import build_friend_network, export_dot

logger = logging.getLogger("lirgomax")

EXIT_USAGE, EXIT_CONVERGENCE, EXIT_VERIFY = 2, 3, 4

MATRIX_FILES = {"gr": "GR", "grr": "Grr", "gpr": "Gpr", "gqr": "Gqr",
                "gqr_nd": "Gqr_nd", "grr+qrnd": "Grr+Gqr_nd"}


class UsageError(Exception):
    pass


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("global options")
    g.add_argument("--alpha", type=float, default=0.85, help="damping factor (default 0.85)")
    g.add_argument("--tol", type=float, default=1e-12, help="L1 convergence tolerance")
    g.add_argument("--max-iter", type=int, default=1000)
    g.add_argument("--deterministic", action=argparse.BooleanOptionalAction, default=True,
                   help="exactly rounded reductions for bit-identical reruns (default on)")
    g.add_argument("--labels", type=Path, help="TSV id<TAB>title")
    g.add_argument("--keep-self-loops", action="store_true")
    g.add_argument("-o", "--out", type=Path, help="output file (default stdout)")
    g.add_argument("-q", "--quiet", action="store_true", help="no progress on stderr")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="lirgomax", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def cmd(name, help_, graph=True):
        p = sub.add_parser(name, help=help_, parents=[common])
        if graph:
            p.add_argument("graph", type=Path, help="edge list 'src dst' per line")
        return p

    cmd("pagerank", "PageRank ranking table")
    cmd("cheirank", "CheiRank ranking table")

    p = cmd("linres-pump", "linear response to injection/absorption")
    p.add_argument("--inject", type=int)
    p.add_argument("--absorb", type=int)
    p.add_argument("--pump-file", type=Path, help="TSV node_id<TAB>D_value")
    p.add_argument("--epsilon", type=float,
                   help="also solve at this finite strength and report the deviation")
    p.add_argument("--no-project", action="store_true",
                   help="skip the per-step projection onto the sum-zero subspace")

    p = cmd("linres-sensitivity", "linear response to amplifying one transition")
    p.add_argument("--target", type=int, required=True)
    p.add_argument("--source", type=int, required=True)

    p = cmd("subset", "strongest negative/positive response nodes")
    p.add_argument("--response", type=Path, required=True, help="profile from linres-*")
    p.add_argument("--top-m", type=int, default=20)

    p = cmd("regomax", "reduced Google matrix of a subset")
    p.add_argument("--subset", type=Path, required=True)
    p.add_argument("--out-dir", type=Path, required=True)

    p = cmd("friend-net", "friend/follower network in DOT format", graph=False)
    p.add_argument("--matrix-dir", type=Path, required=True, help="output dir of regomax")
    p.add_argument("--matrix", choices=["gr", "grr", "gqr", "grr+qrnd"], default="grr+qrnd")
    p.add_argument("--direction", choices=["friends", "followers"], default="friends")
    p.add_argument("--subset", type=Path, help="pathway subset (for P1 sign blocks)")
    p.add_argument("--initial", type=int, nargs="+",
                   help="initial node ids (default: five strongest |P1| in the subset)")
    p.add_argument("--n-friends", type=int, default=4)
    p.add_argument("--levels", type=int, default=2)
    p.add_argument("--override", action="append", default=[], metavar="NODE=CLASS",
                   help="block class override for a node id")

    p = cmd("verify", "compare fast path against dense oracle")
    p.add_argument("--inject", type=int)
    p.add_argument("--absorb", type=int)
    p.add_argument("--top-m", type=int, default=5)
    p.add_argument("--threshold", type=float, default=1e-10)
    p.add_argument("--guard", type=int, default=oracle.GUARD)
    return parser


@contextlib.contextmanager
def _output(path: Path | None):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            yield fh


def _load_graph(args) -> DirectedGraph:
    with open(args.graph, encoding="utf-8") as fh:
        return load_edge_list(fh, drop_self_loops=not args.keep_self_loops)


def _labels(args) -> LabelMap | None:
    if args.labels is None:
        return None
    with open(args.labels, encoding="utf-8") as fh:
        return load_labels(fh)


def _operator(args, g: DirectedGraph) -> GoogleOperator:
    return GoogleOperator(g, args.alpha, deterministic=args.deterministic)


def _pagerank(args, op) -> np.ndarray:
    logger.info("computing PageRank (N=%d, edges=%d)", op.n, op.graph.n_edges)
    return pagerank(op, args.tol, args.max_iter)


def cmd_pagerank(args) -> int:
    g = _load_graph(args)
    p0 = _pagerank(args, _operator(args, g))
    with _output(args.out) as out:
        export.write_ranking(out, p0, _labels(args))
    return 0


def cmd_cheirank(args) -> int:
    g = _load_graph(args)
    logger.info("computing CheiRank (N=%d)", g.n_nodes)
    pc = cheirank(g, args.alpha, args.tol, args.max_iter, args.deterministic)
    with _output(args.out) as out:
        export.write_ranking(out, pc, _labels(args))
    return 0


def cmd_linres_pump(args) -> int:
    g = _load_graph(args)
    op = _operator(args, g)
    p0 = _pagerank(args, op)
    if args.pump_file is not None:
        with open(args.pump_file, encoding="utf-8") as fh:
            spec = response.load_pump_spec(fh)
        v0 = response.pump_general_v0(op, p0, spec)
    elif args.inject is not None and args.absorb is not None:
        spec = response.PumpSpec.balanced_pair(p0, args.inject, args.absorb)
        v0 = response.pump_pair_v0(op, p0, args.inject, args.absorb)
    else:
        raise UsageError("linres-pump needs --inject and --absorb, or --pump-file")
    logger.info("solving linear response")
    p1 = response.solve_linear_response(op, p0, v0, args.tol, args.max_iter,
                                        projected=not args.no_project)
    if args.epsilon is not None:
        pe = response.solve_perturbed_pump(op, spec, args.epsilon, args.tol, args.max_iter)
        dev = np.abs((pe - p0) / args.epsilon - p1).max()
        logger.warning("finite-epsilon check: eps=%g max|dP(eps) - P1| = %.3e", args.epsilon, dev)
    with _output(args.out) as out:
        export.export_response_profile(p1, out)
    return 0


def cmd_linres_sensitivity(args) -> int:
    g = _load_graph(args)
    op = _operator(args, g)
    p0 = _pagerank(args, op)
    v0 = response.sensitivity_v0(op, p0, args.target, args.source)
    p1 = response.solve_linear_response(op, p0, v0, args.tol, args.max_iter)
    with _output(args.out) as out:
        export.export_response_profile(p1, out, p0=p0)
    return 0


def cmd_subset(args) -> int:
    g = _load_graph(args)
    p0 = _pagerank(args, _operator(args, g))
    with open(args.response, encoding="utf-8") as fh:
        p1 = export.read_response_profile(fh, g.n_nodes)
    sel = response.select_pathway_subset(p1, args.top_m, p0)
    with _output(args.out) as out:
        export.write_pathway_subset(out, sel, _labels(args))
    return 0


def cmd_regomax(args) -> int:
    g = _load_graph(args)
    op = _operator(args, g)
    with open(args.subset, encoding="utf-8") as fh:
        nodes, _ = export.read_subset(fh)
    logger.info("reduced Google matrix for %d nodes", nodes.size)
    R = regomax.compute_reduced(op, nodes, args.tol, args.max_iter)
    nd, combined, w_comb = regomax.qr_nondiagonal(R)
    mats = {"GR": R.GR, "Grr": R.Grr, "Gpr": R.Gpr, "Gqr": R.Gqr,
            "Gqr_nd": nd, "Grr+Gqr_nd": combined}
    args.out_dir.mkdir(parents=True, exist_ok=True)
    for name, M in mats.items():
        with open(args.out_dir / f"{name}.tsv", "w", encoding="utf-8", newline="\n") as fh:
            export.write_matrix(fh, M, nodes)
        with open(args.out_dir / f"{name}.plot.tsv", "w", encoding="utf-8", newline="\n") as fh:
            export.export_matrix_plot_data(M, fh)
    wr, wrr, wpr, wqr = R.weights
    neg = export.negative_entry_stats(combined)
    meta = {"n_nodes": g.n_nodes, "n_r": R.n_r, "alpha": args.alpha,
            "lambda_c": R.lambda_c, "W_R": wr, "W_rr": wrr, "W_pr": wpr, "W_qr": wqr,
            "W_rr+qrnd": w_comb, "series_order": R.series_order,
            "eigen_iterations": R.eigen_iterations,
            "negative_count_rr+qrnd": neg["count"], "negative_min_rr+qrnd": neg["min"],
            "positive_max_rr+qrnd": neg["max_positive"]}
    with open(args.out_dir / "metadata.txt", "w", encoding="utf-8", newline="\n") as fh:
        export.write_metadata(fh, meta)
    with _output(args.out) as out:
        export.write_metadata(out, meta)
    return 0


def cmd_friend_net(args) -> int:
    name = MATRIX_FILES[args.matrix]
    with open(args.matrix_dir / f"{name}.tsv", encoding="utf-8") as fh:
        ids, M = export.read_matrix(fh)
    pos = {int(k): i for i, k in enumerate(ids)}
    blocks = None
    values = None
    if args.subset is not None:
        with open(args.subset, encoding="utf-8") as fh:
            nodes, values = export.read_subset(fh)
        if not np.array_equal(nodes, ids):
            raise UsageError("subset file does not match the matrix axes")
        if values is not None:
            blocks = ["negative" if v < 0 else "positive" for v in values]
    if args.initial:
        missing = [k for k in args.initial if k not in pos]
        if missing:
            raise UsageError(f"initial nodes not in subset: {missing}")
        initial = [pos[k] for k in args.initial]
    elif values is not None:
        initial = rank_order(values, by_magnitude=True)[:5].tolist()
    else:
        initial = list(range(min(5, ids.size)))
    overrides = {}
    for item in args.override:
        node, sep, cls = item.partition("=")
        if not sep or not node.strip().isdigit() or int(node) not in pos:
            raise UsageError(f"bad --override {item!r}")
        overrides[pos[int(node)]] = cls
    labels = _labels(args)
    names = [labels.lookup(k) if labels else str(k) for k in ids.tolist()]
    net = build_friend_network(M, initial, args.n_friends, args.levels, args.direction,
                               blocks=blocks, labels=names, overrides=overrides)
    with _output(args.out) as out:
        export_dot(net, out, name=args.direction)
    return 0


def cmd_verify(args) -> int:
    g = _load_graph(args)
    if g.n_nodes > args.guard:
        raise UsageError(f"verify needs N <= {args.guard} (got {g.n_nodes}); raise --guard")
    op = _operator(args, g)
    G = oracle.dense_google(g, args.alpha, guard=args.guard)
    checks = []
    p0 = _pagerank(args, op)
    checks.append(("pagerank", np.abs(p0 - oracle.dense_pagerank(G)).max()))
    pc = cheirank(g, args.alpha, args.tol, args.max_iter, args.deterministic)
    Gt = oracle.dense_google(transpose(g), args.alpha, guard=args.guard)
    checks.append(("cheirank", np.abs(pc - oracle.dense_pagerank(Gt)).max()))

    order = rank_order(p0)
    i = order[0] if args.inject is None else args.inject
    j = order[1 % g.n_nodes] if args.absorb is None else args.absorb
    v0 = response.pump_pair_v0(op, p0, i, j)
    p1 = response.solve_linear_response(op, p0, v0, args.tol, args.max_iter)
    checks.append(("linres_pump", np.abs(p1 - oracle.dense_linear_response(G, p0, v0)).max()))
    v0s = response.sensitivity_v0(op, p0, i, j)
    p1s = response.solve_linear_response(op, p0, v0s, args.tol, args.max_iter)
    checks.append(("linres_sensitivity",
                   np.abs(p1s - oracle.dense_linear_response(G, p0, v0s)).max()))

    sel = response.select_pathway_subset(p1, args.top_m, p0)
    if 0 < len(sel) < g.n_nodes:
        R = regomax.compute_reduced(op, sel.nodes, args.tol, args.max_iter)
        checks.append(("regomax_GR", np.abs(R.GR - oracle.dense_reduced(G, sel.nodes)).max()))
        checks.append(("regomax_decomposition", np.abs(R.GR - R.Grr - R.Gpr - R.Gqr).max()))
        checks.append(("regomax_column_sums", np.abs(R.GR.sum(axis=0) - 1.0).max()))

    ok = True
    with _output(args.out) as out:
        out.write("check\tmax_deviation\tthreshold\tstatus\n")
        for name, dev in checks:
            passed = bool(dev <= args.threshold)
            ok &= passed
            out.write(f"{name}\t{dev:.3e}\t{args.threshold:.1e}\t{'PASS' if passed else 'FAIL'}\n")
    return 0 if ok else EXIT_VERIFY


COMMANDS = {
    "pagerank": cmd_pagerank, "cheirank": cmd_cheirank, "linres-pump": cmd_linres_pump,
    "linres-sensitivity": cmd_linres_sensitivity, "subset": cmd_subset,
    "regomax": cmd_regomax, "friend-net": cmd_friend_net, "verify": cmd_verify,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if not 0.0 < args.alpha < 1.0:
        parser.print_usage(sys.stderr)
        print("lirgomax: error: --alpha must lie in (0, 1)", file=sys.stderr)
        return EXIT_USAGE
    if not logger.handlers:
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter("%(asctime)s %(name)s: %(message)s"))
        logger.addHandler(handler)
    logger.setLevel(logging.WARNING if args.quiet else logging.INFO)
    try:
        return COMMANDS[args.command](args)
    except ConvergenceError as exc:
        print(f"lirgomax: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except (UsageError, EdgeListError, oracle.GuardError, ValueError, IndexError, OSError) as exc:
        print(f"lirgomax: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
