#!/usr/bin/env python3
"""
zigzag-proptest CLI

Usage:
    zigzag-proptest spectrum --in G.rotmap
    zigzag-proptest square --in G.rotmap
    zigzag-proptest zigzag --left G1.rotmap --right G2.rotmap
    zigzag-proptest expander-family --D 2 --depth 2 [--H H.rotmap]
    zigzag-proptest build-model --D 2 --depth 2 [--H H.rotmap] [--levels out.levels]
    zigzag-proptest validate-model --D 2 [--in model.txt] [--H H.rotmap]
    zigzag-proptest reduce --in A.txt --d 3 [--corr out.corr]
    zigzag-proptest decode --in G.graph --relations E
    zigzag-proptest type-histogram --in A.txt --r 1
    zigzag-proptest sampling-distance --in A.txt --other B.txt --r-max 2
    zigzag-proptest test-freeness --graph g.txt --tau tau.ball --eps 0.1 --trials 100
    zigzag-proptest test-regularity --graph g.txt --tau tau.ball --eps 0.1
    zigzag-proptest gsf-check --family F.marked --graph g.txt [--cover 0,3]
    zigzag-proptest gsf-realisations --tau tau.ball --k 2 --d 2
    zigzag-proptest deg2-augment --family F.marked --k 3 --n 5
    zigzag-proptest nontestability-demo --D 2 --depth 2 --r 1

Reports go to stdout as TSV with a header row; artifacts (rotation maps,
structures, graphs, marked families) go to stdout in their text format.
Exit status: 0 success, 1 violation or reject, 2 usage or format error.
"""

import argparse
import logging
import sys
from typing import Optional

from zigzag_proptest import formats, graphcore, gsf, reduction, structures, testers, zzmodel
from zigzag_proptest.config import RunConfig, get_settings
from zigzag_proptest.errors import PreconditionError
from zigzag_proptest.models import RotMapGraph, Signature

logger = logging.getLogger("zigzag_proptest")

OK, VIOLATION, USAGE = 0, 1, 2


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return f"{x:.12g}"
    return str(x)


def _emit(header: list[str], rows) -> None:
    print("\t".join(header))
    for row in rows:
        print("\t".join(_fmt(x) for x in row))


def _source(path: Optional[str]) -> str:
    """Literal text for `-` or no path, else the path itself."""
    if path is None or path == "-":
        return sys.stdin.read()
    return path


def _default_H(D: int, seed: int) -> RotMapGraph:
    return graphcore.random_rotmap(D**4, D, seed)


def _load_H(args) -> RotMapGraph:
    return formats.parse_rotmap(args.H) if args.H else _default_H(args.D, args.seed)


# =============================================================================
# Rotation maps
# =============================================================================


def cmd_spectrum(args) -> int:
    R = formats.parse_rotmap(_source(args.input))
    spec = graphcore.spectrum(R)
    connected, bipartite = graphcore.connectivity_flags(R)
    rows = [(f"eig{i}", x) for i, x in enumerate(spec.eigenvalues)]
    rows += [("lambda", spec.lam), ("connected", connected), ("bipartite", bipartite)]
    _emit(["key", "value"], rows)
    return OK


def cmd_square(args) -> int:
    R = formats.parse_rotmap(_source(args.input))
    sys.stdout.write(formats.format_rotmap(graphcore.square(R)))
    return OK


def cmd_zigzag(args) -> int:
    R1 = formats.parse_rotmap(args.left)
    R2 = formats.parse_rotmap(args.right)
    sys.stdout.write(formats.format_rotmap(graphcore.zigzag(R1, R2)))
    return OK


def cmd_expander_family(args) -> int:
    family = graphcore.iterated_family(_load_H(args), args.depth)
    cap = get_settings().dense_cap
    rows = []
    for m, G in enumerate(family, start=1):
        lam = graphcore.spectrum(G).lam if G.n <= cap else float("nan")
        rows.append((m, G.n, G.D, lam))
    _emit(["m", "n", "D", "lambda"], rows)
    return OK


# =============================================================================
# Models
# =============================================================================


def cmd_build_model(args) -> int:
    M = zzmodel.build_model(_load_H(args), args.depth, cap=args.cap_vertices)
    if args.levels:
        zzmodel.write_levels(M, args.levels)
    sys.stdout.write(formats.format_structure(M.structure))
    return OK


def cmd_validate_model(args) -> int:
    A = formats.parse_structure(_source(args.input))
    reports = zzmodel.validate_model(A, args.D, _load_H(args))
    rows = [
        (name, report.ok, len(report.violations), report.violations[0] if report.violations else "")
        for name, report in reports.items()
    ]
    _emit(["validator", "ok", "violations", "first"], rows)
    return OK if all(report.ok for report in reports.values()) else VIOLATION


def cmd_nontestability_demo(args) -> int:
    if args.depth < 2:
        raise PreconditionError("the demo compares depth n with copies of depth n-1; use --depth 2 or more")
    H = _load_H(args)
    M = zzmodel.build_model(H, args.depth, cap=args.cap_vertices)
    smaller = zzmodel.build_model(H, args.depth - 1, cap=args.cap_vertices)
    B = zzmodel.build_counterexample(M, smaller.structure)
    delta = structures.sampling_distance_r(M.structure, B, args.r)
    bound = zzmodel.nontestability_bound(M)
    expansion = zzmodel.measured_expansion(M)
    _emit(
        ["key", "value"],
        [
            ("elements", M.structure.n),
            ("degree_bound", zzmodel.model_degree(M.D)),
            ("tuples", M.structure.tuple_count()),
            ("lambda_U", expansion.lam),
            ("spectral_expansion", expansion.spectral_bound),
            (f"sampling_distance_r{args.r}", delta),
            ("farness_bound", bound.value),
            ("farness_certified", bound.certified),
        ],
    )
    return OK


# =============================================================================
# Reduction
# =============================================================================


def cmd_reduce(args) -> int:
    A = formats.parse_structure(_source(args.input))
    reduced = reduction.reduce(A, args.d, cap=args.cap_vertices)
    if args.corr:
        with open(args.corr, "w") as fh:
            fh.write(formats.format_correspondence(reduced.cycles))
    sys.stdout.write(formats.format_graph(reduced.graph))
    return OK


def cmd_decode(args) -> int:
    graph = formats.parse_graph(_source(args.input))
    sig = Signature.of(*((name, 2) for name in args.relations.split(",")))
    A, _ = reduction.decode(graph, sig)
    sys.stdout.write(formats.format_structure(A))
    return OK


# =============================================================================
# Neighbourhood statistics
# =============================================================================


def cmd_type_histogram(args) -> int:
    A = formats.parse_structure(_source(args.input))
    reg = structures.new_registry(args.r)
    counts = structures.histogram(A, args.r, reg)
    rows = [(idx, count, reg.representatives[idx].structure.n) for idx, count in enumerate(counts)]
    _emit(["type", "count", "ball_size"], rows)
    return OK


def cmd_sampling_distance(args) -> int:
    A = formats.parse_structure(args.input)
    B = formats.parse_structure(args.other)
    result = structures.sampling_distance(A, B, args.r_max)
    rows = [(r, term) for r, term in enumerate(result.terms)]
    rows += [("total", result.value), ("tail_bound", result.tail_bound)]
    _emit(["r", "delta"], rows)
    return OK


# =============================================================================
# Testers
# =============================================================================


def _run_tester(args, tester) -> int:
    graph = formats.parse_graph(args.graph)
    tau = formats.parse_ball(args.tau)
    d = args.d if args.d is not None else max(1, max((x for _, x in graph.degree()), default=0))
    verdicts = testers.run_trials(
        lambda o: tester(o, tau, args.eps, max_samples=args.max_samples),
        lambda seed: testers.GraphOracle(graph, d, seed=seed),
        range(args.seed, args.seed + args.trials),
        threads=args.threads,
    )
    rejects = sum(1 for v in verdicts if not v.accept)
    causes = sorted({v.cause for v in verdicts if v.cause})
    mean_queries = sum(v.queries for v in verdicts) / len(verdicts)
    _emit(
        ["trials", "rejects", "accept_rate", "mean_queries", "causes"],
        [(len(verdicts), rejects, 1 - rejects / len(verdicts), mean_queries, ",".join(causes) or "-")],
    )
    return VIOLATION if rejects else OK


def cmd_test_freeness(args) -> int:
    return _run_tester(args, testers.freeness_tester)


def cmd_test_regularity(args) -> int:
    return _run_tester(args, testers.regularity_tester)


# =============================================================================
# GSF
# =============================================================================


def cmd_gsf_check(args) -> int:
    family = formats.parse_marked_family(args.family)
    graph = formats.parse_graph(args.graph)
    rows = []
    for idx, F in enumerate(family):
        f = gsf.embed(F, graph)
        rows.append((idx, f is not None, "-" if f is None else ",".join(str(f[v]) for v in range(F.n))))
    _emit(["member", "embeds", "embedding"], rows)
    if args.cover is not None:
        B = [int(v) for v in args.cover.split(",") if v]
        print(f"covers\t{_fmt(gsf.covers(B, family, graph))}")
    return OK if all(not row[1] for row in rows) else VIOLATION


def cmd_gsf_realisations(args) -> int:
    tau = formats.parse_ball(args.tau)
    family = gsf.k_realisations(tau, args.k, args.d, args.size_cap)
    sys.stdout.write(formats.format_marked_family(family))
    return OK


def cmd_deg2_augment(args) -> int:
    family = formats.parse_marked_family(args.family)
    k = args.k if args.k is not None else max((F.n for F in family), default=1)
    augmented = gsf.deg2_augment(family, k, args.n, d=args.d)
    sys.stdout.write(formats.format_marked_family(augmented))
    return OK


# =============================================================================
# Entry point
# =============================================================================


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING (default: env or WARNING)")
    common.add_argument("--threads", type=int, default=1, help="worker threads for trials (default: 1)")
    common.add_argument("--seed", type=int, default=0, help="random seed (default: 0)")
    common.add_argument("--cap-vertices", type=int, default=None, help="materialization cap override")

    parser = argparse.ArgumentParser(
        description="Zig-zag expander models, gadget reductions and bounded-degree property testers",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", help="Command to run")

    def add(name: str, help_text: str) -> argparse.ArgumentParser:
        return sub.add_parser(name, help=help_text, parents=[common])

    p = add("spectrum", "Eigenvalues, λ and connectivity of a rotation map")
    p.add_argument("--in", dest="input", help="rotmap file (default: stdin)")

    p = add("square", "Square of a rotation map")
    p.add_argument("--in", dest="input", help="rotmap file (default: stdin)")

    p = add("zigzag", "Zig-zag product of two rotation maps")
    p.add_argument("--left", required=True, help="rotmap G1")
    p.add_argument("--right", required=True, help="rotmap G2 on D1 vertices")

    for name, help_text in (
        ("expander-family", "Sizes and λ of G_1..G_depth"),
        ("build-model", "Zig-zag model structure of a given depth"),
        ("validate-model", "Run the four model validators"),
        ("nontestability-demo", "Model vs copies of a shallower model"),
    ):
        p = add(name, help_text)
        p.add_argument("--D", type=int, default=2, help="base degree (default: 2)")
        p.add_argument("--H", default=None, help="rotmap of H (default: random, keyed by --seed)")
        if name != "validate-model":
            p.add_argument("--depth", type=int, default=1, help="depth (default: 1)")
        if name == "build-model":
            p.add_argument("--levels", default=None, help="write the element -> level sidecar here")
        if name == "validate-model":
            p.add_argument("--in", dest="input", help="structure file (default: stdin)")
        if name == "nontestability-demo":
            p.add_argument("--r", type=int, default=1, help="sampling-distance radius (default: 1)")

    p = add("reduce", "3-regular graph of a structure")
    p.add_argument("--in", dest="input", help="structure file (default: stdin)")
    p.add_argument("--d", type=int, required=True, help="degree bound, at least 3")
    p.add_argument("--corr", default=None, help="write the element -> cycle correspondence here")

    p = add("decode", "Structure of a reduced graph")
    p.add_argument("--in", dest="input", help="graph file (default: stdin)")
    p.add_argument("--relations", required=True, help="comma-separated binary relation names")

    p = add("type-histogram", "r-type histogram of a structure")
    p.add_argument("--in", dest="input", help="structure file (default: stdin)")
    p.add_argument("--r", type=int, default=1, help="radius (default: 1)")

    p = add("sampling-distance", "Sampling distance between two structures")
    p.add_argument("--in", dest="input", required=True, help="first structure")
    p.add_argument("--other", required=True, help="second structure")
    p.add_argument("--r-max", type=int, default=2, help="largest radius (default: 2)")

    for name in ("test-freeness", "test-regularity"):
        p = add(name, f"Run the {name.split('-')[1]} tester over several seeds")
        p.add_argument("--graph", required=True, help="graph file")
        p.add_argument("--tau", required=True, help="ball file of the type")
        p.add_argument("--eps", type=float, default=0.1, help="proximity parameter (default: 0.1)")
        p.add_argument("--d", type=int, default=None, help="degree bound (default: max degree)")
        p.add_argument("--trials", type=int, default=1, help="number of seeds (default: 1)")
        p.add_argument("--max-samples", type=int, default=None, help="cap on sampled balls")

    p = add("gsf-check", "Embeddings of a marked family into a graph")
    p.add_argument("--family", required=True, help="marked family file")
    p.add_argument("--graph", required=True, help="graph file")
    p.add_argument("--cover", default=None, help="comma-separated vertex set to test as a cover")

    p = add("gsf-realisations", "k-realisations of a type")
    p.add_argument("--tau", required=True, help="ball file of the type")
    p.add_argument("--k", type=int, default=1, help="number of centers (default: 1)")
    p.add_argument("--d", type=int, default=2, help="degree bound (default: 2)")
    p.add_argument("--size-cap", type=int, default=9, help="largest realisation (default: 9)")

    p = add("deg2-augment", "Degree-≤2 augmentation of a marked family at n vertices")
    p.add_argument("--family", required=True, help="marked family file")
    p.add_argument("--n", type=int, required=True, help="number of vertices")
    p.add_argument("--k", type=int, default=None, help="size bound (default: largest member)")
    p.add_argument("--d", type=int, default=2, help="degree bound, 1 or 2 (default: 2)")

    return parser


COMMANDS = {
    "spectrum": cmd_spectrum,
    "square": cmd_square,
    "zigzag": cmd_zigzag,
    "expander-family": cmd_expander_family,
    "build-model": cmd_build_model,
    "validate-model": cmd_validate_model,
    "reduce": cmd_reduce,
    "decode": cmd_decode,
    "type-histogram": cmd_type_histogram,
    "sampling-distance": cmd_sampling_distance,
    "test-freeness": cmd_test_freeness,
    "test-regularity": cmd_test_regularity,
    "gsf-check": cmd_gsf_check,
    "gsf-realisations": cmd_gsf_realisations,
    "deg2-augment": cmd_deg2_augment,
    "nontestability-demo": cmd_nontestability_demo,
}


def _run_config(args) -> RunConfig:
    return RunConfig(
        command=args.command,
        input=getattr(args, "input", None),
        D=getattr(args, "D", 2),
        depth=getattr(args, "depth", 1),
        r=getattr(args, "r", 1),
        eps=getattr(args, "eps", 0.1),
        seed=args.seed,
        trials=getattr(args, "trials", 1),
        threads=args.threads,
        cap_vertices=args.cap_vertices,
    )


def run(argv: Optional[list[str]] = None) -> int:
    parser = _parser()
    args = parser.parse_args(argv)

    if not args.command:
        parser.print_help()
        return USAGE

    try:
        level = args.log_level or get_settings().log_level
        logging.basicConfig(
            stream=sys.stderr, level=level.upper(), format="%(levelname)s %(name)s: %(message)s"
        )
        config = _run_config(args)
        logger.debug(f"Run config: {config.model_dump()}")
        return COMMANDS[args.command](args)
    except KeyboardInterrupt:
        print("\nCancelled.", file=sys.stderr)
        return VIOLATION
    except (ValueError, OSError) as e:
        print(f"Error: {e}", file=sys.stderr)
        return USAGE


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
