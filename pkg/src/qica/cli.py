"""Command line front end.

Subcommand groups:

  ca         construct | verify | search-starter | to-mols | bounds
  qi         build | clique | indep | chroma | hom | ca-on-graph
  spectra    exact spectrum of one meet-class relation
  eigenmatrix  modified eigenmatrix of all meet-class quotients
  scheme-check full or sampled association-scheme verification
  extremal   max: largest pairwise-related family of partitions
  partition  enum | count | baranyai

Exit codes: 0 success or witness found; 1 well-posed negative answer
(invalid array, no starter, no homomorphism, scheme refuted); 2 usage or
parse errors; 3 budget or cap exhausted with the answer unknown.

Every command writes its result to --out (stdout by default) and accepts
--jobs, which is advisory only: output is a function of the other flags
and --seed alone.  Diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Sequence

from .covering import (
    CoveringError,
    LatinSquareSet,
    StarterVector,
    ca_from_text,
    ca_to_mols,
    ca_to_text,
    construct_finite_field_ca,
    expand_starter,
    iterate_block_recursive,
    search_starter,
    size_bounds,
    starter_to_text,
    verify,
    verify_starter,
)
from .graphs import (
    CapExceeded,
    Graph,
    GraphError,
    GraphSpec,
    build_graph,
    chromatic_number,
    covering_array_on_graph,
    find_homomorphism,
    graph_from_text,
    graph_to_text,
    max_clique,
    max_independent_set,
)
from .partitions import (
    FAMILIES,
    PartitionError,
    baranyai_factorization,
    count_partitions,
    enumerate_partitions,
)
from .spectra import (
    SchemeVerdict,
    SpectraError,
    StreamCapExceeded,
    check_association_scheme,
    equitable_partition,
    eigenmatrix_to_json,
    eigenmatrix_to_text,
    modified_eigenmatrix,
    spectrum,
    spectrum_to_json,
    spectrum_to_text,
)


def _emit(text: str, out: str | None) -> None:
    if not text.endswith("\n"):
        text += "\n"
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


def _read(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _note(msg: str) -> None:
    print(f"qica: {msg}", file=sys.stderr)


def _bool(flag: bool) -> str:
    return "true" if flag else "false"


# ---------------------------------------------------------------------------
# ca


def _cmd_ca_construct(args: argparse.Namespace) -> int:
    if args.method == "finite-field":
        ca = construct_finite_field_ca(args.k)
    elif args.method == "block-recursive":
        ca = iterate_block_recursive(args.k, args.iterations)
    else:
        if args.starter is None:
            raise CoveringError("--method starter needs --starter \"0 a b ...\"")
        entries = tuple(int(tok) for tok in args.starter.split())
        sv = StarterVector(args.k, entries)
        ok, misses = verify_starter(sv)
        if not ok:
            _note(f"invalid starter: {len(misses)} uncovered requirements")
            return 1
        ca = expand_starter(sv)
    _emit(ca_to_text(ca), args.out)
    return 0


def _cmd_ca_verify(args: argparse.Namespace) -> int:
    ca = ca_from_text(_read(args.array))
    report = verify(ca)
    lines = [f"valid\t{_bool(report.valid)}", f"misses\t{len(report.misses)}"]
    for (i, j), (a, b) in report.misses:
        lines.append(f"miss\t{i} {j}\t{a} {b}")
    _emit("\n".join(lines), args.out)
    return 0 if report.valid else 1


def _cmd_ca_search_starter(args: argparse.Namespace) -> int:
    res = search_starter(args.k, args.r, mode=args.mode,
                         seed=args.seed, budget=args.budget)
    if res.found:
        assert res.vector is not None
        _emit(starter_to_text(res.vector), args.out)
        return 0
    _emit(f"status\t{res.status}\nsteps\t{res.steps}", args.out)
    if res.status == "none":
        _note(f"no valid starter for k={args.k}, r={args.r} "
              f"({res.steps} candidates checked)")
        return 1
    _note(f"budget of {args.budget} exhausted after {res.steps} steps")
    return 3


def _mols_to_text(ms: LatinSquareSet) -> str:
    lines = [f"mols {ms.k} {len(ms.squares)}"]
    for t, sq in enumerate(ms.squares):
        lines.append(f"square {t}")
        lines.extend(" ".join(str(int(x)) for x in row) for row in sq)
    return "\n".join(lines) + "\n"


def _cmd_ca_to_mols(args: argparse.Namespace) -> int:
    ca = ca_from_text(_read(args.array))
    try:
        ms = ca_to_mols(ca)
    except CoveringError as exc:
        _note(str(exc))
        return 1
    _emit(_mols_to_text(ms), args.out)
    return 0


def _cmd_ca_bounds(args: argparse.Namespace) -> int:
    bounds = size_bounds(r=args.r, k=args.k, n=args.n,
                         pbtc=args.pbtc, blocks=args.blocks)
    if not bounds:
        raise CoveringError("no bound is computable from the given parameters")
    if args.format == "json":
        payload = {name: val if isinstance(val, int) else str(val)
                   for name, val in bounds.items()}
        _emit(json.dumps(payload, indent=2), args.out)
    else:
        _emit("\n".join(f"{name}\t{val}" for name, val in bounds.items()),
              args.out)
    return 0


# ---------------------------------------------------------------------------
# qi


def _spec_from_args(args: argparse.Namespace) -> GraphSpec:
    return GraphSpec(args.family, args.n,
                     k=args.k, r=args.r,
                     relation=args.relation or "",
                     quantifier=args.quant or "",
                     uniform=not args.all_partitions,
                     t=args.t)


def _load_graph(args: argparse.Namespace) -> Graph:
    if args.in_path is not None:
        return graph_from_text(_read(args.in_path))
    if args.family is None:
        raise GraphError("give --in FILE or a --family build spec")
    if args.n is None:
        raise GraphError("building a graph needs -n")
    return build_graph(_spec_from_args(args))


def _label_of(g: Graph, v: int) -> str:
    if g.labels is None:
        return str(v)
    lab = g.labels[v]
    return lab.format() if hasattr(lab, "format") else str(lab)


def _witness_lines(g: Graph, vertices: Sequence[int]) -> list[str]:
    return [f"vertex\t{v}\t{_label_of(g, v)}" for v in vertices]


def _cmd_qi_build(args: argparse.Namespace) -> int:
    if args.family is None or args.n is None:
        raise GraphError("qi build needs --family and -n")
    g = build_graph(_spec_from_args(args))
    _emit(graph_to_text(g), args.out)
    return 0


def _cmd_qi_clique(args: argparse.Namespace) -> int:
    g = _load_graph(args)
    res = max_clique(g, budget=args.budget)
    lines = [f"size\t{res.size}", f"exact\t{_bool(res.exact)}"]
    lines += _witness_lines(g, res.vertices)
    _emit("\n".join(lines), args.out)
    return 0 if res.exact else 3


def _cmd_qi_indep(args: argparse.Namespace) -> int:
    g = _load_graph(args)
    res = max_independent_set(g, budget=args.budget)
    lines = [f"size\t{len(res.vertices)}",
             f"exact\t{_bool(res.exact)}",
             f"certified\t{_bool(res.certified)}"]
    if res.ratio_bound is not None:
        lines.append(f"ratio-bound\t{res.ratio_bound!r}")
    lines += _witness_lines(g, res.vertices)
    _emit("\n".join(lines), args.out)
    return 0 if res.exact else 3


def _cmd_qi_chroma(args: argparse.Namespace) -> int:
    g = _load_graph(args)
    res = chromatic_number(g, budget=args.budget)
    lines = [f"chromatic\t{res.value if res.value is not None else 'unknown'}",
             f"lower\t{res.lower}", f"upper\t{res.upper}",
             f"exact\t{_bool(res.exact)}",
             "coloring\t" + " ".join(str(c) for c in res.coloring)]
    _emit("\n".join(lines), args.out)
    return 0 if res.exact else 3


def _cmd_qi_hom(args: argparse.Namespace) -> int:
    g = graph_from_text(_read(args.from_path))
    h = graph_from_text(_read(args.to_path))
    res = find_homomorphism(g, h, budget=args.budget)
    lines = [f"status\t{res.status}"]
    if res.found:
        assert res.hom is not None
        lines.append("map\t" + " ".join(str(x) for x in res.hom.map))
    _emit("\n".join(lines), args.out)
    if res.found:
        return 0
    if res.status == "none":
        _note("no homomorphism exists")
        return 1
    _note("budget exhausted, homomorphism existence unknown")
    return 3


def _cmd_qi_ca_on_graph(args: argparse.Namespace) -> int:
    g = _load_graph(args)
    res = covering_array_on_graph(g, args.n_cols, args.k_symbols,
                                  budget=args.budget)
    if res.status == "found":
        if res.ca is None:
            _emit("status\tfound", args.out)
        else:
            _emit(ca_to_text(res.ca), args.out)
        return 0
    _emit(f"status\t{res.status}", args.out)
    if res.status == "none":
        _note("no covering array on this graph with the given n and k")
        return 1
    _note("budget exhausted, existence unknown")
    return 3


# ---------------------------------------------------------------------------
# spectra / eigenmatrix / scheme-check


def _parse_relation(text: str) -> int | str:
    return int(text) if text.lstrip("-").isdigit() else text


def _cmd_spectra(args: argparse.Namespace) -> int:
    s = spectrum(args.n, args.k, relation=_parse_relation(args.relation))
    if args.format == "json":
        _emit(spectrum_to_json(s), args.out)
    else:
        _emit(spectrum_to_text(s), args.out)
    return 0


def _cmd_eigenmatrix(args: argparse.Namespace) -> int:
    em = modified_eigenmatrix(args.n, args.k)
    if args.format == "json":
        _emit(eigenmatrix_to_json(em), args.out)
    else:
        mcp = equitable_partition(args.n, args.k)
        _emit(eigenmatrix_to_text(em, mcp), args.out)
    if not em.commuting:
        _note("quotient matrices do not commute; no common eigenbasis")
        return 1
    return 0


def _verdict_lines(verdict: SchemeVerdict) -> list[str]:
    lines = [f"status\t{verdict.status}",
             f"mode\t{verdict.mode}",
             f"classes\t{verdict.classes}",
             f"symmetric\t{_bool(verdict.symmetric)}",
             f"pairs-checked\t{verdict.pairs_checked}"]
    ce = verdict.counterexample
    if ce is not None:
        lines.append(f"counterexample\t{ce.kind}")
        lines.append(f"pair-p\t{ce.pair[0].format()}")
        lines.append(f"pair-q\t{ce.pair[1].format()}")
        if ce.relations is not None:
            lines.append(f"relations\t{ce.relations[0]} {ce.relations[1]}")
        if ce.expected is not None:
            lines.append(f"expected\t{ce.expected}")
        if ce.got is not None:
            lines.append(f"got\t{ce.got}")
    if verdict.p_numbers is not None:
        m = verdict.p_numbers.shape[0]
        for c in range(m):
            for i in range(m):
                row = " ".join(str(int(x)) for x in verdict.p_numbers[c, i])
                lines.append(f"p\t{c} {i}\t{row}")
    return lines


def _verdict_json(verdict: SchemeVerdict) -> str:
    ce = verdict.counterexample
    payload: dict[str, object] = {
        "status": verdict.status,
        "mode": verdict.mode,
        "classes": verdict.classes,
        "symmetric": verdict.symmetric,
        "pairs_checked": verdict.pairs_checked,
        "counterexample": None if ce is None else {
            "kind": ce.kind,
            "pair": [ce.pair[0].format(), ce.pair[1].format()],
            "relations": None if ce.relations is None else list(ce.relations),
            "expected": ce.expected,
            "got": ce.got,
        },
    }
    if verdict.p_numbers is not None:
        payload["p_numbers"] = verdict.p_numbers.tolist()
    return json.dumps(payload, indent=2)


def _cmd_scheme_check(args: argparse.Namespace) -> int:
    verdict = check_association_scheme(args.n, args.k, mode=args.mode,
                                       samples=args.samples, seed=args.seed)
    if args.format == "json":
        _emit(_verdict_json(verdict), args.out)
    else:
        _emit("\n".join(_verdict_lines(verdict)), args.out)
    if verdict.status == "refuted":
        _note("the meet-class relations do not form an association scheme")
        return 1
    return 0


# ---------------------------------------------------------------------------
# extremal


def _cmd_extremal_max(args: argparse.Namespace) -> int:
    spec = GraphSpec("relation", args.n, k=args.k,
                     relation=args.relation, quantifier=args.type,
                     uniform=not args.all_partitions, t=args.t)
    g = build_graph(spec)
    res = max_clique(g, budget=args.budget)
    lines = [f"relation\t{args.relation}", f"type\t{args.type}",
             f"size\t{res.size}", f"exact\t{_bool(res.exact)}"]
    lines += _witness_lines(g, res.vertices)
    _emit("\n".join(lines), args.out)
    return 0 if res.exact else 3


# ---------------------------------------------------------------------------
# partition


def _cmd_partition_enum(args: argparse.Namespace) -> int:
    parts = enumerate_partitions(args.n, args.k, args.family,
                                 min_size=args.min_size)
    _emit("\n".join(p.format() for p in parts) or "", args.out)
    return 0


def _cmd_partition_count(args: argparse.Namespace) -> int:
    _emit(str(count_partitions(args.n, args.k, args.family,
                               min_size=args.min_size)), args.out)
    return 0


def _cmd_partition_baranyai(args: argparse.Namespace) -> int:
    fac = baranyai_factorization(args.n, args.c)
    lines = [f"factors\t{len(fac.factors)}"]
    lines += [f"factor\t{i}\t{p.format()}" for i, p in enumerate(fac.factors)]
    _emit("\n".join(lines), args.out)
    return 0


# ---------------------------------------------------------------------------
# parser


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--out", default=None, metavar="PATH",
                     help="write the result here instead of stdout")
    sub.add_argument("--jobs", type=int, default=1, metavar="N",
                     help="worker hint; advisory, never changes outputs")


def _add_format(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--format", choices=("tsv", "json"), default="tsv")


def _add_build_flags(sub: argparse.ArgumentParser,
                     family_required: bool = False) -> None:
    sub.add_argument("--family", choices=("qi", "uqi", "auqi", "kneser",
                                          "complete", "relation"),
                     required=family_required, default=None)
    sub.add_argument("-n", type=int, default=None, help="ground-set size")
    sub.add_argument("-k", type=int, default=0, help="number of classes")
    sub.add_argument("-r", type=int, default=0, help="subset size (kneser)")
    sub.add_argument("--relation",
                     choices=("comparable", "incomparable", "disjoint",
                              "intersecting", "partial-t-intersecting"),
                     default=None)
    sub.add_argument("--quant", choices=("forall", "exists"), default=None)
    sub.add_argument("--all-partitions", action="store_true",
                     help="all k-partitions instead of uniform ones")
    sub.add_argument("-t", type=int, default=0,
                     help="threshold for partial-t-intersecting")


def _add_graph_input(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--in", dest="in_path", default=None, metavar="PATH",
                     help="read the graph from this file")
    _add_build_flags(sub)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qica",
        description="Covering arrays, qualitative independence graphs, "
                    "and set-partition spectra.")
    top = parser.add_subparsers(dest="group", required=True)

    # ca
    ca = top.add_parser("ca", help="covering array construction and checks")
    casub = ca.add_subparsers(dest="command", required=True)

    p = casub.add_parser("construct", help="build a covering array")
    p.add_argument("--method",
                   choices=("finite-field", "block-recursive", "starter"),
                   required=True)
    p.add_argument("-k", type=int, required=True, help="symbol count")
    p.add_argument("-i", "--iterations", type=int, default=1,
                   help="doubling steps for block-recursive")
    p.add_argument("--starter", default=None, metavar="\"0 a b ...\"",
                   help="starter vector entries for --method starter")
    _add_common(p)
    p.set_defaults(func=_cmd_ca_construct)

    p = casub.add_parser("verify", help="check pair coverage of an array")
    p.add_argument("array", help="covering array file")
    _add_common(p)
    p.set_defaults(func=_cmd_ca_verify)

    p = casub.add_parser("search-starter", help="look for a starter vector")
    p.add_argument("-k", type=int, required=True)
    p.add_argument("-r", type=int, required=True)
    p.add_argument("--mode", choices=("exhaustive", "hillclimb"),
                   default="exhaustive")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget", type=int, default=100_000,
                   help="candidate budget for hillclimb mode")
    _add_common(p)
    p.set_defaults(func=_cmd_ca_search_starter)

    p = casub.add_parser("to-mols",
                         help="split an orthogonal array into MOLS")
    p.add_argument("array", help="covering array file")
    _add_common(p)
    p.set_defaults(func=_cmd_ca_to_mols)

    p = casub.add_parser("bounds", help="size bounds from the parameters")
    p.add_argument("-r", type=int, default=None, help="row count")
    p.add_argument("-k", type=int, default=None, help="symbol count")
    p.add_argument("-n", type=int, default=None, help="column count")
    p.add_argument("--pbtc", type=int, default=None,
                   help="known binary pair-coverage value")
    p.add_argument("--blocks", type=int, default=None,
                   help="block count for the binary row bound")
    _add_format(p)
    _add_common(p)
    p.set_defaults(func=_cmd_ca_bounds)

    # qi
    qi = top.add_parser("qi", help="qualitative independence graphs")
    qisub = qi.add_subparsers(dest="command", required=True)

    p = qisub.add_parser("build", help="materialize a graph")
    _add_build_flags(p, family_required=True)
    _add_common(p)
    p.set_defaults(func=_cmd_qi_build)

    for name, handler, blurb in (
            ("clique", _cmd_qi_clique, "maximum clique"),
            ("indep", _cmd_qi_indep, "maximum independent set"),
            ("chroma", _cmd_qi_chroma, "chromatic number")):
        p = qisub.add_parser(name, help=blurb)
        _add_graph_input(p)
        p.add_argument("--budget", type=int, default=None,
                       help="search-node budget; exceeding it exits 3")
        _add_common(p)
        p.set_defaults(func=handler)

    p = qisub.add_parser("hom", help="homomorphism between two graphs")
    p.add_argument("--from", dest="from_path", required=True, metavar="PATH")
    p.add_argument("--to", dest="to_path", required=True, metavar="PATH")
    p.add_argument("--budget", type=int, default=None)
    _add_common(p)
    p.set_defaults(func=_cmd_qi_hom)

    p = qisub.add_parser("ca-on-graph",
                         help="covering array indexed by a graph")
    _add_graph_input(p)
    p.add_argument("--cols", dest="n_cols", type=int, required=True,
                   help="number of columns")
    p.add_argument("--symbols", dest="k_symbols", type=int, required=True,
                   help="symbol count")
    p.add_argument("--budget", type=int, default=None)
    _add_common(p)
    p.set_defaults(func=_cmd_qi_ca_on_graph)

    # spectra / eigenmatrix / scheme-check
    p = top.add_parser("spectra",
                       help="exact spectrum of a meet-class relation")
    p.add_argument("-n", type=int, required=True)
    p.add_argument("-k", type=int, required=True)
    p.add_argument("--relation", default="qi",
                   help="qi, meet-<value>, or a class index")
    _add_format(p)
    _add_common(p)
    p.set_defaults(func=_cmd_spectra)

    p = top.add_parser("eigenmatrix",
                       help="modified eigenmatrix of the meet-class quotients")
    p.add_argument("-n", type=int, required=True)
    p.add_argument("-k", type=int, required=True)
    _add_format(p)
    _add_common(p)
    p.set_defaults(func=_cmd_eigenmatrix)

    p = top.add_parser("scheme-check",
                       help="verify the meet classes form an association scheme")
    p.add_argument("-n", type=int, required=True)
    p.add_argument("-k", type=int, required=True)
    p.add_argument("--mode", choices=("full", "sampled"), default="full")
    p.add_argument("--samples", type=int, default=3,
                   help="per-class sample size in sampled mode")
    p.add_argument("--seed", type=int, default=0)
    _add_format(p)
    _add_common(p)
    p.set_defaults(func=_cmd_scheme_check)

    # extremal
    ex = top.add_parser("extremal", help="extremal families of partitions")
    exsub = ex.add_subparsers(dest="command", required=True)
    p = exsub.add_parser("max",
                         help="largest family pairwise under a relation")
    p.add_argument("--relation", required=True,
                   choices=("comparable", "incomparable", "disjoint",
                            "intersecting", "partial-t-intersecting"))
    p.add_argument("--type", required=True, choices=("forall", "exists"),
                   help="quantifier over class pairs")
    p.add_argument("-n", type=int, required=True)
    p.add_argument("-k", type=int, required=True)
    p.add_argument("--all-partitions", action="store_true")
    p.add_argument("-t", type=int, default=0)
    p.add_argument("--budget", type=int, default=None)
    _add_common(p)
    p.set_defaults(func=_cmd_extremal_max)

    # partition
    pt = top.add_parser("partition", help="set-partition families")
    ptsub = pt.add_subparsers(dest="command", required=True)

    p = ptsub.add_parser("enum", help="list a partition family")
    p.add_argument("-n", type=int, required=True)
    p.add_argument("-k", type=int, required=True)
    p.add_argument("--family", choices=FAMILIES, default="all")
    p.add_argument("--min-size", type=int, default=None)
    _add_common(p)
    p.set_defaults(func=_cmd_partition_enum)

    p = ptsub.add_parser("count", help="count a partition family")
    p.add_argument("-n", type=int, required=True)
    p.add_argument("-k", type=int, required=True)
    p.add_argument("--family", choices=FAMILIES, default="all")
    p.add_argument("--min-size", type=int, default=None)
    _add_common(p)
    p.set_defaults(func=_cmd_partition_count)

    p = ptsub.add_parser("baranyai",
                         help="one-factorization into uniform partitions")
    p.add_argument("-n", type=int, required=True)
    p.add_argument("-c", type=int, required=True, help="class size")
    _add_common(p)
    p.set_defaults(func=_cmd_partition_baranyai)

    return parser


def run(argv: Sequence[str]) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(list(argv))
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    if args.jobs < 1:
        _note("--jobs must be at least 1")
        return 2
    try:
        return args.func(args)
    except (CapExceeded, StreamCapExceeded) as exc:
        _note(str(exc))
        return 3
    except (CoveringError, GraphError, PartitionError, SpectraError,
            OSError, ValueError) as exc:
        _note(str(exc))
        return 2


def main(argv: Sequence[str] | None = None) -> int:
    return run(sys.argv[1:] if argv is None else argv)


if __name__ == "__main__":
    sys.exit(main())
