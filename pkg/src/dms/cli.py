"""Command-line front end: one subcommand per decision problem.

Exit codes are uniform across subcommands: 0 when the property holds (or
the document is valid), 1 when it fails — with a certificate printed
whenever one exists — 2 for usage or parse errors, and 3 when the bounded
oracle cannot decide.  ``--format machine`` switches output to one
``key=value`` record per line; :func:`parse_machine_output` reads it back.
"""

from __future__ import annotations

import argparse
import sys
from typing import Sequence

from .analysis import (
    containment_counterexample,
    implication_counterexample,
    query_contained,
    query_implied,
    query_satisfiable,
    witness_tree,
)
from .core import Alphabet, DmsError, Multiplicity, TreeNode, UnorderedWord, format_tree, parse_tree, tree_to_events
from .dtd import (
    DFDtd,
    dtd_containment_counterexample,
    dtd_implication_counterexample,
    dtd_query_contained,
    dtd_query_implied,
    dtd_query_satisfiable,
    dtd_unfold,
    dtd_unsatisfiable_labels,
    parse_dfdtd,
    parse_regex,
)
from .expressions import (
    CharTriple,
    compute_triple,
    expression_contains,
    format_expression,
    parse_expression,
    separating_word,
)
from .oracle import DEFAULT_BOUNDS, ORACLE_PROBLEMS, EnumerationBounds, oracle_decide
from .queries import parse_query, query_nodes
from .schema import (
    Schema,
    _mentioned_symbols,
    find_containment_counterexample,
    minimal_member,
    parse_schema,
    reachable_labels,
    schema_contains,
    schema_satisfiable,
    schema_universal,
)
from .streaming import new_validator, validate_stream
from .xmlio import scan_xml

M = Multiplicity

EXIT_HOLDS = 0
EXIT_FAILS = 1
EXIT_USAGE = 2
EXIT_UNKNOWN = 3

_DISJUNCTION_MESSAGE = (
    "schemas with disjunction are not supported here: the problem is "
    "EXPTIME-complete in general; restrict the schema to single-symbol "
    "factors, use a disjunction-free DTD (--dtd), or run the bounded "
    "'oracle' subcommand"
)


class CliUsageError(DmsError):
    pass


# ---------------------------------------------------------------------------
# output plumbing


def _machine_value(v: object) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, TreeNode):
        return format_tree(v)
    return str(v)


def _output(
    fmt: str, records: list[tuple[str, object]], human: list[str]
) -> None:
    if fmt == "machine":
        for key, value in records:
            print(f"{key}={_machine_value(value)}")
    else:
        for line in human:
            print(line)


def parse_machine_output(text: str) -> dict[str, str]:
    """Read ``--format machine`` output back into a dict."""
    out: dict[str, str] = {}
    for line in text.splitlines():
        if not line.strip():
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"not a key=value record: {line!r}")
        out[key] = value
    return out


def _warn(message: str) -> None:
    print(f"warning: {message}", file=sys.stderr)


def _read_text(path: str | None) -> str:
    if path is None or path == "-":
        return sys.stdin.read()
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def _triple_records(tr: CharTriple) -> list[tuple[str, object]]:
    def fmt_sets(sets: frozenset[frozenset[str]]) -> str:
        return ";".join(sorted("{" + ",".join(sorted(x)) + "}" for x in sets))

    cards = ",".join(f"{sym}:{m.token}" for sym, m in tr.cardinality)
    return [
        ("conflicts", fmt_sets(tr.conflicts)),
        ("cardinalities", cards),
        ("required", fmt_sets(tr.required)),
    ]


# ---------------------------------------------------------------------------
# input plumbing


def _load_schema(path: str, as_dtd: bool) -> Schema | DFDtd:
    text = _read_text(path)
    return parse_dfdtd(text) if as_dtd else parse_schema(text)


def _parse_bounds(spec: str | None) -> EnumerationBounds:
    if spec is None:
        return DEFAULT_BOUNDS
    parts = spec.split(",")
    if len(parts) != 4:
        raise CliUsageError("--bounds wants four integers: depth,fanout,nodes,count")
    try:
        depth, fanout, nodes, count = (int(p) for p in parts)
    except ValueError as exc:
        raise CliUsageError(f"bad --bounds value: {exc}") from None
    return EnumerationBounds(depth, fanout, nodes, count)


def _parse_word(spec: str) -> UnorderedWord:
    """Words are space/comma separated symbols, optionally ``sym:count``."""
    if spec.strip() in ("", "epsilon"):
        return UnorderedWord()
    counts: dict[str, int] = {}
    for token in spec.replace(",", " ").split():
        sym, colon, num = token.partition(":")
        if not sym:
            raise CliUsageError(f"bad word token {token!r}")
        n = 1
        if colon:
            try:
                n = int(num)
            except ValueError:
                raise CliUsageError(f"bad word token {token!r}") from None
        counts[sym] = counts.get(sym, 0) + n
    return UnorderedWord(counts)


def _expression_alphabet(texts: Sequence[str], spec: str | None) -> Alphabet:
    if spec is not None:
        return Alphabet(s.strip() for s in spec.split(",") if s.strip())
    order: list[str] = []
    for text in texts:
        for sym in _mentioned_symbols(text):
            if sym not in order:
                order.append(sym)
    if not order:
        raise CliUsageError("cannot infer an alphabet; pass --alphabet a,b,c")
    return Alphabet(order)


# ---------------------------------------------------------------------------
# validate


def cmd_validate(args: argparse.Namespace) -> int:
    schema = parse_schema(_read_text(args.schema))
    document = _read_text(args.document)
    if not document.strip():
        raise CliUsageError("empty document")
    if args.tree:
        events = iter(tree_to_events(parse_tree(document)))
    else:
        events = scan_xml(document, warn=_warn)
    state = new_validator(schema)
    verdict = validate_stream(events, schema, state=state)
    records: list[tuple[str, object]] = [
        ("status", verdict.status),
        ("position", verdict.position),
    ]
    if verdict.reason:
        records.append(("reason", verdict.reason))
    if verdict.label:
        records.append(("label", verdict.label))
    records += [("peak_stack", state.peak_stack), ("work", state.work)]
    if verdict.ok:
        human = [f"valid (events consumed: {state.consumed}, peak stack: {state.peak_stack})"]
        code = EXIT_HOLDS
    elif verdict.status == "rejected":
        where = f"event {verdict.position}"
        rule = f" in rule for {verdict.label!r}" if verdict.label else ""
        human = [f"invalid at {where}: {verdict.reason}{rule}"]
        code = EXIT_FAILS
    else:
        human = [f"malformed event stream at event {verdict.position}"]
        code = EXIT_USAGE
    _output(args.format, records, human)
    return code


# ---------------------------------------------------------------------------
# schema subcommands


def cmd_schema_sat(args: argparse.Namespace) -> int:
    witness: TreeNode | None = None
    if args.dtd:
        d = parse_dfdtd(_read_text(args.schema))
        ok = d.root not in dtd_unsatisfiable_labels(d)
        if ok:
            witness = dtd_unfold(d)
    else:
        s = parse_schema(_read_text(args.schema))
        ok = schema_satisfiable(s)
        if ok:
            witness = minimal_member(s)
    records: list[tuple[str, object]] = [("satisfiable", ok)]
    if witness is not None:
        records.append(("witness", witness))
        human = [f"satisfiable; member: {format_tree(witness)}"]
    else:
        human = ["unsatisfiable"]
    _output(args.format, records, human)
    return EXIT_HOLDS if ok else EXIT_FAILS


def _non_universal_label(s: Schema) -> str | None:
    for label in sorted(reachable_labels(s)):
        tr = compute_triple(s.rules[label])
        if tr.conflicts or tr.required:
            return label
        if any(m is not M.STAR for _, m in tr.cardinality):
            return label
    return None


def cmd_schema_universal(args: argparse.Namespace) -> int:
    s = parse_schema(_read_text(args.schema))
    ok = schema_universal(s)
    records: list[tuple[str, object]] = [("universal", ok)]
    if ok:
        human = ["universal"]
    else:
        label = _non_universal_label(s)
        assert label is not None
        records.append(("restrictive_label", label))
        human = [f"not universal: the rule for {label!r} rejects some children words"]
    _output(args.format, records, human)
    return EXIT_HOLDS if ok else EXIT_FAILS


def cmd_schema_contains(args: argparse.Namespace) -> int:
    first_text = _read_text(args.first)
    second_text = _read_text(args.second)
    s1 = parse_schema(first_text)
    s2 = parse_schema(second_text)
    if set(s1.alphabet) != set(s2.alphabet):
        merged = list(s1.alphabet) + [
            x for x in s2.alphabet if x not in set(s1.alphabet)
        ]
        alpha = Alphabet(merged)
        s1 = parse_schema(first_text, alpha)
        s2 = parse_schema(second_text, alpha)
    ok = schema_contains(s1, s2)
    records: list[tuple[str, object]] = [("contained", ok)]
    if ok:
        human = ["contained: every tree of the first schema satisfies the second"]
    else:
        cex = find_containment_counterexample(s1, s2)
        assert cex is not None or not schema_satisfiable(s1)
        human = ["not contained"]
        if cex is not None:
            records.append(("counterexample", cex))
            human = [
                "not contained; counterexample (in first, not second): "
                + format_tree(cex)
            ]
    _output(args.format, records, human)
    return EXIT_HOLDS if ok else EXIT_FAILS


# ---------------------------------------------------------------------------
# query subcommands


def _query_inputs(args: argparse.Namespace) -> tuple[Schema | DFDtd, list]:
    # Labels outside the schema alphabet are legal in queries; they simply
    # never match, which the decision procedures report as a result rather
    # than a usage error.
    loaded = _load_schema(args.schema, args.dtd)
    queries = [parse_query(args.query)]
    if getattr(args, "query2", None) is not None:
        queries.append(parse_query(args.query2))
    return loaded, queries


def cmd_query_sat(args: argparse.Namespace) -> int:
    loaded, (q,) = _query_inputs(args)
    records: list[tuple[str, object]] = []
    if isinstance(loaded, DFDtd):
        ok, note = dtd_query_satisfiable(loaded, q)
        witness = None
    elif loaded.kind == "ms":
        ok, note = query_satisfiable(loaded, q)
        witness = witness_tree(loaded, q) if ok else None
    else:
        # Full schemas with disjunction: fall back to the bounded oracle.
        # Two cases stay decidable outright: an unsatisfiable schema, and a
        # query label no member can ever carry.
        foreign = sorted(
            {n.label for n in query_nodes(q)} - {None} - set(loaded.alphabet)
        )
        if not schema_satisfiable(loaded):
            ok, note, witness = False, "schema is unsatisfiable", None
        elif foreign:
            ok, witness = False, None
            note = f"label {foreign[0]!r} is outside the schema alphabet"
        else:
            v = oracle_decide(
                "query-sat", schema=loaded, query=q, bounds=_parse_bounds(args.bounds)
            )
            if not v.definite:
                _output(
                    args.format,
                    [("satisfiable", "unknown"), ("note", v.note or "")],
                    [f"unknown: {v.note}"],
                )
                return EXIT_UNKNOWN
            ok, note, witness = True, None, v.witness
    records.append(("satisfiable", ok))
    human = ["satisfiable" if ok else "unsatisfiable"]
    if witness is not None:
        records.append(("witness", witness))
        human = [f"satisfiable; witness: {format_tree(witness)}"]
    if note:
        records.append(("note", note))
        human.append(note)
    _output(args.format, records, human)
    return EXIT_HOLDS if ok else EXIT_FAILS


def cmd_query_impl(args: argparse.Namespace) -> int:
    loaded, (q,) = _query_inputs(args)
    if isinstance(loaded, DFDtd):
        ok, note = dtd_query_implied(loaded, q)
        cex = None if ok else dtd_implication_counterexample(loaded, q)
    elif loaded.kind == "ms":
        ok, note = query_implied(loaded, q)
        cex = None if ok else implication_counterexample(loaded, q)
    else:
        raise CliUsageError(_DISJUNCTION_MESSAGE)
    records: list[tuple[str, object]] = [("implied", ok)]
    human = ["implied: every member of the schema matches the query"] if ok else ["not implied"]
    if cex is not None:
        records.append(("counterexample", cex))
        human = [f"not implied; counterexample: {format_tree(cex)}"]
    if note:
        records.append(("note", note))
        human.append(note)
    _output(args.format, records, human)
    return EXIT_HOLDS if ok else EXIT_FAILS


def cmd_query_cnt(args: argparse.Namespace) -> int:
    loaded, (q1, q2) = _query_inputs(args)
    if isinstance(loaded, DFDtd):
        ok, _g, note = dtd_query_contained(q1, q2, loaded)
        cex = None if ok else dtd_containment_counterexample(q1, q2, loaded)
    elif loaded.kind == "ms":
        ok, _g, note = query_contained(q1, q2, loaded)
        cex = None if ok else containment_counterexample(q1, q2, loaded)
    else:
        raise CliUsageError(_DISJUNCTION_MESSAGE)
    records: list[tuple[str, object]] = [("contained", ok)]
    human = (
        ["contained: under this schema, every match of the first query matches the second"]
        if ok
        else ["not contained"]
    )
    if cex is not None:
        records.append(("counterexample", cex))
        human = [
            "not contained; counterexample (matches first, not second): "
            + format_tree(cex)
        ]
    if note:
        records.append(("note", note))
        human.append(note)
    _output(args.format, records, human)
    return EXIT_HOLDS if ok else EXIT_FAILS


# ---------------------------------------------------------------------------
# expression subcommands


def cmd_expr_normalize(args: argparse.Namespace) -> int:
    alpha = _expression_alphabet([args.expression], args.alphabet)
    e = parse_expression(args.expression, alpha)
    text = format_expression(e)
    _output(args.format, [("normalized", text)], [text])
    return EXIT_HOLDS


def cmd_expr_triple(args: argparse.Namespace) -> int:
    alpha = _expression_alphabet([args.expression], args.alphabet)
    e = parse_expression(args.expression, alpha)
    tr = compute_triple(e)
    records = _triple_records(tr)
    human = [f"{key}: {value}" for key, value in records]
    _output(args.format, records, human)
    return EXIT_HOLDS


def cmd_expr_contains(args: argparse.Namespace) -> int:
    alpha = _expression_alphabet([args.first, args.second], args.alphabet)
    e1 = parse_expression(args.first, alpha)
    e2 = parse_expression(args.second, alpha)
    ok = expression_contains(e1, e2)
    records: list[tuple[str, object]] = [("contained", ok)]
    if ok:
        human = ["contained: the first expression admits every word of the second"]
    else:
        w = separating_word(e1, e2)
        assert w is not None
        records.append(("counterexample", str(w)))
        human = [f"not contained; word in second only: {w}"]
    _output(args.format, records, human)
    return EXIT_HOLDS if ok else EXIT_FAILS


# ---------------------------------------------------------------------------
# oracle


_ORACLE_NEEDS = {
    "memb": ("word", "expression"),
    "sat": ("schema",),
    "schema-cnt": ("schema", "other_schema"),
    "query-sat": ("schema", "query"),
    "query-impl": ("schema", "query"),
    "query-cnt": ("schema", "query", "other_query"),
    "capture-check": ("expression", "regex"),
}

_ORACLE_FLAGS = {
    "word": "--word",
    "expression": "--expr",
    "schema": "--schema",
    "other_schema": "--schema2",
    "query": "--query",
    "other_query": "--query2",
    "regex": "--regex",
}


def cmd_oracle(args: argparse.Namespace) -> int:
    inputs: dict[str, object] = {}
    if args.schema is not None:
        inputs["schema"] = _load_schema(args.schema, args.dtd)
    if args.schema2 is not None:
        inputs["other_schema"] = _load_schema(args.schema2, args.dtd2)
    if args.query is not None:
        inputs["query"] = parse_query(args.query)
    if args.query2 is not None:
        inputs["other_query"] = parse_query(args.query2)
    if args.expr is not None:
        texts = [args.expr]
        alpha = _expression_alphabet(texts, args.alphabet)
        inputs["expression"] = parse_expression(args.expr, alpha)
    if args.word is not None:
        inputs["word"] = _parse_word(args.word)
    if args.regex is not None:
        inputs["regex"] = parse_regex(args.regex)

    needed = _ORACLE_NEEDS[args.problem]
    missing = [name for name in needed if name not in inputs]
    if missing:
        flags = ", ".join(_ORACLE_FLAGS[name] for name in missing)
        raise CliUsageError(f"problem {args.problem!r} needs {flags}")

    verdict = oracle_decide(
        args.problem,
        bounds=_parse_bounds(args.bounds),
        **{k: inputs[k] for k in needed},
    )
    value = ("true" if verdict.value else "false") if verdict.definite else "unknown"
    records: list[tuple[str, object]] = [("verdict", value)]
    human = [value]
    if verdict.witness is not None:
        rendered = (
            format_tree(verdict.witness)
            if isinstance(verdict.witness, TreeNode)
            else str(verdict.witness)
        )
        records.append(("witness", rendered))
        human = [f"{value}; witness: {rendered}"]
    if verdict.note:
        records.append(("note", verdict.note))
        human.append(verdict.note)
    _output(args.format, records, human)
    if not verdict.definite:
        return EXIT_UNKNOWN
    return EXIT_HOLDS if verdict.value else EXIT_FAILS


# ---------------------------------------------------------------------------
# parser assembly


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--format",
        choices=("human", "machine"),
        default="human",
        help="output style; machine prints key=value lines",
    )

    parser = argparse.ArgumentParser(
        prog="dms",
        description=(
            "Validation and static analysis for multiplicity schemas over "
            "unordered XML."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser(
        "validate",
        parents=[common],
        help="stream-validate a document against a schema",
    )
    p.add_argument("schema", help="schema file")
    p.add_argument(
        "document",
        nargs="?",
        help="document file; omit or '-' for standard input",
    )
    p.add_argument(
        "--tree",
        action="store_true",
        help="read the document as compact tree notation instead of XML",
    )
    p.set_defaults(func=cmd_validate)

    schema_cmd = sub.add_parser("schema", help="schema-level decisions")
    ssub = schema_cmd.add_subparsers(dest="subcommand", required=True)
    p = ssub.add_parser("sat", parents=[common], help="is the language non-empty?")
    p.add_argument("schema")
    p.add_argument("--dtd", action="store_true", help="schema file is a disjunction-free DTD")
    p.set_defaults(func=cmd_schema_sat)
    p = ssub.add_parser(
        "universal", parents=[common], help="does every tree (with the root label) satisfy it?"
    )
    p.add_argument("schema")
    p.set_defaults(func=cmd_schema_universal)
    p = ssub.add_parser(
        "contains",
        parents=[common],
        help="is the first schema's language inside the second's?",
    )
    p.add_argument("first")
    p.add_argument("second")
    p.set_defaults(func=cmd_schema_contains)

    query_cmd = sub.add_parser("query", help="twig-query reasoning under a schema")
    qsub = query_cmd.add_subparsers(dest="subcommand", required=True)
    p = qsub.add_parser("sat", parents=[common], help="does some member match the query?")
    p.add_argument("schema")
    p.add_argument("query")
    p.add_argument("--dtd", action="store_true", help="schema file is a disjunction-free DTD")
    p.add_argument("--bounds", help="depth,fanout,nodes,count for the oracle fallback")
    p.set_defaults(func=cmd_query_sat)
    p = qsub.add_parser("impl", parents=[common], help="does every member match the query?")
    p.add_argument("schema")
    p.add_argument("query")
    p.add_argument("--dtd", action="store_true", help="schema file is a disjunction-free DTD")
    p.set_defaults(func=cmd_query_impl)
    p = qsub.add_parser(
        "cnt",
        parents=[common],
        help="within the schema, does matching the first query force the second?",
    )
    p.add_argument("schema")
    p.add_argument("query")
    p.add_argument("query2")
    p.add_argument("--dtd", action="store_true", help="schema file is a disjunction-free DTD")
    p.set_defaults(func=cmd_query_cnt)

    expr_cmd = sub.add_parser("expr", help="expression-level operations")
    esub = expr_cmd.add_subparsers(dest="subcommand", required=True)
    p = esub.add_parser("normalize", parents=[common], help="print the normal form")
    p.add_argument("expression")
    p.add_argument("--alphabet", help="comma-separated symbols (default: inferred)")
    p.set_defaults(func=cmd_expr_normalize)
    p = esub.add_parser(
        "triple", parents=[common], help="print conflicts / cardinalities / required sets"
    )
    p.add_argument("expression")
    p.add_argument("--alphabet", help="comma-separated symbols (default: inferred)")
    p.set_defaults(func=cmd_expr_triple)
    p = esub.add_parser(
        "contains",
        parents=[common],
        help="does the first expression's language include the second's?",
    )
    p.add_argument("first")
    p.add_argument("second")
    p.add_argument("--alphabet", help="comma-separated symbols (default: inferred)")
    p.set_defaults(func=cmd_expr_contains)

    p = sub.add_parser(
        "oracle",
        parents=[common],
        help="brute-force bounded decision (reference implementation)",
    )
    p.add_argument("problem", choices=ORACLE_PROBLEMS)
    p.add_argument("--schema", help="schema file")
    p.add_argument("--schema2", help="second schema file (containment)")
    p.add_argument("--dtd", action="store_true", help="--schema is a disjunction-free DTD")
    p.add_argument("--dtd2", action="store_true", help="--schema2 is a disjunction-free DTD")
    p.add_argument("--query", help="query string")
    p.add_argument("--query2", help="second query string (containment)")
    p.add_argument("--expr", help="expression string")
    p.add_argument("--word", help="word: symbols separated by spaces/commas, 'sym:count' allowed")
    p.add_argument("--regex", help="regular expression (capture-check)")
    p.add_argument("--alphabet", help="comma-separated symbols for --expr")
    p.add_argument("--bounds", help="depth,fanout,nodes,count (default 3,3,8,4)")
    p.set_defaults(func=cmd_oracle)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except BrokenPipeError:
        return EXIT_USAGE
    except DmsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
