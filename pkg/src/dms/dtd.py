"""Disjunction-free DTDs: ordered-syntax rules read commutatively.

Rules here are regular expressions without alternation, built from symbols,
concatenation and ``* + ?``; a symbol may occur several times.  Validation
is commutative: a children multiset is accepted when some word of the rule's
(ordered) language has exactly those symbol counts — i.e. membership of the
count vector in the rule's Parikh set, which correlated counts like
``(a.b)+`` make genuinely non-rectangular.

The query analysis mirrors the multiplicity-schema case through two symbol
graphs: an edge a -> b in the existential graph when b can occur under a
(restricted to occurrences realizable by satisfiable children), and in the
universal graph when b must.  Witness trees come from unfoldings with
duplication: enough copies of each forced subtree to meet the rule's
minimum occurrence counts.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Mapping, Union

from .analysis import DependencyGraph, characteristic_graphs_over
from .core import Alphabet, DmsError, TreeNode, UnorderedWord
from .graphs import RootedGraph, shape_key
from .queries import TwigQuery, embed_in_graph, embed_in_tree


class RegexSyntaxError(DmsError):
    def __init__(self, message: str, position: int) -> None:
        super().__init__(f"{message} (at column {position})")
        self.position = position


class DtdUnsatisfiableError(DmsError):
    """Root-reachable cycle in the universal graph: no finite member exists."""

    def __init__(self, labels: frozenset[str]) -> None:
        super().__init__(
            "unsatisfiable labels (forced infinite descent): "
            + ", ".join(sorted(labels))
        )
        self.labels = labels


# ---------------------------------------------------------------------------
# regex AST


@dataclass(frozen=True)
class Eps:
    pass


@dataclass(frozen=True)
class Sym:
    name: str


@dataclass(frozen=True)
class Star:
    body: "Regex"


@dataclass(frozen=True)
class Opt:
    body: "Regex"


@dataclass(frozen=True)
class Plus:
    body: "Regex"


@dataclass(frozen=True)
class Cat:
    left: "Regex"
    right: "Regex"


@dataclass(frozen=True)
class Alt:
    """Alternation — allowed in general regexes, rejected in DTD rules."""

    left: "Regex"
    right: "Regex"


Regex = Union[Eps, Sym, Star, Opt, Plus, Cat, Alt]
DFRegex = Regex  # disjunction-free by construction when parsed via parse_dfregex


def regex_symbols(e: Regex) -> frozenset[str]:
    if isinstance(e, Eps):
        return frozenset()
    if isinstance(e, Sym):
        return frozenset({e.name})
    if isinstance(e, (Star, Opt, Plus)):
        return regex_symbols(e.body)
    return regex_symbols(e.left) | regex_symbols(e.right)


def is_disjunction_free(e: Regex) -> bool:
    if isinstance(e, Alt):
        return False
    if isinstance(e, (Star, Opt, Plus)):
        return is_disjunction_free(e.body)
    if isinstance(e, Cat):
        return is_disjunction_free(e.left) and is_disjunction_free(e.right)
    return True


# ---------------------------------------------------------------------------
# parsing


def _scan(text: str, allow_alt: bool) -> list[tuple[str, str, int]]:
    out: list[tuple[str, str, int]] = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch == "|" and not allow_alt:
            raise RegexSyntaxError("alternation is not allowed here", i)
        if ch in ".|()*+?":
            out.append((ch, ch, i))
            i += 1
            continue
        if ch.isalnum() or ch in "_-":
            j = i
            while j < len(text) and (text[j].isalnum() or text[j] in "_-"):
                j += 1
            out.append(("name", text[i:j], i))
            i = j
            continue
        raise RegexSyntaxError(f"unexpected character {ch!r}", i)
    out.append(("end", "", len(text)))
    return out


def _parse(text: str, allow_alt: bool) -> Regex:
    tokens = _scan(text, allow_alt)
    pos = 0

    def take() -> tuple[str, str, int]:
        nonlocal pos
        t = tokens[pos]
        pos += 1
        return t

    def peek() -> tuple[str, str, int]:
        return tokens[pos]

    def parse_alt() -> Regex:
        node = parse_cat()
        while peek()[0] == "|":
            take()
            node = Alt(node, parse_cat())
        return node

    def parse_cat() -> Regex:
        node = parse_unary()
        while peek()[0] == ".":
            take()
            node = Cat(node, parse_unary())
        return node

    def parse_unary() -> Regex:
        kind, value, at = take()
        if kind == "name":
            node: Regex = Eps() if value == "epsilon" else Sym(value)
        elif kind == "(":
            node = parse_alt()
            k2, _, at2 = take()
            if k2 != ")":
                raise RegexSyntaxError("expected ')'", at2)
        else:
            raise RegexSyntaxError("expected a symbol or '('", at)
        while True:
            k, _, _ = peek()
            if k == "*":
                take()
                node = Star(node)
            elif k == "+":
                take()
                node = Plus(node)
            elif k == "?":
                take()
                node = Opt(node)
            else:
                return node

    node = parse_alt()
    kind, _, at = take()
    if kind != "end":
        raise RegexSyntaxError("trailing input", at)
    return node


def parse_dfregex(text: str) -> DFRegex:
    """Parse a disjunction-free rule body (``a.b?.(c.d)*`` style)."""
    return _parse(text, allow_alt=False)


def parse_regex(text: str) -> Regex:
    """Parse a general regex, alternation included (used by the oracle)."""
    return _parse(text, allow_alt=True)


def format_regex(e: Regex) -> str:
    if isinstance(e, Eps):
        return "epsilon"
    if isinstance(e, Sym):
        return e.name
    if isinstance(e, Star):
        return _wrap(e.body) + "*"
    if isinstance(e, Opt):
        return _wrap(e.body) + "?"
    if isinstance(e, Plus):
        return _wrap(e.body) + "+"
    if isinstance(e, Cat):
        return f"{_wrap(e.left)}.{_wrap(e.right)}"
    return f"({format_regex(e.left)}|{format_regex(e.right)})"


def _wrap(e: Regex) -> str:
    if isinstance(e, (Cat, Alt)):
        return f"({format_regex(e)})"
    return format_regex(e)


# ---------------------------------------------------------------------------
# structural recursions


def universal_set(e: Regex) -> frozenset[str]:
    """Symbols occurring in every word of L(e)."""
    if isinstance(e, Sym):
        return frozenset({e.name})
    if isinstance(e, Plus):
        return universal_set(e.body)
    if isinstance(e, Cat):
        return universal_set(e.left) | universal_set(e.right)
    if isinstance(e, Alt):
        return universal_set(e.left) & universal_set(e.right)
    return frozenset()  # Eps, Star, Opt


def existential_set(e: Regex) -> frozenset[str]:
    """Symbols occurring in at least one word of L(e)."""
    return regex_symbols(e)


def minnb(e: Regex, symbol: str) -> int:
    """Minimum number of ``symbol`` occurrences over all words of L(e)."""
    if isinstance(e, Sym):
        return 1 if e.name == symbol else 0
    if isinstance(e, Plus):
        return minnb(e.body, symbol)
    if isinstance(e, Cat):
        return minnb(e.left, symbol) + minnb(e.right, symbol)
    if isinstance(e, Alt):
        return min(minnb(e.left, symbol), minnb(e.right, symbol))
    return 0  # Eps, Star, Opt


def can_avoid(e: Regex, banned: frozenset[str]) -> bool:
    """Whether some word of L(e) uses no banned symbol."""
    if isinstance(e, Eps):
        return True
    if isinstance(e, Sym):
        return e.name not in banned
    if isinstance(e, (Star, Opt)):
        return True
    if isinstance(e, Plus):
        return can_avoid(e.body, banned)
    if isinstance(e, Cat):
        return can_avoid(e.left, banned) and can_avoid(e.right, banned)
    return can_avoid(e.left, banned) or can_avoid(e.right, banned)


def can_use_avoiding(e: Regex, symbol: str, banned: frozenset[str]) -> bool:
    """Whether some word of L(e) contains ``symbol`` and no banned symbol."""
    if isinstance(e, Eps):
        return False
    if isinstance(e, Sym):
        return e.name == symbol and symbol not in banned
    if isinstance(e, (Star, Opt, Plus)):
        return can_use_avoiding(e.body, symbol, banned)
    if isinstance(e, Cat):
        return (
            can_use_avoiding(e.left, symbol, banned)
            and can_avoid(e.right, banned)
        ) or (
            can_avoid(e.left, banned)
            and can_use_avoiding(e.right, symbol, banned)
        )
    return can_use_avoiding(e.left, symbol, banned) or can_use_avoiding(
        e.right, symbol, banned
    )


# ---------------------------------------------------------------------------
# commutative membership via bounded Parikh sets


@lru_cache(maxsize=None)
def _parikh(e: Regex, syms: tuple[str, ...], cap: tuple[int, ...]) -> frozenset[tuple[int, ...]]:
    """Count vectors (over ``syms``) of L(e), clipped componentwise at ``cap``.

    Exact below the cap: a vector v <= cap is in the result iff some word of
    L(e) has exactly those counts.
    """
    zero = tuple(0 for _ in syms)
    if isinstance(e, Eps):
        return frozenset({zero})
    if isinstance(e, Sym):
        if e.name not in syms:
            return frozenset()
        v = tuple(1 if s == e.name else 0 for s in syms)
        return frozenset({v}) if all(a <= b for a, b in zip(v, cap)) else frozenset()
    if isinstance(e, Opt):
        return _parikh(e.body, syms, cap) | {zero}
    if isinstance(e, Star):
        return _plus_closure(_parikh(e.body, syms, cap), cap) | {zero}
    if isinstance(e, Plus):
        return _plus_closure(_parikh(e.body, syms, cap), cap)
    if isinstance(e, Cat):
        left = _parikh(e.left, syms, cap)
        right = _parikh(e.right, syms, cap)
        out = set()
        for u in left:
            for v in right:
                w = tuple(a + b for a, b in zip(u, v))
                if all(a <= b for a, b in zip(w, cap)):
                    out.add(w)
        return frozenset(out)
    return _parikh(e.left, syms, cap) | _parikh(e.right, syms, cap)


def _plus_closure(
    base: frozenset[tuple[int, ...]], cap: tuple[int, ...]
) -> frozenset[tuple[int, ...]]:
    """All capped sums of one or more vectors from ``base``."""
    acc = set(base)
    frontier = list(base)
    while frontier:
        u = frontier.pop()
        for v in base:
            w = tuple(a + b for a, b in zip(u, v))
            if all(a <= b for a, b in zip(w, cap)) and w not in acc:
                acc.add(w)
                frontier.append(w)
    return frozenset(acc)


def commutative_matches(w: UnorderedWord, e: Regex) -> bool:
    """Whether the multiset ``w`` is the symbol count vector of some word of L(e)."""
    syms = tuple(sorted(regex_symbols(e) | w.support))
    target = tuple(w.count(s) for s in syms)
    return target in _parikh(e, syms, target)


# ---------------------------------------------------------------------------
# DTD schemas


@dataclass(frozen=True)
class DFDtd:
    root: str
    rules: Mapping[str, DFRegex]
    alphabet: Alphabet


def make_dfdtd(root: str, rules: Mapping[str, DFRegex], alphabet: Alphabet) -> DFDtd:
    if root not in alphabet:
        raise ValueError(f"root {root!r} not in alphabet")
    complete: dict[str, DFRegex] = {}
    for label in alphabet:
        rule = rules.get(label, Eps())
        if not is_disjunction_free(rule):
            raise ValueError(f"rule for {label!r} uses alternation")
        for sym in regex_symbols(rule):
            if sym not in alphabet:
                raise ValueError(f"rule for {label!r} mentions unknown {sym!r}")
        complete[label] = rule
    return DFDtd(root, complete, alphabet)


def parse_dfdtd(text: str) -> DFDtd:
    """Same line format as multiplicity schemas, with regex rule bodies."""
    from .schema import SchemaSyntaxError

    root: str | None = None
    bodies: dict[str, tuple[str, int]] = {}
    order: list[str] = []

    def note(symbol: str) -> None:
        if symbol not in order:
            order.append(symbol)

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if root is None:
            key, _, value = line.partition("=")
            if key.strip() != "root" or not value.strip():
                raise SchemaSyntaxError("expected 'root = <label>' first", lineno)
            root = value.strip()
            note(root)
            continue
        label, sep, body = line.partition("->")
        if not sep:
            raise SchemaSyntaxError("expected '<label> -> <regex>'", lineno)
        label = label.strip()
        body = body.strip()
        if not label or not body:
            raise SchemaSyntaxError("expected '<label> -> <regex>'", lineno)
        if label in bodies:
            raise SchemaSyntaxError(f"duplicate rule for {label!r}", lineno)
        bodies[label] = (body, lineno)
        note(label)

    if root is None:
        raise SchemaSyntaxError("empty schema: no 'root =' line", 1)

    parsed: dict[str, DFRegex] = {}
    for label, (body, lineno) in bodies.items():
        try:
            parsed[label] = parse_dfregex(body)
        except RegexSyntaxError as exc:
            raise SchemaSyntaxError(f"bad rule for {label!r}: {exc}", lineno) from exc
        # Sorted: frozenset order is hash-dependent, and the alphabet order
        # is observable (word formatting, iteration) so it must be stable.
        for sym in sorted(regex_symbols(parsed[label])):
            note(sym)
    return make_dfdtd(root, parsed, Alphabet(order))


def dtd_tree_satisfies(t: TreeNode, d: DFDtd) -> bool:
    if t.label != d.root:
        return False
    stack = [t]
    while stack:
        node = stack.pop()
        if node.label not in d.alphabet:
            return False
        w = UnorderedWord.from_symbols(c.label for c in node.children)
        if not commutative_matches(w, d.rules[node.label]):
            return False
        stack.extend(node.children)
    return True


# ---------------------------------------------------------------------------
# dependency graphs / satisfiability


def dtd_unsatisfiable_labels(d: DFDtd) -> frozenset[str]:
    """Labels that admit no finite tree: those reaching a universal-graph cycle."""
    usucc = {a: sorted(universal_set(d.rules[a])) for a in d.alphabet}
    gu = RootedGraph(d.root, usucc, {a: a for a in d.alphabet})
    on_cycle = {v for v in gu.vertices if v in gu.proper_descendants(v)}
    return frozenset(
        v
        for v in gu.vertices
        if v in on_cycle or gu.proper_descendants(v) & on_cycle
    )


def dtd_dependency_graphs(d: DFDtd) -> DependencyGraph:
    """Existential/universal dependency graph of a DTD.

    Existential edges are kept only when realizable by satisfiable children
    (a word of the rule containing the child while avoiding unsatisfiable
    labels).  Raises :class:`DtdUnsatisfiableError` when the root reaches a
    universal cycle.
    """
    bad = dtd_unsatisfiable_labels(d)
    if d.root in bad:
        raise DtdUnsatisfiableError(bad)
    edges: list[tuple[str, str, bool]] = []
    for a in d.alphabet:
        if a in bad:
            continue
        rule = d.rules[a]
        univ = universal_set(rule)
        for b in sorted(existential_set(rule)):
            if b in bad:
                continue
            if not can_use_avoiding(rule, b, bad):
                continue
            edges.append((a, b, b not in univ))
    return DependencyGraph(d.root, tuple(edges), tuple(d.alphabet))


# ---------------------------------------------------------------------------
# unfolding and query analysis


def dtd_unfold(d: DFDtd, label: str | None = None) -> TreeNode:
    """Minimal forced tree: each node carries each must-occur child with the
    rule's minimum count, recursively.  Requires satisfiability at ``label``
    (default root)."""
    bad = dtd_unsatisfiable_labels(d)
    start = label if label is not None else d.root
    if start in bad:
        raise DtdUnsatisfiableError(bad)

    def build(lab: str) -> TreeNode:
        rule = d.rules[lab]
        kids: list[TreeNode] = []
        for b in sorted(universal_set(rule)):
            sub = build(b)
            for _ in range(minnb(rule, b)):
                kids.append(sub)
        return TreeNode(lab, tuple(kids))

    return build(start)


def dtd_query_satisfiable(d: DFDtd, q: TwigQuery) -> tuple[bool, str | None]:
    try:
        dep = dtd_dependency_graphs(d)
    except DtdUnsatisfiableError:
        return False, "schema is unsatisfiable"
    return embed_in_graph(q, dep.graph()), None


def dtd_query_implied(d: DFDtd, q: TwigQuery) -> tuple[bool, str | None]:
    try:
        dep = dtd_dependency_graphs(d)
    except DtdUnsatisfiableError:
        return True, "schema is unsatisfiable; implication holds vacuously"
    return embed_in_graph(q, dep.universal_graph()), None


def dtd_implication_counterexample(d: DFDtd, q: TwigQuery) -> TreeNode | None:
    """A member not matching ``q`` when implication fails.

    The minimal forced tree works: its child edges all exist in the
    universal graph, so an embedding of ``q`` into it would contradict the
    failed graph embedding.
    """
    try:
        dep = dtd_dependency_graphs(d)
    except DtdUnsatisfiableError:
        return None
    if embed_in_graph(q, dep.universal_graph()):
        return None
    t = dtd_unfold(d)
    assert dtd_tree_satisfies(t, d), "forced tree failed schema check"
    assert not embed_in_tree(q, t), "forced tree unexpectedly matches query"
    return t


def dtd_characteristic_graphs(p: TwigQuery, d: DFDtd) -> Iterator[RootedGraph]:
    try:
        dep = dtd_dependency_graphs(d)
    except DtdUnsatisfiableError:
        return
    yield from characteristic_graphs_over(p, dep.graph(), dep.universal_graph())


def dtd_query_contained(
    p: TwigQuery, q: TwigQuery, d: DFDtd
) -> tuple[bool, RootedGraph | None, str | None]:
    try:
        dtd_dependency_graphs(d)
    except DtdUnsatisfiableError:
        return True, None, "schema is unsatisfiable; containment holds vacuously"
    seen: set[str] = set()
    any_graph = False
    for g in dtd_characteristic_graphs(p, d):
        any_graph = True
        key = shape_key(g)
        if key in seen:
            continue
        seen.add(key)
        if not embed_in_graph(q, g):
            return False, g, None
    if not any_graph:
        return True, None, "left query matches no tree of the schema"
    return True, None, None


def dtd_containment_counterexample(
    p: TwigQuery, q: TwigQuery, d: DFDtd
) -> TreeNode | None:
    """A member matching ``p`` but not ``q``: unfold a failing witness graph,
    then repair every node's children counts to a feasible count vector by
    merging over-represented siblings and duplicating forced subtrees."""
    try:
        dtd_dependency_graphs(d)
    except DtdUnsatisfiableError:
        return None
    from .analysis import unfold

    bad = dtd_unsatisfiable_labels(d)
    seen: set[str] = set()
    for g in dtd_characteristic_graphs(p, d):
        key = shape_key(g)
        if key in seen:
            continue
        seen.add(key)
        if embed_in_graph(q, g):
            continue
        t = _repair(unfold(g), d, bad)
        if (
            dtd_tree_satisfies(t, d)
            and embed_in_tree(p, t)
            and not embed_in_tree(q, t)
        ):
            return t
    return None


def _regex_size(e: Regex) -> int:
    if isinstance(e, (Eps, Sym)):
        return 1
    if isinstance(e, (Star, Opt, Plus)):
        return 1 + _regex_size(e.body)
    return 1 + _regex_size(e.left) + _regex_size(e.right)


def _repair(t: TreeNode, d: DFDtd, bad: frozenset[str]) -> TreeNode:
    """Bottom-up children fix-up to exact commutative membership.

    Children present in the unfolding are kept (they carry the query
    structure); missing occurrences are filled with minimal forced trees.
    Count vectors never touch unsatisfiable labels.
    """
    rule = d.rules[t.label]
    kids = [_repair(c, d, bad) for c in t.children]
    while True:
        counts: dict[str, int] = {}
        for c in kids:
            counts[c.label] = counts.get(c.label, 0) + 1
        syms = tuple(sorted(regex_symbols(rule) | set(counts)))
        need = tuple(counts.get(s, 0) for s in syms)
        slack = _regex_size(rule) + 1
        cap = tuple(
            0 if s in bad else n + slack for s, n in zip(syms, need)
        )
        vectors = [
            v
            for v in _parikh(rule, syms, cap)
            if all(a >= b for a, b in zip(v, need))
        ]
        if vectors:
            v = min(vectors, key=sum)
            for sym, have, want in zip(syms, need, v):
                for _ in range(want - have):
                    kids.append(dtd_unfold(d, sym))
            return TreeNode(t.label, tuple(kids))
        # No dominating vector: merge two siblings of the most frequent label.
        label = max(counts, key=lambda s: counts[s])
        assert counts[label] >= 2, "infeasible children with all counts <= 1"
        first = next(c for c in kids if c.label == label)
        second = next(c for c in kids if c.label == label and c is not first)
        kids.remove(first)
        kids.remove(second)
        kids.append(
            _repair(TreeNode(label, first.children + second.children), d, bad)
        )
