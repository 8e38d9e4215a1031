"""Brute-force reference implementations and the bounded decision oracle.

Everything in this module trades efficiency for directness: word membership
follows the partition semantics literally, tree membership enumerates, and
the decision oracle searches a finite universe of trees.  Answers carry a
``definite`` flag — a satisfiability "no" or an implication "yes" obtained
only by exhausting bounded enumeration is reported as indefinite, with the
bounds echoed in the note, so callers can tell a proof from a failed search.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Sequence

from .core import Multiplicity, TreeNode, UnorderedWord
from .dtd import DFDtd, Regex, commutative_matches, dtd_tree_satisfies
from .expressions import DisjunctiveExpression, Factor
from .queries import TwigQuery, embed_in_tree
from .schema import Schema, tree_satisfies

M = Multiplicity


@dataclass(frozen=True)
class EnumerationBounds:
    """Search-space limits for the bounded oracle.

    ``max_depth`` counts levels (a lone root is depth 1); ``max_fanout``
    bounds children per node; ``max_total_nodes`` the whole tree;
    ``max_word_count`` total symbol occurrences in enumerated words.
    """

    max_depth: int = 3
    max_fanout: int = 3
    max_total_nodes: int = 8
    max_word_count: int = 4

    def describe(self) -> str:
        return (
            f"depth<={self.max_depth} fanout<={self.max_fanout} "
            f"nodes<={self.max_total_nodes} count<={self.max_word_count}"
        )


DEFAULT_BOUNDS = EnumerationBounds()


@dataclass(frozen=True)
class OracleVerdict:
    value: bool
    definite: bool
    witness: TreeNode | UnorderedWord | None = None
    note: str | None = None


# ---------------------------------------------------------------------------
# naive word membership


def naive_word_matches(
    w: UnorderedWord, e: DisjunctiveExpression, *, max_total: int | None = None
) -> bool:
    """Literal partition semantics, independent of the triple machinery.

    The word must split across factors; each factor's share must split into
    an admissible number of chunks, every chunk a word of one disjunct.
    Exponential in the word size; pass ``max_total`` to refuse large inputs.
    """
    if max_total is not None and w.total > max_total:
        raise ValueError(f"word total {w.total} exceeds bound {max_total}")
    factors = list(e.factors)
    expr_symbols = {s for f in factors for s in f.symbols}
    if any(sym not in expr_symbols for sym in w.support):
        return False

    def split(counts: dict[str, int], k: int) -> bool:
        if k == len(factors):
            return all(n == 0 for n in counts.values())
        f = factors[k]
        own = [s for s in f.symbols if counts.get(s, 0)]
        ranges = [range(counts[s] + 1) for s in own]
        for take in itertools.product(*ranges):
            share = UnorderedWord(dict(zip(own, take)))
            if not _factor_accepts(share, f):
                continue
            rest = dict(counts)
            for s, n in zip(own, take):
                rest[s] -= n
            if split(rest, k + 1):
                return True
        return False

    return split({s: w.count(s) for s in w.support}, 0)


def _factor_accepts(share: UnorderedWord, f: Factor) -> bool:
    outer = f.outer
    if outer is M.ZERO:
        return not share
    if outer is M.ONE:
        return _disjunction_accepts(share, f)
    if outer is M.OPTIONAL:
        return (not share) or _disjunction_accepts(share, f)
    # PLUS / STAR: peel non-empty single-disjunct chunks.
    if not share:
        return outer is M.STAR or _disjunction_accepts(UnorderedWord(), f)
    for sym, m in f.disjuncts:
        have = share.count(sym)
        for k in range(1, have + 1):
            if not m.contains(k):
                continue
            rest = UnorderedWord(
                {s: (n - k if s == sym else n) for s, n in share.items()}
            )
            remaining = Factor(f.disjuncts, M.STAR)
            if _factor_accepts(rest, remaining):
                return True
    return False


def _disjunction_accepts(share: UnorderedWord, f: Factor) -> bool:
    # Exactly one chunk: a single symbol repeated an admissible number of
    # times (or epsilon, via a zero-admitting disjunct).
    return any(
        share.support <= {sym} and m.contains(share.count(sym))
        for sym, m in f.disjuncts
    )


# ---------------------------------------------------------------------------
# enumeration


def enumerate_words(
    symbols: Sequence[str], max_total: int
) -> Iterator[UnorderedWord]:
    """All multisets over ``symbols`` with total count <= ``max_total``."""
    syms = list(symbols)

    def rec(i: int, left: int) -> Iterator[dict[str, int]]:
        if i == len(syms):
            yield {}
            return
        for n in range(left + 1):
            for rest in rec(i + 1, left - n):
                if n:
                    rest = dict(rest)
                    rest[syms[i]] = n
                yield rest

    for counts in rec(0, max_total):
        yield UnorderedWord(counts)


def enumerate_trees(
    labels: Sequence[str], bounds: EnumerationBounds
) -> list[TreeNode]:
    """All unordered trees within bounds, one representative per shape.

    Children are drawn as non-decreasing index multisets over the smaller
    trees, so no two emitted trees are isomorphic.
    """
    labs = list(labels)

    def up_to_depth(depth: int) -> list[tuple[TreeNode, int]]:
        if depth <= 0:
            return []
        if depth == 1:
            return [(TreeNode(lab), 1) for lab in labs]
        smaller = up_to_depth(depth - 1)
        out: list[tuple[TreeNode, int]] = []
        for lab in labs:
            for kids, size in _child_multisets(
                smaller, bounds.max_fanout, bounds.max_total_nodes - 1
            ):
                out.append((TreeNode(lab, kids), size + 1))
        return out

    result = []
    seen: set[str] = set()
    from .core import canonical_form

    for t, _size in up_to_depth(bounds.max_depth):
        key = canonical_form(t)
        if key not in seen:
            seen.add(key)
            result.append(t)
    return result


def _child_multisets(
    pool: list[tuple[TreeNode, int]], max_children: int, budget: int
) -> Iterator[tuple[tuple[TreeNode, ...], int]]:
    def rec(
        start: int, left: int, budget_left: int
    ) -> Iterator[tuple[tuple[TreeNode, ...], int]]:
        yield (), 0
        if not left:
            return
        for i in range(start, len(pool)):
            t, size = pool[i]
            if size > budget_left:
                continue
            for rest, rest_size in rec(i, left - 1, budget_left - size):
                yield (t,) + rest, size + rest_size

    yield from rec(0, max_children, budget)


def schema_members(
    s: Schema | DFDtd, bounds: EnumerationBounds
) -> Iterator[TreeNode]:
    """All members of the schema's language within the enumeration bounds.

    Yields exactly the trees of ``enumerate_trees(s.alphabet, bounds)`` that
    satisfy the schema, but built top-down from valid children words so the
    search stays feasible on alphabets where the full tree universe does not.
    One representative per isomorphism class.
    """
    if bounds.max_depth < 1 or bounds.max_total_nodes < 1:
        return
    accepts = _children_checker(s)
    rule_syms = {
        label: sorted(_rule_symbols(s, label)) for label in s.alphabet
    }
    budget = bounds.max_total_nodes - 1
    pools: dict[tuple[str, int], list[tuple[TreeNode, int]]] = {}

    def members_of(label: str, depth: int) -> list[tuple[TreeNode, int]]:
        key = (label, depth)
        if key in pools:
            return pools[key]
        pools[key] = out = []
        if depth < 1:
            return out
        for w in enumerate_words(
            rule_syms[label], min(bounds.max_fanout, budget)
        ):
            if not accepts(label, w):
                continue
            syms = sorted(w.support)

            def build(
                i: int, left: int
            ) -> Iterator[tuple[tuple[TreeNode, ...], int]]:
                if i == len(syms):
                    yield (), 0
                    return
                pool = members_of(syms[i], depth - 1)
                for chosen, csz in _k_multisets(pool, w.count(syms[i]), left):
                    for rest, rsz in build(i + 1, left - csz):
                        yield chosen + rest, csz + rsz

            for kids, sz in build(0, budget):
                out.append((TreeNode(label, kids), sz + 1))
        return out

    for t, _size in members_of(s.root, bounds.max_depth):
        yield t


def _k_multisets(
    pool: list[tuple[TreeNode, int]], k: int, budget: int
) -> Iterator[tuple[tuple[TreeNode, ...], int]]:
    def rec(
        start: int, left: int, budget_left: int
    ) -> Iterator[tuple[tuple[TreeNode, ...], int]]:
        if left == 0:
            yield (), 0
            return
        for i in range(start, len(pool)):
            t, size = pool[i]
            if size > budget_left:
                continue
            for rest, rest_size in rec(i, left - 1, budget_left - size):
                yield (t,) + rest, size + rest_size

    yield from rec(0, k, budget)


def _rule_symbols(s: Schema | DFDtd, label: str) -> frozenset[str]:
    if isinstance(s, Schema):
        e = s.rules[label]
        return frozenset(sym for f in e.factors for sym in f.symbols)
    return _regex_syms(s.rules[label])


def _children_checker(s: Schema | DFDtd) -> Callable[[str, UnorderedWord], bool]:
    if isinstance(s, Schema):
        return lambda label, w: naive_word_matches(w, s.rules[label])
    return lambda label, w: commutative_matches(w, s.rules[label])


def _membership_checker(s: Schema | DFDtd) -> Callable[[TreeNode], bool]:
    if isinstance(s, Schema):
        return lambda t: tree_satisfies(t, s)
    return lambda t: dtd_tree_satisfies(t, s)


# ---------------------------------------------------------------------------
# the bounded decision oracle


def oracle_decide(
    problem: str,
    *,
    bounds: EnumerationBounds = DEFAULT_BOUNDS,
    expression: DisjunctiveExpression | None = None,
    word: UnorderedWord | None = None,
    schema: Schema | DFDtd | None = None,
    other_schema: Schema | DFDtd | None = None,
    query: TwigQuery | None = None,
    other_query: TwigQuery | None = None,
    regex: Regex | None = None,
) -> OracleVerdict:
    """Decide ``problem`` by enumeration.

    Problems and their inputs (definite side in parentheses):

    * ``membership`` — word, expression (always definite)
    * ``satisfiability`` — schema (definite on yes: witness tree)
    * ``schema-containment`` — schema within other_schema (definite on no)
    * ``query-sat`` — schema, query (definite on yes: witness tree)
    * ``query-implication`` — schema, query (definite on no)
    * ``query-containment`` — schema; query within other_query under it
      (definite on no)
    * ``capture-check`` — expression vs regex, unordered-language equality
      (definite on no: distinguishing word)

    The indefinite side reports the exhausted bounds in ``note``.  Short
    problem names (``memb``, ``sat``, ``schema-cnt``, ``query-impl``,
    ``query-cnt``) are accepted as aliases.
    """
    problem = _PROBLEM_ALIASES.get(problem, problem)
    if problem == "membership":
        assert word is not None and expression is not None
        if word.total > bounds.max_word_count:
            return OracleVerdict(
                False,
                False,
                note=f"word total {word.total} exceeds {bounds.describe()}",
            )
        return OracleVerdict(naive_word_matches(word, expression), True)

    if problem == "satisfiability":
        assert schema is not None
        for t in schema_members(schema, bounds):
            return OracleVerdict(True, True, witness=t)
        return OracleVerdict(
            False, False, note=f"no member found within {bounds.describe()}"
        )

    if problem == "schema-containment":
        assert schema is not None and other_schema is not None
        container_ok = _membership_checker(other_schema)
        for t in schema_members(schema, bounds):
            if not container_ok(t):
                return OracleVerdict(False, True, witness=t)
        return OracleVerdict(
            True, False, note=f"no counterexample within {bounds.describe()}"
        )

    if problem == "query-sat":
        assert schema is not None and query is not None
        for t in schema_members(schema, bounds):
            if embed_in_tree(query, t):
                return OracleVerdict(True, True, witness=t)
        return OracleVerdict(
            False, False, note=f"no witness within {bounds.describe()}"
        )

    if problem == "query-implication":
        assert schema is not None and query is not None
        for t in schema_members(schema, bounds):
            if not embed_in_tree(query, t):
                return OracleVerdict(False, True, witness=t)
        return OracleVerdict(
            True, False, note=f"no counterexample within {bounds.describe()}"
        )

    if problem == "query-containment":
        assert schema is not None and query is not None and other_query is not None
        for t in schema_members(schema, bounds):
            if embed_in_tree(query, t) and not embed_in_tree(other_query, t):
                return OracleVerdict(False, True, witness=t)
        return OracleVerdict(
            True, False, note=f"no counterexample within {bounds.describe()}"
        )

    if problem == "capture-check":
        assert expression is not None and regex is not None
        syms = sorted(
            {s for f in expression.factors for s in f.symbols}
            | set(_regex_syms(regex))
        )
        for w in enumerate_words(syms, bounds.max_word_count):
            if naive_word_matches(w, expression) != commutative_matches(w, regex):
                return OracleVerdict(False, True, witness=w)
        return OracleVerdict(
            True, False, note=f"languages agree on all words within {bounds.describe()}"
        )

    raise ValueError(f"unknown oracle problem {problem!r}")


def _regex_syms(e: Regex) -> frozenset[str]:
    from .dtd import regex_symbols

    return regex_symbols(e)


_PROBLEM_ALIASES = {
    "memb": "membership",
    "sat": "satisfiability",
    "schema-cnt": "schema-containment",
    "query-impl": "query-implication",
    "query-cnt": "query-containment",
}

ORACLE_PROBLEMS = (
    "memb",
    "sat",
    "schema-cnt",
    "query-sat",
    "query-impl",
    "query-cnt",
    "capture-check",
)
