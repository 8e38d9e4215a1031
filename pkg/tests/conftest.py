"""Shared fixtures and random generators.

The worked examples (two expressions, the four textbook schemas with their
shared document, the recursive schema, the bibliography schema) recur across
modules, so they are built once here.  Random generators are plain functions
over an explicit ``random.Random``; every test pins its own seed.
"""

from __future__ import annotations

import random
from typing import Sequence

import pytest

from dms import (
    Alphabet,
    DisjunctiveExpression,
    Multiplicity,
    QueryNode,
    RootedGraph,
    Schema,
    TreeNode,
    build_expression,
    compute_triple,
    make_schema,
    normalize,
    parse_expression,
    parse_schema,
    parse_tree,
)
from dms.dtd import Cat, Eps, Opt, Plus, Regex, Star, Sym

M = Multiplicity

# ---------------------------------------------------------------------------
# worked examples

S1_TEXT = """\
root = r
r -> a, b*, c?
a -> b?
b -> a?
c -> b
"""

S2_TEXT = """\
root = r
r -> c, b, a
a -> b?
b -> a
c -> b
"""

S3_TEXT = """\
root = r
r -> (a|b)+, c
a -> b?
b -> a?
c -> b
"""

S4_TEXT = """\
root = r
r -> (a|b|c)*
a -> epsilon
b -> a?
c -> b
"""

S5_TEXT = """\
root = r
r -> a+, b*
a -> b?
b -> epsilon
"""

DBLP_TEXT = """\
root = dblp
dblp -> article*, book*
article -> title, year, author+
book -> title, year, publisher?, (author+ | editor+)
"""

# The same bibliography vocabulary with a much looser, DTD-style book rule:
# nothing is required, so a book may carry an author but no title.
PERMISSIVE_DTD_TEXT = """\
root = dblp
dblp -> article*.book*
article -> title.year.author+
book -> title?.year?.publisher?.author*.editor*
"""

DOC_TREE_TEXT = "r(a(b), b(a), c(b(a)))"


@pytest.fixture(scope="session")
def schema_one() -> Schema:
    return parse_schema(S1_TEXT)


@pytest.fixture(scope="session")
def schema_two() -> Schema:
    return parse_schema(S2_TEXT)


@pytest.fixture(scope="session")
def schema_three() -> Schema:
    return parse_schema(S3_TEXT)


@pytest.fixture(scope="session")
def schema_four() -> Schema:
    return parse_schema(S4_TEXT)


@pytest.fixture(scope="session")
def schema_rec() -> Schema:
    """Recursive-looking schema with a forced child: r -> a+, b*."""
    return parse_schema(S5_TEXT)


@pytest.fixture(scope="session")
def dblp_schema() -> Schema:
    return parse_schema(DBLP_TEXT)


@pytest.fixture(scope="session")
def doc_tree() -> TreeNode:
    return parse_tree(DOC_TREE_TEXT)


@pytest.fixture(scope="session")
def expr_basic() -> DisjunctiveExpression:
    """At least one a, exactly one of b/c, at most one d."""
    return parse_expression("a+, (b|c), d?", Alphabet("abcd"))


@pytest.fixture(scope="session")
def expr_wide() -> DisjunctiveExpression:
    """Ten-symbol expression exercising every factor shape; j never occurs."""
    return parse_expression(
        "(a|b)+, (c?|d*|e*), f+, g?, (h+|i)", Alphabet("abcdefghij")
    )


# ---------------------------------------------------------------------------
# random generators

MULTS = (M.ONE, M.OPTIONAL, M.PLUS, M.STAR)
ALL_MULTS = MULTS + (M.ZERO,)


def random_multiplicity(
    rng: random.Random, *, allow_zero: bool = False
) -> Multiplicity:
    return rng.choice(ALL_MULTS if allow_zero else MULTS)


def random_expression(
    rng: random.Random,
    symbols: Sequence[str],
    alphabet: Alphabet | None = None,
    *,
    max_factors: int = 3,
    allow_zero: bool = True,
) -> DisjunctiveExpression:
    """Random raw (unnormalized) expression over a subset of ``symbols``."""
    if alphabet is None:
        alphabet = Alphabet(symbols)
    pool = [s for s in symbols if rng.random() < 0.8]
    rng.shuffle(pool)
    factors = []
    while pool and len(factors) < max_factors:
        k = min(len(pool), rng.randint(1, 3))
        chunk, pool = pool[:k], pool[k:]
        disjuncts = tuple(
            (s, random_multiplicity(rng, allow_zero=allow_zero))
            for s in sorted(chunk)
        )
        factors.append((disjuncts, random_multiplicity(rng, allow_zero=allow_zero)))
    return build_expression(alphabet, factors)


def random_bounded_expression(
    rng: random.Random,
    symbols: Sequence[str],
    alphabet: Alphabet | None = None,
    **kwargs,
) -> DisjunctiveExpression:
    """Random expression with at most two required factors.

    With two obligations at most, any violation of one expression's triple by
    the other's language is already witnessed by a word of total count <= 4
    (one violating symbol at count <= 2 plus minimal picks for the remaining
    obligations), so bounded-word inclusion is an exact containment oracle.
    """
    while True:
        e = random_expression(rng, symbols, alphabet, **kwargs)
        if len(compute_triple(normalize(e)).required) <= 2:
            return e


def random_schema(
    rng: random.Random,
    labels: Sequence[str],
    *,
    disjunction_free: bool = False,
    child_chance: float = 0.5,
) -> Schema:
    """Random schema over ``labels``; the first label is the root.

    Rules may freely reference any label, so unsatisfiable labels and
    unsatisfiable schemas occur regularly — callers that need satisfiable
    instances should use :func:`random_terminating_schema`.
    """
    alphabet = Alphabet(labels)
    rules: dict[str, DisjunctiveExpression] = {}
    for label in labels:
        mentioned = [s for s in labels if rng.random() < child_chance]
        rng.shuffle(mentioned)
        factors = []
        i = 0
        while i < len(mentioned):
            k = 1 if disjunction_free else rng.randint(1, 3)
            group = mentioned[i : i + k]
            i += len(group)
            factors.append(
                (
                    tuple((s, random_multiplicity(rng)) for s in sorted(group)),
                    random_multiplicity(rng),
                )
            )
        rules[label] = build_expression(alphabet, factors)
    return make_schema(labels[0], rules, alphabet)


def random_terminating_schema(
    rng: random.Random,
    labels: Sequence[str],
    *,
    recursion_chance: float = 0.25,
) -> Schema:
    """Random disjunction-free schema in which every label is satisfiable.

    References to the label itself or to earlier labels always carry a
    zero-admitting multiplicity, so every label can terminate through the
    forward chain; forced (1/+) references only point forward.
    """
    alphabet = Alphabet(labels)
    rules: dict[str, DisjunctiveExpression] = {}
    for i, label in enumerate(labels):
        factors = []
        for j, s in enumerate(labels):
            if j > i:
                if rng.random() < 0.5:
                    factors.append((((s, random_multiplicity(rng)),), M.ONE))
            elif rng.random() < recursion_chance:
                factors.append((((s, rng.choice((M.OPTIONAL, M.STAR))),), M.ONE))
        rules[label] = build_expression(alphabet, factors)
    return make_schema(labels[0], rules, alphabet)


def random_member(
    rng: random.Random, s: Schema, *, depth_budget: int = 4
) -> TreeNode:
    """A random member of a schema built by :func:`random_terminating_schema`.

    Zero-admitting counts collapse to 0 once the budget runs out; forced
    counts always point at later labels, so the recursion terminates.
    """

    def grow(label: str, budget: int) -> TreeNode:
        kids = []
        for f in s.rules[label].factors:
            ((sym, m),) = f.disjuncts
            if m is M.ONE:
                n = 1
            elif m is M.PLUS:
                n = rng.randint(1, 2)
            elif budget <= 1:
                n = 0
            elif m is M.OPTIONAL:
                n = rng.randint(0, 1)
            else:
                n = rng.randint(0, 2)
            kids.extend(grow(sym, budget - 1) for _ in range(n))
        return TreeNode(label, tuple(kids))

    return grow(s.root, depth_budget)


def random_tree(
    rng: random.Random,
    labels: Sequence[str],
    *,
    max_depth: int = 4,
    max_fanout: int = 3,
    leaf_chance: float = 0.4,
) -> TreeNode:
    def grow(depth: int) -> TreeNode:
        label = rng.choice(labels)
        if depth >= max_depth or rng.random() < leaf_chance:
            return TreeNode(label)
        n = rng.randint(1, max_fanout)
        return TreeNode(label, tuple(grow(depth + 1) for _ in range(n)))

    return grow(1)


def random_query(
    rng: random.Random,
    labels: Sequence[str],
    *,
    max_nodes: int = 4,
    wildcard_chance: float = 0.25,
    desc_chance: float = 0.4,
) -> QueryNode:
    n = rng.randint(1, max_nodes)
    children: list[list[tuple[int, bool]]] = [[] for _ in range(n)]
    for i in range(1, n):
        children[rng.randrange(i)].append((i, rng.random() < desc_chance))
    labs = [
        None if rng.random() < wildcard_chance else rng.choice(labels)
        for _ in range(n)
    ]

    def build(i: int) -> QueryNode:
        ch = tuple(build(j) for j, desc in children[i] if not desc)
        de = tuple(build(j) for j, desc in children[i] if desc)
        return QueryNode(labs[i], ch, de)

    return build(0)


def random_dfregex(
    rng: random.Random, symbols: Sequence[str], *, max_size: int = 8
) -> Regex:
    """Random disjunction-free regex AST with at most ``max_size`` nodes."""

    def gen(budget: int) -> Regex:
        roll = rng.random()
        if budget >= 3 and roll < 0.45:
            left = rng.randint(1, budget - 2)
            return Cat(gen(left), gen(budget - 1 - left))
        if budget >= 2 and roll < 0.85:
            wrap = rng.choice((Star, Plus, Opt))
            return wrap(gen(budget - 1))
        if roll < 0.95 or budget < 1:
            return Sym(rng.choice(list(symbols)))
        return Eps()

    return gen(rng.randint(1, max_size))


def random_acyclic_graph(
    rng: random.Random,
    labels: Sequence[str],
    *,
    max_vertices: int = 6,
    extra_edge_chance: float = 0.25,
) -> RootedGraph:
    """Random connected rooted DAG; edges only go from lower to higher ids."""
    n = rng.randint(1, max_vertices)
    edges: dict[int, list[int]] = {i: [] for i in range(n)}
    for i in range(1, n):
        edges[rng.randrange(i)].append(i)
        for j in range(i):
            if i not in edges[j] and rng.random() < extra_edge_chance:
                edges[j].append(i)
    labs = {i: rng.choice(list(labels)) for i in range(n)}
    return RootedGraph(0, edges, labs)
