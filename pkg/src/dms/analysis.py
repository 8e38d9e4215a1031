"""Query reasoning over disjunction-free multiplicity schemas.

Everything here runs on two views of an MS schema: the dependency graph
(an edge a -> b when b may occur under a) and its universal restriction
(edges whose child must occur).  Satisfiability of a query is embedding
into the former; implication by the schema is embedding into the latter;
containment between queries enumerates a finite family of witness graphs —
each one an embedding of the left query fleshed out with everything the
schema forces — and checks the right query embeds into all of them.

Graphs produced here are acyclic and unfold into member trees; the
fuse/add helpers shrink or grow those trees without breaking embeddings,
which is what the witness and counterexample constructions lean on.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, Mapping

from .core import DmsError, Multiplicity, TreeNode
from .expressions import DisjunctiveExpression
from .graphs import RootedGraph, Vertex, shape_key
from .queries import (
    QueryNode,
    TwigQuery,
    embed_in_graph,
    embed_in_tree,
    embedding_candidates,
    query_nodes,
)
from .schema import Schema, satisfiable_labels, tree_satisfies

M = Multiplicity


class UnfoldingInfiniteError(DmsError):
    """Raised when asked to unfold a cyclic graph."""


class NotDisjunctionFreeError(DmsError):
    pass


def _require_ms(s: Schema) -> None:
    if s.kind != "ms":
        raise NotDisjunctionFreeError(
            "this analysis applies to disjunction-free schemas only"
        )


@dataclass(frozen=True)
class DependencyGraph:
    """Symbol graph of an MS schema; ``nullable`` marks may-be-absent edges."""

    root: str
    edges: tuple[tuple[str, str, bool], ...]  # (parent, child, nullable)
    alphabet: tuple[str, ...]

    def graph(self) -> RootedGraph:
        succ: dict[str, list[str]] = {a: [] for a in self.alphabet}
        for a, b, _ in self.edges:
            succ[a].append(b)
        return RootedGraph(self.root, succ, {a: a for a in self.alphabet})

    def universal_graph(self) -> RootedGraph:
        succ: dict[str, list[str]] = {a: [] for a in self.alphabet}
        for a, b, nullable in self.edges:
            if not nullable:
                succ[a].append(b)
        return RootedGraph(self.root, succ, {a: a for a in self.alphabet})


def dependency_graph(s: Schema) -> DependencyGraph:
    """Edges a -> b for every b mentioned (with nonzero bound) in a's rule."""
    _require_ms(s)
    edges: list[tuple[str, str, bool]] = []
    for a in s.alphabet:
        for f in s.rules[a].factors:
            for b, m in f.disjuncts:
                edges.append((a, b, m.admits_zero))
    return DependencyGraph(s.root, tuple(edges), tuple(s.alphabet))


@dataclass(frozen=True)
class PruneResult:
    schema: Schema
    satisfiable: bool
    removed: frozenset[str]


def prune(s: Schema) -> PruneResult:
    """Erase unsatisfiable labels: their rules become "no children" and all
    references to them disappear from the surviving rules.

    For an MS rule any reference to an unsatisfiable label is necessarily
    nullable (otherwise the referencing label would be unsatisfiable too),
    so dropping it preserves the language of satisfying trees.  When the
    root itself is unsatisfiable the schema is returned with every rule
    erased and flagged unsatisfiable.
    """
    _require_ms(s)
    from .expressions import Factor, epsilon_expression, normalize

    sat = satisfiable_labels(s)
    removed = frozenset(s.alphabet) - sat
    rules: dict[str, DisjunctiveExpression] = {}
    for label in s.alphabet:
        if label not in sat:
            rules[label] = epsilon_expression(s.alphabet)
            continue
        expr = s.rules[label]
        keep = []
        changed = False
        for f in expr.factors:
            (sym, m), = f.disjuncts
            if sym in sat:
                keep.append(f)
            else:
                assert m.admits_zero, "non-nullable edge into unsatisfiable label"
                changed = True
        rules[label] = (
            normalize(DisjunctiveExpression(tuple(keep), s.alphabet))
            if changed
            else expr
        )
    return PruneResult(
        Schema(s.root, rules, s.alphabet, "ms"), s.root in sat, removed
    )


# ---------------------------------------------------------------------------
# simulation and unfolding


def simulate(g: RootedGraph, t: TreeNode) -> bool:
    """Greatest simulation of ``g`` by ``t``: every graph edge from a matched
    vertex must be matched by some child of the tree node."""
    nodes = list(_walk(t))
    pairs: set[tuple[Vertex, int]] = set()
    children: dict[int, list[TreeNode]] = {}
    for n in nodes:
        children[id(n)] = list(n.children)
    for v in g.vertices:
        for n in nodes:
            if g.label(v) == n.label:
                pairs.add((v, id(n)))
    by_id = {id(n): n for n in nodes}
    changed = True
    while changed:
        changed = False
        for v, nid in list(pairs):
            ok = all(
                any(
                    (v2, id(c)) in pairs for c in children[nid]
                )
                for v2 in g.successors(v)
            )
            if not ok:
                pairs.discard((v, nid))
                changed = True
    return (g.root, id(t)) in pairs


def _walk(t: TreeNode) -> Iterator[TreeNode]:
    yield t
    for c in t.children:
        yield from _walk(c)


def _descendant_paths(
    g: RootedGraph, u: Vertex, v: Vertex
) -> Iterator[tuple[Vertex, ...]]:
    """Vertex-distinct paths u -> v with at least one edge.

    For u == v these are the simple cycles through u: a descendant edge may
    map both its endpoints to one recursive symbol, and the path is laid
    out as a chain of fresh copies, so the witness graph stays acyclic.
    """
    if u != v:
        yield from g.simple_paths(u, v)
        return
    for first in g.successors(u):
        if first == v:
            yield (u, v)
        else:
            for tail in g.simple_paths(first, v):
                yield (u,) + tail


def unfold(g: RootedGraph) -> TreeNode:
    """Tree of all root paths of an acyclic graph (shared suffixes copied)."""
    if not g.is_acyclic():
        raise UnfoldingInfiniteError("graph has a cycle; unfolding is infinite")

    def build(v: Vertex) -> TreeNode:
        return TreeNode(g.label(v), tuple(build(s) for s in g.successors(v)))

    return build(g.root)


# ---------------------------------------------------------------------------
# satisfiability / implication


def query_satisfiable(s: Schema, q: TwigQuery) -> tuple[bool, str | None]:
    """Whether some tree of L(s) matches ``q``; (verdict, note)."""
    _require_ms(s)
    pr = prune(s)
    if not pr.satisfiable:
        return False, "schema is unsatisfiable"
    g = dependency_graph(pr.schema).graph()
    return embed_in_graph(q, g), None


def query_implied(s: Schema, q: TwigQuery) -> tuple[bool, str | None]:
    """Whether every tree of L(s) matches ``q``; (verdict, note)."""
    _require_ms(s)
    pr = prune(s)
    if not pr.satisfiable:
        return True, "schema is unsatisfiable; implication holds vacuously"
    gu = dependency_graph(pr.schema).universal_graph()
    return embed_in_graph(q, gu), None


def implication_counterexample(s: Schema, q: TwigQuery) -> TreeNode | None:
    """A member of L(s) not matching ``q``, when implication fails.

    The fully fused unfolding of the pruned universal graph is always a
    member, and any embedding of ``q`` into it would project onto the
    universal graph itself — so whenever implication fails, this one tree
    is a counterexample.
    """
    _require_ms(s)
    pr = prune(s)
    if not pr.satisfiable:
        return None
    gu = dependency_graph(pr.schema).universal_graph()
    if embed_in_graph(q, gu):
        return None
    t = fuse_all(unfold(gu))
    assert tree_satisfies(t, pr.schema), "forced tree failed schema check"
    assert not embed_in_tree(q, t), "forced tree unexpectedly matches query"
    return t


def witness_tree(s: Schema, q: TwigQuery) -> TreeNode | None:
    """A member of L(s) matching ``q``, or None when the query is unsatisfiable.

    Takes the first characteristic graph of the query, unfolds it, and
    merges all equal-label siblings; the merge keeps every per-symbol count
    at 0 or 1, which any surviving (nonzero) bound admits, and the forced
    sub-structure fused into each vertex supplies all must-occur children.
    """
    _require_ms(s)
    pr = prune(s)
    if not pr.satisfiable:
        return None
    for g in characteristic_graphs(q, s):
        t = fuse_all(unfold(g))
        assert tree_satisfies(t, pr.schema), "witness failed schema check"
        assert embed_in_tree(q, t), "witness failed query check"
        return t
    return None


# ---------------------------------------------------------------------------
# characteristic graphs


def characteristic_graphs(p: TwigQuery, s: Schema) -> Iterator[RootedGraph]:
    """Stream of witness graphs covering all ways ``p`` sits inside ``s``.

    One graph per (embedding of p into the dependency graph, choice of a
    simple path for every descendant edge): query nodes become one vertex
    each, descendant paths add fresh intermediate vertices, and every
    vertex gets the subgraph the universal graph forces below its label.
    Graphs are acyclic, satisfy the schema's forced structure, and the
    unfolding of each (after merging) is a member of L(s) — the finite
    family that query containment quantifies over.
    """
    _require_ms(s)
    pr = prune(s)
    if not pr.satisfiable:
        return
    dep = dependency_graph(pr.schema)
    yield from characteristic_graphs_over(p, dep.graph(), dep.universal_graph())


def characteristic_graphs_over(
    p: TwigQuery, g: RootedGraph, gu: RootedGraph
) -> Iterator[RootedGraph]:
    """Witness-graph stream over prepared dependency/universal graphs.

    ``g`` must have acyclic universal restriction ``gu`` and share its
    vertex set with it (vertices are symbols).
    """
    candidates = {id(qn): embedding_candidates(qn, g) for qn in query_nodes(p)}

    def assignments(
        qn: QueryNode, allowed: frozenset[str]
    ) -> Iterator[dict[int, str]]:
        here = sorted(candidates[id(qn)] & allowed)
        for sym in here:
            sub_iters = []
            for c in qn.child_edges:
                sub_iters.append(
                    assignments(c, frozenset(g.successors(sym)))
                )
            for d in qn.desc_edges:
                sub_iters.append(
                    assignments(d, g.proper_descendants(sym))
                )
            for combo in itertools.product(*[list(it) for it in sub_iters]):
                merged: dict[int, str] = {id(qn): sym}
                for m in combo:
                    merged.update(m)
                yield merged

    desc_edges = [
        (qn, d) for qn in query_nodes(p) for d in qn.desc_edges
    ]

    for lam in assignments(p, frozenset({g.root})):
        path_options = []
        for qn, d in desc_edges:
            paths = list(_descendant_paths(g, lam[id(qn)], lam[id(d)]))
            path_options.append(paths)
        if any(not opts for opts in path_options):
            continue
        for chosen in itertools.product(*path_options):
            yield _build_graph(p, lam, desc_edges, chosen, gu)


def _build_graph(
    p: TwigQuery,
    lam: Mapping[int, str],
    desc_edges: list[tuple[QueryNode, QueryNode]],
    chosen_paths: tuple[tuple[str, ...], ...],
    gu: RootedGraph,
) -> RootedGraph:
    labels: dict[int, str] = {}
    edges: dict[int, list[int]] = {}
    fresh = itertools.count()

    def new_vertex(label: str) -> int:
        v = next(fresh)
        labels[v] = label
        edges[v] = []
        return v

    vmap: dict[int, int] = {}
    for qn in query_nodes(p):
        vmap[id(qn)] = new_vertex(lam[id(qn)])
    for qn in query_nodes(p):
        for c in qn.child_edges:
            edges[vmap[id(qn)]].append(vmap[id(c)])
    for (qn, d), path in zip(desc_edges, chosen_paths):
        prev = vmap[id(qn)]
        for sym in path[1:-1]:
            nxt = new_vertex(sym)
            edges[prev].append(nxt)
            prev = nxt
        edges[prev].append(vmap[id(d)])
    base_vertices = list(labels)

    # Fuse the forced substructure into every vertex.  One shared layer (a
    # vertex per forced symbol) keeps the graph within |p|*|Sigma| + |Sigma|^2
    # vertices; the unfolding below each vertex is the same as with private
    # copies, so no embedding question can tell the difference.
    needed: set[str] = set()
    for v in base_vertices:
        needed |= gu.proper_descendants(labels[v])
    layer = {sym: new_vertex(sym) for sym in sorted(needed)}
    for sym, lv in layer.items():
        edges[lv] = [layer[tgt] for tgt in gu.successors(sym)]
    for v in base_vertices:
        for tgt in gu.successors(labels[v]):
            edges[v].append(layer[tgt])

    return RootedGraph(vmap[id(p)], edges, labels)


# ---------------------------------------------------------------------------
# containment


def query_contained(
    p: TwigQuery, q: TwigQuery, s: Schema
) -> tuple[bool, RootedGraph | None, str | None]:
    """Whether every tree of L(s) matching ``p`` also matches ``q``.

    Returns (verdict, failing witness graph or None, note).  Witness graphs
    with identical unfoldings are checked once (the embed answer only
    depends on the unfolding's shape).
    """
    _require_ms(s)
    pr = prune(s)
    if not pr.satisfiable:
        return True, None, "schema is unsatisfiable; containment holds vacuously"
    seen: set[str] = set()
    for g in characteristic_graphs(p, s):
        key = shape_key(g)
        if key in seen:
            continue
        seen.add(key)
        if not embed_in_graph(q, g):
            return False, g, None
    if not seen:
        return True, None, "left query matches no tree of the schema"
    return True, None, None


def containment_counterexample(
    p: TwigQuery, q: TwigQuery, s: Schema
) -> TreeNode | None:
    """A member of L(s) matching ``p`` but not ``q``, when one exists.

    Unfolds each failing witness graph and merges equal-label siblings only
    where the schema's bound forces it (counts above 1 under a one/optional
    bound).  A candidate is emitted only after verification; failing graphs
    whose forced merge re-introduces a match are skipped.
    """
    _require_ms(s)
    pr = prune(s)
    if not pr.satisfiable:
        return None
    seen: set[str] = set()
    for g in characteristic_graphs(p, s):
        key = shape_key(g)
        if key in seen:
            continue
        seen.add(key)
        if embed_in_graph(q, g):
            continue
        t = fuse_forced(unfold(g), pr.schema)
        if (
            tree_satisfies(t, pr.schema)
            and embed_in_tree(p, t)
            and not embed_in_tree(q, t)
        ):
            return t
    return None


# ---------------------------------------------------------------------------
# tree surgery: fuse / add


def fuse_siblings(root: TreeNode, parent: TreeNode, a: TreeNode, b: TreeNode) -> TreeNode:
    """Merge two equal-label children of ``parent``: one child remains,
    carrying both child lists.  Returns the rebuilt tree."""
    if a.label != b.label:
        raise ValueError("fused siblings must share a label")

    def rebuild(node: TreeNode) -> TreeNode:
        if node is parent:
            merged = TreeNode(a.label, a.children + b.children)
            kids = []
            placed = False
            for c in node.children:
                if c is a or c is b:
                    if not placed:
                        kids.append(merged)
                        placed = True
                else:
                    kids.append(rebuild(c))
            if not placed:
                raise ValueError("children do not belong to parent")
            return TreeNode(node.label, tuple(kids))
        return TreeNode(node.label, tuple(rebuild(c) for c in node.children))

    return rebuild(root)


def add_subtree(root: TreeNode, parent: TreeNode, sub: TreeNode) -> TreeNode:
    """Attach ``sub`` as an extra child of ``parent``; returns the new tree."""

    def rebuild(node: TreeNode) -> TreeNode:
        kids = tuple(rebuild(c) for c in node.children)
        if node is parent:
            kids = kids + (sub,)
        return TreeNode(node.label, kids)

    return rebuild(root)


def fuse_all(t: TreeNode) -> TreeNode:
    """Merge equal-label siblings everywhere, recursively."""
    groups: dict[str, list[TreeNode]] = {}
    for c in t.children:
        groups.setdefault(c.label, []).append(c)
    kids = []
    for label, members in groups.items():
        merged_children: tuple[TreeNode, ...] = ()
        for m in members:
            merged_children = merged_children + m.children
        kids.append(fuse_all(TreeNode(label, merged_children)))
    return TreeNode(t.label, tuple(kids))


def fuse_forced(t: TreeNode, s: Schema) -> TreeNode:
    """Merge equal-label siblings only where the parent's rule demands it."""
    bounds: dict[str, dict[str, Multiplicity]] = {}
    for label in s.alphabet:
        per: dict[str, Multiplicity] = {}
        for f in s.rules[label].factors:
            for sym, m in f.disjuncts:
                per[sym] = m
        bounds[label] = per

    def walk(node: TreeNode) -> TreeNode:
        groups: dict[str, list[TreeNode]] = {}
        for c in node.children:
            groups.setdefault(c.label, []).append(c)
        kids: list[TreeNode] = []
        per = bounds.get(node.label, {})
        for label, members in groups.items():
            cap_one = per.get(label, M.ZERO) in (M.ONE, M.OPTIONAL)
            if cap_one and len(members) > 1:
                merged: tuple[TreeNode, ...] = ()
                for m in members:
                    merged = merged + m.children
                kids.append(walk(TreeNode(label, merged)))
            else:
                kids.extend(walk(m) for m in members)
        return TreeNode(node.label, tuple(kids))

    return walk(t)
