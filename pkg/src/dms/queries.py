"""Twig queries: label/wildcard tree patterns with child and descendant edges.

Query syntax is the XPath-like fragment ``r/*[*]//a``: steps separated by
``/`` (child) or ``//`` (proper descendant), predicates in brackets are
sub-twigs.  Embeddings map query nodes to tree nodes respecting labels and
edge kinds; they need not be injective.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

from .core import Alphabet, DmsError, TreeNode
from .graphs import RootedGraph, Vertex


class QuerySyntaxError(DmsError):
    def __init__(self, message: str, position: int) -> None:
        super().__init__(f"{message} (at column {position})")
        self.position = position


@dataclass(frozen=True, eq=False)
class QueryNode:
    """One pattern node; ``label`` None matches any symbol (wildcard).

    ``child_edges`` require the target to match a child of this node's
    image; ``desc_edges`` a proper descendant.
    """

    label: str | None
    child_edges: tuple["QueryNode", ...] = ()
    desc_edges: tuple["QueryNode", ...] = ()


TwigQuery = QueryNode


def query_nodes(q: QueryNode) -> list[QueryNode]:
    out = [q]
    for c in q.child_edges + q.desc_edges:
        out.extend(query_nodes(c))
    return out


def query_size(q: QueryNode) -> int:
    return len(query_nodes(q))


# ---------------------------------------------------------------------------
# parsing


def parse_query(text: str, alphabet: Alphabet | None = None) -> TwigQuery:
    """Parse ``a/b[c]//*`` syntax into a twig.

    Steps: ``name`` or ``*``; ``/`` child edge, ``//`` descendant edge;
    ``[...]`` predicate sub-twig attached by a child edge, ``[//...]`` by a
    descendant edge.  Value comparisons and attribute tests are out of
    scope and rejected at parse time.  With an ``alphabet``, labels outside
    it are rejected.
    """
    pos = 0
    n = len(text)

    def error(msg: str) -> QuerySyntaxError:
        return QuerySyntaxError(msg, pos)

    def skip_ws() -> None:
        nonlocal pos
        while pos < n and text[pos].isspace():
            pos += 1

    def parse_label() -> str | None:
        nonlocal pos
        skip_ws()
        if pos < n and text[pos] == "*":
            pos += 1
            return None
        start = pos
        while pos < n and (text[pos].isalnum() or text[pos] in "_-"):
            pos += 1
        if pos == start:
            raise error("expected a label or '*'")
        name = text[start:pos]
        if any(c in name for c in "@=\"'"):
            raise error("value and attribute predicates are not supported")
        if alphabet is not None and name not in alphabet:
            raise error(f"unknown label {name!r}")
        return name

    def parse_step() -> tuple[str | None, list[tuple[str, QueryNode]]]:
        nonlocal pos
        label = parse_label()
        preds: list[tuple[str, QueryNode]] = []
        skip_ws()
        while pos < n and text[pos] == "[":
            pos += 1
            skip_ws()
            if pos < n and (text[pos] == "@" or text[pos] in "\"'"):
                raise error("value and attribute predicates are not supported")
            kind = "child"
            if text.startswith("//", pos):
                kind = "desc"
                pos += 2
            sub = parse_path()
            skip_ws()
            if pos < n and text[pos] in "=\"'@<>":
                raise error("value and attribute predicates are not supported")
            if pos >= n or text[pos] != "]":
                raise error("expected ']'")
            pos += 1
            preds.append((kind, sub))
            skip_ws()
        return label, preds

    def parse_path() -> QueryNode:
        nonlocal pos
        label, preds = parse_step()
        child_edges = [q for k, q in preds if k == "child"]
        desc_edges = [q for k, q in preds if k == "desc"]
        skip_ws()
        if pos < n and text[pos] == "/":
            if text.startswith("//", pos):
                pos += 2
                desc_edges.append(parse_path())
            else:
                pos += 1
                child_edges.append(parse_path())
        return QueryNode(label, tuple(child_edges), tuple(desc_edges))

    skip_ws()
    if pos < n and text.startswith("/"):
        raise error("queries are rooted; drop the leading '/'")
    node = parse_path()
    skip_ws()
    if pos != n:
        raise error("trailing input")
    return node


def format_query(q: QueryNode) -> str:
    label = q.label if q.label is not None else "*"
    parts = [label]
    # Render trailing single chains with '/' where possible, predicates otherwise.
    child_edges = list(q.child_edges)
    desc_edges = list(q.desc_edges)
    tail: str | None = None
    if child_edges and not desc_edges:
        tail = "/" + format_query(child_edges.pop())
    elif desc_edges:
        tail = "//" + format_query(desc_edges.pop())
    for c in child_edges:
        parts.append(f"[{format_query(c)}]")
    for d in desc_edges:
        parts.append(f"[//{format_query(d)}]")
    if tail:
        parts.append(tail)
    return "".join(parts)


# ---------------------------------------------------------------------------
# embeddings into trees


def _label_ok(qn: QueryNode, label: str) -> bool:
    return qn.label is None or qn.label == label


def _tree_descendants(t: TreeNode) -> dict[int, list[TreeNode]]:
    """Proper descendants per node id, computed once per tree."""
    desc: dict[int, list[TreeNode]] = {}

    def walk(node: TreeNode) -> list[TreeNode]:
        acc: list[TreeNode] = []
        for c in node.children:
            acc.append(c)
            acc.extend(walk(c))
        desc[id(node)] = acc
        return acc

    walk(t)
    return desc


def embed_in_tree(q: TwigQuery, t: TreeNode) -> bool:
    """Whether some embedding maps the query root to the tree root."""
    desc = _tree_descendants(t)
    memo: dict[tuple[int, int], bool] = {}

    def emb(qn: QueryNode, tn: TreeNode) -> bool:
        key = (id(qn), id(tn))
        got = memo.get(key)
        if got is not None:
            return got
        ok = _label_ok(qn, tn.label)
        if ok:
            for c in qn.child_edges:
                if not any(emb(c, ch) for ch in tn.children):
                    ok = False
                    break
        if ok:
            for d in qn.desc_edges:
                if not any(emb(d, dn) for dn in desc[id(tn)]):
                    ok = False
                    break
        memo[key] = ok
        return ok

    return emb(q, t)


def count_embeddings(q: TwigQuery, t: TreeNode) -> int:
    """Number of distinct embeddings with the query root on the tree root.

    Query nodes are tree-shaped (no sharing), so the count factorizes over
    edges: each edge contributes the sum over admissible images of its
    target, independently of its siblings.
    """
    desc = _tree_descendants(t)
    memo: dict[tuple[int, int], int] = {}

    def cnt(qn: QueryNode, tn: TreeNode) -> int:
        key = (id(qn), id(tn))
        got = memo.get(key)
        if got is not None:
            return got
        if not _label_ok(qn, tn.label):
            memo[key] = 0
            return 0
        total = 1
        for c in qn.child_edges:
            total *= sum(cnt(c, ch) for ch in tn.children)
            if not total:
                break
        if total:
            for d in qn.desc_edges:
                total *= sum(cnt(d, dn) for dn in desc[id(tn)])
                if not total:
                    break
        memo[key] = total
        return total

    return cnt(q, t)


def enumerate_embeddings(
    q: TwigQuery, t: TreeNode
) -> Iterator[dict[int, TreeNode]]:
    """Explicit assignments query-node-id -> tree node; reference for counts."""
    desc = _tree_descendants(t)

    def assign(qn: QueryNode, tn: TreeNode) -> Iterator[dict[int, TreeNode]]:
        if not _label_ok(qn, tn.label):
            return
        partial: dict[int, TreeNode] = {id(qn): tn}
        edges: list[tuple[QueryNode, list[TreeNode]]] = [
            (c, list(tn.children)) for c in qn.child_edges
        ] + [(d, desc[id(tn)]) for d in qn.desc_edges]

        def fill(i: int, acc: dict[int, TreeNode]) -> Iterator[dict[int, TreeNode]]:
            if i == len(edges):
                yield dict(acc)
                return
            sub_q, candidates = edges[i]
            for cand in candidates:
                for sub_map in assign(sub_q, cand):
                    merged = dict(acc)
                    merged.update(sub_map)
                    yield from fill(i + 1, merged)

        yield from fill(0, partial)

    yield from assign(q, t)


def tree_as_query(t: TreeNode, descendant_edges: bool = False) -> TwigQuery:
    """View a tree as a twig with exact labels (child edges by default)."""
    kids = tuple(tree_as_query(c, descendant_edges) for c in t.children)
    if descendant_edges:
        return QueryNode(t.label, (), kids)
    return QueryNode(t.label, kids, ())


# ---------------------------------------------------------------------------
# embeddings into graphs


def embed_in_graph(q: TwigQuery, g: RootedGraph) -> bool:
    """Whether the query embeds with its root on the graph root.

    Same conditions as for trees with graph successors standing in for
    children and reachability (>= 1 edge) for proper descendants.
    """
    return g.root in embedding_candidates(q, g)


def embedding_candidates(q: TwigQuery, g: RootedGraph) -> frozenset[Vertex]:
    """All graph vertices at which the sub-twig rooted at ``q`` can sit."""
    child_sets = [embedding_candidates(c, g) for c in q.child_edges]
    desc_sets = [embedding_candidates(d, g) for d in q.desc_edges]
    good: set[Vertex] = set()
    for v in g.vertices:
        if not _label_ok(q, g.label(v)):
            continue
        succ = g.successors(v)
        if not all(any(s in cs for s in succ) for cs in child_sets):
            continue
        reach = g.proper_descendants(v)
        if not all(reach & ds for ds in desc_sets):
            continue
        good.add(v)
    return frozenset(good)
