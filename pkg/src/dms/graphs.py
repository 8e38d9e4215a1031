"""Rooted, labeled digraphs: the shared shape for dependency and witness graphs.

Vertices are arbitrary hashable ids; each carries a label.  Dependency
graphs of schemas use the symbol itself as both id and label; the graphs
produced by query analysis use fresh integer ids.
"""

from __future__ import annotations

from typing import Hashable, Iterable, Iterator, Mapping

Vertex = Hashable


class RootedGraph:
    __slots__ = ("_root", "_succ", "_labels", "_closure")

    def __init__(
        self,
        root: Vertex,
        edges: Mapping[Vertex, Iterable[Vertex]],
        labels: Mapping[Vertex, str] | None = None,
        vertices: Iterable[Vertex] | None = None,
    ) -> None:
        succ: dict[Vertex, tuple[Vertex, ...]] = {}
        known: list[Vertex] = []

        def note(v: Vertex) -> None:
            if v not in succ:
                succ[v] = ()
                known.append(v)

        note(root)
        for v in vertices or ():
            note(v)
        for v in edges:
            note(v)
        for v, targets in edges.items():
            ts = tuple(targets)
            for t in ts:
                note(t)
            succ[v] = ts
        if labels is None:
            lab = {v: str(v) for v in known}
        else:
            lab = {v: labels.get(v, str(v)) for v in known}
        self._root = root
        self._succ = succ
        self._labels = lab
        self._closure: dict[Vertex, frozenset[Vertex]] | None = None

    @property
    def root(self) -> Vertex:
        return self._root

    @property
    def vertices(self) -> tuple[Vertex, ...]:
        return tuple(self._succ)

    def label(self, v: Vertex) -> str:
        return self._labels[v]

    def successors(self, v: Vertex) -> tuple[Vertex, ...]:
        return self._succ[v]

    def edge_count(self) -> int:
        return sum(len(ts) for ts in self._succ.values())

    def proper_descendants(self, v: Vertex) -> frozenset[Vertex]:
        """Vertices reachable from ``v`` through at least one edge."""
        if self._closure is None:
            self._closure = {u: self._compute_reach(u) for u in self._succ}
        return self._closure[v]

    def _compute_reach(self, v: Vertex) -> frozenset[Vertex]:
        seen: set[Vertex] = set()
        frontier = list(self._succ[v])
        while frontier:
            u = frontier.pop()
            if u in seen:
                continue
            seen.add(u)
            frontier.extend(self._succ[u])
        return frozenset(seen)

    def reachable_from_root(self) -> frozenset[Vertex]:
        return self.proper_descendants(self._root) | {self._root}

    def is_acyclic(self) -> bool:
        return all(v not in self.proper_descendants(v) for v in self._succ)

    def simple_paths(self, start: Vertex, end: Vertex) -> Iterator[tuple[Vertex, ...]]:
        """All vertex-distinct paths start -> end with at least one edge.

        When start == end there is no such path (a loop would repeat the
        vertex), matching the convention that a vertex is not its own proper
        descendant along a simple path.
        """
        path = [start]
        on_path = {start}

        def walk(v: Vertex) -> Iterator[tuple[Vertex, ...]]:
            for nxt in self._succ[v]:
                if nxt == end:
                    if end not in on_path:
                        yield tuple(path) + (end,)
                    continue
                if nxt in on_path:
                    continue
                path.append(nxt)
                on_path.add(nxt)
                yield from walk(nxt)
                path.pop()
                on_path.remove(nxt)

        yield from walk(start)

    def __repr__(self) -> str:
        edges = ", ".join(
            f"{v}->{t}" for v in self._succ for t in self._succ[v]
        )
        return f"RootedGraph(root={self._root!r}, {{{edges}}})"


def shape_key(g: RootedGraph) -> str:
    """Canonical encoding of the tree-unfolding of an acyclic graph.

    Two graphs with equal keys have isomorphic unfoldings, hence the same
    answers to all embedding questions.
    """
    memo: dict[Vertex, str] = {}

    def enc(v: Vertex) -> str:
        got = memo.get(v)
        if got is None:
            inner = ",".join(sorted(enc(s) for s in g.successors(v)))
            got = f"{g.label(v)}({inner})" if inner else g.label(v)
            memo[v] = got
        return got

    return enc(g.root)
