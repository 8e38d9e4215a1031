"""Core model: multiplicities, alphabets, unordered words, trees, event streams.

An unordered word is a multiset of symbols; sibling order in a tree is
irrelevant, so tree equality is isomorphism that ignores child order.
Multiplicities are the five classic occurrence constraints (``*``, ``+``,
``?``, ``1``, ``0``) interpreted as sets of admissible counts.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, NamedTuple


class DmsError(Exception):
    """Base class for all errors raised by this package."""


class UnknownSymbolError(DmsError):
    pass


class UnknownNodeError(DmsError):
    pass


class MalformedStreamError(DmsError):
    """Event stream is not a single balanced open/close sequence.

    ``position`` is the index of the offending event (or of end-of-stream).
    """

    def __init__(self, message: str, position: int) -> None:
        super().__init__(f"{message} (at event {position})")
        self.position = position


class Multiplicity(enum.Enum):
    """Occurrence constraint on a symbol or factor.

    Each member denotes a set of admissible counts: ``STAR`` any count,
    ``PLUS`` >= 1, ``OPTIONAL`` <= 1, ``ONE`` exactly 1, ``ZERO`` exactly 0.
    """

    STAR = "*"
    PLUS = "+"
    OPTIONAL = "?"
    ONE = "1"
    ZERO = "0"

    def __repr__(self) -> str:  # dataclass reprs read better with the token
        return f"Multiplicity({self.value!r})"

    @property
    def token(self) -> str:
        return self.value

    def contains(self, count: int) -> bool:
        """Whether ``count`` is an admissible number of occurrences."""
        if count < 0:
            raise ValueError("counts are non-negative")
        if self is Multiplicity.STAR:
            return True
        if self is Multiplicity.PLUS:
            return count >= 1
        if self is Multiplicity.OPTIONAL:
            return count <= 1
        if self is Multiplicity.ONE:
            return count == 1
        return count == 0

    @property
    def admits_zero(self) -> bool:
        return self.contains(0)

    def with_zero(self) -> "Multiplicity":
        """Smallest multiplicity whose count set contains this one plus 0.

        Because every multiplicity's count set is an interval, this is also
        the downward closure, which is what rewriting under an optional
        wrapper needs.
        """
        return _WITH_ZERO[self]

    def includes(self, other: "Multiplicity") -> bool:
        """Whether every count admitted by ``other`` is admitted by ``self``."""
        return _FINGERPRINT[other] <= _FINGERPRINT[self]


# Count sets collapsed onto the blocks {0}, {1}, {>=2}; every multiplicity's
# count set is a union of these blocks, so block-set inclusion is exact.
_FINGERPRINT: dict[Multiplicity, frozenset[int]] = {
    Multiplicity.STAR: frozenset({0, 1, 2}),
    Multiplicity.PLUS: frozenset({1, 2}),
    Multiplicity.OPTIONAL: frozenset({0, 1}),
    Multiplicity.ONE: frozenset({1}),
    Multiplicity.ZERO: frozenset({0}),
}

_WITH_ZERO: dict[Multiplicity, Multiplicity] = {
    Multiplicity.STAR: Multiplicity.STAR,
    Multiplicity.PLUS: Multiplicity.STAR,
    Multiplicity.OPTIONAL: Multiplicity.OPTIONAL,
    Multiplicity.ONE: Multiplicity.OPTIONAL,
    Multiplicity.ZERO: Multiplicity.ZERO,
}


class Alphabet:
    """Finite symbol set with stable, dense 1-based indices."""

    __slots__ = ("_symbols", "_index")

    def __init__(self, symbols: Iterable[str]) -> None:
        syms = tuple(symbols)
        index: dict[str, int] = {}
        for i, s in enumerate(syms, start=1):
            if not s:
                raise ValueError("alphabet symbols must be non-empty strings")
            if s in index:
                raise ValueError(f"duplicate alphabet symbol {s!r}")
            index[s] = i
        self._symbols = syms
        self._index = index

    @property
    def symbols(self) -> tuple[str, ...]:
        return self._symbols

    def index(self, symbol: str) -> int:
        try:
            return self._index[symbol]
        except KeyError:
            raise UnknownSymbolError(f"symbol {symbol!r} not in alphabet") from None

    def __contains__(self, symbol: object) -> bool:
        return symbol in self._index

    def __iter__(self) -> Iterator[str]:
        return iter(self._symbols)

    def __len__(self) -> int:
        return len(self._symbols)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Alphabet) and self._symbols == other._symbols

    def __hash__(self) -> int:
        return hash(self._symbols)

    def __repr__(self) -> str:
        return f"Alphabet({', '.join(self._symbols)})"


class UnorderedWord:
    """Immutable multiset of symbols.

    ``count`` of an absent symbol is 0; zero counts are never stored, so two
    words are equal iff they have identical support and counts.
    """

    __slots__ = ("_counts", "_key")

    def __init__(self, counts: Mapping[str, int] | None = None) -> None:
        cleaned: dict[str, int] = {}
        if counts:
            for sym, n in counts.items():
                if n < 0:
                    raise ValueError(f"negative count for {sym!r}")
                if n:
                    cleaned[sym] = n
        self._counts = cleaned
        self._key = tuple(sorted(cleaned.items()))

    @classmethod
    def from_symbols(cls, symbols: Iterable[str]) -> "UnorderedWord":
        counts: dict[str, int] = {}
        for s in symbols:
            counts[s] = counts.get(s, 0) + 1
        return cls(counts)

    @classmethod
    def from_compact(cls, text: str) -> "UnorderedWord":
        """Build from a string of single-character symbols, e.g. ``"aabc"``."""
        return cls.from_symbols(text)

    def count(self, symbol: str) -> int:
        return self._counts.get(symbol, 0)

    @property
    def support(self) -> frozenset[str]:
        return frozenset(self._counts)

    @property
    def total(self) -> int:
        return sum(self._counts.values())

    def items(self) -> Iterable[tuple[str, int]]:
        return self._key

    def __iter__(self) -> Iterator[str]:
        return iter(self._counts)

    def __contains__(self, symbol: object) -> bool:
        return symbol in self._counts

    def __add__(self, other: "UnorderedWord") -> "UnorderedWord":
        """Multiset union: counts add."""
        if not isinstance(other, UnorderedWord):
            return NotImplemented
        merged = dict(self._counts)
        for sym, n in other._counts.items():
            merged[sym] = merged.get(sym, 0) + n
        return UnorderedWord(merged)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, UnorderedWord) and self._key == other._key

    def __hash__(self) -> int:
        return hash(self._key)

    def __bool__(self) -> bool:
        return bool(self._counts)

    def __str__(self) -> str:
        if not self._counts:
            return "epsilon"
        if all(len(s) == 1 for s in self._counts):
            return "".join(s * n for s, n in self._key)
        return " ".join(f"{s}:{n}" for s, n in self._key)

    def __repr__(self) -> str:
        return f"UnorderedWord({dict(self._key)!r})"


EMPTY_WORD = UnorderedWord()


def word_concat(w1: UnorderedWord, w2: UnorderedWord) -> UnorderedWord:
    return w1 + w2


@dataclass(frozen=True, eq=False)
class TreeNode:
    """Node of an unordered tree; a tree is identified with its root node.

    ``children`` is a tuple only to make the value immutable — the order is
    an artifact of construction and never semantically relevant.  Node
    equality is intentionally identity (distinct nodes with equal labels are
    distinct); use :func:`trees_isomorphic` for tree-level equality.
    """

    label: str
    children: tuple["TreeNode", ...] = ()


# Convenience alias: the public surface talks about trees, not nodes.
UnorderedTree = TreeNode


def tree(label: str, *children: TreeNode) -> TreeNode:
    return TreeNode(label, tuple(children))


def iter_nodes(t: TreeNode) -> Iterator[TreeNode]:
    """Pre-order traversal."""
    stack = [t]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(node.children))


def tree_size(t: TreeNode) -> int:
    return sum(1 for _ in iter_nodes(t))


def tree_height(t: TreeNode) -> int:
    """Number of levels (a single node has height 1)."""
    return 1 + max((tree_height(c) for c in t.children), default=0)


def children_word(t: TreeNode, node: TreeNode | None = None) -> UnorderedWord:
    """Unordered word of child labels of ``node`` (default: root) in ``t``."""
    if node is None:
        node = t
    else:
        for candidate in iter_nodes(t):
            if candidate is node:
                break
        else:
            raise UnknownNodeError("node does not belong to this tree")
    return UnorderedWord.from_symbols(c.label for c in node.children)


def canonical_form(t: TreeNode) -> str:
    """Canonical string for a tree, invariant under sibling permutation."""
    if not t.children:
        return t.label
    inner = ",".join(sorted(canonical_form(c) for c in t.children))
    return f"{t.label}({inner})"


def trees_isomorphic(t1: TreeNode, t2: TreeNode) -> bool:
    return canonical_form(t1) == canonical_form(t2)


class TreeEvent(NamedTuple):
    """One step of a depth-first tree serialization."""

    kind: str  # "open" | "close"
    label: str


def open_event(label: str) -> TreeEvent:
    return TreeEvent("open", label)


def close_event(label: str) -> TreeEvent:
    return TreeEvent("close", label)


def tree_to_events(t: TreeNode) -> list[TreeEvent]:
    """Serialize depth-first, children in stored order."""
    out: list[TreeEvent] = []

    def walk(node: TreeNode) -> None:
        out.append(TreeEvent("open", node.label))
        for c in node.children:
            walk(c)
        out.append(TreeEvent("close", node.label))

    walk(t)
    return out


def events_to_tree(events: Iterable[TreeEvent]) -> TreeNode:
    """Rebuild a tree from a balanced event stream.

    Raises :class:`MalformedStreamError` (with the event index) on unbalanced
    streams, mismatched close labels, multiple top-level trees, or an empty
    stream.
    """
    # Each stack entry collects the children seen so far for one open node.
    stack: list[tuple[str, list[TreeNode]]] = []
    root: TreeNode | None = None
    pos = -1
    for pos, ev in enumerate(events):
        if ev.kind == "open":
            if root is not None:
                raise MalformedStreamError("event after the root was closed", pos)
            stack.append((ev.label, []))
        elif ev.kind == "close":
            if root is not None:
                raise MalformedStreamError("event after the root was closed", pos)
            if not stack:
                raise MalformedStreamError("close event with no open node", pos)
            label, kids = stack.pop()
            if label != ev.label:
                raise MalformedStreamError(
                    f"close tag {ev.label!r} does not match open tag {label!r}", pos
                )
            node = TreeNode(label, tuple(kids))
            if stack:
                stack[-1][1].append(node)
            else:
                root = node
        else:
            raise MalformedStreamError(f"unknown event kind {ev.kind!r}", pos)
    if root is None:
        if not stack:
            raise MalformedStreamError("empty event stream", 0)
        raise MalformedStreamError("stream ended with unclosed nodes", pos + 1)
    return root


def parse_tree(text: str) -> TreeNode:
    """Parse the compact ``label(child, child, ...)`` tree notation."""
    text = text.strip()
    pos = 0

    def error(msg: str) -> DmsError:
        return DmsError(f"tree syntax error at {pos}: {msg}")

    def skip_ws() -> None:
        nonlocal pos
        while pos < len(text) and text[pos].isspace():
            pos += 1

    def parse_node() -> TreeNode:
        nonlocal pos
        skip_ws()
        start = pos
        while pos < len(text) and (text[pos].isalnum() or text[pos] in "_-"):
            pos += 1
        if pos == start:
            raise error("expected a label")
        label = text[start:pos]
        kids: list[TreeNode] = []
        skip_ws()
        if pos < len(text) and text[pos] == "(":
            pos += 1
            while True:
                kids.append(parse_node())
                skip_ws()
                if pos < len(text) and text[pos] == ",":
                    pos += 1
                    continue
                if pos < len(text) and text[pos] == ")":
                    pos += 1
                    break
                raise error("expected ',' or ')'")
        return TreeNode(label, tuple(kids))

    node = parse_node()
    skip_ws()
    if pos != len(text):
        raise error("trailing input")
    return node


def format_tree(t: TreeNode) -> str:
    if not t.children:
        return t.label
    return f"{t.label}({','.join(format_tree(c) for c in t.children)})"
