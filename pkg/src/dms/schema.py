"""Multiplicity schemas over unordered trees.

A schema names a root label and gives every alphabet symbol a rule — a
disjunctive multiplicity expression constraining the children word of any
node with that label (labels without an explicit rule default to "no
children").  A tree satisfies the schema when its root carries the root
label and every node's children word belongs to its label's rule.

``kind`` distinguishes the full class (``dms``) from the disjunction-free
fragment (``ms``), which is what the graph-based query analysis applies to.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Mapping

from .core import Alphabet, DmsError, Multiplicity, TreeNode, UnorderedWord, children_word
from .expressions import (
    CharTriple,
    DisjunctiveExpression,
    ExpressionSyntaxError,
    Factor,
    _count_vectors,
    compute_triple,
    epsilon_expression,
    expression_contains,
    normalize,
    parse_expression,
    separating_word,
    word_matches,
)

M = Multiplicity


class SchemaSyntaxError(DmsError):
    def __init__(self, message: str, line: int) -> None:
        super().__init__(f"{message} (line {line})")
        self.line = line


@dataclass(frozen=True)
class Schema:
    root: str
    rules: Mapping[str, DisjunctiveExpression]
    alphabet: Alphabet
    kind: str  # "dms" | "ms"

    def rule(self, label: str) -> DisjunctiveExpression:
        return self.rules[label]


def make_schema(
    root: str,
    rules: Mapping[str, DisjunctiveExpression],
    alphabet: Alphabet,
) -> Schema:
    """Build a schema, completing missing rules with "no children".

    Rules are normalized eagerly so that every downstream consumer can rely
    on the three-shape normal form.
    """
    if root not in alphabet:
        raise ValueError(f"root {root!r} not in alphabet")
    complete: dict[str, DisjunctiveExpression] = {}
    for label in alphabet:
        expr = rules.get(label)
        if expr is None:
            complete[label] = epsilon_expression(alphabet)
        else:
            if set(expr.alphabet) != set(alphabet):
                raise ValueError(f"rule for {label!r} uses a different alphabet")
            complete[label] = normalize(expr) if not expr.normalized else expr
    kind = "ms" if all(_is_disjunction_free(e) for e in complete.values()) else "dms"
    return Schema(root, complete, alphabet, kind)


def _is_disjunction_free(e: DisjunctiveExpression) -> bool:
    return all(len(f.disjuncts) == 1 for f in e.factors)


# ---------------------------------------------------------------------------
# text format


def parse_schema(text: str, alphabet: Alphabet | None = None) -> Schema:
    """Parse the line-oriented schema format.

    The first effective line must be ``root = <label>``; every following
    line reads ``<label> -> <expression>``.  ``#`` starts a comment.  Labels
    mentioned anywhere but given no rule default to "no children".  A label
    with two rules is an error.  When ``alphabet`` is omitted it is inferred
    from the mentioned symbols, in order of first appearance.
    """
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
            if "=" not in line:
                raise SchemaSyntaxError("expected 'root = <label>' first", lineno)
            key, _, value = line.partition("=")
            if key.strip() != "root" or not value.strip():
                raise SchemaSyntaxError("expected 'root = <label>' first", lineno)
            root = value.strip()
            note(root)
            continue
        if "->" not in line:
            raise SchemaSyntaxError("expected '<label> -> <expression>'", lineno)
        label, _, body = line.partition("->")
        label = label.strip()
        body = body.strip()
        if not label or not body:
            raise SchemaSyntaxError("expected '<label> -> <expression>'", lineno)
        if label in bodies:
            raise SchemaSyntaxError(f"duplicate rule for {label!r}", lineno)
        bodies[label] = (body, lineno)
        note(label)
        for token in _mentioned_symbols(body):
            note(token)

    if root is None:
        raise SchemaSyntaxError("empty schema: no 'root =' line", 1)

    if alphabet is None:
        alphabet = Alphabet(order)
    rules: dict[str, DisjunctiveExpression] = {}
    for label, (body, lineno) in bodies.items():
        if label not in alphabet:
            raise SchemaSyntaxError(f"label {label!r} not in alphabet", lineno)
        try:
            rules[label] = parse_expression(body, alphabet)
        except ExpressionSyntaxError as exc:
            raise SchemaSyntaxError(f"bad rule for {label!r}: {exc}", lineno) from exc
    return make_schema(root, rules, alphabet)


def _mentioned_symbols(body: str) -> Iterator[str]:
    current = []
    for ch in body + " ":
        if ch.isalnum() or ch in "_-":
            current.append(ch)
        else:
            if current:
                name = "".join(current)
                if name != "epsilon":
                    yield name
                current = []


def format_schema(s: Schema) -> str:
    from .expressions import format_expression

    lines = [f"root = {s.root}"]
    for label in s.alphabet:
        expr = s.rules[label]
        if expr.factors:
            lines.append(f"{label} -> {format_expression(expr)}")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# satisfaction and decision procedures


def tree_satisfies(t: TreeNode, s: Schema) -> bool:
    if t.label != s.root:
        return False
    stack = [t]
    while stack:
        node = stack.pop()
        if node.label not in s.alphabet:
            return False
        w = UnorderedWord.from_symbols(c.label for c in node.children)
        if not word_matches(w, s.rules[node.label]):
            return False
        stack.extend(node.children)
    return True


def satisfiable_labels(s: Schema) -> frozenset[str]:
    """Least fixpoint of "this label admits some finite tree".

    A label is satisfiable when every factor of its (normalized) rule can be
    satisfied: factors whose disjuncts all forbid zero need at least one
    disjunct over an already-satisfiable symbol; the rest can stay empty.
    """
    sat: set[str] = set()
    changed = True
    while changed:
        changed = False
        for label in s.alphabet:
            if label in sat:
                continue
            if _rule_satisfiable(s.rules[label], sat):
                sat.add(label)
                changed = True
    return frozenset(sat)


def _rule_satisfiable(e: DisjunctiveExpression, sat: set[str] | frozenset[str]) -> bool:
    for f in e.factors:
        if any(m.admits_zero for _, m in f.disjuncts):
            continue
        if not any(sym in sat for sym, _ in f.disjuncts):
            return False
    return True


def schema_satisfiable(s: Schema) -> bool:
    return s.root in satisfiable_labels(s)


def reachable_labels(s: Schema) -> frozenset[str]:
    """Labels reachable from the root through rule mentions (root included)."""
    seen = {s.root}
    frontier = [s.root]
    while frontier:
        label = frontier.pop()
        for f in s.rules[label].factors:
            for sym, _ in f.disjuncts:
                if sym not in seen:
                    seen.add(sym)
                    frontier.append(sym)
    return frozenset(seen)


def schema_universal(s: Schema) -> bool:
    """Whether every tree over the alphabet (rooted at root) satisfies ``s``.

    Holds iff each reachable label's rule accepts every children word, i.e.
    its triple is (no conflicts, all-star cardinalities, no requirements)
    over the schema alphabet.
    """
    for label in reachable_labels(s):
        tr = compute_triple(s.rules[label])
        if tr.conflicts or tr.required:
            return False
        if any(m is not M.STAR for _, m in tr.cardinality):
            return False
    return True


# ---------------------------------------------------------------------------
# containment


def restrict_to_satisfiable(s: Schema) -> Schema:
    """Rewrite rules so only satisfiable labels are ever mentioned.

    Languages are preserved: a disjunct over an unsatisfiable symbol can
    never produce children in a real tree, so it is dropped; if it admitted
    zero occurrences its epsilon contribution survives via the outer
    multiplicity's downward closure (handled by re-normalization after
    marking the disjunct zero).  Unsatisfiable labels keep an unsatisfiable
    rule on purpose (their subtree set is empty either way).
    """
    sat = satisfiable_labels(s)
    new_rules: dict[str, DisjunctiveExpression] = {}
    for label in s.alphabet:
        if label not in sat:
            new_rules[label] = s.rules[label]
            continue
        expr = s.rules[label]
        changed = False
        factors: list[Factor] = []
        for f in expr.factors:
            new_disjuncts = []
            for sym, m in f.disjuncts:
                if sym in sat:
                    new_disjuncts.append((sym, m))
                else:
                    changed = True
                    if m.admits_zero:
                        new_disjuncts.append((sym, M.ZERO))
                    # else: drop entirely; no word of this branch is realizable
            if new_disjuncts:
                factors.append(Factor(tuple(new_disjuncts), f.outer))
            else:
                # Every branch vanished without an epsilon remnant; the rule
                # would be unsatisfiable, contradicting label in sat.
                raise AssertionError("mandatory factor lost all branches")
        new_rules[label] = (
            normalize(DisjunctiveExpression(tuple(factors), s.alphabet))
            if changed
            else expr
        )
    return Schema(s.root, new_rules, s.alphabet, s.kind)


def schema_contains(s1: Schema, s2: Schema) -> bool:
    """Whether L(s1) is a subset of L(s2)."""
    return _containment(outer=s2, inner=s1)[0]


def find_containment_counterexample(s1: Schema, s2: Schema) -> TreeNode | None:
    """A tree in L(s1) but not in L(s2), or None when contained."""
    return _containment(outer=s2, inner=s1)[1]


def _containment(outer: Schema, inner: Schema) -> tuple[bool, TreeNode | None]:
    """Decide L(inner) subset-of L(outer), plus a separating tree on failure."""
    if set(outer.alphabet) != set(inner.alphabet):
        raise ValueError("schemas must share an alphabet")
    if not schema_satisfiable(inner):
        return True, None
    if outer.root != inner.root or not schema_satisfiable(outer):
        t = minimal_member(inner)
        assert t is not None
        return False, t
    ro = restrict_to_satisfiable(outer)
    ri = restrict_to_satisfiable(inner)
    # Only labels reachable inside the inner restricted rules matter: every
    # inner tree is built from them, and on each of those labels the inner
    # rule's language must shrink into the outer rule's.
    for label in sorted(reachable_labels_from(ri, ri.root)):
        if not expression_contains(ro.rules[label], ri.rules[label]):
            w = separating_word(ro.rules[label], ri.rules[label])
            assert w is not None, "triple said not contained; word must exist"
            return False, _embed_word_at(ri, label, w)
    return True, None


def reachable_labels_from(s: Schema, start: str) -> frozenset[str]:
    seen = {start}
    frontier = [start]
    while frontier:
        label = frontier.pop()
        for f in s.rules[label].factors:
            for sym, _ in f.disjuncts:
                if sym not in seen:
                    seen.add(sym)
                    frontier.append(sym)
    return frozenset(seen)


def minimal_member(s: Schema, label: str | None = None) -> TreeNode | None:
    """A smallest-depth tree admitted at ``label`` (default: root), if any.

    Follows the satisfiability fixpoint: each label that became satisfiable
    at stage k has a member of height <= k, built by filling only mandatory
    factors with a stage-minimal branch.
    """
    stages: dict[str, int] = {}
    stage = 0
    changed = True
    known: set[str] = set()
    while changed:
        stage += 1
        changed = False
        for cand in s.alphabet:
            if cand in known:
                continue
            if _rule_satisfiable(s.rules[cand], known):
                stages[cand] = stage
                changed = True
        known.update(c for c, k in stages.items() if k == stage)

    target = label if label is not None else s.root
    if target not in stages:
        return None

    def build(lab: str) -> TreeNode:
        kids: list[TreeNode] = []
        for f in s.rules[lab].factors:
            if any(m.admits_zero for _, m in f.disjuncts):
                continue
            sym = min(
                (sym for sym, _ in f.disjuncts if sym in stages),
                key=lambda x: stages[x],
            )
            kids.append(build(sym))
        return TreeNode(lab, tuple(kids))

    return build(target)


def _member_with_child(s: Schema, label: str, child: str) -> UnorderedWord:
    """A children word of ``label``'s rule containing ``child``.

    Only called on satisfiability-restricted schemas where ``child`` occurs
    in the rule; searched with per-symbol counts <= 2.
    """
    rule = s.rules[label]
    syms = sorted(rule.symbols)
    best: UnorderedWord | None = None
    for counts in _count_vectors(len(syms), 2):
        w = UnorderedWord({x: c for x, c in zip(syms, counts) if c})
        if w.count(child) >= 1 and word_matches(w, rule):
            if best is None or w.total < best.total:
                best = w
    if best is None:
        raise AssertionError(f"{child!r} not realizable under {label!r}")
    return best


def _embed_word_at(s: Schema, label: str, w: UnorderedWord) -> TreeNode:
    """A tree of L(s) whose node labeled ``label`` has children word ``w``.

    ``s`` must be satisfiability-restricted, ``label`` reachable in it and
    ``w`` in the label's rule language.  The path from the root to ``label``
    is found over the rule-mention graph; off-path children are filled with
    minimal members.
    """
    parent: dict[str, tuple[str, ...]] = {s.root: (s.root,)}
    frontier = [s.root]
    while frontier and label not in parent:
        cur = frontier.pop(0)
        for f in s.rules[cur].factors:
            for sym, _ in f.disjuncts:
                if sym not in parent:
                    parent[sym] = parent[cur] + (sym,)
                    frontier.append(sym)
    path = parent[label]

    def fill(lab: str) -> TreeNode:
        node = minimal_member(s, lab)
        assert node is not None
        return node

    def build_at(i: int) -> TreeNode:
        lab = path[i]
        if i == len(path) - 1:
            kids = [fill(sym) for sym, n in w.items() for _ in range(n)]
            return TreeNode(lab, tuple(kids))
        nxt = path[i + 1]
        cw = _member_with_child(s, lab, nxt)
        kids = []
        used_special = False
        for sym, n in cw.items():
            for j in range(n):
                if sym == nxt and not used_special:
                    kids.append(build_at(i + 1))
                    used_special = True
                else:
                    kids.append(fill(sym))
        return TreeNode(lab, tuple(kids))

    return build_at(0)
