"""Disjunctive multiplicity expressions and their characterizing triples.

An expression is an unordered product of factors ``(a1^m1 | ... | ak^mk)^M``;
each symbol of the alphabet may appear at most once in the whole expression.
A word belongs to a factor's language when it splits into i in [[M]] chunks,
each chunk drawn from one disjunct's language ``a^m``; factor languages
combine by multiset union.

Every expression is rewritten into a normal form in which each factor has one
of three shapes:

* all-ones disjunction under ``+``            -- "pick at least one, freely";
* outer ``1``, no disjunct admitting zero     -- "exactly one branch, present";
* outer ``1``, every disjunct admitting zero  -- "at most one branch".

On normal forms membership, inclusion and equivalence all reduce to a triple
of per-symbol cardinalities (N), same-factor exclusion sets (C) and required
sets (P); that reduction is what the schema reasoning and the streaming
validator are built on.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Iterator

from .core import Alphabet, DmsError, Multiplicity, UnorderedWord

M = Multiplicity  # local shorthand; the public names stay on the enum


class ExpressionSyntaxError(DmsError):
    def __init__(self, message: str, position: int) -> None:
        super().__init__(f"{message} (at column {position})")
        self.position = position


@dataclass(frozen=True)
class Factor:
    """One factor: a disjunction of single-symbol atoms under an outer bound.

    ``disjuncts`` maps each symbol to its inner multiplicity; a bare symbol
    ``a`` parses as the singleton disjunction ``(a^1)`` with outer ``1`` and a
    suffixed one like ``a+`` keeps the suffix on the inner atom, so singleton
    factors always carry their multiplicity inside.
    """

    disjuncts: tuple[tuple[str, Multiplicity], ...]
    outer: Multiplicity = Multiplicity.ONE

    def __post_init__(self) -> None:
        seen = set()
        for sym, _ in self.disjuncts:
            if sym in seen:
                raise ValueError(f"symbol {sym!r} repeated within a factor")
            seen.add(sym)

    @property
    def symbols(self) -> frozenset[str]:
        return frozenset(s for s, _ in self.disjuncts)


@dataclass(frozen=True)
class DisjunctiveExpression:
    """Product of factors over ``alphabet``; empty product denotes {epsilon}."""

    factors: tuple[Factor, ...]
    alphabet: Alphabet
    normalized: bool = field(default=False, compare=False)

    def __post_init__(self) -> None:
        seen: set[str] = set()
        for f in self.factors:
            for sym, _ in f.disjuncts:
                if sym in seen:
                    raise ValueError(f"symbol {sym!r} appears in two factors")
                if sym not in self.alphabet:
                    raise ValueError(f"symbol {sym!r} not in alphabet")
                seen.add(sym)

    @property
    def symbols(self) -> frozenset[str]:
        return frozenset(s for f in self.factors for s in f.symbols)


@dataclass(frozen=True)
class CharTriple:
    """Characterizing triple of a normalized expression.

    ``cardinality`` is total over the alphabet (absent symbols map to 0);
    ``conflicts`` holds the symbol sets that are mutually exclusive because
    they share a pick-one factor; ``required`` holds the minimal symbol sets
    of which at least one member must occur.
    """

    conflicts: frozenset[frozenset[str]]
    cardinality: tuple[tuple[str, Multiplicity], ...]
    required: frozenset[frozenset[str]]
    alphabet: Alphabet

    def cardinality_of(self, symbol: str) -> Multiplicity:
        return dict(self.cardinality).get(symbol, Multiplicity.ZERO)


# ---------------------------------------------------------------------------
# parsing


_SUFFIX = {"*": M.STAR, "+": M.PLUS, "?": M.OPTIONAL}


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens: list[tuple[str, str, int]] = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch in ",|()*+?":
            tokens.append((ch, ch, i))
            i += 1
            continue
        if ch.isalnum() or ch in "_-":
            start = i
            while i < len(text) and (text[i].isalnum() or text[i] in "_-"):
                i += 1
            tokens.append(("name", text[start:i], start))
            continue
        raise ExpressionSyntaxError(f"unexpected character {ch!r}", i)
    tokens.append(("end", "", len(text)))
    return tokens


def parse_expression(
    text: str, alphabet: Alphabet, *, normalize_result: bool = True
) -> DisjunctiveExpression:
    """Parse ``a+, (b|c), d?`` style syntax; ``epsilon`` is the empty product.

    Factors are separated by commas, disjuncts by ``|``; the suffixes ``*``,
    ``+``, ``?`` bind to the preceding symbol or parenthesized group.  A
    symbol occurring twice anywhere in the expression, or a symbol outside
    ``alphabet``, is an error that names the symbol.  By default the result
    is normalized immediately.
    """
    tokens = _tokenize(text)
    pos = 0

    def peek() -> tuple[str, str, int]:
        return tokens[pos]

    def take() -> tuple[str, str, int]:
        nonlocal pos
        tok = tokens[pos]
        pos += 1
        return tok

    def take_suffix() -> Multiplicity | None:
        kind, _, _ = peek()
        if kind in _SUFFIX:
            take()
            return _SUFFIX[kind]
        return None

    seen: set[str] = set()

    def check_symbol(sym: str, at: int) -> None:
        if sym in seen:
            raise ExpressionSyntaxError(f"symbol {sym!r} occurs more than once", at)
        if sym not in alphabet:
            raise ExpressionSyntaxError(f"unknown symbol {sym!r}", at)
        seen.add(sym)

    def parse_factor() -> Factor:
        kind, value, at = take()
        if kind == "name":
            check_symbol(value, at)
            inner = take_suffix() or M.ONE
            return Factor(((value, inner),), M.ONE)
        if kind == "(":
            disjuncts: list[tuple[str, Multiplicity]] = []
            while True:
                k2, v2, at2 = take()
                if k2 != "name":
                    raise ExpressionSyntaxError("expected a symbol", at2)
                check_symbol(v2, at2)
                disjuncts.append((v2, take_suffix() or M.ONE))
                k3, _, at3 = take()
                if k3 == "|":
                    continue
                if k3 == ")":
                    break
                raise ExpressionSyntaxError("expected '|' or ')'", at3)
            outer = take_suffix() or M.ONE
            return Factor(tuple(disjuncts), outer)
        raise ExpressionSyntaxError("expected a symbol or '('", at)

    first = peek()
    if first[0] == "name" and first[1] == "epsilon":
        take()
        kind, _, at = take()
        if kind != "end":
            raise ExpressionSyntaxError("'epsilon' admits no continuation", at)
        expr = DisjunctiveExpression((), alphabet)
        return normalize(expr) if normalize_result else expr

    factors = [parse_factor()]
    while True:
        kind, _, at = take()
        if kind == ",":
            factors.append(parse_factor())
            continue
        if kind == "end":
            break
        raise ExpressionSyntaxError("expected ',' or end of expression", at)

    expr = DisjunctiveExpression(tuple(factors), alphabet)
    return normalize(expr) if normalize_result else expr


def format_expression(e: DisjunctiveExpression) -> str:
    if not e.factors:
        return "epsilon"

    def fmt_factor(f: Factor) -> str:
        parts = [
            sym + ("" if m is M.ONE else m.token) for sym, m in f.disjuncts
        ]
        if len(parts) == 1 and f.outer is M.ONE:
            return parts[0]
        body = "(" + "|".join(parts) + ")"
        return body + ("" if f.outer is M.ONE else f.outer.token)

    return ", ".join(fmt_factor(f) for f in e.factors)


# ---------------------------------------------------------------------------
# normalization


def _compose(inner: Multiplicity, outer: Multiplicity) -> Multiplicity:
    # Exact multiplicity of a under (a^inner)^outer: sums of i in [[outer]]
    # numbers drawn from [[inner]].  Neither argument is ZERO here.
    if outer is M.ONE:
        return inner
    if outer is M.OPTIONAL:
        return inner.with_zero()
    if outer is M.PLUS:
        if inner is M.ONE:
            return M.PLUS
        if inner is M.PLUS:
            return M.PLUS
        return M.STAR  # inner admits zero, sums cover everything
    # outer is STAR
    return _compose(inner, M.PLUS).with_zero()


def normalize(e: DisjunctiveExpression) -> DisjunctiveExpression:
    """Language-preserving rewrite into the three-shape normal form.

    Zero-annotated pieces are eliminated first: a factor under outer ``0`` is
    dropped; a zero disjunct is removed and — because its epsilon word stays
    available — the outer multiplicity is relaxed to admit any smaller pick
    count.  Singleton factors fold the outer bound into the atom.  The
    remaining rewrites split free factors into independent starred symbols
    and push optionality inward.
    """
    out: list[Factor] = []
    for f in e.factors:
        if f.outer is M.ZERO:
            continue
        kept = [(s, m) for s, m in f.disjuncts if m is not M.ZERO]
        outer = f.outer
        if len(kept) < len(f.disjuncts):
            if not kept:
                continue  # language of the disjunction is {epsilon}
            outer = outer.with_zero()
        if not kept:
            continue
        if len(kept) == 1:
            sym, inner = kept[0]
            out.append(Factor(((sym, _compose(inner, outer)),), M.ONE))
            continue
        some_nullable = any(m.admits_zero for _, m in kept)
        if outer is M.STAR or (outer is M.PLUS and some_nullable):
            out.extend(Factor(((s, M.STAR),), M.ONE) for s, _ in kept)
        elif outer is M.OPTIONAL or (outer is M.ONE and some_nullable):
            out.append(
                Factor(tuple((s, m.with_zero()) for s, m in kept), M.ONE)
            )
        elif outer is M.PLUS:
            out.append(Factor(tuple((s, M.ONE) for s, _ in kept), M.PLUS))
        else:  # outer ONE, no nullable disjunct: already in shape
            out.append(Factor(tuple(kept), M.ONE))
    result = DisjunctiveExpression(tuple(out), e.alphabet, normalized=True)
    assert is_normal_form(result)
    return result


def is_normal_form(e: DisjunctiveExpression) -> bool:
    for f in e.factors:
        mults = [m for _, m in f.disjuncts]
        if any(m is M.ZERO for m in mults) or f.outer is M.ZERO:
            return False
        if f.outer is M.PLUS:
            if len(mults) < 2 or any(m is not M.ONE for m in mults):
                return False
        elif f.outer is M.ONE:
            nullable = [m.admits_zero for m in mults]
            if len(mults) > 1 and any(nullable) and not all(nullable):
                return False
        else:
            return False
    return True


def _require_normalized(e: DisjunctiveExpression) -> DisjunctiveExpression:
    return e if e.normalized else normalize(e)


# ---------------------------------------------------------------------------
# characterizing triple


@lru_cache(maxsize=None)
def compute_triple(e: DisjunctiveExpression) -> CharTriple:
    """Triple (conflicts, cardinalities, required sets) of ``e``.

    Conflict sets come from pick-at-most-one factors with >= 2 branches;
    required sets from factors none of whose branches admits zero (minimality
    is automatic since factors have disjoint symbol sets); cardinalities read
    off the factor shape per symbol.
    """
    e = _require_normalized(e)
    conflicts: set[frozenset[str]] = set()
    required: set[frozenset[str]] = set()
    cardinality: dict[str, Multiplicity] = {
        a: Multiplicity.ZERO for a in e.alphabet
    }
    for f in e.factors:
        syms = f.symbols
        if f.outer is M.ONE and len(f.disjuncts) >= 2:
            conflicts.add(syms)
        if all(not m.admits_zero for _, m in f.disjuncts):
            required.add(syms)
        for sym, m in f.disjuncts:
            if len(f.disjuncts) == 1:
                cardinality[sym] = m
            elif f.outer is M.ONE and m in (M.OPTIONAL, M.ONE):
                cardinality[sym] = M.OPTIONAL
            else:
                cardinality[sym] = M.STAR
    return CharTriple(
        frozenset(conflicts),
        tuple(sorted(cardinality.items())),
        frozenset(required),
        e.alphabet,
    )


def conflicting_pairs(tr: CharTriple) -> frozenset[tuple[str, str]]:
    """Expand the conflict sets into symbol pairs over the alphabet.

    A pair (a, b), a <= b, conflicts when a and b share a conflict set, or
    when either symbol cannot occur at all — in particular (a, a) for an
    absent symbol, which is how "a never occurs" is expressed pairwise.
    """
    card = dict(tr.cardinality)
    absent = {a for a in tr.alphabet if card[a] is Multiplicity.ZERO}
    pairs: set[tuple[str, str]] = set()
    for group in tr.conflicts:
        for a in group:
            for b in group:
                if a < b:
                    pairs.add((a, b))
    for a in absent:
        for b in tr.alphabet:
            pairs.add((min(a, b), max(a, b)))
    return frozenset(pairs)


def triple_membership_tests(
    w: UnorderedWord, tr: CharTriple
) -> tuple[bool, bool, bool]:
    """Evaluate the three membership tests separately on ``w``.

    Returns (conflict-free, cardinality-consistent, requirements-met); the
    word belongs to the language iff all three hold.
    """
    card = dict(tr.cardinality)
    conflict_ok = True
    present = [a for a in w if w.count(a)]
    for a in present:
        if card.get(a, Multiplicity.ZERO) is Multiplicity.ZERO:
            conflict_ok = False  # pairs (a, *) all conflict, incl. (a, a)
            break
    if conflict_ok:
        for group in tr.conflicts:
            if sum(1 for a in group if a in w) >= 2:
                conflict_ok = False
                break
    cardinality_ok = all(
        card[a].contains(w.count(a)) for a in tr.alphabet
    ) and all(a in card for a in present)
    required_ok = all(any(a in w for a in group) for group in tr.required)
    return conflict_ok, cardinality_ok, required_ok


def word_matches(w: UnorderedWord, e: DisjunctiveExpression) -> bool:
    """Membership via the characterizing triple (normalizes if needed)."""
    tests = triple_membership_tests(w, compute_triple(_require_normalized(e)))
    return all(tests)


# ---------------------------------------------------------------------------
# inclusion / equivalence


def expression_contains(
    e1: DisjunctiveExpression, e2: DisjunctiveExpression
) -> bool:
    """Whether L(e2) is a subset of L(e1).  Both must share an alphabet."""
    if set(e1.alphabet) != set(e2.alphabet):
        raise ValueError("expressions must share an alphabet")
    t1 = compute_triple(_require_normalized(e1))
    t2 = compute_triple(_require_normalized(e2))
    # Conflicts restrict: everything e1 forbids pairwise, e2 must forbid too.
    if not conflicting_pairs(t1) <= conflicting_pairs(t2):
        return False
    c1, c2 = dict(t1.cardinality), dict(t2.cardinality)
    if not all(c1[a].includes(c2[a]) for a in c1):
        return False
    # Every obligation of e1 must be implied by a tighter obligation of e2.
    return all(
        any(y <= x for y in t2.required) for x in t1.required
    )


def expression_equivalent(
    e1: DisjunctiveExpression, e2: DisjunctiveExpression
) -> bool:
    if set(e1.alphabet) != set(e2.alphabet):
        raise ValueError("expressions must share an alphabet")
    t1 = compute_triple(_require_normalized(e1))
    t2 = compute_triple(_require_normalized(e2))
    return (
        conflicting_pairs(t1) == conflicting_pairs(t2)
        and dict(t1.cardinality) == dict(t2.cardinality)
        and t1.required == t2.required
    )


def separating_word(
    e1: DisjunctiveExpression, e2: DisjunctiveExpression
) -> UnorderedWord | None:
    """Smallest word in L(e2) \\ L(e1), searching counts <= 2 per symbol.

    Per-symbol counts up to 2 suffice: multiplicity count sets are unions of
    the blocks {0}, {1}, {>=2}, so two languages that differ at all differ
    on a word whose counts stay in {0, 1, 2}.
    """
    syms = sorted(e2.symbols | e1.symbols)
    best: UnorderedWord | None = None
    for counts in _count_vectors(len(syms), 2):
        w = UnorderedWord({s: c for s, c in zip(syms, counts) if c})
        if word_matches(w, e2) and not word_matches(w, e1):
            if best is None or w.total < best.total:
                best = w
    return best


def _count_vectors(n: int, cap: int) -> Iterator[tuple[int, ...]]:
    if n == 0:
        yield ()
        return
    for head in range(cap + 1):
        for rest in _count_vectors(n - 1, cap):
            yield (head,) + rest


# ---------------------------------------------------------------------------
# small builders used across the package


def epsilon_expression(alphabet: Alphabet) -> DisjunctiveExpression:
    return DisjunctiveExpression((), alphabet, normalized=True)


def build_expression(
    alphabet: Alphabet,
    factors: Iterable[tuple[Iterable[tuple[str, Multiplicity]], Multiplicity]],
) -> DisjunctiveExpression:
    """Assemble an (unnormalized) expression from raw factor data."""
    return DisjunctiveExpression(
        tuple(Factor(tuple(ds), outer) for ds, outer in factors), alphabet
    )


def iter_symbol_multiplicities(
    e: DisjunctiveExpression,
) -> Iterator[tuple[str, Multiplicity]]:
    for f in e.factors:
        yield from f.disjuncts
