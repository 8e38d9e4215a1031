"""Disjunction-free DTDs: ordered rule syntax, commutative semantics.

The reference point throughout is a test-local word enumerator over the
regex AST; the library's structural recursions (must/may-occur sets,
minimum counts, count-vector membership) are checked against it.
"""

import itertools
import random

import pytest

from dms import (
    DtdUnsatisfiableError,
    canonical_form,
    EnumerationBounds,
    RegexSyntaxError,
    UnorderedWord,
    commutative_matches,
    dtd_containment_counterexample,
    dtd_dependency_graphs,
    dtd_implication_counterexample,
    dtd_query_contained,
    dtd_query_implied,
    dtd_query_satisfiable,
    dtd_tree_satisfies,
    dtd_unfold,
    dtd_unsatisfiable_labels,
    embed_in_tree,
    existential_set,
    format_regex,
    format_tree,
    make_dfdtd,
    minnb,
    oracle_decide,
    parse_dfdtd,
    parse_dfregex,
    parse_query,
    parse_regex,
    parse_tree,
    universal_set,
)
from dms.core import Alphabet
from dms.dtd import Alt, Cat, Eps, Opt, Plus, Star, Sym, can_avoid
from dms.schema import SchemaSyntaxError
from conftest import PERMISSIVE_DTD_TEXT, random_dfregex, random_query


def words_upto(e, limit):
    """All count vectors of words of length <= limit, by direct expansion."""
    if isinstance(e, Eps):
        return {()}
    if isinstance(e, Sym):
        return {((e.name, 1),)} if limit >= 1 else set()
    if isinstance(e, Opt):
        return {()} | words_upto(e.body, limit)
    if isinstance(e, (Star, Plus)):
        base = words_upto(e.body, limit)
        acc = set(base)
        frontier = set(base)
        while frontier:
            nxt = set()
            for u in frontier:
                for v in base:
                    w = _vec_add(u, v)
                    if _vec_total(w) <= limit and w not in acc:
                        acc.add(w)
                        nxt.add(w)
            frontier = nxt
        if isinstance(e, Star):
            acc.add(())
        return acc
    if isinstance(e, Cat):
        out = set()
        for u in words_upto(e.left, limit):
            for v in words_upto(e.right, limit):
                w = _vec_add(u, v)
                if _vec_total(w) <= limit:
                    out.add(w)
        return out
    if isinstance(e, Alt):
        return words_upto(e.left, limit) | words_upto(e.right, limit)
    raise AssertionError(e)


def _vec_add(u, v):
    counts = dict(u)
    for sym, n in v:
        counts[sym] = counts.get(sym, 0) + n
    return tuple(sorted(counts.items()))


def _vec_total(w):
    return sum(n for _, n in w)


def as_word(vec):
    return UnorderedWord({sym: n for sym, n in vec})


# ---------------------------------------------------------------------------
# parsing and formatting


def test_parse_shapes():
    e = parse_dfregex("a.b?.(c.d)*")
    assert e == Cat(Cat(Sym("a"), Opt(Sym("b"))), Star(Cat(Sym("c"), Sym("d"))))
    assert parse_dfregex("epsilon") == Eps()
    assert parse_dfregex("a++") == Plus(Plus(Sym("a")))


def test_alternation_rejected_in_dtd_rules():
    with pytest.raises(RegexSyntaxError, match="alternation") as exc:
        parse_dfregex("a|b")
    assert exc.value.position == 1
    assert parse_regex("a|b") == Alt(Sym("a"), Sym("b"))


@pytest.mark.parametrize("text", ["", "a.", "(a", "a)", ".a", "*", "a b"])
def test_parse_errors(text):
    with pytest.raises(RegexSyntaxError):
        parse_dfregex(text)


def test_format_round_trip():
    rng = random.Random(31)
    for _ in range(200):
        e = random_dfregex(rng, "abc")
        assert parse_dfregex(format_regex(e)) == e


# ---------------------------------------------------------------------------
# structural recursions versus enumeration


def test_must_and_may_sets_by_hand():
    e = parse_dfregex("a.b?.c")
    assert universal_set(e) == {"a", "c"}
    assert existential_set(e) == {"a", "b", "c"}
    assert universal_set(parse_dfregex("(a.b)*")) == frozenset()
    assert universal_set(parse_dfregex("(a.b)+")) == {"a", "b"}


def test_minimum_counts_by_hand():
    e = parse_dfregex("a.a.b+")
    assert minnb(e, "a") == 2
    assert minnb(e, "b") == 1
    assert minnb(e, "c") == 0
    assert minnb(parse_dfregex("(a.b)+.a?"), "a") == 1
    assert minnb(parse_dfregex("a*"), "a") == 0


def test_structural_recursions_match_enumeration():
    # A rule of size <= 8 has at most 4 symbol leaves, so every minimal
    # word (drop all options, one pass through each loop) has length <= 4;
    # enumerating to length 6 therefore decides must-sets and minimums.
    rng = random.Random(93)
    for _ in range(300):
        e = random_dfregex(rng, "abc")
        words = words_upto(e, 6)
        assert words, format_regex(e)  # disjunction-free rules are nonempty
        union = set().union(*({s for s, _ in w} for w in words))
        inter = set.intersection(*({s for s, _ in w} for w in words))
        assert existential_set(e) == union
        assert universal_set(e) == inter
        for sym in "abc":
            low = min((dict(w).get(sym, 0) for w in words), default=0)
            assert minnb(e, sym) == low
        banned = frozenset(rng.sample("abc", rng.randint(0, 2)))
        avoidable = any(not ({s for s, _ in w} & banned) for w in words)
        assert can_avoid(e, banned) == avoidable


# ---------------------------------------------------------------------------
# commutative membership


def test_correlated_counts_are_not_rectangular():
    e = parse_dfregex("(a.b)+")
    assert commutative_matches(as_word((("a", 1), ("b", 1))), e)
    assert commutative_matches(as_word((("a", 2), ("b", 2))), e)
    assert not commutative_matches(as_word((("a", 2), ("b", 1))), e)
    assert not commutative_matches(UnorderedWord({}), e)


def test_order_never_matters():
    e = parse_dfregex("a.b.a")
    assert commutative_matches(as_word((("a", 2), ("b", 1))), e)
    assert not commutative_matches(as_word((("a", 1), ("b", 2))), e)


def test_membership_matches_enumeration():
    rng = random.Random(58)
    positives = 0
    for _ in range(200):
        e = random_dfregex(rng, "ab")
        words = words_upto(e, 6)
        for counts in itertools.product(range(4), repeat=2):
            vec = tuple(
                (s, n) for s, n in zip("ab", counts) if n
            )
            expected = vec in words
            assert commutative_matches(as_word(vec), e) == expected
            positives += expected
    assert positives > 500


# ---------------------------------------------------------------------------
# DTD parsing and satisfiability


def test_parse_dtd_completes_missing_rules():
    d = parse_dfdtd(PERMISSIVE_DTD_TEXT)
    assert d.root == "dblp"
    assert list(d.alphabet)[:3] == ["dblp", "article", "book"]
    assert d.rules["title"] == Eps()
    t = parse_tree("dblp(book(author,title),article(title,year,author))")
    assert dtd_tree_satisfies(t, d)
    assert not dtd_tree_satisfies(parse_tree("dblp(book(book))"), d)


def test_parse_dtd_errors():
    with pytest.raises(SchemaSyntaxError, match="root"):
        parse_dfdtd("r -> a\n")
    with pytest.raises(SchemaSyntaxError, match="duplicate"):
        parse_dfdtd("root = r\nr -> a\nr -> b\n")
    with pytest.raises(SchemaSyntaxError, match="bad rule"):
        parse_dfdtd("root = r\nr -> a|b\n")


def test_make_dtd_validates_input():
    ab = Alphabet(["r", "a"])
    with pytest.raises(ValueError, match="root"):
        make_dfdtd("z", {}, ab)
    with pytest.raises(ValueError, match="alternation"):
        make_dfdtd("r", {"r": Alt(Sym("a"), Sym("a"))}, ab)
    with pytest.raises(ValueError, match="unknown"):
        make_dfdtd("r", {"r": Sym("z")}, ab)


def test_unsatisfiable_labels_reach_forced_cycles():
    d = parse_dfdtd("root = r\nr -> a?\na -> a\n")
    assert dtd_unsatisfiable_labels(d) == {"a"}
    dep = dtd_dependency_graphs(d)
    assert dep.edges == ()  # the only candidate edge r -> a is unrealizable
    d2 = parse_dfdtd("root = r\nr -> a\na -> a\n")
    assert dtd_unsatisfiable_labels(d2) == {"r", "a"}
    with pytest.raises(DtdUnsatisfiableError) as exc:
        dtd_dependency_graphs(d2)
    assert exc.value.labels == {"r", "a"}


def test_dependency_edges_respect_realizability():
    # b occurs only in words that also use the unsatisfiable a: no edge.
    d = parse_dfdtd("root = r\nr -> (a.b)?.c\na -> a\nc -> epsilon\n")
    dep = dtd_dependency_graphs(d)
    assert dep.edges == (("r", "c", False),)


def test_dependency_nullability():
    d = parse_dfdtd("root = r\nr -> a.b?\n")
    dep = dtd_dependency_graphs(d)
    assert set(dep.edges) == {("r", "a", False), ("r", "b", True)}
    assert set(dep.universal_graph().successors("r")) == {"a"}


# ---------------------------------------------------------------------------
# unfolding


def test_unfold_meets_minimum_counts():
    d = parse_dfdtd("root = r\nr -> a.a.b+\nb -> c\n")
    t = dtd_unfold(d)
    assert format_tree(t) == "r(a,a,b(c))"
    assert dtd_tree_satisfies(t, d)
    assert canonical_form(dtd_unfold(d, "b")) == canonical_form(parse_tree("b(c)"))


def test_unfold_requires_satisfiability():
    d = parse_dfdtd("root = r\nr -> a?\na -> a\n")
    assert format_tree(dtd_unfold(d)) == "r" 
    with pytest.raises(DtdUnsatisfiableError):
        dtd_unfold(d, "a")


def _random_dtd(rng, labels):
    rules = {}
    for i, lab in enumerate(labels):
        # children drawn from later labels (often) or any label (sometimes)
        pool = labels[i + 1 :] if rng.random() < 0.7 else labels
        if pool and rng.random() < 0.8:
            rules[lab] = random_dfregex(rng, pool, max_size=5)
        else:
            rules[lab] = Eps()
    return make_dfdtd(labels[0], rules, Alphabet(labels))


def test_unfold_is_schema_valid_randomized():
    rng = random.Random(12)
    built = 0
    for _ in range(150):
        d = _random_dtd(rng, "rab")
        if dtd_unsatisfiable_labels(d) & {"r"}:
            continue
        t = dtd_unfold(d)
        assert dtd_tree_satisfies(t, d)
        built += 1
    assert built > 100


# ---------------------------------------------------------------------------
# query procedures


def test_query_procedures_worked_example():
    d = parse_dfdtd(PERMISSIVE_DTD_TEXT)
    sat, _ = dtd_query_satisfiable(d, parse_query("dblp/book/author"))
    assert sat
    assert not dtd_query_satisfiable(d, parse_query("dblp/title"))[0]
    # Nothing is forced anywhere: implication only holds for the bare root.
    assert dtd_query_implied(d, parse_query("dblp"))[0]
    implied, _ = dtd_query_implied(d, parse_query("dblp/book"))
    assert not implied
    cex = dtd_implication_counterexample(d, parse_query("dblp/book"))
    assert dtd_tree_satisfies(cex, d)
    assert not embed_in_tree(parse_query("dblp/book"), cex)


def test_query_containment_worked_example():
    d = parse_dfdtd(PERMISSIVE_DTD_TEXT)
    p = parse_query("dblp/book[author]")
    q = parse_query("dblp/book[author][title]")
    held, g, _ = dtd_query_contained(p, q, d)
    assert not held and g is not None
    cex = dtd_containment_counterexample(p, q, d)
    assert dtd_tree_satisfies(cex, d)
    assert embed_in_tree(p, cex) and not embed_in_tree(q, cex)
    assert dtd_query_contained(p, parse_query("dblp//author"), d)[0]


def test_containment_repair_duplicates_forced_copies():
    # Any book needs two authors; the counterexample must still provide both.
    d = parse_dfdtd("root = dblp\ndblp -> book*\nbook -> author.author.title?\n")
    p = parse_query("dblp/book[author]")
    q = parse_query("dblp/book[title]")
    cex = dtd_containment_counterexample(p, q, d)
    assert dtd_tree_satisfies(cex, d)
    assert embed_in_tree(p, cex) and not embed_in_tree(q, cex)


def test_query_procedures_agree_with_oracle_randomized():
    rng = random.Random(777)
    bounds = EnumerationBounds(3, 3, 8, 4)
    sat_hits = impl_hits = cnt_hits = 0
    for _ in range(120):
        d = _random_dtd(rng, "rab")
        q = random_query(rng, "rab", max_nodes=3)
        p = random_query(rng, "rab", max_nodes=3)

        sat, _ = dtd_query_satisfiable(d, q)
        v = oracle_decide("query-sat", schema=d, query=q, bounds=bounds)
        if v.definite:
            assert sat == v.value
            sat_hits += 1

        implied, _ = dtd_query_implied(d, q)
        v = oracle_decide("query-impl", schema=d, query=q, bounds=bounds)
        if v.definite:
            assert implied == v.value
            impl_hits += 1
        if not implied:
            cex = dtd_implication_counterexample(d, q)
            assert dtd_tree_satisfies(cex, d)
            assert not embed_in_tree(q, cex)

        held, _, _ = dtd_query_contained(p, q, d)
        v = oracle_decide("query-cnt", schema=d, query=p, other_query=q, bounds=bounds)
        if v.definite:
            assert held == v.value
            cnt_hits += 1
        if not held:
            cex = dtd_containment_counterexample(p, q, d)
            if cex is not None:
                assert dtd_tree_satisfies(cex, d)
                assert embed_in_tree(p, cex) and not embed_in_tree(q, cex)
    assert sat_hits > 30 and impl_hits > 20 and cnt_hits > 20
