"""Brute-force references: literal word semantics, tree enumeration, the
bounded decision oracle and its definite/indefinite protocol."""

import random

import pytest

from dms import (
    Alphabet,
    EnumerationBounds,
    ORACLE_PROBLEMS,
    UnorderedWord,
    canonical_form,
    embed_in_tree,
    enumerate_trees,
    enumerate_words,
    naive_word_matches,
    oracle_decide,
    parse_dfdtd,
    parse_expression,
    parse_query,
    parse_regex,
    parse_schema,
    parse_tree,
    schema_members,
    tree_height,
    tree_satisfies,
    tree_size,
    word_matches,
)
from conftest import random_expression, random_schema


def uw(text):
    counts = {}
    for sym in text:
        counts[sym] = counts.get(sym, 0) + 1
    return UnorderedWord(counts)


# ---------------------------------------------------------------------------
# literal word membership


def test_partition_semantics_by_hand(expr_basic):
    # a+, (b|c), d?
    for good in ("ab", "ac", "aab", "abd", "aacd"):
        assert naive_word_matches(uw(good), expr_basic)
    for bad in ("", "a", "b", "abc", "bd", "abb"):
        assert not naive_word_matches(uw(bad), expr_basic)


def test_repeated_factor_peels_chunks():
    e = parse_expression("(a|b)+", Alphabet("abc"))
    for good in ("a", "b", "ab", "aab", "abb"):
        assert naive_word_matches(uw(good), e)
    assert not naive_word_matches(uw(""), e)
    assert not naive_word_matches(uw("c"), e)


def test_foreign_symbols_never_match(expr_basic):
    assert not naive_word_matches(uw("az"), expr_basic)


def test_epsilon_expression():
    e = parse_expression("epsilon", Alphabet("a"))
    assert naive_word_matches(uw(""), e)
    assert not naive_word_matches(uw("a"), e)


def test_max_total_guard(expr_basic):
    with pytest.raises(ValueError, match="exceeds"):
        naive_word_matches(uw("aaaaa"), expr_basic, max_total=4)


def test_naive_agrees_with_triple_machinery():
    rng = random.Random(35)
    agree_true = 0
    for _ in range(150):
        e = random_expression(rng, "abc")
        for w in enumerate_words("abc", 3):
            got = naive_word_matches(w, e)
            assert got == word_matches(w, e)
            agree_true += got
    assert agree_true > 300


# ---------------------------------------------------------------------------
# enumeration


def test_word_universe_size():
    words = list(enumerate_words("abc", 4))
    assert len(words) == 35  # C(7,3): multisets of size <= 4 over 3 symbols
    assert len({str(w) for w in words}) == 35
    assert all(w.total <= 4 for w in words)
    assert list(enumerate_words([], 4)) == [UnorderedWord({})]


def test_tree_universe_size_and_shape():
    bounds = EnumerationBounds(2, 2, 8, 4)
    trees = list(enumerate_trees("ra", bounds))
    assert len(trees) == 12
    forms = {canonical_form(t) for t in trees}
    assert len(forms) == 12  # no two isomorphic
    for t in trees:
        assert tree_height(t) <= 2
        assert all(len(n.children) <= 2 for n in _walk(t))


def test_tree_universe_respects_node_budget():
    bounds = EnumerationBounds(3, 3, 4, 4)
    assert all(tree_size(t) <= 4 for t in enumerate_trees("ra", bounds))


def _walk(t):
    yield t
    for c in t.children:
        yield from _walk(c)


def test_schema_members_equal_filtered_universe(schema_one):
    bounds = EnumerationBounds(3, 2, 5, 4)
    cases = [schema_one]
    rng = random.Random(63)
    cases += [random_schema(rng, "rab") for _ in range(20)]
    for s in cases:
        direct = {
            canonical_form(t)
            for t in enumerate_trees(s.alphabet, bounds)
            if tree_satisfies(t, s)
        }
        guided = [canonical_form(t) for t in schema_members(s, bounds)]
        assert len(guided) == len(set(guided))  # one per isomorphism class
        assert set(guided) == direct


def test_schema_members_for_dtds():
    d = parse_dfdtd("root = r\nr -> a.b?\n")
    members = {canonical_form(t) for t in schema_members(d, EnumerationBounds())}
    assert members == {
        canonical_form(parse_tree("r(a)")),
        canonical_form(parse_tree("r(a,b)")),
    }


# ---------------------------------------------------------------------------
# the decision oracle


def test_membership_is_always_definite(expr_basic):
    v = oracle_decide("memb", word=uw("ab"), expression=expr_basic)
    assert v.value and v.definite
    v = oracle_decide("membership", word=uw("ab"), expression=expr_basic)
    assert v.value and v.definite
    big = oracle_decide(
        "memb",
        word=uw("aaaaab"),
        expression=expr_basic,
        bounds=EnumerationBounds(max_word_count=4),
    )
    assert not big.definite and "exceeds" in big.note


def test_satisfiability_definite_only_on_yes(schema_rec):
    v = oracle_decide("sat", schema=schema_rec)
    assert v.value and v.definite
    assert tree_satisfies(v.witness, schema_rec)
    empty = parse_schema("root = r\nr -> r\n")
    v = oracle_decide("sat", schema=empty)
    assert not v.value and not v.definite
    assert "depth<=3 fanout<=3 nodes<=8 count<=4" in v.note


def test_schema_containment_definite_only_on_no(schema_one, schema_two):
    v = oracle_decide("schema-cnt", schema=schema_two, other_schema=schema_one)
    assert v.value and not v.definite and "no counterexample" in v.note
    v = oracle_decide("schema-cnt", schema=schema_one, other_schema=schema_two)
    assert not v.value and v.definite
    assert tree_satisfies(v.witness, schema_one)
    assert not tree_satisfies(v.witness, schema_two)


def test_query_problems(schema_rec):
    q = parse_query("r//b")
    v = oracle_decide("query-sat", schema=schema_rec, query=q)
    assert v.value and v.definite
    assert tree_satisfies(v.witness, schema_rec) and embed_in_tree(q, v.witness)
    v = oracle_decide("query-sat", schema=schema_rec, query=parse_query("r/c"))
    assert not v.value and not v.definite

    v = oracle_decide("query-impl", schema=schema_rec, query=parse_query("r/b"))
    assert not v.value and v.definite
    assert not embed_in_tree(parse_query("r/b"), v.witness)
    v = oracle_decide("query-impl", schema=schema_rec, query=parse_query("r/a"))
    assert v.value and not v.definite

    v = oracle_decide(
        "query-cnt",
        schema=schema_rec,
        query=parse_query("r"),
        other_query=parse_query("r/b"),
    )
    assert not v.value and v.definite
    assert embed_in_tree(parse_query("r"), v.witness)
    assert not embed_in_tree(parse_query("r/b"), v.witness)


def test_capture_check():
    e = parse_expression("title, year, author+", Alphabet(["title", "year", "author"]))
    v = oracle_decide("capture-check", expression=e, regex=parse_regex("(title|year|author)*"))
    assert not v.value and v.definite
    assert isinstance(v.witness, UnorderedWord) and v.witness.total == 0
    same = oracle_decide(
        "capture-check",
        expression=parse_expression("a*", Alphabet("a")),
        regex=parse_regex("a*"),
    )
    assert same.value and not same.definite and "agree" in same.note


def test_problem_names():
    assert set(ORACLE_PROBLEMS) == {
        "memb",
        "sat",
        "schema-cnt",
        "query-sat",
        "query-impl",
        "query-cnt",
        "capture-check",
    }
    with pytest.raises(ValueError, match="unknown oracle problem"):
        oracle_decide("frobnicate")


def test_bounds_fields_are_positional():
    b = EnumerationBounds(2, 5, 9, 6)
    assert (b.max_depth, b.max_fanout, b.max_total_nodes, b.max_word_count) == (
        2,
        5,
        9,
        6,
    )
    assert b.describe() == "depth<=2 fanout<=5 nodes<=9 count<=6"
