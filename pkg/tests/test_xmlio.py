"""Element-only XML reading: events out, warnings for discarded content."""

import random

import pytest

from dms import (
    XmlSyntaxError,
    close_event,
    events_from_xml,
    events_to_tree,
    open_event,
    scan_xml,
    tree_to_events,
    tree_to_xml,
)
from conftest import random_tree


def test_events_for_nested_elements():
    events = events_from_xml("<r><a><b/></a><c/></r>")
    assert events == [
        open_event("r"),
        open_event("a"),
        open_event("b"),
        close_event("b"),
        close_event("a"),
        open_event("c"),
        close_event("c"),
        close_event("r"),
    ]


def test_self_closing_equals_explicit_pair():
    assert events_from_xml("<a/>") == events_from_xml("<a></a>")
    assert events_from_xml("<a />") == [open_event("a"), close_event("a")]


def test_prolog_comments_and_cdata_are_skipped():
    text = "<?xml version='1.0'?><!-- note --><r><![CDATA[  ]]></r>"
    assert events_from_xml(text) == [open_event("r"), close_event("r")]


def test_attributes_warn_once():
    warnings = []
    events = events_from_xml(
        '<r id="1"><a id="2" class="x"/></r>', warnings.append
    )
    assert events == events_from_xml("<r><a/></r>")
    assert len(warnings) == 1
    assert "attributes ignored" in warnings[0]


def test_text_warns_once():
    warnings = []
    events_from_xml("<r>hello<a/>world</r>", warnings.append)
    assert len(warnings) == 1
    assert "text content ignored" in warnings[0]
    # whitespace-only text is not worth a warning
    warnings.clear()
    events_from_xml("<r>\n  <a/>\n</r>", warnings.append)
    assert warnings == []


def test_cdata_payload_counts_as_text():
    warnings = []
    events_from_xml("<r><![CDATA[payload]]></r>", warnings.append)
    assert len(warnings) == 1 and "text" in warnings[0]


def test_doctype_is_rejected():
    with pytest.raises(XmlSyntaxError, match="DOCTYPE") as exc:
        events_from_xml('<!DOCTYPE r [<!ENTITY x "y">]><r/>')
    assert exc.value.offset == 0


def test_without_warn_callback_discards_are_silent():
    assert events_from_xml('<r a="1">text</r>') == [
        open_event("r"),
        close_event("r"),
    ]


@pytest.mark.parametrize(
    ("text", "fragment"),
    [
        ("<", "expected element name"),
        ("<r", "unterminated start tag"),
        ("<r foo", "unterminated start tag"),
        ("<r foo=bar>", "quoted attribute value"),
        ('<r foo="x>', "unterminated attribute value"),
        ("</ r>", "expected element name"),
        ("<?pi", "unterminated processing instruction"),
        ("<!-- x", "unterminated comment"),
        ("<![CDATA[ x", "unterminated CDATA"),
        ("<!ELEMENT r>", "unsupported markup declaration"),
        ("<r>&amp;</r>", "text content"),
    ],
)
def test_syntax_errors_carry_offsets(text, fragment):
    if fragment == "text content":
        # entities are just text to this reader: discarded with a warning
        warnings = []
        events_from_xml(text, warnings.append)
        assert any(fragment in w for w in warnings)
        return
    with pytest.raises(XmlSyntaxError, match=fragment) as exc:
        list(scan_xml(text))
    assert "offset" in str(exc.value)
    assert exc.value.offset >= 0


def test_scan_is_lazy():
    # Errors surface only once the scan reaches them.
    gen = scan_xml("<r><!-- unterminated")
    assert next(gen) == open_event("r")
    with pytest.raises(XmlSyntaxError):
        next(gen)


def test_nesting_is_not_the_scanners_concern():
    # Mismatched tags scan fine; the validator protocol rejects them later.
    assert events_from_xml("<a></b>") == [open_event("a"), close_event("b")]


def test_serialization_round_trip():
    rng = random.Random(17)
    for _ in range(100):
        t = random_tree(rng, "rabc", max_depth=4, max_fanout=3)
        back = events_to_tree(events_from_xml(tree_to_xml(t)))
        assert tree_to_events(back) == tree_to_events(t)


def test_serializer_self_closes_leaves(doc_tree):
    xml = tree_to_xml(doc_tree)
    assert xml == "<r><a><b/></a><b><a/></b><c><b><a/></b></c></r>"
