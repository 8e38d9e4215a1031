"""Minimal XML reader emitting open/close tree events.

Covers the element-only fragment the validator consumes: start/end tags,
self-closing tags, attributes (discarded), character data and CDATA
(discarded), comments, and processing instructions.  Discarding is loud —
the first attribute and the first non-whitespace text trigger a warning
callback, since neither can influence a verdict.  DOCTYPE declarations are
rejected outright, so no entity of any kind is ever expanded.

The reader checks tag syntax only; nesting discipline (matching end tags,
a single root) is the event consumer's concern.
"""

from __future__ import annotations

from typing import Callable, Iterator

from .core import DmsError, TreeEvent, TreeNode, close_event, open_event

_NAME_START = set("ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz_:")
_NAME_CHARS = _NAME_START | set("0123456789.-")


class XmlSyntaxError(DmsError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"offset {offset}: {message}")
        self.offset = offset


def scan_xml(
    text: str, warn: Callable[[str], None] | None = None
) -> Iterator[TreeEvent]:
    """Yield a TreeEvent per start/end tag; self-closing tags yield both."""
    warned: set[str] = set()

    def warn_once(topic: str, message: str) -> None:
        if warn is not None and topic not in warned:
            warned.add(topic)
            warn(message)

    pos = 0
    if text.startswith("﻿"):
        pos = 1
    n = len(text)
    while pos < n:
        lt = text.find("<", pos)
        if lt < 0:
            if text[pos:].strip():
                warn_once("text", f"offset {pos}: text content ignored")
            return
        if text[pos:lt].strip():
            warn_once("text", f"offset {pos}: text content ignored")
        pos = lt
        if text.startswith("<?", pos):
            end = text.find("?>", pos + 2)
            if end < 0:
                raise XmlSyntaxError("unterminated processing instruction", pos)
            pos = end + 2
        elif text.startswith("<!--", pos):
            end = text.find("-->", pos + 4)
            if end < 0:
                raise XmlSyntaxError("unterminated comment", pos)
            pos = end + 3
        elif text.startswith("<![CDATA[", pos):
            end = text.find("]]>", pos + 9)
            if end < 0:
                raise XmlSyntaxError("unterminated CDATA section", pos)
            if text[pos + 9 : end].strip():
                warn_once("text", f"offset {pos}: text content ignored")
            pos = end + 3
        elif text.startswith("<!DOCTYPE", pos) or text.startswith("<!doctype", pos):
            raise XmlSyntaxError("DOCTYPE declarations are not supported", pos)
        elif text.startswith("<!", pos):
            raise XmlSyntaxError("unsupported markup declaration", pos)
        elif text.startswith("</", pos):
            name, after = _read_name(text, pos + 2)
            after = _skip_ws(text, after)
            if after >= n or text[after] != ">":
                raise XmlSyntaxError("expected '>' in end tag", after)
            yield close_event(name)
            pos = after + 1
        else:
            name, after = _read_name(text, pos + 1)
            after, had_attrs = _skip_attributes(text, after)
            if had_attrs:
                warn_once("attributes", f"offset {pos}: attributes ignored")
            if text.startswith("/>", after):
                yield open_event(name)
                yield close_event(name)
                pos = after + 2
            elif after < n and text[after] == ">":
                yield open_event(name)
                pos = after + 1
            else:
                raise XmlSyntaxError("expected '>' or '/>' in start tag", after)


def _read_name(text: str, pos: int) -> tuple[str, int]:
    if pos >= len(text) or text[pos] not in _NAME_START:
        raise XmlSyntaxError("expected element name", pos)
    end = pos + 1
    while end < len(text) and text[end] in _NAME_CHARS:
        end += 1
    return text[pos:end], end


def _skip_ws(text: str, pos: int) -> int:
    while pos < len(text) and text[pos] in " \t\r\n":
        pos += 1
    return pos


def _skip_attributes(text: str, pos: int) -> tuple[int, bool]:
    """Advance past attributes to the tag terminator; report if any existed."""
    n = len(text)
    had = False
    while True:
        pos = _skip_ws(text, pos)
        if pos >= n:
            raise XmlSyntaxError("unterminated start tag", pos)
        c = text[pos]
        if c == ">" or text.startswith("/>", pos):
            return pos, had
        if c in _NAME_START:
            had = True
            _, pos = _read_name(text, pos)
            pos = _skip_ws(text, pos)
            if pos < n and text[pos] == "=":
                pos = _skip_ws(text, pos + 1)
                if pos >= n or text[pos] not in "\"'":
                    raise XmlSyntaxError("expected quoted attribute value", pos)
                quote = text[pos]
                end = text.find(quote, pos + 1)
                if end < 0:
                    raise XmlSyntaxError("unterminated attribute value", pos)
                pos = end + 1
        else:
            raise XmlSyntaxError(f"unexpected character {c!r} in tag", pos)


def events_from_xml(
    text: str, warn: Callable[[str], None] | None = None
) -> list[TreeEvent]:
    return list(scan_xml(text, warn))


def tree_to_xml(t: TreeNode) -> str:
    """Serialize a tree in the element-only fragment scan_xml reads back."""
    parts: list[str] = []

    def emit(node: TreeNode) -> None:
        if node.children:
            parts.append(f"<{node.label}>")
            for c in node.children:
                emit(c)
            parts.append(f"</{node.label}>")
        else:
            parts.append(f"<{node.label}/>")

    emit(t)
    return "".join(parts)
