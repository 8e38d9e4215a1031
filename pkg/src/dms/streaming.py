"""Single-pass validation of tree event streams against a schema.

The schema is pre-compiled into per-label arrays: a cardinality bound for
every alphabet symbol, a conflict-group id for symbols sharing a
pick-at-most-one factor, and a required-group id for symbols of factors that
must be picked.  One stack frame per open node tracks, per symbol, a count
saturating at 2 plus which conflict/required groups have fired — so the
state is O(|alphabet|) per frame no matter how wide the document gets, and
each event costs O(|alphabet|) work in the worst case (frame setup), O(1)
otherwise.

Verdicts are earliest-rejection: as soon as the consumed prefix admits no
completion into a valid tree, the validator stops with the offending event
index and a reason tag.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

from .core import Multiplicity, TreeEvent
from .schema import Schema, schema_satisfiable, schema_universal

M = Multiplicity

# Rejection / error reasons carried by verdicts.
ROOT_LABEL = "root-label"
CARDINALITY = "cardinality"
ZERO_CARDINALITY = "zero-cardinality"
CONFLICT = "conflict"
REQUIRED = "required"
PROTOCOL = "protocol"
UNSATISFIABLE = "unsatisfiable"


@dataclass(frozen=True)
class RuleEncoding:
    """Array form of one label's rule, symbol-indexed (1-based, slot 0 unused)."""

    cardinality: tuple[Multiplicity, ...]
    conflict_group: tuple[int, ...]  # 0 = no conflict group
    required_group: tuple[int, ...]  # 0 = no required group
    conflict_groups: int
    required_groups: int


@dataclass(frozen=True)
class SchemaEncoding:
    alphabet_index: dict[str, int]
    root: str
    rules: dict[str, RuleEncoding]
    universal: bool
    satisfiable: bool


def encode_schema(s: Schema) -> SchemaEncoding:
    """Compile all rules; group ids are assigned in factor order, from 1."""
    index = {sym: i for i, sym in enumerate(s.alphabet, start=1)}
    n = len(s.alphabet)
    rules: dict[str, RuleEncoding] = {}
    for label in s.alphabet:
        expr = s.rules[label]
        card = [M.ZERO] * (n + 1)
        conflict = [0] * (n + 1)
        required = [0] * (n + 1)
        next_conflict = 0
        next_required = 0
        for f in expr.factors:
            single = len(f.disjuncts) == 1
            if not single and f.outer is M.ONE:
                next_conflict += 1
                for sym, _ in f.disjuncts:
                    conflict[index[sym]] = next_conflict
            if all(not m.admits_zero for _, m in f.disjuncts):
                next_required += 1
                for sym, _ in f.disjuncts:
                    required[index[sym]] = next_required
            for sym, m in f.disjuncts:
                i = index[sym]
                if single:
                    card[i] = m
                elif f.outer is M.ONE and m in (M.OPTIONAL, M.ONE):
                    card[i] = M.OPTIONAL
                else:
                    card[i] = M.STAR
        rules[label] = RuleEncoding(
            tuple(card), tuple(conflict), tuple(required),
            next_conflict, next_required,
        )
    return SchemaEncoding(
        index, s.root, rules, schema_universal(s), schema_satisfiable(s)
    )


@dataclass
class FrameState:
    """Per-open-node counters; everything starts at zero."""

    label: str
    mcount: list[int]  # per symbol id, saturating at 2
    conflict_owner: list[int]  # per conflict group: symbol id that claimed it
    required_met: list[int]  # per required group: 0/1


@dataclass(frozen=True)
class Verdict:
    status: str  # "running" | "accepted" | "rejected" | "error"
    position: int = -1
    reason: str | None = None
    label: str | None = None  # label whose rule (or the stream) was violated

    @property
    def ok(self) -> bool:
        return self.status == "accepted"


@dataclass
class ValidatorState:
    encoding: SchemaEncoding
    stack: list[FrameState] = field(default_factory=list)
    verdict: Verdict = Verdict("running")
    consumed: int = 0
    peak_stack: int = 0
    work: int = 0  # basic-step counter, for per-event cost assertions

    def _finish(self, status: str, reason: str | None, label: str | None) -> None:
        self.verdict = Verdict(status, self.consumed, reason, label)

    def _push_frame(self, label: str) -> None:
        enc = self.encoding.rules[label]
        n = len(enc.cardinality)
        self.stack.append(
            FrameState(
                label,
                [0] * n,
                [0] * (enc.conflict_groups + 1),
                [0] * (enc.required_groups + 1),
            )
        )
        self.work += n + enc.conflict_groups + enc.required_groups + 1
        if len(self.stack) > self.peak_stack:
            self.peak_stack = len(self.stack)

    def open_tag(self, label: str) -> Verdict:
        if self.verdict.status != "running":
            self._finish("error", PROTOCOL, label)
            return self.verdict
        self.work += 1
        if not self.stack:
            # Root open: only the root label is checked here.  A universal
            # schema accepts on the spot; an unsatisfiable one was rejected
            # before any event (see validate_stream).
            if label != self.encoding.root:
                self._finish("rejected", ROOT_LABEL, None)
                return self.verdict
            if self.encoding.universal:
                self._finish("accepted", None, None)
                self.consumed += 1
                return self.verdict
            self._push_frame(label)
            self.consumed += 1
            return self.verdict
        top = self.stack[-1]
        enc = self.encoding.rules[top.label]
        idx = self.encoding.alphabet_index.get(label, 0)
        card = enc.cardinality[idx] if idx else M.ZERO
        if idx:
            count = top.mcount[idx]
            if count < 2:
                top.mcount[idx] = count + 1
        if card is M.ZERO:
            self._finish("rejected", ZERO_CARDINALITY, top.label)
            return self.verdict
        if idx and top.mcount[idx] == 2 and card in (M.ONE, M.OPTIONAL):
            self._finish("rejected", CARDINALITY, top.label)
            return self.verdict
        group = enc.conflict_group[idx]
        if group:
            owner = top.conflict_owner[group]
            if owner and owner != idx:
                self._finish("rejected", CONFLICT, top.label)
                return self.verdict
            top.conflict_owner[group] = idx
        rgroup = enc.required_group[idx]
        if rgroup:
            top.required_met[rgroup] = 1
        self._push_frame(label)
        self.consumed += 1
        return self.verdict

    def close_tag(self, label: str | None = None) -> Verdict:
        if self.verdict.status != "running":
            self._finish("error", PROTOCOL, label)
            return self.verdict
        self.work += 1
        if not self.stack:
            self._finish("error", PROTOCOL, label)
            return self.verdict
        top = self.stack[-1]
        if label is not None and label != top.label:
            self._finish("error", PROTOCOL, top.label)
            return self.verdict
        enc = self.encoding.rules[top.label]
        self.work += enc.required_groups
        for g in range(1, enc.required_groups + 1):
            if not top.required_met[g]:
                self._finish("rejected", REQUIRED, top.label)
                return self.verdict
        self.stack.pop()
        if not self.stack:
            self._finish("accepted", None, None)
        self.consumed += 1
        return self.verdict


def new_validator(s: Schema | SchemaEncoding) -> ValidatorState:
    enc = s if isinstance(s, SchemaEncoding) else encode_schema(s)
    state = ValidatorState(enc)
    if not enc.satisfiable:
        # No tree satisfies the schema: reject before consuming anything.
        state.verdict = Verdict("rejected", 0, UNSATISFIABLE, None)
    return state


def validate_stream(
    events: Iterable[TreeEvent],
    s: Schema | SchemaEncoding,
    *,
    state: ValidatorState | None = None,
) -> Verdict:
    """Feed ``events`` through a fresh validator; stop at the first verdict.

    Early acceptance (universal schema) leaves the rest of the stream
    unread.  A stream that continues after the root closed, or ends while
    nodes are open, is a protocol error.  Pass a pre-built ``state`` to
    inspect its counters (peak stack, work) afterwards.
    """
    if state is None:
        state = new_validator(s)
    if state.verdict.status != "running":
        return state.verdict
    accepted_at_close = False
    for ev in events:
        if accepted_at_close:
            return Verdict("error", state.consumed, PROTOCOL, None)
        if ev.kind == "open":
            v = state.open_tag(ev.label)
        elif ev.kind == "close":
            v = state.close_tag(ev.label)
        else:
            return Verdict("error", state.consumed, PROTOCOL, None)
        if v.status == "rejected" or v.status == "error":
            return v
        if v.status == "accepted":
            if ev.kind == "open":
                return v  # universal shortcut: remaining events unread
            accepted_at_close = True
    if accepted_at_close:
        return state.verdict
    if state.verdict.status == "running":
        return Verdict("error", state.consumed, PROTOCOL, None)
    return state.verdict
