"""
States, traces and labelled trace sets.

A state is a total assignment over a :class:`~sknorm.propcore.Vocabulary`.
A :class:`LabeledTraceSet` splits its traces into positive traces (behaviour
meeting the system objective) and negative traces (behaviour that does not).

Trace file format (JSON, UTF-8)::

    {"propositions": ["a", "b"],
     "positive": [[{"a": true, "b": false}, ...], ...],
     "negative": [[...], ...]}
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable, Mapping, Sequence, TextIO

from sknorm.errors import TraceFormatError, VocabularyMismatchError
from sknorm.propcore import Vocabulary


@dataclass(frozen=True)
class State:
    """
    A total assignment of truth values to the propositions of ``vocab``.

    ``bits`` lists the values in vocabulary order and doubles as the
    canonical key of the state.
    """

    vocab: Vocabulary
    bits: tuple[bool, ...]

    def __post_init__(self):
        bits = tuple(bool(b) for b in self.bits)
        object.__setattr__(self, "bits", bits)
        if len(bits) != len(self.vocab):
            raise VocabularyMismatchError(
                f"state has {len(bits)} values for {len(self.vocab)} propositions"
            )

    @classmethod
    def from_mapping(cls, vocab: Vocabulary, values: Mapping[str, bool]) -> State:
        """
        Build a state from ``{proposition: value}``.

        Raises
        ------
        TraceFormatError
            If a proposition is missing or not in the vocabulary.
        """
        for prop in values:
            if prop not in vocab:
                raise TraceFormatError(f"unknown proposition '{prop}'")
        for prop in vocab:
            if prop not in values:
                raise TraceFormatError(f"missing proposition '{prop}'")
        return cls(vocab, tuple(bool(values[p]) for p in vocab))

    @classmethod
    def from_bits(cls, vocab: Vocabulary, bits: str | Sequence[bool]) -> State:
        """Build a state from values in vocabulary order; ``"101"`` is accepted."""
        if isinstance(bits, str):
            bits = [c == "1" for c in bits]
        return cls(vocab, tuple(bits))

    def __getitem__(self, prop: str) -> bool:
        return self.bits[self.vocab.index(prop)]

    def true_props(self) -> tuple[str, ...]:
        return tuple(p for p, v in zip(self.vocab.props, self.bits) if v)

    def to_dict(self) -> dict[str, bool]:
        return dict(zip(self.vocab.props, self.bits))

    def __str__(self):
        return "{" + ",".join(f"{p}:{int(v)}" for p, v in zip(self.vocab.props, self.bits)) + "}"


@dataclass(frozen=True)
class Trace:
    """
    A finite, non-empty sequence of states over one vocabulary.

    Python indexing is zero-based; reports and witnesses use the 1-based
    positions ``rho[1] .. rho[n]``.
    """

    states: tuple[State, ...]

    def __post_init__(self):
        states = tuple(self.states)
        object.__setattr__(self, "states", states)
        if not states:
            raise TraceFormatError("empty trace")
        vocab = states[0].vocab
        for s in states[1:]:
            if s.vocab != vocab:
                raise VocabularyMismatchError("trace mixes states over different vocabularies")

    @property
    def vocab(self) -> Vocabulary:
        return self.states[0].vocab

    def __len__(self):
        return len(self.states)

    def __getitem__(self, i):
        return self.states[i]

    def __iter__(self):
        return iter(self.states)


@dataclass(frozen=True)
class LabeledTraceSet:
    """
    The labelled behaviour Γ: positive traces Γ_T and negative traces Γ_F.

    Duplicate traces are allowed and carry no extra constraint.
    """

    vocab: Vocabulary
    positive: tuple[Trace, ...] = ()
    negative: tuple[Trace, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "positive", tuple(self.positive))
        object.__setattr__(self, "negative", tuple(self.negative))
        for label, traces in (("positive", self.positive), ("negative", self.negative)):
            for idx, trace in enumerate(traces):
                if trace.vocab != self.vocab:
                    raise VocabularyMismatchError(
                        f"{label}[{idx}] is not over the declared propositions"
                    )

    @cached_property
    def universe(self) -> tuple[State, ...]:
        """S(Γ), see :func:`universe`."""
        seen = {}
        for trace in self.positive + self.negative:
            for s in trace:
                seen.setdefault(s.bits, s)
        return tuple(seen.values())

    @cached_property
    def state_index(self) -> dict[tuple[bool, ...], int]:
        """Position of each state of S(Γ), keyed by its canonical key."""
        return {s.bits: k for k, s in enumerate(self.universe)}

    def labelled(self) -> list[tuple[str, int, Trace]]:
        """``(label, index, trace)`` for every trace, negatives first."""
        return [("negative", i, t) for i, t in enumerate(self.negative)] + [
            ("positive", i, t) for i, t in enumerate(self.positive)
        ]

    def with_trace(self, trace: Trace, positive: bool) -> LabeledTraceSet:
        """A copy with ``trace`` appended to Γ_T (``positive``) or Γ_F."""
        if positive:
            return LabeledTraceSet(self.vocab, self.positive + (trace,), self.negative)
        return LabeledTraceSet(self.vocab, self.positive, self.negative + (trace,))


def universe(traces: LabeledTraceSet) -> tuple[State, ...]:
    """
    The deduplicated states occurring in ``traces``, in first-occurrence
    order: positive traces, then negative traces, each left to right.

    This order is the canonical state indexing used by the solvers and in
    every report.
    """
    return traces.universe


def make_trace(vocab: Vocabulary, rows: Iterable[Mapping[str, bool] | str]) -> Trace:
    """Build a trace from state mappings or bit strings."""
    states = []
    for row in rows:
        if isinstance(row, str):
            states.append(State.from_bits(vocab, row))
        else:
            states.append(State.from_mapping(vocab, row))
    return Trace(tuple(states))


# Serialization
# =============


def _parse_value(value, where: str, prop: str) -> bool:
    if isinstance(value, bool):
        return value
    if isinstance(value, int) and value in (0, 1):
        return bool(value)
    raise TraceFormatError(f"value of '{prop}' in {where} must be a boolean, got {value!r}")


def traces_from_document(doc) -> LabeledTraceSet:
    """Validate a decoded trace document and build the trace set."""
    if not isinstance(doc, dict):
        raise TraceFormatError("malformed document: top level must be an object")
    extra = set(doc) - {"propositions", "positive", "negative"}
    if extra:
        raise TraceFormatError(f"malformed document: unexpected keys {sorted(extra)}")
    if "propositions" not in doc:
        raise TraceFormatError("malformed document: missing 'propositions'")

    props = doc["propositions"]
    if not isinstance(props, list):
        raise TraceFormatError("malformed document: 'propositions' must be a list")
    try:
        vocab = Vocabulary(tuple(props))
    except VocabularyMismatchError as e:
        raise TraceFormatError(f"malformed document: {e}") from e

    groups = {}
    for label in ("positive", "negative"):
        raw = doc.get(label, [])
        if not isinstance(raw, list):
            raise TraceFormatError(f"malformed document: '{label}' must be a list")
        traces = []
        for ti, raw_trace in enumerate(raw):
            if not isinstance(raw_trace, list):
                raise TraceFormatError(f"malformed document: {label}[{ti}] must be a list")
            if not raw_trace:
                raise TraceFormatError(f"empty trace at {label}[{ti}]")
            states = []
            for si, raw_state in enumerate(raw_trace):
                where = f"{label}[{ti}][{si}]"
                if not isinstance(raw_state, dict):
                    raise TraceFormatError(f"malformed document: {where} must be an object")
                for prop in raw_state:
                    if prop not in vocab:
                        raise TraceFormatError(f"unknown proposition '{prop}' in {where}")
                for prop in vocab:
                    if prop not in raw_state:
                        raise TraceFormatError(f"missing proposition '{prop}' in {where}")
                states.append(
                    State(vocab, tuple(_parse_value(raw_state[p], where, p) for p in vocab))
                )
            traces.append(Trace(tuple(states)))
        groups[label] = tuple(traces)

    return LabeledTraceSet(vocab, groups["positive"], groups["negative"])


def loads_traces(text: str) -> LabeledTraceSet:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise TraceFormatError(f"malformed document: {e}") from e
    except RecursionError:
        raise TraceFormatError("malformed document: nested too deeply") from None
    return traces_from_document(doc)


def load_traces(source: str | Path | TextIO) -> LabeledTraceSet:
    """
    Read and validate a trace file.

    Parameters
    ----------
    source : str, Path or text stream
        A path to a UTF-8 JSON file, or an open stream.

    Raises
    ------
    TraceFormatError
        On malformed JSON or text that is not UTF-8, and on unknown or
        missing propositions or empty traces. Messages name the trace and
        state position, e.g. ``"missing proposition 'b' in positive[0][1]"``.
    """
    try:
        if hasattr(source, "read"):
            text = source.read()
        else:
            with open(source, "r", encoding="utf-8") as f:
                text = f.read()
    except UnicodeDecodeError as e:
        raise TraceFormatError(f"malformed document: not UTF-8 text ({e.reason})") from e
    return loads_traces(text)


def _dump_state(s: State) -> str:
    return json.dumps(s.to_dict())


def _dump_traces(traces: tuple[Trace, ...]) -> str:
    if not traces:
        return "[]"
    lines = ["    [" + ", ".join(_dump_state(s) for s in t) + "]" for t in traces]
    return "[\n" + ",\n".join(lines) + "\n  ]"


def dumps_traces(traces: LabeledTraceSet) -> str:
    """
    Canonical text of a trace set: propositions as declared, traces in
    order, one trace per line. Loading and re-dumping canonical text is the
    identity.
    """
    return (
        "{\n"
        f'  "propositions": {json.dumps(list(traces.vocab.props))},\n'
        f'  "positive": {_dump_traces(traces.positive)},\n'
        f'  "negative": {_dump_traces(traces.negative)}\n'
        "}\n"
    )


def save_traces(traces: LabeledTraceSet, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(dumps_traces(traces))
