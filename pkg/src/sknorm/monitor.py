"""
Violation checking for conditional norms on finite traces.

A conditional norm ``(phi_C, Z(phi_Z), phi_D)`` is a prohibition (``Z = P``)
or an obligation (``Z = O``). On a trace ``rho[1..n]``:

- a prohibition is violated iff there are ``i <= j`` with ``phi_C`` at
  ``rho[i]``, ``phi_P`` at ``rho[j]`` and no ``phi_D`` strictly between;
- an obligation is violated iff there are ``i <= j`` with ``phi_C`` at
  ``rho[i]``, ``phi_D`` at ``rho[j]`` and no ``phi_O`` in ``rho[i..j]``.

The checks run in one left-to-right pass and report the lexicographically
smallest witness ``(i, j)``. :func:`violation_oracle` enumerates the
definitions directly and serves as the reference in tests.
"""

from __future__ import annotations

import enum
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence, TextIO

from sknorm.errors import NormFormatError, NormInputError, VocabularyMismatchError
from sknorm.propcore import PropFormula, Vocabulary, parse_formula
from sknorm.tracemodel import LabeledTraceSet, Trace

logger = logging.getLogger(__name__)


class NormKind(str, enum.Enum):
    PROHIBITION = "prohibition"
    OBLIGATION = "obligation"

    @property
    def symbol(self) -> str:
        return "P" if self is NormKind.PROHIBITION else "O"

    @classmethod
    def parse(cls, text: str) -> NormKind:
        """Accepts ``prohibition``/``obligation`` and the short forms ``P``/``O``."""
        if isinstance(text, NormKind):
            return text
        aliases = {"p": cls.PROHIBITION, "o": cls.OBLIGATION}
        key = str(text).strip().lower()
        if key in aliases:
            return aliases[key]
        try:
            return cls(key)
        except ValueError:
            raise NormInputError(
                f"norm kind must be 'prohibition' or 'obligation', got {text!r}"
            ) from None


@dataclass(frozen=True)
class ConditionalNorm:
    """
    A conditional prohibition or obligation over ``vocab``.

    Parameters
    ----------
    kind : NormKind
    condition : PropFormula
        The detachment condition phi_C.
    target : PropFormula
        phi_P for prohibitions, phi_O for obligations.
    deadline : PropFormula
        phi_D.
    vocab : Vocabulary
    """

    kind: NormKind
    condition: PropFormula
    target: PropFormula
    deadline: PropFormula
    vocab: Vocabulary

    def __post_init__(self):
        object.__setattr__(self, "kind", NormKind.parse(self.kind))
        stray = (self.condition.atoms() | self.target.atoms() | self.deadline.atoms()) - set(
            self.vocab.props
        )
        if stray:
            raise VocabularyMismatchError(
                f"norm mentions {sorted(stray)} outside {list(self.vocab.props)}"
            )

    @classmethod
    def from_strings(
        cls, kind, condition: str, target: str, deadline: str, vocab: Vocabulary
    ) -> ConditionalNorm:
        return cls(
            NormKind.parse(kind),
            parse_formula(condition, vocab),
            parse_formula(target, vocab),
            parse_formula(deadline, vocab),
            vocab,
        )

    def to_dict(self) -> dict[str, str]:
        return {
            "kind": self.kind.value,
            "condition": self.condition.pretty(),
            "target": self.target.pretty(),
            "deadline": self.deadline.pretty(),
        }

    def __str__(self):
        return (
            f"({self.condition}, {self.kind.symbol}({self.target}), {self.deadline})"
        )


@dataclass(frozen=True, order=True)
class ViolationWitness:
    """1-based detachment index ``i`` and violation index ``j``, ``i <= j``."""

    i: int
    j: int

    def to_dict(self) -> dict[str, int]:
        return {"i": self.i, "j": self.j}


@dataclass(frozen=True)
class Verdict:
    """Outcome of a check: violated with a witness, or obeyed (``witness is None``)."""

    witness: ViolationWitness | None = None

    @property
    def violated(self) -> bool:
        return self.witness is not None

    def __str__(self):
        if self.witness is None:
            return "obeyed"
        return f"violated (i={self.witness.i}, j={self.witness.j})"


OBEYED = Verdict()


# Single-pass scans over membership sequences
# ===========================================


def scan_prohibition(
    cond: Sequence[bool], target: Sequence[bool], deadline: Sequence[bool]
) -> ViolationWitness | None:
    """
    Smallest prohibition witness given per-position truth values.

    Per position: (1) the condition opens a window if none is open;
    (2) an open window meeting the target is reported; (3) a deadline
    closes the window, unless the condition holds there too, in which case
    the window restarts at this position.
    """
    start = None
    for pos, (c, p, d) in enumerate(zip(cond, target, deadline), start=1):
        if c and start is None:
            start = pos
        if start is not None and p:
            return ViolationWitness(start, pos)
        if d:
            start = pos if c else None
    return None


def scan_obligation(
    cond: Sequence[bool], target: Sequence[bool], deadline: Sequence[bool]
) -> ViolationWitness | None:
    """
    Smallest obligation witness given per-position truth values.

    Per position: (1) the obligation holding closes any open window;
    (2) otherwise the condition opens one if none is open; (3) an open
    window meeting the deadline is reported.
    """
    start = None
    for pos, (c, o, d) in enumerate(zip(cond, target, deadline), start=1):
        if o:
            start = None
        elif c and start is None:
            start = pos
        if start is not None and d:
            return ViolationWitness(start, pos)
    return None


def _labels(norm: ConditionalNorm, trace: Trace):
    if trace.vocab != norm.vocab:
        raise VocabularyMismatchError(
            f"trace over {list(trace.vocab.props)} checked against a norm over "
            f"{list(norm.vocab.props)}"
        )
    cache = {}
    cond, target, deadline = [], [], []
    for s in trace:
        if s.bits not in cache:
            cache[s.bits] = (
                norm.condition.evaluate(s),
                norm.target.evaluate(s),
                norm.deadline.evaluate(s),
            )
        c, z, d = cache[s.bits]
        cond.append(c)
        target.append(z)
        deadline.append(d)
    return cond, target, deadline


def check_prohibition(norm: ConditionalNorm, trace: Trace) -> Verdict:
    """
    Decide whether the prohibition ``norm`` is violated on ``trace``.

    Runs in one pass, linear in the trace length times the formula sizes.

    Raises
    ------
    NormInputError
        If ``norm`` is an obligation.
    VocabularyMismatchError
        If the trace is over a different vocabulary.
    """
    if norm.kind is not NormKind.PROHIBITION:
        raise NormInputError("check_prohibition needs a prohibition")
    return Verdict(scan_prohibition(*_labels(norm, trace)))


def check_obligation(norm: ConditionalNorm, trace: Trace) -> Verdict:
    """
    Decide whether the obligation ``norm`` is violated on ``trace``.

    The deadline is judged at the violation index ``j``, the reading under
    which the set-of-states formulation and the hardness gadgets agree.
    """
    if norm.kind is not NormKind.OBLIGATION:
        raise NormInputError("check_obligation needs an obligation")
    return Verdict(scan_obligation(*_labels(norm, trace)))


def check(norm: ConditionalNorm, trace: Trace) -> Verdict:
    """Dispatch to :func:`check_prohibition` or :func:`check_obligation`."""
    if norm.kind is NormKind.PROHIBITION:
        return check_prohibition(norm, trace)
    return check_obligation(norm, trace)


def check_all(norm: ConditionalNorm, traces: LabeledTraceSet) -> list[tuple[str, int, Verdict]]:
    """``(label, index, verdict)`` for every trace, negatives first."""
    results = []
    for label, idx, trace in traces.labelled():
        verdict = check(norm, trace)
        logger.debug("%s[%d]: %s", label, idx, verdict)
        results.append((label, idx, verdict))
    return results


def violation_oracle(norm: ConditionalNorm, trace: Trace) -> Verdict:
    """
    Reference checker enumerating every ``(i, j, k)`` of the definitions.

    Cubic in the trace length; used to validate the single-pass checks.
    """
    cond, target, deadline = _labels(norm, trace)
    n = len(trace)
    for i in range(1, n + 1):
        for j in range(i, n + 1):
            if not cond[i - 1]:
                continue
            if norm.kind is NormKind.PROHIBITION:
                if not target[j - 1]:
                    continue
                blocked = any(deadline[k - 1] for k in range(i + 1, j))
            else:
                if not deadline[j - 1]:
                    continue
                blocked = any(target[k - 1] for k in range(i, j + 1))
            if not blocked:
                return Verdict(ViolationWitness(i, j))
    return OBEYED


# Norm files
# ==========


def norm_from_document(doc, vocab: Vocabulary) -> ConditionalNorm:
    if not isinstance(doc, dict):
        raise NormFormatError("malformed norm: top level must be an object")
    expected = {"kind", "condition", "target", "deadline"}
    if set(doc) != expected:
        raise NormFormatError(
            f"malformed norm: expected keys {sorted(expected)}, got {sorted(doc)}"
        )
    for key in ("condition", "target", "deadline"):
        if not isinstance(doc[key], str):
            raise NormFormatError(f"malformed norm: '{key}' must be a formula string")
    return ConditionalNorm.from_strings(
        doc["kind"], doc["condition"], doc["target"], doc["deadline"], vocab
    )


def loads_norm(text: str, vocab: Vocabulary) -> ConditionalNorm:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise NormFormatError(f"malformed norm: {e}") from e
    except RecursionError:
        raise NormFormatError("malformed norm: nested too deeply") from None
    return norm_from_document(doc, vocab)


def load_norm(source: str | Path | TextIO, vocab: Vocabulary) -> ConditionalNorm:
    """
    Read a norm file. Formulas are parsed against ``vocab``, normally the
    vocabulary of the trace file the norm is checked on.
    """
    try:
        if hasattr(source, "read"):
            text = source.read()
        else:
            with open(source, "r", encoding="utf-8") as f:
                text = f.read()
    except UnicodeDecodeError as e:
        raise NormFormatError(f"malformed norm: not UTF-8 text ({e.reason})") from e
    return loads_norm(text, vocab)


def dumps_norm(norm: ConditionalNorm) -> str:
    return json.dumps(norm.to_dict(), indent=2) + "\n"
