"""
Norm synthesis from labelled traces.

A candidate solution is a :class:`StateSetTriple`: three subsets of the
universe S(Γ) standing for the condition, target and deadline. The triple
classifies Γ when every negative trace violates the induced norm and no
positive trace does. Two engines search for one:

- ``"sat"`` encodes the classification conditions into a
  :class:`~sknorm.satcore.CnfSystem` and decodes a model;
- ``"brute"`` evaluates all ``2 ** (3 * |S|)`` triples at once with numpy.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from sknorm.config import setting
from sknorm.errors import NormInputError, ResourceLimitExceeded, VocabularyMismatchError
from sknorm.monitor import (
    ConditionalNorm,
    NormKind,
    ViolationWitness,
    scan_obligation,
    scan_prohibition,
)
from sknorm.propcore import Vocabulary, formula_from_state_set
from sknorm.satcore import CnfSystem, SatOutcome, solve
from sknorm.tracemodel import LabeledTraceSet, State
from sknorm.utils import boolean_grid

logger = logging.getLogger(__name__)

REPORT_SCHEMA = 1


@dataclass(frozen=True)
class StateSetTriple:
    """
    Condition, target and deadline sets over a universe of states.

    Members are stored as indices into ``universe``; the target is X_P for
    prohibitions and X_O for obligations.
    """

    kind: NormKind
    vocab: Vocabulary
    universe: tuple[State, ...]
    condition: frozenset[int] = frozenset()
    target: frozenset[int] = frozenset()
    deadline: frozenset[int] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "kind", NormKind.parse(self.kind))
        object.__setattr__(self, "universe", tuple(self.universe))
        n = len(self.universe)
        for name in ("condition", "target", "deadline"):
            members = frozenset(int(k) for k in getattr(self, name))
            bad = [k for k in members if not 0 <= k < n]
            if bad:
                raise ValueError(f"{name} holds indices {sorted(bad)} outside 0..{n - 1}")
            object.__setattr__(self, name, members)
        for s in self.universe:
            if s.vocab != self.vocab:
                raise VocabularyMismatchError("universe state over a different vocabulary")

    @classmethod
    def from_norm(cls, norm: ConditionalNorm, universe: Iterable[State]) -> StateSetTriple:
        """
        Project ``norm`` onto ``universe``: each set holds the states where
        the corresponding formula is true.
        """
        universe = tuple(universe)
        return cls(
            norm.kind,
            norm.vocab,
            universe,
            frozenset(k for k, s in enumerate(universe) if norm.condition.evaluate(s)),
            frozenset(k for k, s in enumerate(universe) if norm.target.evaluate(s)),
            frozenset(k for k, s in enumerate(universe) if norm.deadline.evaluate(s)),
        )

    @classmethod
    def from_masks(
        cls, kind, vocab: Vocabulary, universe: tuple[State, ...], masks
    ) -> StateSetTriple:
        """Build from a ``(3, |S|)`` boolean array (rows: condition, target, deadline)."""
        masks = np.asarray(masks, dtype=bool)
        c, z, d = (frozenset(int(k) for k in np.flatnonzero(row)) for row in masks)
        return cls(kind, vocab, universe, c, z, d)

    def components(self) -> tuple[frozenset[int], frozenset[int], frozenset[int]]:
        return self.condition, self.target, self.deadline

    def masks(self) -> np.ndarray:
        """Membership of every universe state, shape ``(3, |S|)``."""
        out = np.zeros((3, len(self.universe)), dtype=bool)
        for row, members in enumerate(self.components()):
            out[row, sorted(members)] = True
        return out

    def states(self, members: frozenset[int]) -> list[State]:
        return [self.universe[k] for k in sorted(members)]

    def to_norm(self) -> ConditionalNorm:
        """The norm whose formulas are the state-description disjunctions of the sets."""
        return ConditionalNorm(
            self.kind,
            formula_from_state_set(self.states(self.condition), self.vocab),
            formula_from_state_set(self.states(self.target), self.vocab),
            formula_from_state_set(self.states(self.deadline), self.vocab),
            self.vocab,
        )

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "condition": [s.to_dict() for s in self.states(self.condition)],
            "target": [s.to_dict() for s in self.states(self.target)],
            "deadline": [s.to_dict() for s in self.states(self.deadline)],
        }

    def __str__(self):
        def names(members):
            return "{" + ", ".join(f"s{k}" for k in sorted(members)) + "}"

        return (
            f"X_C={names(self.condition)}, X_{self.kind.symbol}={names(self.target)}, "
            f"X_D={names(self.deadline)}"
        )


@dataclass(frozen=True)
class Counterexample:
    """The first trace a triple misclassifies, and the witness if it is a positive one."""

    label: str
    index: int
    witness: ViolationWitness | None = None

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "index": self.index,
            "witness": None if self.witness is None else self.witness.to_dict(),
        }

    def __str__(self):
        if self.label == "negative":
            return f"negative[{self.index}] is not violated"
        return f"positive[{self.index}] is violated at (i={self.witness.i}, j={self.witness.j})"


@dataclass(frozen=True)
class Solution:
    triple: StateSetTriple
    norm: ConditionalNorm
    stats: dict = field(default_factory=dict)
    trivial: bool = False

    feasible = True


@dataclass(frozen=True)
class NoSolution:
    kind: NormKind
    stats: dict = field(default_factory=dict)

    feasible = False


# Verification
# ============


def _indexed(traces: LabeledTraceSet, label: str) -> list[list[int]]:
    index = traces.state_index
    group = traces.negative if label == "negative" else traces.positive
    return [[index[s.bits] for s in trace] for trace in group]


def _check_universe(triple: StateSetTriple, traces: LabeledTraceSet) -> None:
    if triple.vocab != traces.vocab or [s.bits for s in triple.universe] != [
        s.bits for s in traces.universe
    ]:
        raise VocabularyMismatchError("triple is not over the universe of the trace set")


def verify_triple(triple: StateSetTriple, traces: LabeledTraceSet) -> Counterexample | None:
    """
    Check that ``triple`` classifies ``traces``.

    Negative traces are checked first, then positive traces, each in file
    order. Membership in the sets stands in for the truth of the induced
    formulas, which agree on every universe state.

    Returns
    -------
    Counterexample or None
        ``None`` when every negative trace is violated and no positive one is.
    """
    _check_universe(triple, traces)
    scan = scan_prohibition if triple.kind is NormKind.PROHIBITION else scan_obligation
    c, z, d = triple.components()

    for label in ("negative", "positive"):
        for idx, rho in enumerate(_indexed(traces, label)):
            witness = scan([k in c for k in rho], [k in z for k in rho], [k in d for k in rho])
            if label == "negative" and witness is None:
                return Counterexample(label, idx)
            if label == "positive" and witness is not None:
                return Counterexample(label, idx, witness)
    return None


# Encoding
# ========


def _core_vars(system: CnfSystem, n: int, kind: NormKind) -> tuple[list[int], list[int], list[int]]:
    blocks = []
    for role in ("C", kind.symbol, "D"):
        blocks.append([system.new_var(role, k) for k in range(n)])
    return blocks[0], blocks[1], blocks[2]


def _positive_clause(seen: dict, literals: Iterable[int]) -> None:
    clause = tuple(dict.fromkeys(literals))
    seen.setdefault(frozenset(clause), clause)


def encode_prohibition(traces: LabeledTraceSet) -> CnfSystem:
    """
    Clauses satisfiable exactly by the prohibition triples classifying ``traces``.

    Variables ``1..n`` are condition memberships, ``n+1..2n`` target and
    ``2n+1..3n`` deadline memberships of the universe states; witness
    variables follow. A negative trace needs some witness ``w_ij`` implying
    the condition at ``i``, the target at ``j`` and no deadline strictly
    between. A positive trace forbids every such pair.
    """
    n = len(traces.universe)
    system = CnfSystem()
    C, P, D = _core_vars(system, n, NormKind.PROHIBITION)

    for rho in _indexed(traces, "negative"):
        witnesses = []
        for i in range(len(rho)):
            for j in range(i, len(rho)):
                w = system.new_var("W")
                system.add_clause((-w, C[rho[i]]))
                system.add_clause((-w, P[rho[j]]))
                for k in dict.fromkeys(rho[i + 1 : j]):
                    system.add_clause((-w, -D[k]))
                witnesses.append(w)
        system.add_clause(witnesses)

    seen: dict = {}
    for rho in _indexed(traces, "positive"):
        for i in range(len(rho)):
            for j in range(i, len(rho)):
                _positive_clause(
                    seen, [-C[rho[i]], -P[rho[j]]] + [D[k] for k in rho[i + 1 : j]]
                )
    system.extend(seen.values())
    return system


def encode_obligation(traces: LabeledTraceSet) -> CnfSystem:
    """
    Clauses satisfiable exactly by the obligation triples classifying ``traces``.

    Same layout as :func:`encode_prohibition` with obligation memberships in
    the middle block. The obligation window ``i..j`` is closed at both ends.
    """
    n = len(traces.universe)
    system = CnfSystem()
    C, O, D = _core_vars(system, n, NormKind.OBLIGATION)

    for rho in _indexed(traces, "negative"):
        witnesses = []
        for i in range(len(rho)):
            for j in range(i, len(rho)):
                w = system.new_var("W")
                system.add_clause((-w, C[rho[i]]))
                system.add_clause((-w, D[rho[j]]))
                for k in dict.fromkeys(rho[i : j + 1]):
                    system.add_clause((-w, -O[k]))
                witnesses.append(w)
        system.add_clause(witnesses)

    seen: dict = {}
    for rho in _indexed(traces, "positive"):
        for i in range(len(rho)):
            for j in range(i, len(rho)):
                _positive_clause(
                    seen, [-C[rho[i]], -D[rho[j]]] + [O[k] for k in rho[i : j + 1]]
                )
    system.extend(seen.values())
    return system


def encode(traces: LabeledTraceSet, kind) -> CnfSystem:
    kind = NormKind.parse(kind)
    if kind is NormKind.PROHIBITION:
        return encode_prohibition(traces)
    return encode_obligation(traces)


def clause_bound(traces: LabeledTraceSet) -> int:
    """Upper bound on the clauses of either encoding: ``2 * sum(L**2 * (L + 2))``."""
    return 2 * sum(len(t) ** 2 * (len(t) + 2) for t in traces.positive + traces.negative)


def decode_triple(
    system: CnfSystem, outcome: SatOutcome, traces: LabeledTraceSet, kind
) -> StateSetTriple:
    """Read the core memberships of a model; witness and auxiliary variables are ignored."""
    kind = NormKind.parse(kind)
    n = len(traces.universe)
    sets = []
    for role in ("C", kind.symbol, "D"):
        sets.append(frozenset(k for k in range(n) if outcome.value(system.core_var(role, k))))
    return StateSetTriple(kind, traces.vocab, traces.universe, *sets)


# Brute force
# ===========


def _violations(kind: NormKind, C: np.ndarray, Z: np.ndarray, D: np.ndarray, rho) -> np.ndarray:
    # one column per trace position, one row per candidate triple
    active = np.zeros(C.shape[0], dtype=bool)
    violated = np.zeros(C.shape[0], dtype=bool)
    for k in rho:
        c, z, d = C[:, k], Z[:, k], D[:, k]
        if kind is NormKind.PROHIBITION:
            active |= c
            violated |= active & z
            active = np.where(d, c, active)
        else:
            active = ~z & (active | c)
            violated |= active & d
    return violated


def feasible_rows(
    traces: LabeledTraceSet, kind, max_bits: int | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """
    Evaluate every candidate triple.

    Returns
    -------
    grid : numpy.ndarray
        All candidates as rows of ``boolean_grid(3 * |S|)``, columns
        ``C_0..C_{n-1}, Z_0..Z_{n-1}, D_0..D_{n-1}``.
    rows : numpy.ndarray
        Indices of the rows classifying ``traces``, ascending.

    Raises
    ------
    ResourceLimitExceeded
        If ``3 * |S|`` exceeds ``max_bits``.
    """
    kind = NormKind.parse(kind)
    max_bits = setting("brute_force", "max_bits") if max_bits is None else max_bits
    n = len(traces.universe)
    if 3 * n > max_bits:
        raise ResourceLimitExceeded(
            f"brute force over {n} states needs 2^{3 * n} candidates, over the cap of 2^{max_bits}"
        )

    grid = boolean_grid(3 * n)
    C, Z, D = grid[:, :n], grid[:, n : 2 * n], grid[:, 2 * n :]
    ok = np.ones(grid.shape[0], dtype=bool)
    for rho in _indexed(traces, "negative"):
        ok &= _violations(kind, C, Z, D, rho)
    for rho in _indexed(traces, "positive"):
        ok &= ~_violations(kind, C, Z, D, rho)
    return grid, np.flatnonzero(ok)


def _row_triple(traces: LabeledTraceSet, kind: NormKind, row: np.ndarray) -> StateSetTriple:
    n = len(traces.universe)
    return StateSetTriple.from_masks(kind, traces.vocab, traces.universe, row.reshape(3, n))


def brute_force_synthesize(
    traces: LabeledTraceSet, kind, max_bits: int | None = None
) -> list[StateSetTriple]:
    """
    Every triple over S(Γ) that classifies ``traces``, in canonical order.

    Canonical order follows :func:`~sknorm.utils.boolean_grid` over the
    membership bits ``C_0..C_{n-1}, Z_0.., D_0..`` with ``C_0`` most
    significant.
    """
    kind = NormKind.parse(kind)
    grid, rows = feasible_rows(traces, kind, max_bits)
    return [_row_triple(traces, kind, grid[r]) for r in rows]


# Synthesis
# =========


def synthesize(
    traces: LabeledTraceSet,
    kind,
    engine: str = "sat",
    *,
    backend: str | None = None,
    max_steps: int | None = None,
    max_clauses: int | None = None,
    max_bits: int | None = None,
) -> Solution | NoSolution:
    """
    Find a norm that every negative trace violates and no positive trace does.

    Parameters
    ----------
    traces : LabeledTraceSet
    kind : NormKind or str
    engine : {"sat", "brute"}
    backend, max_steps, max_clauses
        Passed to :func:`sknorm.satcore.solve`.
    max_bits : int, optional
        Cap for the brute-force engine.

    Returns
    -------
    Solution or NoSolution
        ``NoSolution`` means no triple over S(Γ) exists. A returned solution
        has always been re-verified.

    Raises
    ------
    ResourceLimitExceeded
        When the chosen engine runs out of budget.
    """
    kind = NormKind.parse(kind)
    n = len(traces.universe)

    if engine == "sat":
        system = encode(traces, kind)
        logger.info(
            "%s synthesis over %d states: %d variables, %d clauses",
            kind.value,
            n,
            system.num_vars,
            system.num_clauses,
        )
        outcome = solve(system, backend=backend, max_steps=max_steps, max_clauses=max_clauses)
        stats = {
            "engine": "sat",
            "variables": system.num_vars,
            "clauses": system.num_clauses,
            **outcome.stats.to_dict(),
        }
        triple = decode_triple(system, outcome, traces, kind) if outcome.satisfiable else None
    elif engine == "brute":
        grid, rows = feasible_rows(traces, kind, max_bits)
        stats = {"engine": "brute", "candidates": int(grid.shape[0]), "solutions": int(rows.size)}
        triple = _row_triple(traces, kind, grid[rows[0]]) if rows.size else None
    else:
        raise NormInputError(f"Unsupported engine: {engine}. Must be 'sat' or 'brute'")

    if triple is None:
        logger.info("no %s classifies the traces", kind.value)
        return NoSolution(kind, stats)

    problem = verify_triple(triple, traces)
    if problem is not None:
        raise RuntimeError(f"synthesised triple fails verification: {problem}")

    trivial = not traces.negative
    if trivial:
        logger.warning("no negative traces; returning the never-detached %s", kind.value)
    logger.info("synthesised %s: %s", kind.value, triple)
    return Solution(triple, triple.to_norm(), stats, trivial)


def synthesis_report(traces: LabeledTraceSet, result: Solution | NoSolution) -> dict:
    """JSON-ready report of a synthesis run."""
    kind = result.triple.kind if isinstance(result, Solution) else result.kind
    report = {
        "schema": REPORT_SCHEMA,
        "command": "synth",
        "kind": kind.value,
        "universe_size": len(traces.universe),
        "result": "solution" if result.feasible else "no_solution",
    }
    if isinstance(result, Solution):
        report["trivial"] = result.trivial
        report["triple"] = result.triple.to_dict()
        report["norm"] = result.norm.to_dict()
        problem = verify_triple(result.triple, traces)
        report["verification"] = "ok" if problem is None else problem.to_dict()
    report["stats"] = dict(result.stats)
    return report
