"""
3SAT instances and their translation into synthesis problems.

For a formula over ``x_1..x_m`` the generators build a labelled trace set
over the gadget states ``s``, ``t`` and a pair ``u<i>``, ``v<i>`` per
variable. The trace set has a prohibition (obligation) solution exactly
when the formula is satisfiable, and solutions translate into satisfying
assignments and back.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from sknorm.config import setting
from sknorm.errors import InvalidSolutionError, NormInputError, ResourceLimitExceeded
from sknorm.monitor import NormKind
from sknorm.propcore import Vocabulary
from sknorm.satcore import CnfSystem, to_dimacs
from sknorm.synthesis import StateSetTriple, verify_triple
from sknorm.tracemodel import LabeledTraceSet, State, Trace
from sknorm.utils import boolean_grid

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ThreeSatInstance:
    """
    A CNF formula with exactly three literals per clause.

    Literals are signed variable indices in ``1..num_vars``. Repeated and
    complementary literals within a clause are allowed.
    """

    num_vars: int
    clauses: tuple[tuple[int, int, int], ...]

    def __post_init__(self):
        clauses = tuple(tuple(int(lit) for lit in c) for c in self.clauses)
        object.__setattr__(self, "clauses", clauses)
        if self.num_vars < 1:
            raise NormInputError(f"a 3SAT instance needs at least one variable, got {self.num_vars}")
        for idx, clause in enumerate(clauses):
            if len(clause) != 3:
                raise NormInputError(f"clause {idx} has {len(clause)} literals, expected 3")
            for lit in clause:
                if lit == 0 or abs(lit) > self.num_vars:
                    raise NormInputError(
                        f"literal {lit} in clause {idx} is outside 1..{self.num_vars}"
                    )

    @property
    def num_clauses(self) -> int:
        return len(self.clauses)

    def satisfied_by(self, assignment: Sequence[bool]) -> bool:
        """``assignment[i - 1]`` is the value of ``x_i``."""
        if len(assignment) != self.num_vars:
            raise NormInputError(
                f"assignment has {len(assignment)} values for {self.num_vars} variables"
            )
        return all(any(bool(assignment[abs(l) - 1]) == (l > 0) for l in c) for c in self.clauses)

    def to_cnf(self) -> CnfSystem:
        system = CnfSystem()
        for _ in range(self.num_vars):
            system.new_var("AUX")
        system.extend(self.clauses)
        return system

    def to_dimacs(self) -> str:
        return to_dimacs(self.to_cnf(), comments=("3SAT instance",))


@dataclass(frozen=True)
class ReductionArtifacts:
    """A generated trace set with the gadget name of every state."""

    instance: ThreeSatInstance
    kind: NormKind
    traces: LabeledTraceSet
    state_map: dict[str, State] = field(default_factory=dict)

    def state(self, name: str) -> State:
        return self.state_map[name]

    def index(self, name: str) -> int:
        """Position of a gadget state in the universe of the traces."""
        return self.traces.state_index[self.state_map[name].bits]

    def names(self, members) -> list[str]:
        """Gadget names of universe indices, in universe order."""
        by_bits = {s.bits: name for name, s in self.state_map.items()}
        return [by_bits[self.traces.universe[k].bits] for k in sorted(members)]


def gadget_names(num_vars: int) -> list[str]:
    names = ["s", "t"]
    for i in range(1, num_vars + 1):
        names += [f"u{i}", f"v{i}"]
    return names


def gadget_states(num_vars: int, encoding: str | None = None) -> dict[str, State]:
    """
    Pairwise distinct states for the gadget names.

    ``"onehot"`` uses one proposition ``q_<name>`` per state; ``"binary"``
    numbers the states in :func:`gadget_names` order over propositions
    ``b0, b1, ...`` with ``b0`` most significant.
    """
    encoding = encoding or setting("reductions", "encoding")
    names = gadget_names(num_vars)
    if encoding == "onehot":
        vocab = Vocabulary(tuple(f"q_{name}" for name in names))
        return {
            name: State(vocab, tuple(k == pos for k in range(len(names))))
            for pos, name in enumerate(names)
        }
    if encoding == "binary":
        width = max(1, math.ceil(math.log2(len(names))))
        vocab = Vocabulary(tuple(f"b{k}" for k in range(width)))
        return {
            name: State.from_bits(vocab, format(pos, f"0{width}b"))
            for pos, name in enumerate(names)
        }
    raise NormInputError(f"Unsupported encoding: {encoding}. Must be 'onehot' or 'binary'")


def _clause_gadget(clause: Sequence[int]) -> list[str]:
    return ["s"] + [f"u{l}" if l > 0 else f"v{-l}" for l in clause] + ["t"]


def _build(
    instance: ThreeSatInstance,
    kind: NormKind,
    encoding: str | None,
    positive: list[list[str]],
    negative: list[list[str]],
) -> ReductionArtifacts:
    states = gadget_states(instance.num_vars, encoding)
    vocab = next(iter(states.values())).vocab

    def trace(names):
        return Trace(tuple(states[name] for name in names))

    traces = LabeledTraceSet(
        vocab, tuple(trace(t) for t in positive), tuple(trace(t) for t in negative)
    )
    logger.info(
        "%s gadget for %d variables, %d clauses: %d negative, %d positive traces",
        kind.value,
        instance.num_vars,
        instance.num_clauses,
        len(negative),
        len(positive),
    )
    return ReductionArtifacts(instance, kind, traces, states)


def _negative_gadgets(m: int) -> list[list[str]]:
    negative = [["s", "t"]]
    for i in range(1, m + 1):
        negative.append(["s", f"v{i}", "t", "s", f"u{i}", "t"])
    return negative


def gen_prohibition(instance: ThreeSatInstance, encoding: str | None = None) -> ReductionArtifacts:
    """
    Trace set with a prohibition solution iff ``instance`` is satisfiable.

    Positive traces, in order: ``(s)``, ``(t)``; for each variable
    ``(s,v,u,t)``, ``(v)``, ``(u)``, ``(v,t)``, ``(u,t)``, ``(s,v)``, ``(s,u)``;
    for each pair ``i < j`` the traces ``(v_i,u_j)`` and ``(u_j,v_i)``; one
    ``(s,z,z,z,t)`` per clause, ``z`` being ``u_i`` for ``x_i`` and ``v_i``
    for its negation.
    """
    m = instance.num_vars
    positive = [["s"], ["t"]]
    for i in range(1, m + 1):
        u, v = f"u{i}", f"v{i}"
        positive += [["s", v, u, "t"], [v], [u], [v, "t"], [u, "t"], ["s", v], ["s", u]]
    for i in range(1, m + 1):
        for j in range(i + 1, m + 1):
            positive += [[f"v{i}", f"u{j}"], [f"u{j}", f"v{i}"]]
    positive += [_clause_gadget(c) for c in instance.clauses]
    return _build(instance, NormKind.PROHIBITION, encoding, positive, _negative_gadgets(m))


def gen_obligation(instance: ThreeSatInstance, encoding: str | None = None) -> ReductionArtifacts:
    """
    Trace set with an obligation solution iff ``instance`` is satisfiable.

    The negative traces match :func:`gen_prohibition`; the positive ones are
    ``(s)``, ``(t)``, ``(s,v,u,t)`` per variable and the clause traces.
    """
    m = instance.num_vars
    positive = [["s"], ["t"]]
    positive += [["s", f"v{i}", f"u{i}", "t"] for i in range(1, m + 1)]
    positive += [_clause_gadget(c) for c in instance.clauses]
    return _build(instance, NormKind.OBLIGATION, encoding, positive, _negative_gadgets(m))


def generate(instance: ThreeSatInstance, kind, encoding: str | None = None) -> ReductionArtifacts:
    kind = NormKind.parse(kind)
    if kind is NormKind.PROHIBITION:
        return gen_prohibition(instance, encoding)
    return gen_obligation(instance, encoding)


def reduction_sizes(num_vars: int, num_clauses: int, kind) -> dict[str, int]:
    """Trace and state counts of the generated set, without generating it."""
    kind = NormKind.parse(kind)
    m, n = num_vars, num_clauses
    if kind is NormKind.PROHIBITION:
        positive = 2 + 7 * m + m * (m - 1) + n
    else:
        positive = 2 + m + n
    return {"states": 2 * m + 2, "negative": 1 + m, "positive": positive}


# Solution translation
# ====================


def _as_list(assignment: Sequence[bool] | Mapping[int, bool], m: int) -> list[bool]:
    if isinstance(assignment, Mapping):
        return [bool(assignment[i]) for i in range(1, m + 1)]
    if len(assignment) != m:
        raise NormInputError(f"assignment has {len(assignment)} values for {m} variables")
    return [bool(v) for v in assignment]


def assignment_to_triple(
    assignment: Sequence[bool] | Mapping[int, bool], artifacts: ReductionArtifacts
) -> StateSetTriple:
    """
    The intended solution for ``assignment``.

    Prohibitions get ``X_C = {s}``, ``X_P = {t}``; obligations get
    ``X_C = {s}``, ``X_D = {t}``. The remaining set holds ``u_i`` where
    ``x_i`` is true and ``v_i`` where it is false.
    """
    values = _as_list(assignment, artifacts.instance.num_vars)
    chosen = frozenset(
        artifacts.index(f"u{i}" if value else f"v{i}") for i, value in enumerate(values, start=1)
    )
    s, t = frozenset({artifacts.index("s")}), frozenset({artifacts.index("t")})
    traces = artifacts.traces
    if artifacts.kind is NormKind.PROHIBITION:
        return StateSetTriple(artifacts.kind, traces.vocab, traces.universe, s, t, chosen)
    return StateSetTriple(artifacts.kind, traces.vocab, traces.universe, s, chosen, t)


def triple_to_assignment(triple: StateSetTriple, artifacts: ReductionArtifacts) -> tuple[bool, ...]:
    """
    Read ``x_i`` as true iff ``u_i`` lies in the deadline set (prohibitions)
    or the obligation set (obligations).

    Raises
    ------
    InvalidSolutionError
        If ``triple`` does not classify the generated traces.
    """
    problem = verify_triple(triple, artifacts.traces)
    if problem is not None:
        raise InvalidSolutionError(f"not a solution of the generated traces: {problem}")
    members = triple.deadline if triple.kind is NormKind.PROHIBITION else triple.target
    return tuple(
        artifacts.index(f"u{i}") in members for i in range(1, artifacts.instance.num_vars + 1)
    )


# Instances and oracle
# ====================


def sat3_oracle(instance: ThreeSatInstance, max_vars: int | None = None) -> tuple[bool, ...] | None:
    """
    First satisfying assignment in truth-table order, or ``None``.

    Raises
    ------
    ResourceLimitExceeded
        If the instance has more than ``max_vars`` variables.
    """
    max_vars = setting("oracle", "max_vars") if max_vars is None else max_vars
    m = instance.num_vars
    if m > max_vars:
        raise ResourceLimitExceeded(f"3SAT oracle capped at {max_vars} variables, got {m}")

    table = boolean_grid(m)
    sat = np.ones(table.shape[0], dtype=bool)
    for clause in instance.clauses:
        holds = np.zeros(table.shape[0], dtype=bool)
        for lit in clause:
            column = table[:, abs(lit) - 1]
            holds |= column if lit > 0 else ~column
        sat &= holds
    rows = np.flatnonzero(sat)
    if rows.size == 0:
        return None
    return tuple(bool(v) for v in table[rows[0]])


def random_3sat(num_vars: int, num_clauses: int, seed: int | None = None) -> ThreeSatInstance:
    """
    Clauses of three variables drawn uniformly with replacement, each
    negated with probability one half. Equal seeds give equal instances.
    """
    if num_vars < 1 or num_clauses < 1:
        raise NormInputError(
            f"need at least one variable and one clause, got {num_vars} and {num_clauses}"
        )
    rng = np.random.default_rng(seed)
    variables = rng.integers(1, num_vars + 1, size=(num_clauses, 3))
    signs = rng.integers(0, 2, size=(num_clauses, 3))
    literals = np.where(signs == 1, variables, -variables)
    return ThreeSatInstance(num_vars, tuple(tuple(int(l) for l in row) for row in literals))


def complete_unsat(num_vars: int = 3) -> ThreeSatInstance:
    """
    An unsatisfiable instance: every sign pattern over the first
    ``min(num_vars, 3)`` variables, padded by repeating the last literal.
    """
    if num_vars < 1:
        raise NormInputError(f"need at least one variable, got {num_vars}")
    width = min(num_vars, 3)
    clauses = []
    for signs in boolean_grid(width):
        lits = [i + 1 if positive else -(i + 1) for i, positive in enumerate(signs)]
        clauses.append(tuple(lits + [lits[-1]] * (3 - width)))
    return ThreeSatInstance(num_vars, tuple(clauses))
