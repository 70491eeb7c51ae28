"""
Minimal revision of a reference norm.

Norms are compared through their projections onto S(Γ): the distance
between two triples is the number of universe states whose membership
differs, summed over the three components. Revision looks for a triple that
classifies Γ within a given distance of the reference, or the closest one.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from sknorm.errors import NormInputError, VocabularyMismatchError
from sknorm.monitor import ConditionalNorm
from sknorm.satcore import CnfSystem, at_most_k, solve
from sknorm.synthesis import (
    REPORT_SCHEMA,
    NoSolution,
    StateSetTriple,
    decode_triple,
    encode,
    verify_triple,
)
from sknorm.tracemodel import LabeledTraceSet, State

logger = logging.getLogger(__name__)

COMPONENTS = ("condition", "target", "deadline")


def _check_comparable(a: StateSetTriple, b: StateSetTriple) -> None:
    if a.kind is not b.kind:
        raise NormInputError(f"cannot compare a {a.kind.value} with a {b.kind.value}")
    if [s.bits for s in a.universe] != [s.bits for s in b.universe]:
        raise VocabularyMismatchError("triples are over different universes")


def distance(a: StateSetTriple, b: StateSetTriple) -> int:
    """
    Sum of the symmetric differences of the three components.

    Raises
    ------
    NormInputError
        If the kinds or universes differ.
    """
    _check_comparable(a, b)
    return sum(len(x ^ y) for x, y in zip(a.components(), b.components()))


def max_distance(universe: tuple[State, ...]) -> int:
    return 3 * len(universe)


def project_norm(norm: ConditionalNorm, traces: LabeledTraceSet) -> StateSetTriple:
    """The triple of universe states where each formula of ``norm`` holds."""
    if norm.vocab != traces.vocab:
        raise VocabularyMismatchError(
            f"norm over {list(norm.vocab.props)} revised against traces over "
            f"{list(traces.vocab.props)}"
        )
    return StateSetTriple.from_norm(norm, traces.universe)


def component_diff(reference: StateSetTriple, revised: StateSetTriple) -> dict:
    """States added to and removed from each component, as state dictionaries."""
    _check_comparable(reference, revised)
    diff = {}
    for name, old, new in zip(COMPONENTS, reference.components(), revised.components()):
        diff[name] = {
            "added": [s.to_dict() for s in revised.states(new - old)],
            "removed": [s.to_dict() for s in revised.states(old - new)],
        }
    return diff


@dataclass(frozen=True)
class RevisionProblem:
    """
    Revise ``reference`` to classify ``traces``.

    ``budget`` is the largest allowed distance, or ``"minimize"`` for the
    smallest achievable one.
    """

    traces: LabeledTraceSet
    reference: ConditionalNorm
    budget: int | str = "minimize"

    def __post_init__(self):
        if self.budget != "minimize":
            if isinstance(self.budget, bool) or not isinstance(self.budget, int) or self.budget < 0:
                raise NormInputError(
                    f"budget must be a non-negative integer or 'minimize', got {self.budget!r}"
                )
        if self.reference.vocab != self.traces.vocab:
            raise VocabularyMismatchError("reference norm and traces use different propositions")

    @property
    def minimize(self) -> bool:
        return self.budget == "minimize"


@dataclass(frozen=True)
class Revised:
    triple: StateSetTriple
    distance: int
    reference: StateSetTriple
    probes: tuple[tuple[int, bool], ...] = ()
    stats: dict = field(default_factory=dict)

    feasible = True

    @property
    def norm(self) -> ConditionalNorm:
        return self.triple.to_norm()


def encode_revision(traces: LabeledTraceSet, reference: StateSetTriple, m: int) -> CnfSystem:
    """
    The synthesis encoding plus "at most ``m`` memberships differ from
    ``reference``". The mismatch of a membership variable ``x`` is ``x``
    itself where the reference bit is 0 and ``-x`` where it is 1.
    """
    system = encode(traces, reference.kind)
    mismatch = []
    for role, members in zip(("C", reference.kind.symbol, "D"), reference.components()):
        for k in range(len(traces.universe)):
            x = system.core_var(role, k)
            mismatch.append(-x if k in members else x)
    system.extend(at_most_k(system, mismatch, m))
    return system


def revise(
    problem: RevisionProblem,
    *,
    backend: str | None = None,
    max_steps: int | None = None,
    max_clauses: int | None = None,
) -> Revised | NoSolution:
    """
    Solve a revision problem.

    With a numeric budget ``m`` a single probe decides whether some
    classifying triple lies within distance ``m`` of the projected
    reference. With ``"minimize"`` the first probe uses the largest
    possible distance ``3 * |S|``, which is feasible iff plain synthesis is,
    and a binary search then narrows down to the smallest feasible
    distance.

    Raises
    ------
    RuntimeError
        If feasibility is found not to be monotone in the budget.
    ResourceLimitExceeded
        When the solver runs out of budget.
    """
    traces = problem.traces
    reference = project_norm(problem.reference, traces)
    top = max_distance(traces.universe)
    probes: list[tuple[int, bool]] = []
    stats = {"engine": "sat", "solves": 0, "decisions": 0, "conflicts": 0}

    def probe(m: int) -> StateSetTriple | None:
        system = encode_revision(traces, reference, m)
        outcome = solve(system, backend=backend, max_steps=max_steps, max_clauses=max_clauses)
        stats["solves"] += 1
        stats["decisions"] += outcome.stats.decisions
        stats["conflicts"] += outcome.stats.conflicts
        probes.append((m, outcome.satisfiable))
        logger.info(
            "revision probe m=%d (%d clauses): %s",
            m,
            system.num_clauses,
            "feasible" if outcome.satisfiable else "infeasible",
        )
        if not outcome.satisfiable:
            return None
        return decode_triple(system, outcome, traces, reference.kind)

    if problem.minimize:
        best = probe(top)
        if best is None:
            return NoSolution(reference.kind, stats)
        hi = distance(reference, best)
        lo = 0
        highest_infeasible = -1
        while lo < hi:
            mid = (lo + hi) // 2
            found = probe(mid)
            if found is None:
                highest_infeasible = max(highest_infeasible, mid)
                lo = mid + 1
            else:
                best, hi = found, distance(reference, found)
                if hi <= highest_infeasible:
                    raise RuntimeError(
                        f"revision feasibility is not monotone: distance {hi} found after "
                        f"budget {highest_infeasible} was infeasible"
                    )
    else:
        best = probe(min(problem.budget, top))
        if best is None:
            return NoSolution(reference.kind, stats)

    problem_trace = verify_triple(best, traces)
    if problem_trace is not None:
        raise RuntimeError(f"revised triple fails verification: {problem_trace}")
    return Revised(best, distance(reference, best), reference, tuple(probes), stats)


def revision_report(problem: RevisionProblem, result: Revised | NoSolution) -> dict:
    """JSON-ready report of a revision run."""
    reference = project_norm(problem.reference, problem.traces)
    n = len(problem.traces.universe)
    report = {
        "schema": REPORT_SCHEMA,
        "command": "revise",
        "kind": reference.kind.value,
        "budget": problem.budget,
        "max_distance": max_distance(problem.traces.universe),
        "universe_size": n,
        "normalization": f"reference projected onto the {n} states of the traces",
        "reference": reference.to_dict(),
        "result": "solution" if result.feasible else "no_solution",
    }
    if isinstance(result, Revised):
        report["distance"] = result.distance
        report["triple"] = result.triple.to_dict()
        report["diff"] = component_diff(reference, result.triple)
        report["norm"] = result.norm.to_dict()
        problem_trace = verify_triple(result.triple, problem.traces)
        report["verification"] = "ok" if problem_trace is None else problem_trace.to_dict()
        report["probes"] = [{"budget": m, "feasible": ok} for m, ok in result.probes]
    report["stats"] = dict(result.stats)
    return report
