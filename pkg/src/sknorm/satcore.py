"""
Constraint systems in conjunctive normal form and a satisfiability engine.

Literals are non-zero integers in DIMACS convention: ``v`` is variable ``v``
and ``-v`` its negation. Variables are numbered from 1 and may carry a
:class:`VarTag` so that models can be decoded without positional guessing.

The built-in engine is complete: unit propagation over two watched literals
with backtracking, strengthened by first-UIP clause learning and
non-chronological backjumping. Branching always picks the lowest-index
unassigned variable and tries ``False`` first, and there are no restarts, so
a given system always yields the same model.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from sknorm.config import setting
from sknorm.errors import NormInputError, ResourceLimitExceeded

logger = logging.getLogger(__name__)

CORE_ROLES = ("C", "P", "O", "D")


@dataclass(frozen=True)
class VarTag:
    """
    What a variable stands for.

    ``role`` is one of ``C``, ``P``, ``O``, ``D`` (membership of universe
    state ``state`` in the corresponding set), ``W`` (violation witness) or
    ``AUX`` (any other auxiliary).
    """

    role: str
    state: int | None = None

    def __str__(self):
        return self.role if self.state is None else f"{self.role}[{self.state}]"


class CnfSystem:
    """
    A growing set of clauses over numbered, optionally tagged variables.

    Encoders add to a system; solvers only read it.
    """

    def __init__(self):
        self.num_vars = 0
        self.clauses: list[tuple[int, ...]] = []
        self.tags: dict[int, VarTag] = {}
        self._core: dict[tuple[str, int], int] = {}

    def new_var(self, role: str = "AUX", state: int | None = None) -> int:
        """Allocate the next variable; core roles are indexed for :meth:`core_var`."""
        self.num_vars += 1
        tag = VarTag(role, state)
        self.tags[self.num_vars] = tag
        if role in CORE_ROLES and state is not None:
            if (role, state) in self._core:
                raise ValueError(f"variable for {tag} already allocated")
            self._core[(role, state)] = self.num_vars
        return self.num_vars

    def core_var(self, role: str, state: int) -> int:
        return self._core[(role, state)]

    def add_clause(self, literals: Iterable[int]) -> None:
        """
        Add one clause.

        Raises
        ------
        ValueError
            For an empty clause (use :meth:`assert_unsat`) or a literal
            naming an unallocated variable.
        """
        clause = tuple(int(lit) for lit in literals)
        if not clause:
            raise ValueError("empty clause; call assert_unsat() to state unsatisfiability")
        for lit in clause:
            if lit == 0 or abs(lit) > self.num_vars:
                raise ValueError(f"literal {lit} out of range 1..{self.num_vars}")
        self.clauses.append(clause)

    def extend(self, clauses: Iterable[Iterable[int]]) -> None:
        for clause in clauses:
            self.add_clause(clause)

    def assert_unsat(self) -> None:
        """Add the empty clause."""
        self.clauses.append(())

    def copy(self) -> CnfSystem:
        other = CnfSystem()
        other.num_vars = self.num_vars
        other.clauses = list(self.clauses)
        other.tags = dict(self.tags)
        other._core = dict(self._core)
        return other

    @property
    def num_clauses(self) -> int:
        return len(self.clauses)

    def first_violated(self, model: Sequence[bool]) -> tuple[int, ...] | None:
        """The first clause ``model`` falsifies (``model[v - 1]`` is variable ``v``)."""
        for clause in self.clauses:
            if not any(model[abs(lit) - 1] == (lit > 0) for lit in clause):
                return clause
        return None

    def __repr__(self):
        return f"<CnfSystem: {self.num_vars} variables, {self.num_clauses} clauses>"


@dataclass
class SolverStats:
    decisions: int = 0
    conflicts: int = 0
    propagations: int = 0
    learned: int = 0

    def to_dict(self) -> dict[str, int]:
        return {
            "decisions": self.decisions,
            "conflicts": self.conflicts,
            "propagations": self.propagations,
            "learned": self.learned,
        }


@dataclass(frozen=True)
class SatOutcome:
    """
    ``satisfiable`` with a total ``model`` (``model[v - 1]`` is variable
    ``v``), or unsatisfiable with ``model is None``.
    """

    satisfiable: bool
    model: tuple[bool, ...] | None = None
    stats: SolverStats = field(default_factory=SolverStats)

    def value(self, var: int) -> bool:
        if self.model is None:
            raise ValueError("an unsatisfiable outcome has no model")
        return self.model[var - 1]


# Built-in engine
# ===============


def _w(lit: int) -> int:
    return 2 * lit if lit > 0 else -2 * lit + 1


class _Cdcl:
    def __init__(self, num_vars: int, clauses: Sequence[Sequence[int]], max_steps: int):
        n = num_vars
        self.n = n
        self.max_steps = max_steps
        self.stats = SolverStats()
        self.value = [0] * (n + 1)  # 1 true, -1 false, 0 unassigned
        self.level = [0] * (n + 1)
        self.reason = [-1] * (n + 1)
        self.seen = [False] * (n + 1)
        self.trail: list[int] = []
        self.trail_lim: list[int] = []
        self.qhead = 0
        self.hint = 1
        self.db: list[list[int]] = []
        self.watches: list[list[int]] = [[] for _ in range(2 * n + 2)]
        self.units: list[int] = []
        self.empty = False

        for clause in clauses:
            lits = []
            tautology = False
            for lit in clause:
                if -lit in lits:
                    tautology = True
                    break
                if lit not in lits:
                    lits.append(lit)
            if tautology:
                continue
            if not lits:
                self.empty = True
            elif len(lits) == 1:
                self.units.append(lits[0])
            else:
                self._attach(lits)

    def _lit_value(self, lit: int) -> int:
        v = self.value[lit if lit > 0 else -lit]
        return v if lit > 0 else -v

    def _attach(self, lits: list[int]) -> int:
        ci = len(self.db)
        self.db.append(lits)
        self.watches[_w(lits[0])].append(ci)
        self.watches[_w(lits[1])].append(ci)
        return ci

    def _assign(self, lit: int, reason: int) -> None:
        v = lit if lit > 0 else -lit
        self.value[v] = 1 if lit > 0 else -1
        self.level[v] = len(self.trail_lim)
        self.reason[v] = reason
        self.trail.append(lit)

    def _tick(self) -> None:
        if self.stats.decisions + self.stats.conflicts > self.max_steps:
            raise ResourceLimitExceeded(
                f"solver step budget of {self.max_steps} exhausted "
                f"({self.stats.decisions} decisions, {self.stats.conflicts} conflicts)"
            )

    def _propagate(self) -> int:
        """Returns the index of a falsified clause, or -1."""
        value = self.value
        trail = self.trail
        db = self.db
        watches = self.watches
        while self.qhead < len(trail):
            lit = trail[self.qhead]
            self.qhead += 1
            self.stats.propagations += 1
            false_lit = -lit
            wl = watches[_w(false_lit)]
            i = j = 0
            end = len(wl)
            while i < end:
                ci = wl[i]
                i += 1
                c = db[ci]
                if c[0] == false_lit:
                    c[0], c[1] = c[1], c[0]
                first = c[0]
                fv = value[first] if first > 0 else -value[-first]
                if fv == 1:
                    wl[j] = ci
                    j += 1
                    continue
                moved = False
                for k in range(2, len(c)):
                    other = c[k]
                    ov = value[other] if other > 0 else -value[-other]
                    if ov != -1:
                        c[1], c[k] = other, c[1]
                        watches[_w(other)].append(ci)
                        moved = True
                        break
                if moved:
                    continue
                wl[j] = ci
                j += 1
                if fv == -1:
                    while i < end:
                        wl[j] = wl[i]
                        j += 1
                        i += 1
                    del wl[j:]
                    self.qhead = len(trail)
                    return ci
                self._assign(first, ci)
            del wl[j:]
        return -1

    def _analyze(self, confl: int) -> tuple[list[int], int]:
        seen = self.seen
        level = self.level
        trail = self.trail
        current = len(self.trail_lim)
        learnt = [0]
        marked = []
        counter = 0
        p = 0
        idx = len(trail) - 1
        clause = self.db[confl]
        while True:
            for q in clause:
                if q == p:
                    continue
                v = q if q > 0 else -q
                if not seen[v] and level[v] > 0:
                    seen[v] = True
                    marked.append(v)
                    if level[v] >= current:
                        counter += 1
                    else:
                        learnt.append(q)
            while not seen[abs(trail[idx])]:
                idx -= 1
            p = trail[idx]
            idx -= 1
            counter -= 1
            if counter == 0:
                break
            clause = self.db[self.reason[abs(p)]]
        learnt[0] = -p
        for v in marked:
            seen[v] = False

        if len(learnt) == 1:
            return learnt, 0
        best = 1
        for k in range(2, len(learnt)):
            if level[abs(learnt[k])] > level[abs(learnt[best])]:
                best = k
        learnt[1], learnt[best] = learnt[best], learnt[1]
        return learnt, level[abs(learnt[1])]

    def _backjump(self, target: int) -> None:
        if len(self.trail_lim) <= target:
            return
        lim = self.trail_lim[target]
        for lit in self.trail[lim:]:
            v = lit if lit > 0 else -lit
            self.value[v] = 0
            self.reason[v] = -1
            if v < self.hint:
                self.hint = v
        del self.trail[lim:]
        del self.trail_lim[target:]
        self.qhead = lim

    def _pick(self) -> int:
        while self.hint <= self.n and self.value[self.hint] != 0:
            self.hint += 1
        return self.hint if self.hint <= self.n else 0

    def solve(self) -> bool:
        if self.empty:
            return False
        for u in self.units:
            uv = self._lit_value(u)
            if uv == -1:
                return False
            if uv == 0:
                self._assign(u, -1)

        while True:
            confl = self._propagate()
            if confl != -1:
                self.stats.conflicts += 1
                if not self.trail_lim:
                    return False
                self._tick()
                learnt, target = self._analyze(confl)
                self._backjump(target)
                if len(learnt) == 1:
                    self._assign(learnt[0], -1)
                else:
                    self._assign(learnt[0], self._attach(learnt))
                self.stats.learned += 1
                continue

            var = self._pick()
            if var == 0:
                return True
            self.stats.decisions += 1
            self._tick()
            self.trail_lim.append(len(self.trail))
            self._assign(-var, -1)

    def model(self) -> tuple[bool, ...]:
        return tuple(self.value[v] == 1 for v in range(1, self.n + 1))


def _solve_pysat(system: CnfSystem, name: str) -> SatOutcome | None:
    try:
        from pysat.solvers import Solver
    except ImportError:
        logger.warning("python-sat is not installed; falling back to the builtin engine")
        return None

    if any(not clause for clause in system.clauses):
        return SatOutcome(False)

    with Solver(name=name, bootstrap_with=[list(c) for c in system.clauses]) as s:
        satisfiable = s.solve()
        raw = s.accum_stats() or {}
        stats = SolverStats(
            decisions=int(raw.get("decisions", 0)),
            conflicts=int(raw.get("conflicts", 0)),
            propagations=int(raw.get("propagations", 0)),
        )
        if not satisfiable:
            return SatOutcome(False, None, stats)
        model = [False] * system.num_vars
        for lit in s.get_model():
            if 0 < abs(lit) <= system.num_vars:
                model[abs(lit) - 1] = lit > 0
        return SatOutcome(True, tuple(model), stats)


def solve(
    system: CnfSystem,
    *,
    backend: str | None = None,
    max_steps: int | None = None,
    max_clauses: int | None = None,
    pysat_name: str | None = None,
) -> SatOutcome:
    """
    Decide satisfiability of ``system``.

    Parameters
    ----------
    system : CnfSystem
    backend : {"builtin", "pysat"}, optional
        Defaults to the configured ``solver.backend``.
    max_steps : int, optional
        Budget of decisions plus conflicts for the builtin engine.
    max_clauses : int, optional
        Largest system accepted.
    pysat_name : str, optional
        Solver name passed to :class:`pysat.solvers.Solver`.

    Returns
    -------
    SatOutcome
        Any returned model has been checked against every clause.

    Raises
    ------
    ResourceLimitExceeded
        When a budget runs out. This never stands for unsatisfiability.
    """
    backend = backend or setting("solver", "backend")
    max_steps = setting("solver", "max_steps") if max_steps is None else max_steps
    max_clauses = setting("solver", "max_clauses") if max_clauses is None else max_clauses

    if system.num_clauses > max_clauses:
        raise ResourceLimitExceeded(
            f"system has {system.num_clauses} clauses, over the limit of {max_clauses}"
        )
    if backend not in ("builtin", "pysat"):
        raise NormInputError(f"Unsupported backend: {backend}. Must be 'builtin' or 'pysat'")

    outcome = None
    if backend == "pysat":
        outcome = _solve_pysat(system, pysat_name or setting("solver", "pysat_name"))
    if outcome is None:
        engine = _Cdcl(system.num_vars, system.clauses, max_steps)
        if engine.solve():
            outcome = SatOutcome(True, engine.model(), engine.stats)
        else:
            outcome = SatOutcome(False, None, engine.stats)

    if outcome.satisfiable:
        broken = system.first_violated(outcome.model)
        if broken is not None:
            raise RuntimeError(f"solver returned a model falsifying clause {broken}")

    logger.debug(
        "solved %r: %s, %s",
        system,
        "SAT" if outcome.satisfiable else "UNSAT",
        outcome.stats.to_dict(),
    )
    return outcome


# Cardinality
# ===========


def at_most_k(system: CnfSystem, literals: Sequence[int], k: int) -> list[tuple[int, ...]]:
    """
    Clauses allowing at most ``k`` of ``literals`` to be true.

    Sequential-counter construction: auxiliary ``r[i][j]`` (allocated in
    ``system``, tagged ``AUX``) holds when at least ``j + 1`` of the first
    ``i + 1`` literals are true. Uses O(len(literals) * k) clauses. The
    clauses are returned, not added.

    Raises
    ------
    ValueError
        If ``k`` is negative.
    """
    if k < 0:
        raise ValueError(f"k must be non-negative, got {k}")
    n = len(literals)
    if k >= n:
        return []
    if k == 0:
        return [(-lit,) for lit in literals]

    r = [[system.new_var("AUX") for _ in range(k)] for _ in range(n - 1)]
    clauses = [(-literals[0], r[0][0])]
    clauses += [(-r[0][j],) for j in range(1, k)]
    for i in range(1, n - 1):
        x = literals[i]
        clauses.append((-x, r[i][0]))
        clauses.append((-r[i - 1][0], r[i][0]))
        for j in range(1, k):
            clauses.append((-x, -r[i - 1][j - 1], r[i][j]))
            clauses.append((-r[i - 1][j], r[i][j]))
        clauses.append((-x, -r[i - 1][k - 1]))
    clauses.append((-literals[n - 1], -r[n - 2][k - 1]))
    return clauses


# DIMACS
# ======


def to_dimacs(system: CnfSystem, comments: Sequence[str] = (), annotate: bool = False) -> str:
    """
    DIMACS CNF text: optional ``c`` lines, the ``p cnf V C`` header, then one
    zero-terminated clause per line. ``annotate`` adds a comment per tagged
    variable.
    """
    lines = [f"c {line}" for line in comments]
    if annotate:
        lines += [f"c var {v} {tag}" for v, tag in sorted(system.tags.items())]
    lines.append(f"p cnf {system.num_vars} {system.num_clauses}")
    lines += [" ".join(str(lit) for lit in clause + (0,)) for clause in system.clauses]
    return "\n".join(lines) + "\n"


def _dimacs_int(tok: str) -> int:
    try:
        return int(tok)
    except ValueError:
        raise NormInputError(f"malformed DIMACS token: {tok!r}") from None


def from_dimacs(text: str) -> CnfSystem:
    """
    Parse DIMACS CNF text. Clauses may span lines; every variable is tagged
    ``AUX``.

    Raises
    ------
    NormInputError
        On a missing or malformed header, a literal out of range, or a
        clause count that differs from the header.
    """
    system = CnfSystem()
    header = None
    pending: list[int] = []
    read = 0
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("c") or line.startswith("%"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise NormInputError(f"malformed DIMACS header: {line!r}")
            header = (_dimacs_int(parts[2]), _dimacs_int(parts[3]))
            for _ in range(header[0]):
                system.new_var("AUX")
            continue
        if header is None:
            raise NormInputError("DIMACS clause before the 'p cnf' header")
        for tok in line.split():
            lit = _dimacs_int(tok)
            if lit == 0:
                if pending:
                    system.add_clause(pending)
                else:
                    system.assert_unsat()
                read += 1
                pending = []
            else:
                if abs(lit) > header[0]:
                    raise NormInputError(f"literal {lit} exceeds declared {header[0]} variables")
                pending.append(lit)
    if header is None:
        raise NormInputError("missing DIMACS header")
    if pending:
        system.add_clause(pending)
        read += 1
    if read != header[1]:
        raise NormInputError(f"DIMACS header declares {header[1]} clauses, found {read}")
    return system
