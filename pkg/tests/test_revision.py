import unittest

import numpy as np
import pytest

from conftest import TEST_SEED, VOCAB_AB, anchored, inseparable, random_trace_set
from sknorm.errors import NormInputError, VocabularyMismatchError
from sknorm.monitor import ConditionalNorm, NormKind
from sknorm.propcore import Vocabulary
from sknorm.revision import (
    RevisionProblem,
    Revised,
    component_diff,
    distance,
    encode_revision,
    max_distance,
    project_norm,
    revise,
    revision_report,
)
from sknorm.satcore import solve
from sknorm.synthesis import NoSolution, StateSetTriple, brute_force_synthesize, synthesize

KINDS = [NormKind.PROHIBITION, NormKind.OBLIGATION]


def triple(traces, kind, condition=(), target=(), deadline=()):
    return StateSetTriple(
        kind, traces.vocab, traces.universe, frozenset(condition), frozenset(target), frozenset(deadline)
    )


def random_reference(rng, traces, kind):
    masks = rng.random((3, len(traces.universe))) < 0.5
    return StateSetTriple.from_masks(kind, traces.vocab, traces.universe, masks)


class test_distance(unittest.TestCase):
    def test_examples(self):
        t = triple(inseparable, "P", {0}, {1}, {2})
        self.assertEqual(distance(t, t), 0)
        self.assertEqual(distance(t, triple(inseparable, "P", {0}, {1}, {1, 2})), 1)
        empty = triple(inseparable, "P")
        full = triple(inseparable, "P", {0, 1, 2}, {0, 1, 2}, {0, 1, 2})
        self.assertEqual(distance(empty, full), 9)
        self.assertEqual(max_distance(inseparable.universe), 9)

    def test_symmetric(self):
        a = triple(inseparable, "O", {0, 1})
        b = triple(inseparable, "O", {2}, {0})
        self.assertEqual(distance(a, b), distance(b, a))
        self.assertEqual(distance(a, b), 4)

    def test_incomparable(self):
        with self.assertRaises(NormInputError):
            distance(triple(inseparable, "P"), triple(inseparable, "O"))
        with self.assertRaises(VocabularyMismatchError):
            distance(triple(inseparable, "P"), triple(anchored, "P"))


class test_projection(unittest.TestCase):
    def test_project_general_formulas(self):
        norm = ConditionalNorm.from_strings("P", "a", "b", "a & b", VOCAB_AB)
        t = project_norm(norm, inseparable)
        self.assertEqual(t.components(), ({0, 2}, {1, 2}, {2}))

    def test_foreign_vocabulary(self):
        norm = ConditionalNorm.from_strings("P", "x", "y", "false", Vocabulary(("x", "y")))
        with self.assertRaises(VocabularyMismatchError):
            project_norm(norm, anchored)

    def test_component_diff(self):
        old = triple(anchored, "P", {0})
        new = triple(anchored, "P", {0}, {1})
        diff = component_diff(old, new)
        self.assertEqual(diff["target"]["added"], [{"a": False, "b": True}])
        self.assertEqual(diff["target"]["removed"], [])
        self.assertEqual(diff["condition"], {"added": [], "removed": []})


class test_problem(unittest.TestCase):
    def setUp(self):
        self.reference = ConditionalNorm.from_strings("P", "a & !b", "false", "false", VOCAB_AB)

    def test_budget_validation(self):
        for bad in (-1, True, "least", 1.5):
            with self.assertRaises(NormInputError):
                RevisionProblem(anchored, self.reference, bad)
        self.assertTrue(RevisionProblem(anchored, self.reference).minimize)
        self.assertFalse(RevisionProblem(anchored, self.reference, 0).minimize)

    def test_vocabulary_mismatch(self):
        other = ConditionalNorm.from_strings("P", "x", "y", "false", Vocabulary(("x", "y")))
        with self.assertRaises(VocabularyMismatchError):
            RevisionProblem(anchored, other)


class test_revise(unittest.TestCase):
    def setUp(self):
        self.reference = ConditionalNorm.from_strings("P", "a & !b", "false", "false", VOCAB_AB)

    def test_anchored_minimize(self):
        result = revise(RevisionProblem(anchored, self.reference))
        self.assertIsInstance(result, Revised)
        self.assertEqual(result.distance, 1)
        self.assertEqual(result.triple.components(), ({0}, {1}, frozenset()))
        self.assertEqual(result.probes[0], (6, True))
        self.assertEqual(result.reference, triple(anchored, "P", {0}))

    def test_anchored_budgets(self):
        self.assertIsInstance(revise(RevisionProblem(anchored, self.reference, 0)), NoSolution)
        result = revise(RevisionProblem(anchored, self.reference, 1))
        self.assertEqual(result.distance, 1)
        self.assertEqual(result.probes, ((1, True),))

    def test_oversized_budget_is_capped(self):
        result = revise(RevisionProblem(anchored, self.reference, 100))
        self.assertEqual(result.probes, ((6, True),))

    def test_inseparable(self):
        reference = ConditionalNorm.from_strings("O", "a", "b", "true", VOCAB_AB)
        for budget in ("minimize", 9):
            result = revise(RevisionProblem(inseparable, reference, budget))
            self.assertIsInstance(result, NoSolution)
            self.assertFalse(result.feasible)

    def test_reference_already_classifies(self):
        reference = ConditionalNorm.from_strings("P", "a & !b", "!a & b", "false", VOCAB_AB)
        result = revise(RevisionProblem(anchored, reference))
        self.assertEqual(result.distance, 0)
        self.assertEqual(result.norm, reference)

    def test_report(self):
        problem = RevisionProblem(anchored, self.reference)
        report = revision_report(problem, revise(problem))
        self.assertEqual(report["schema"], 1)
        self.assertEqual(report["command"], "revise")
        self.assertEqual(report["budget"], "minimize")
        self.assertEqual(report["max_distance"], 6)
        self.assertEqual(report["distance"], 1)
        self.assertEqual(report["verification"], "ok")
        self.assertEqual(report["diff"]["target"]["added"], [{"a": False, "b": True}])
        self.assertEqual(report["probes"][0], {"budget": 6, "feasible": True})

        problem = RevisionProblem(anchored, self.reference, 0)
        report = revision_report(problem, revise(problem))
        self.assertEqual(report["result"], "no_solution")
        self.assertNotIn("distance", report)


def test_mismatch_literals_follow_reference():
    reference = triple(anchored, "P", {0}, {1}, ())
    system = encode_revision(anchored, reference, 0)
    outcome = solve(system)
    assert outcome.satisfiable
    assert outcome.value(system.core_var("C", 0))
    assert not outcome.value(system.core_var("C", 1))
    assert outcome.value(system.core_var("P", 1))
    assert not outcome.value(system.core_var("D", 0))


@pytest.mark.parametrize("kind", KINDS)
def test_minimize_matches_brute_force(kind):
    rng = np.random.default_rng(TEST_SEED)
    for _ in range(50):
        traces = random_trace_set(rng, max_states=3)
        reference = random_reference(rng, traces, kind)
        solutions = brute_force_synthesize(traces, kind)
        result = revise(RevisionProblem(traces, reference.to_norm()))
        if not solutions:
            assert isinstance(result, NoSolution)
            continue
        assert result.distance == min(distance(reference, t) for t in solutions)
        assert result.triple in solutions


@pytest.mark.parametrize("kind", KINDS)
def test_budget_feasibility_matches_brute_force(kind):
    rng = np.random.default_rng(TEST_SEED)
    for _ in range(30):
        traces = random_trace_set(rng, max_states=3)
        reference = random_reference(rng, traces, kind)
        best = min(
            (distance(reference, t) for t in brute_force_synthesize(traces, kind)), default=None
        )
        budget = int(rng.integers(0, max_distance(traces.universe) + 1))
        result = revise(RevisionProblem(traces, reference.to_norm(), budget))
        assert result.feasible == (best is not None and best <= budget)
        if result.feasible:
            assert best <= result.distance <= budget


@pytest.mark.parametrize("kind", KINDS)
def test_full_budget_agrees_with_synthesis(kind):
    rng = np.random.default_rng(TEST_SEED)
    for _ in range(30):
        traces = random_trace_set(rng)
        reference = random_reference(rng, traces, kind)
        top = max_distance(traces.universe)
        result = revise(RevisionProblem(traces, reference.to_norm(), top))
        assert result.feasible == synthesize(traces, kind).feasible
