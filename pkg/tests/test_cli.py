import json
import os
import tempfile
import time
import unittest

from conftest import VOCAB_AB, anchored, inseparable
from sknorm.cli import EXIT_INPUT, EXIT_NEGATIVE, EXIT_OK, EXIT_RESOURCE, dispatch, main
from sknorm.monitor import ConditionalNorm, dumps_norm, load_norm
from sknorm.tracemodel import loads_traces, save_traces


class CliCase(unittest.TestCase):
    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.tmp = self._tmp.name
        self.anchored = self.path("anchored.json")
        self.inseparable = self.path("inseparable.json")
        save_traces(anchored, self.anchored)
        save_traces(inseparable, self.inseparable)

    def tearDown(self):
        self._tmp.cleanup()

    def path(self, name):
        return os.path.join(self.tmp, name)

    def write(self, name, text):
        with open(self.path(name), "w", encoding="utf-8") as f:
            f.write(text)
        return self.path(name)

    def norm_file(self, condition, target, deadline, kind="P"):
        norm = ConditionalNorm.from_strings(kind, condition, target, deadline, VOCAB_AB)
        return self.write("norm.json", dumps_norm(norm))


class test_check(CliCase):
    def test_violation_exits_one(self):
        norm = self.norm_file("a & !b", "!a & b", "false")
        outcome = dispatch(["check", "--norm", norm, "--traces", self.anchored])
        self.assertEqual(outcome.exit_code, EXIT_NEGATIVE)
        lines = outcome.report.splitlines()
        self.assertTrue(lines[0].startswith("norm: "))
        self.assertEqual(lines[1], "negative[0]\tviolated (i=1, j=2)")
        self.assertEqual(lines[2], "positive[0]\tobeyed")
        self.assertEqual(lines[-1], "violated: 1 of 3 traces")

    def test_obeyed_exits_zero(self):
        norm = self.norm_file("false", "true", "true")
        outcome = dispatch(["check", "--norm", norm, "--traces", self.anchored])
        self.assertEqual(outcome.exit_code, EXIT_OK)

    def test_json(self):
        norm = self.norm_file("a & !b", "!a & b", "false")
        outcome = dispatch(
            ["check", "--norm", norm, "--traces", self.anchored, "--format", "json"]
        )
        doc = json.loads(outcome.report)
        self.assertEqual(doc["schema"], 1)
        self.assertEqual(doc["results"][0]["witness"], {"i": 1, "j": 2})
        self.assertEqual((doc["violated"], doc["total"]), (1, 3))


class test_synth(CliCase):
    def test_inseparable(self):
        outcome = dispatch(["synth", "--kind", "prohibition", "--traces", self.inseparable])
        self.assertEqual(outcome.exit_code, EXIT_NEGATIVE)
        self.assertTrue(outcome.report.startswith("NO SOLUTION (prohibition)"))

    def test_solution_and_round_trip(self):
        norm_out = self.path("out.json")
        outcome = dispatch(["synth", "--traces", self.anchored, "--norm-out", norm_out])
        self.assertEqual(outcome.exit_code, EXIT_OK)
        self.assertTrue(outcome.report.startswith("SOLUTION (prohibition, sat engine)"))
        self.assertIn("verification: ok", outcome.report)

        norm = load_norm(norm_out, VOCAB_AB)
        self.assertEqual(norm.condition.pretty(), "a & !b")
        outcome = dispatch(
            ["check", "--norm", norm_out, "--traces", self.anchored, "--format", "json"]
        )
        doc = json.loads(outcome.report)
        for result in doc["results"]:
            self.assertEqual(result["violated"], result["label"] == "negative")

    def test_json_report(self):
        outcome = dispatch(
            ["synth", "--traces", self.anchored, "--engine", "brute", "--format", "json"]
        )
        doc = json.loads(outcome.report)
        self.assertEqual(doc["schema"], 1)
        self.assertEqual(doc["command"], "synth")
        self.assertEqual(doc["engine"], "brute")
        self.assertEqual(doc["result"], "solution")
        self.assertEqual(doc["stats"]["candidates"], 64)

    def test_dot(self):
        dot = self.path("solution.dot")
        dispatch(["synth", "--traces", self.anchored, "--dot", dot])
        with open(dot, "r", encoding="utf-8") as f:
            self.assertIn("digraph", f.read())

    def test_obligation(self):
        outcome = dispatch(["synth", "--kind", "obligation", "--traces", self.anchored])
        self.assertEqual(outcome.exit_code, EXIT_OK)
        self.assertIn("X_O", outcome.report)


class test_revise(CliCase):
    def test_minimize(self):
        norm = self.norm_file("a & !b", "false", "false")
        outcome = dispatch(["revise", "--norm", norm, "--traces", self.anchored, "--minimize"])
        self.assertEqual(outcome.exit_code, EXIT_OK)
        self.assertTrue(outcome.report.startswith("REVISED (prohibition): distance 1"))
        self.assertIn("target: +[{a:0,b:1}] -[-]", outcome.report)

    def test_budget_too_small(self):
        norm = self.norm_file("a & !b", "false", "false")
        outcome = dispatch(["revise", "--norm", norm, "--traces", self.anchored, "--max-dist", "0"])
        self.assertEqual(outcome.exit_code, EXIT_NEGATIVE)
        self.assertTrue(outcome.report.startswith("NO SOLUTION"))

    def test_json(self):
        norm = self.norm_file("a & !b", "false", "false")
        outcome = dispatch(
            ["revise", "--norm", norm, "--traces", self.anchored, "--max-dist", "2", "--format", "json"]
        )
        doc = json.loads(outcome.report)
        self.assertEqual(doc["budget"], 2)
        self.assertEqual(doc["result"], "solution")
        self.assertLessEqual(doc["distance"], 2)

    def test_budget_options_are_exclusive(self):
        norm = self.norm_file("a & !b", "false", "false")
        outcome = dispatch(
            ["revise", "--norm", norm, "--traces", self.anchored, "--minimize", "--max-dist", "1"]
        )
        self.assertEqual(outcome.exit_code, EXIT_INPUT)

    def test_negative_budget(self):
        norm = self.norm_file("a & !b", "false", "false")
        outcome = dispatch(
            ["revise", "--norm", norm, "--traces", self.anchored, "--max-dist", "-1"]
        )
        self.assertEqual(outcome.exit_code, EXIT_INPUT)
        self.assertIn("budget", outcome.message)


class test_gen3sat(CliCase):
    ARGS = ["gen3sat", "--vars", "3", "--clauses", "2", "--seed", "7", "--kind", "prohibition"]

    def test_trace_counts(self):
        outcome = dispatch(self.ARGS)
        self.assertEqual(outcome.exit_code, EXIT_OK)
        traces = loads_traces(outcome.report)
        self.assertEqual(len(traces.negative), 4)
        self.assertEqual(len(traces.positive), 31)

    def test_repeatable(self):
        self.assertEqual(dispatch(self.ARGS).report, dispatch(self.ARGS).report)

    def test_files(self):
        out, cnf = self.path("gadget.json"), self.path("phi.cnf")
        outcome = dispatch(self.ARGS + ["--out", out, "--dimacs", cnf])
        self.assertIn("4 negative and 31 positive traces over 8 states", outcome.report)
        with open(out, "r", encoding="utf-8") as f:
            self.assertEqual(f.read(), dispatch(self.ARGS).report)
        with open(cnf, "r", encoding="utf-8") as f:
            self.assertIn("p cnf 3 2", f.read())

    def test_json_summary(self):
        out = self.path("gadget.json")
        doc = json.loads(dispatch(self.ARGS + ["--out", out, "--format", "json"]).report)
        self.assertEqual((doc["negative"], doc["positive"], doc["states"]), (4, 31, 8))
        self.assertIn(doc["satisfiable"], (True, False))

    def test_invalid_sizes(self):
        outcome = dispatch(["gen3sat", "--vars", "0", "--clauses", "2"])
        self.assertEqual(outcome.exit_code, EXIT_INPUT)


class test_oracle(CliCase):
    def test_lists_solutions(self):
        outcome = dispatch(["oracle", "--traces", self.anchored, "--limit", "2"])
        self.assertEqual(outcome.exit_code, EXIT_OK)
        self.assertRegex(outcome.report.splitlines()[0], r"^\d+ of 64 candidate triples")
        self.assertIn("solution 2:", outcome.report)
        self.assertNotIn("solution 3:", outcome.report)

    def test_inseparable(self):
        outcome = dispatch(["oracle", "--kind", "obligation", "--traces", self.inseparable])
        self.assertEqual(outcome.exit_code, EXIT_NEGATIVE)
        self.assertTrue(outcome.report.startswith("0 of 512"))


class test_repeated_runs(CliCase):
    def commands(self):
        norm = self.norm_file("a & !b", "false", "false")
        return [
            ["check", "--norm", norm, "--traces", self.anchored],
            ["synth", "--traces", self.anchored, "--engine", "sat"],
            ["synth", "--traces", self.anchored, "--engine", "brute"],
            ["synth", "--kind", "obligation", "--traces", self.inseparable],
            ["revise", "--norm", norm, "--traces", self.anchored, "--minimize"],
            ["oracle", "--traces", self.anchored],
        ]

    def test_reports_are_identical(self):
        for argv in self.commands():
            for fmt in ("human", "json"):
                with self.subTest(command=argv[0], fmt=fmt):
                    first = dispatch(argv + ["--format", fmt])
                    second = dispatch(argv + ["--format", fmt])
                    self.assertTrue(first.report)
                    self.assertEqual(first.report, second.report)
                    self.assertEqual(first.exit_code, second.exit_code)


class test_scale(CliCase):
    def test_fifteen_variables_sixty_clauses(self):
        traces = self.path("gadget.json")
        generated = dispatch(
            ["gen3sat", "--vars", "15", "--clauses", "60", "--seed", "7", "--out", traces]
        )
        self.assertEqual(generated.exit_code, EXIT_OK)
        start = time.perf_counter()
        outcome = dispatch(
            ["synth", "--kind", "prohibition", "--traces", traces, "--format", "json"]
        )
        self.assertLess(time.perf_counter() - start, 10)
        doc = json.loads(outcome.report)
        if doc["result"] == "solution":
            self.assertEqual(outcome.exit_code, EXIT_OK)
            self.assertEqual(doc["verification"], "ok")
        else:
            self.assertEqual(outcome.exit_code, EXIT_NEGATIVE)


class test_errors(CliCase):
    def test_usage(self):
        outcome = dispatch(["synth"])
        self.assertEqual(outcome.exit_code, EXIT_INPUT)
        self.assertIn("--traces", outcome.message)
        self.assertEqual(dispatch([]).exit_code, EXIT_INPUT)
        self.assertEqual(dispatch(["frobnicate"]).exit_code, EXIT_INPUT)

    def test_bad_trace_file(self):
        bad = self.write("bad.json", '{"propositions": ["a"], "positive": [[]]}')
        outcome = dispatch(["synth", "--traces", bad])
        self.assertEqual(outcome.exit_code, EXIT_INPUT)
        self.assertIn("empty trace", outcome.message)

    def test_missing_file(self):
        outcome = dispatch(["synth", "--traces", self.path("nowhere.json")])
        self.assertEqual(outcome.exit_code, EXIT_INPUT)

    def test_norm_over_other_atoms(self):
        norm = self.write(
            "norm.json", '{"kind": "P", "condition": "zz", "target": "a", "deadline": "b"}'
        )
        outcome = dispatch(["check", "--norm", norm, "--traces", self.anchored])
        self.assertEqual(outcome.exit_code, EXIT_INPUT)

    def test_resource_limit(self):
        config = self.write("tight.yaml", "brute_force:\n  max_bits: 3\n")
        outcome = dispatch(["oracle", "--traces", self.anchored, "--config", config])
        self.assertEqual(outcome.exit_code, EXIT_RESOURCE)
        self.assertTrue(outcome.message.startswith("resource limit"))

    def test_undecodable_trace_file(self):
        bad = self.path("latin.json")
        with open(bad, "wb") as f:
            f.write(b'{"propositions": ["\xff"], "positive": [], "negative": []}')
        outcome = dispatch(["synth", "--traces", bad])
        self.assertEqual(outcome.exit_code, EXIT_INPUT)
        self.assertIn("not UTF-8", outcome.message)

    def test_undecodable_norm_file(self):
        bad = self.path("norm.json")
        with open(bad, "wb") as f:
            f.write(b'{"kind": "P", "condition": "\xff", "target": "a", "deadline": "b"}')
        outcome = dispatch(["check", "--norm", bad, "--traces", self.anchored])
        self.assertEqual(outcome.exit_code, EXIT_INPUT)

    def test_deeply_nested_formula(self):
        deep = "(" * 3000 + "a" + ")" * 3000
        norm = self.write(
            "norm.json", f'{{"kind": "P", "condition": "{deep}", "target": "a", "deadline": "b"}}'
        )
        outcome = dispatch(["check", "--norm", norm, "--traces", self.anchored])
        self.assertEqual(outcome.exit_code, EXIT_INPUT)
        self.assertIn("nested too deeply", outcome.message)

    def test_bad_logging_level(self):
        config = self.write("loud.yaml", "logging:\n  level: LOUD\n")
        outcome = dispatch(["synth", "--traces", self.anchored, "--config", config])
        self.assertEqual(outcome.exit_code, EXIT_INPUT)
        self.assertIn("logging.level", outcome.message)

    def test_unknown_config_key(self):
        config = self.write("bad.yaml", "solver:\n  speed: 11\n")
        outcome = dispatch(["synth", "--traces", self.anchored, "--config", config])
        self.assertEqual(outcome.exit_code, EXIT_INPUT)


def test_main_writes_streams(capsys):
    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "traces.json")
        save_traces(inseparable, path)
        assert main(["synth", "--traces", path]) == EXIT_NEGATIVE
        captured = capsys.readouterr()
        assert captured.out.startswith("NO SOLUTION")
        assert main(["synth"]) == EXIT_INPUT
        assert "error" in capsys.readouterr().err
