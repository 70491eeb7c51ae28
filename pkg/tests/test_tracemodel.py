import io
import json
import os
import tempfile
import unittest

import pytest

from conftest import VOCAB_AB, inseparable, make_set
from sknorm.errors import TraceFormatError, VocabularyMismatchError
from sknorm.propcore import Vocabulary
from sknorm.tracemodel import (
    LabeledTraceSet,
    State,
    Trace,
    dumps_traces,
    load_traces,
    loads_traces,
    make_trace,
    save_traces,
    universe,
)

CANONICAL = """{
  "propositions": ["a", "b"],
  "positive": [
    [{"a": true, "b": false}, {"a": false, "b": true}],
    [{"a": true, "b": true}]
  ],
  "negative": [
    [{"a": false, "b": false}]
  ]
}
"""


class test_state(unittest.TestCase):
    def test_constructors_agree(self):
        s = State.from_mapping(VOCAB_AB, {"b": False, "a": True})
        self.assertEqual(s, State.from_bits(VOCAB_AB, "10"))
        self.assertEqual(s, State.from_bits(VOCAB_AB, [True, False]))
        self.assertTrue(s["a"])
        self.assertFalse(s["b"])
        self.assertEqual(s.true_props(), ("a",))
        self.assertEqual(str(s), "{a:1,b:0}")

    def test_totality(self):
        with self.assertRaises(TraceFormatError):
            State.from_mapping(VOCAB_AB, {"a": True})
        with self.assertRaises(TraceFormatError):
            State.from_mapping(VOCAB_AB, {"a": True, "b": True, "c": False})
        with self.assertRaises(VocabularyMismatchError):
            State(VOCAB_AB, (True,))


class test_trace(unittest.TestCase):
    def test_empty_trace_rejected(self):
        with self.assertRaises(TraceFormatError):
            Trace(())

    def test_mixed_vocabularies_rejected(self):
        other = Vocabulary(("x", "y"))
        with self.assertRaises(VocabularyMismatchError):
            Trace((State.from_bits(VOCAB_AB, "10"), State.from_bits(other, "10")))

    def test_make_trace(self):
        t = make_trace(VOCAB_AB, ["10", {"a": False, "b": True}])
        self.assertEqual(len(t), 2)
        self.assertEqual(t[1], State.from_bits(VOCAB_AB, "01"))

    def test_set_rejects_foreign_trace(self):
        other = Vocabulary(("x", "y"))
        with self.assertRaises(VocabularyMismatchError):
            LabeledTraceSet(VOCAB_AB, (make_trace(other, ["10"]),), ())


class test_universe(unittest.TestCase):
    def test_first_occurrence_order(self):
        bits = [s.bits for s in universe(inseparable)]
        self.assertEqual(bits, [(True, False), (False, True), (True, True)])

    def test_positives_scanned_first(self):
        traces = make_set(
            VOCAB_AB, {"x": "00", "y": "11"}, positive=[["y"]], negative=[["x", "y"]]
        )
        self.assertEqual([s.bits for s in traces.universe], [(True, True), (False, False)])
        self.assertEqual(traces.state_index[(False, False)], 1)

    def test_shared_state_listed_once(self):
        traces = make_set(VOCAB_AB, {"w": "01"}, positive=[["w"]], negative=[["w", "w"]])
        self.assertEqual(len(traces.universe), 1)

    def test_with_trace(self):
        extra = make_trace(VOCAB_AB, ["00"])
        grown = inseparable.with_trace(extra, positive=False)
        self.assertEqual(len(grown.negative), 2)
        self.assertEqual(len(inseparable.negative), 1)
        self.assertEqual(len(grown.universe), 4)

    def test_labelled_lists_negatives_first(self):
        labels = [(label, idx) for label, idx, _ in inseparable.labelled()]
        self.assertEqual(labels, [("negative", 0), ("positive", 0)])


class test_load(unittest.TestCase):
    def test_simple_document(self):
        traces = loads_traces('{"propositions": ["a"], "positive": [[{"a": 1}]], "negative": []}')
        self.assertEqual(len(traces.positive), 1)
        self.assertEqual(traces.negative, ())
        self.assertEqual(traces.positive[0][0].bits, (True,))

    def test_canonical_round_trip(self):
        traces = loads_traces(CANONICAL)
        self.assertEqual(dumps_traces(traces), CANONICAL)

    def test_stream_and_file(self):
        self.assertEqual(load_traces(io.StringIO(CANONICAL)), loads_traces(CANONICAL))
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "traces.json")
            save_traces(loads_traces(CANONICAL), path)
            with open(path, "r", encoding="utf-8") as f:
                self.assertEqual(f.read(), CANONICAL)
            self.assertEqual(load_traces(path), loads_traces(CANONICAL))

    def test_dump_is_valid_json(self):
        doc = json.loads(dumps_traces(inseparable))
        self.assertEqual(doc["propositions"], ["a", "b"])
        self.assertEqual(len(doc["negative"][0]), 4)


@pytest.mark.parametrize(
    "doc, message",
    [
        ({"propositions": ["a"], "positive": [], "negative": [[]]}, "empty trace at negative[0]"),
        (
            {"propositions": ["a", "b"], "positive": [[{"a": 1, "b": 0}, {"a": 1}]]},
            "missing proposition 'b' in positive[0][1]",
        ),
        (
            {"propositions": ["a"], "positive": [[{"a": 1, "c": 0}]]},
            "unknown proposition 'c' in positive[0][0]",
        ),
        ({"propositions": ["a"], "positive": [[{"a": "yes"}]]}, "must be a boolean"),
        ({"positive": []}, "missing 'propositions'"),
        ({"propositions": ["a"], "extra": []}, "unexpected keys"),
        ({"propositions": ["a", "a"]}, "duplicate proposition"),
        ([], "top level must be an object"),
    ],
)
def test_format_errors(doc, message):
    with pytest.raises(TraceFormatError) as excinfo:
        loads_traces(json.dumps(doc))
    assert message in str(excinfo.value)


def test_invalid_json():
    with pytest.raises(TraceFormatError, match="malformed document"):
        loads_traces("{not json")


def test_undecodable_bytes():
    stream = io.TextIOWrapper(io.BytesIO(b'{"propositions": ["\xff"]}'), encoding="utf-8")
    with pytest.raises(TraceFormatError, match="not UTF-8"):
        load_traces(stream)


def test_deeply_nested_document():
    with pytest.raises(TraceFormatError, match="nested too deeply"):
        loads_traces("[" * 100000 + "]" * 100000)
