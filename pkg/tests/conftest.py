import numpy as np

from sknorm.monitor import ConditionalNorm
from sknorm.propcore import And, Atom, Imp, Not, Or, FALSE, TRUE, Vocabulary
from sknorm.revision import RevisionProblem, max_distance, revise
from sknorm.tracemodel import LabeledTraceSet, State, Trace

TEST_SEED = 10077693

VOCAB_AB = Vocabulary(("a", "b"))


def make_set(vocab, states, positive, negative):
    """
    Labelled traces from named states.

    ``states`` maps names to bit strings; traces are lists of names.
    """
    named = {name: State.from_bits(vocab, bits) for name, bits in states.items()}

    def trace(names):
        return Trace(tuple(named[n] for n in names))

    return LabeledTraceSet(
        vocab, tuple(trace(t) for t in positive), tuple(trace(t) for t in negative)
    )


# No conditional norm separates these: the negative trace only repeats its
# first state.
inseparable = make_set(
    VOCAB_AB,
    {"s1": "10", "s2": "01", "s3": "11"},
    positive=[["s1", "s2", "s3"]],
    negative=[["s1", "s1", "s2", "s3"]],
)

# (s, t) negative with (s) and (t) positive forces s into the condition and
# t into the target.
anchored = make_set(
    VOCAB_AB,
    {"s": "10", "t": "01"},
    positive=[["s"], ["t"]],
    negative=[["s", "t"]],
)

single_negative = make_set(VOCAB_AB, {"w": "11"}, positive=[], negative=[["w"]])
single_positive = make_set(VOCAB_AB, {"w": "11"}, positive=[["w"]], negative=[])
contradictory = make_set(VOCAB_AB, {"w": "11"}, positive=[["w"]], negative=[["w"]])


def random_formula(rng, vocab, depth=2):
    """A random formula tree over ``vocab`` of at most ``depth`` connectives."""
    if depth == 0 or rng.random() < 0.3:
        roll = rng.random()
        if roll < 0.1:
            return TRUE
        if roll < 0.2:
            return FALSE
        return Atom(vocab.props[rng.integers(len(vocab))])
    op = rng.integers(4)
    if op == 0:
        return Not(random_formula(rng, vocab, depth - 1))
    left = random_formula(rng, vocab, depth - 1)
    right = random_formula(rng, vocab, depth - 1)
    return (And, Or, Imp)[op - 1](left, right)


def random_trace(rng, vocab, max_len=8, pool=None):
    length = int(rng.integers(1, max_len + 1))
    if pool is None:
        rows = rng.integers(0, 2, size=(length, len(vocab))).astype(bool)
        return Trace(tuple(State(vocab, tuple(r)) for r in rows))
    return Trace(tuple(pool[int(rng.integers(len(pool)))] for _ in range(length)))


def random_trace_set(rng, vocab=VOCAB_AB, max_states=4, max_traces=6, max_len=5):
    """
    A random labelled trace set whose universe has at most ``max_states``
    states.
    """
    all_states = [
        State(vocab, tuple(bool(b) for b in row))
        for row in np.ndindex(*([2] * len(vocab)))
    ]
    size = int(rng.integers(1, min(max_states, len(all_states)) + 1))
    chosen = rng.choice(len(all_states), size=size, replace=False)
    pool = [all_states[int(k)] for k in chosen]

    count = int(rng.integers(1, max_traces + 1))
    positive, negative = [], []
    for _ in range(count):
        trace = random_trace(rng, vocab, max_len, pool)
        (positive if rng.random() < 0.5 else negative).append(trace)
    return LabeledTraceSet(vocab, tuple(positive), tuple(negative))


def revise_at_full_budget(traces, kind):
    """Revise the all-false norm with the largest distance the universe allows."""
    reference = ConditionalNorm.from_strings(kind, "false", "false", "false", traces.vocab)
    return revise(RevisionProblem(traces, reference, max_distance(traces.universe)))
