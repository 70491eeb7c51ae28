"""
scikit-norm: conditional norms learned from labelled execution traces.

This package checks conditional prohibitions and obligations on finite
traces, synthesises norms that separate positive from negative behaviour
through a satisfiability encoding, revises existing norms at minimal
editing distance, and generates the 3SAT gadgets that make synthesis hard.
"""

from __future__ import annotations

try:
    from ._version import version as __version__
except ImportError:  # source tree without a build
    __version__ = "0.1.0"

# Formulas and traces
from .propcore import Vocabulary, PropFormula, parse_formula, formula_from_state_set
from .tracemodel import State, Trace, LabeledTraceSet, load_traces, dumps_traces

# Checking
from .monitor import NormKind, ConditionalNorm, Verdict, ViolationWitness, check

# Synthesis and revision
from .satcore import CnfSystem, solve
from .synthesis import StateSetTriple, Solution, NoSolution, synthesize, verify_triple
from .revision import RevisionProblem, Revised, revise, distance

# Hardness gadgets
from .reductions import ThreeSatInstance, gen_prohibition, gen_obligation

# Modules
from . import config
from . import errors
from . import utils

__all__ = [
    "__version__",
    # Formulas and traces
    "Vocabulary",
    "PropFormula",
    "parse_formula",
    "formula_from_state_set",
    "State",
    "Trace",
    "LabeledTraceSet",
    "load_traces",
    "dumps_traces",
    # Checking
    "NormKind",
    "ConditionalNorm",
    "Verdict",
    "ViolationWitness",
    "check",
    # Synthesis and revision
    "CnfSystem",
    "solve",
    "StateSetTriple",
    "Solution",
    "NoSolution",
    "synthesize",
    "verify_triple",
    "RevisionProblem",
    "Revised",
    "revise",
    "distance",
    # Hardness gadgets
    "ThreeSatInstance",
    "gen_prohibition",
    "gen_obligation",
    # Modules
    "config",
    "errors",
    "utils",
]
