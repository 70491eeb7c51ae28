"""
Propositional vocabulary, formula syntax trees, the concrete-syntax parser,
evaluation in a state, and disjunctions of state descriptions.

Concrete syntax, loosest binding first::

    formula := imp
    imp     := disj ('->' imp)?
    disj    := conj ('|' conj)*
    conj    := unary ('&' unary)*
    unary   := '!' unary | 'true' | 'false' | ident | '(' formula ')'

``&`` and ``|`` associate to the left, ``->`` to the right. Whitespace is
insignificant.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import reduce
from typing import TYPE_CHECKING, Iterable

import sympy
from sympy.logic import boolalg

from sknorm.errors import FormulaSyntaxError, UnknownAtomError, VocabularyMismatchError

if TYPE_CHECKING:
    from sknorm.tracemodel import State


IDENTIFIER = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
KEYWORDS = ("true", "false")


@dataclass(frozen=True)
class Vocabulary:
    """
    An ordered, finite set of proposition names.

    Parameters
    ----------
    props : tuple of str
        Distinct identifiers. Their order is the canonical column order of
        states and is preserved through serialization.
    """

    props: tuple[str, ...]

    def __post_init__(self):
        props = tuple(self.props)
        object.__setattr__(self, "props", props)

        if not props:
            raise VocabularyMismatchError("a vocabulary needs at least one proposition")
        seen = set()
        for p in props:
            if not isinstance(p, str) or not IDENTIFIER.fullmatch(p):
                raise VocabularyMismatchError(f"invalid proposition name {p!r}")
            if p in KEYWORDS:
                raise VocabularyMismatchError(f"'{p}' is reserved and cannot name a proposition")
            if p in seen:
                raise VocabularyMismatchError(f"duplicate proposition '{p}'")
            seen.add(p)

    def __len__(self):
        return len(self.props)

    def __iter__(self):
        return iter(self.props)

    def __contains__(self, prop):
        return prop in self.props

    def index(self, prop: str) -> int:
        try:
            return self.props.index(prop)
        except ValueError:
            raise UnknownAtomError(prop) from None


# Formula syntax tree
# ===================

_PRECEDENCE = {"imp": 1, "or": 2, "and": 3, "not": 4, "leaf": 5}


class PropFormula:
    """Base class of the formula syntax tree. Nodes are immutable values."""

    kind = "leaf"

    def atoms(self) -> frozenset[str]:
        """Propositions occurring in the formula."""
        raise NotImplementedError

    def evaluate(self, valuation) -> bool:
        """Truth value under ``valuation``, any mapping from atom names to booleans."""
        raise NotImplementedError

    def to_sympy(self):
        """The equivalent :mod:`sympy.logic` expression."""
        raise NotImplementedError

    def pretty(self) -> str:
        """Concrete syntax with the fewest parentheses that re-parse to this tree."""
        raise NotImplementedError

    def __str__(self):
        return self.pretty()

    def _wrap(self, child: PropFormula, tight: bool) -> str:
        # `tight` marks the side where equal precedence still needs brackets
        text = child.pretty()
        cp, sp = _PRECEDENCE[child.kind], _PRECEDENCE[self.kind]
        if cp < sp or (cp == sp and tight):
            return f"({text})"
        # conjunctions inside disjunctions are bracketed for legibility
        if self.kind == "or" and child.kind == "and":
            return f"({text})"
        return text


@dataclass(frozen=True)
class Const(PropFormula):
    value: bool

    def atoms(self):
        return frozenset()

    def evaluate(self, valuation):
        return self.value

    def to_sympy(self):
        return boolalg.true if self.value else boolalg.false

    def pretty(self):
        return "true" if self.value else "false"


@dataclass(frozen=True)
class Atom(PropFormula):
    name: str

    def atoms(self):
        return frozenset((self.name,))

    def evaluate(self, valuation):
        return bool(valuation[self.name])

    def to_sympy(self):
        return sympy.Symbol(self.name)

    def pretty(self):
        return self.name


@dataclass(frozen=True)
class Not(PropFormula):
    operand: PropFormula
    kind = "not"

    def atoms(self):
        return self.operand.atoms()

    def evaluate(self, valuation):
        return not self.operand.evaluate(valuation)

    def to_sympy(self):
        return sympy.Not(self.operand.to_sympy())

    def pretty(self):
        return "!" + self._wrap(self.operand, tight=False)


@dataclass(frozen=True)
class _Binary(PropFormula):
    left: PropFormula
    right: PropFormula

    def atoms(self):
        return self.left.atoms() | self.right.atoms()


@dataclass(frozen=True)
class And(_Binary):
    kind = "and"

    def evaluate(self, valuation):
        return self.left.evaluate(valuation) and self.right.evaluate(valuation)

    def to_sympy(self):
        return sympy.And(self.left.to_sympy(), self.right.to_sympy())

    def pretty(self):
        return f"{self._wrap(self.left, False)} & {self._wrap(self.right, True)}"


@dataclass(frozen=True)
class Or(_Binary):
    kind = "or"

    def evaluate(self, valuation):
        return self.left.evaluate(valuation) or self.right.evaluate(valuation)

    def to_sympy(self):
        return sympy.Or(self.left.to_sympy(), self.right.to_sympy())

    def pretty(self):
        return f"{self._wrap(self.left, False)} | {self._wrap(self.right, True)}"


@dataclass(frozen=True)
class Imp(_Binary):
    kind = "imp"

    def evaluate(self, valuation):
        return (not self.left.evaluate(valuation)) or self.right.evaluate(valuation)

    def to_sympy(self):
        return sympy.Implies(self.left.to_sympy(), self.right.to_sympy())

    def pretty(self):
        return f"{self._wrap(self.left, True)} -> {self._wrap(self.right, False)}"


TRUE = Const(True)
FALSE = Const(False)


# Parser
# ======

_TOKEN = re.compile(r"\s*(?:(->)|([!&|()])|([A-Za-z_][A-Za-z0-9_]*))")


def _tokenize(text: str) -> list[tuple[str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if m is None:
            bad = pos + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise FormulaSyntaxError(f"unexpected character {text[bad]!r}", bad)
        tok = m.group(1) or m.group(2) or m.group(3)
        tokens.append((tok, m.start(m.lastindex)))
        pos = m.end()
    tokens.append(("", len(text)))
    return tokens


class _Parser:
    """Recursive descent over the token list, one method per grammar rule."""

    def __init__(self, text: str, vocab: Vocabulary | None):
        self.tokens = _tokenize(text)
        self.vocab = vocab
        self.i = 0

    @property
    def peek(self) -> str:
        return self.tokens[self.i][0]

    def fail(self, message: str):
        tok, pos = self.tokens[self.i]
        what = f"unexpected token {tok!r}" if tok else "unexpected end of input"
        raise FormulaSyntaxError(f"{message}: {what}", pos)

    def take(self) -> str:
        tok = self.tokens[self.i][0]
        self.i += 1
        return tok

    def parse(self) -> PropFormula:
        f = self.imp()
        if self.peek != "":
            self.fail("expected end of formula")
        return f

    def imp(self) -> PropFormula:
        left = self.disj()
        if self.peek == "->":
            self.take()
            return Imp(left, self.imp())
        return left

    def disj(self) -> PropFormula:
        f = self.conj()
        while self.peek == "|":
            self.take()
            f = Or(f, self.conj())
        return f

    def conj(self) -> PropFormula:
        f = self.unary()
        while self.peek == "&":
            self.take()
            f = And(f, self.unary())
        return f

    def unary(self) -> PropFormula:
        tok = self.peek
        if tok == "!":
            self.take()
            return Not(self.unary())
        if tok == "(":
            self.take()
            f = self.imp()
            if self.peek != ")":
                self.fail("expected ')'")
            self.take()
            return f
        if tok == "true":
            self.take()
            return TRUE
        if tok == "false":
            self.take()
            return FALSE
        if tok and IDENTIFIER.fullmatch(tok):
            if self.vocab is not None and tok not in self.vocab:
                raise UnknownAtomError(tok)
            self.take()
            return Atom(tok)
        self.fail("expected a proposition, constant, '!' or '('")


def parse_formula(text: str, vocab: Vocabulary | None = None) -> PropFormula:
    """
    Parse ``text`` in the concrete formula syntax.

    Parameters
    ----------
    text : str
        Source text; must contain at least one token.
    vocab : Vocabulary, optional
        When given, every atom must belong to it.

    Raises
    ------
    FormulaSyntaxError
        With the zero-based offset of the offending token (the text length
        for premature end of input).
    UnknownAtomError
        Naming the first atom not in ``vocab``.
    """
    parser = _Parser(text, vocab)
    try:
        return parser.parse()
    except RecursionError:
        raise FormulaSyntaxError("formula nested too deeply", parser.tokens[parser.i][1]) from None


def eval_formula(f: PropFormula, s: State) -> bool:
    """
    Truth value of ``f`` in state ``s``.

    Raises
    ------
    VocabularyMismatchError
        If ``f`` mentions a proposition the state does not assign.
    """
    missing = f.atoms() - set(s.vocab.props)
    if missing:
        raise VocabularyMismatchError(
            f"formula mentions {sorted(missing)} outside the state vocabulary {list(s.vocab.props)}"
        )
    return f.evaluate(s)


def state_description(s: State) -> PropFormula:
    """The conjunction of every proposition of the state or its negation."""
    literals = [Atom(p) if v else Not(Atom(p)) for p, v in zip(s.vocab.props, s.bits)]
    return reduce(And, literals)


def formula_from_state_set(X: Iterable[State], vocab: Vocabulary) -> PropFormula:
    """
    The formula true exactly in the states of ``X``: one full state
    description per state, joined by ``|`` in iteration order (duplicates
    dropped). The empty set yields ``false``.

    Raises
    ------
    VocabularyMismatchError
        If a state is over a different vocabulary.
    """
    disjuncts = []
    seen = set()
    for s in X:
        if s.vocab != vocab:
            raise VocabularyMismatchError(
                f"state over {list(s.vocab.props)} used with vocabulary {list(vocab.props)}"
            )
        if s.bits in seen:
            continue
        seen.add(s.bits)
        disjuncts.append(state_description(s))

    if not disjuncts:
        return FALSE
    return reduce(Or, disjuncts)
