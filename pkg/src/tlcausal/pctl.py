"""Probabilistic temporal logic formulæ: syntax tree, parser, printer, validator.

State formulæ are atoms, boolean combinations, and probability-bounded path
formulæ.  Path formulæ are the bounded strong until ``U``, the bounded weak
until ``W`` (the "unless": the left operand may persist for the whole bound
without the right ever holding), and the windowed ``~>`` ("leads-to": whenever
the left side holds, the right side follows within ``[tmin, tmax]`` ticks).

Concrete grammar (whitespace-insensitive)::

    formula := term [ "~>" "{" ">=" INT "," "<=" TIME "}" pbound term ]
    term    := state [ ("U" | "W") tbound state ]
    state   := boolean expression, precedence  !  >  &  >  |  >  ->
               ("->" is right-associative, "&"/"|" left-associative)
    primary := "true" | "false" | IDENT | "!" primary | "(" formula ")"
             | "[" term "]" pbound | quant
    quant   := ("A" | "E") [("F" | "G") [tbound]] unary
             | ("F" | "G") [tbound] [pbound] unary
    tbound  := "{" "<=" TIME "}"
    pbound  := "{" (">=" | ">") FLOAT "}"
    TIME    := INT | "inf"

``IDENT`` is ``[A-Za-z_][A-Za-z0-9_]*``; ``FLOAT`` is a decimal in [0, 1].
``true`` and ``false`` are built-in atoms.  ``U W A E F G`` act as operators
only where an operator can appear, so single-letter variable names (common in
spike-train data) still parse as atoms in operand positions.

Quantifier sugar expands on parsing:

    A f  ->  [f]{>=1}          E f  ->  [f]{>0}
    F f  ->  [true U{<=inf} f]{>=1}
    G f  ->  [f W{<=inf} false]{>=1}

``G`` expands through the weak until: with the strong until the expansion
``f U false`` would be unsatisfiable, so "holds forever" needs ``W``.
A probability bound whose inner formula is a plain state formula (as produced
by ``A f``) is read as a degenerate path of length zero.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Union

from .errors import FormulaParseError

__all__ = [
    "Formula", "StateFormula", "PathFormula",
    "Atom", "Not", "And", "Or", "Implies", "ProbBound",
    "Until", "Unless", "LeadsTo",
    "TimeBound", "INFINITY", "TRUE", "FALSE",
    "parse", "print_formula", "validate", "Violation",
]

#: A time bound is a nonnegative integer tick count or ``INFINITY``.
TimeBound = Union[int, float]
INFINITY: TimeBound = math.inf


class Formula:
    """Base class for all formula nodes.  Instances are immutable."""

    __slots__ = ()

    def __str__(self):
        return print_formula(self)


class StateFormula(Formula):
    __slots__ = ()


class PathFormula(Formula):
    __slots__ = ()


@dataclass(frozen=True)
class Atom(StateFormula):
    name: str


@dataclass(frozen=True)
class Not(StateFormula):
    operand: Formula


@dataclass(frozen=True)
class And(StateFormula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(StateFormula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Implies(StateFormula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class ProbBound(StateFormula):
    """``[path]{cmp p}``: the path probability satisfies the comparison.

    ``path`` may also be a state formula, read as a zero-length path whose
    probability is 1 where the formula holds and 0 elsewhere.
    """

    path: Formula
    comparison: str  # ">=" or ">"
    p: float


@dataclass(frozen=True)
class Until(PathFormula):
    """``left U{<=tmax} right``: right within tmax ticks, left holding before."""

    left: Formula
    right: Formula
    tmax: TimeBound


@dataclass(frozen=True)
class Unless(PathFormula):
    """Weak until: as ``Until``, or left persists for the whole bound."""

    left: Formula
    right: Formula
    tmax: TimeBound


@dataclass(frozen=True)
class LeadsTo(PathFormula):
    """``left ~>{>=tmin,<=tmax} right``: whenever left holds, right follows
    after at least ``tmin`` and at most ``tmax`` ticks.  Operands may be state
    formulæ or bare until/unless path formulæ."""

    left: Formula
    right: Formula
    tmin: int
    tmax: TimeBound


TRUE = Atom("true")
FALSE = Atom("false")

_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


# ---------------------------------------------------------------------------
# Tokenizer

_TOKEN_RE = re.compile(
    r"""
    (?P<WS>\s+)
  | (?P<NUMBER>\d+(?:\.\d+)?)
  | (?P<IDENT>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<OP>~>|->|<=|>=|>|!|&|\||\(|\)|\[|\]|\{|\}|,)
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Token:
    kind: str  # NUMBER | IDENT | OP | EOF
    text: str
    pos: int


def _tokenize(text):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise FormulaParseError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        if kind != "WS":
            tokens.append(_Token(kind, m.group(), pos))
        pos = m.end()
    tokens.append(_Token("EOF", "", len(text)))
    return tokens


# ---------------------------------------------------------------------------
# Parser

_QUANTIFIERS = {"A", "E", "F", "G"}
_PATH_OPS = {"U", "W"}


class _Parser:
    def __init__(self, text):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    # -- token helpers

    @property
    def cur(self):
        return self.tokens[self.i]

    def peek(self, ahead=1):
        j = min(self.i + ahead, len(self.tokens) - 1)
        return self.tokens[j]

    def advance(self):
        tok = self.cur
        self.i += 1
        return tok

    def at_op(self, text):
        return self.cur.kind == "OP" and self.cur.text == text

    def expect_op(self, text):
        if not self.at_op(text):
            raise FormulaParseError(
                f"expected {text!r}, found {self.cur.text or 'end of input'!r}",
                self.cur.pos)
        return self.advance()

    def fail(self, message):
        raise FormulaParseError(message, self.cur.pos)

    # -- literals

    def parse_int(self, what):
        tok = self.cur
        if tok.kind != "NUMBER" or "." in tok.text:
            self.fail(f"expected integer {what}")
        self.advance()
        return int(tok.text)

    def parse_time(self):
        tok = self.cur
        if tok.kind == "IDENT" and tok.text == "inf":
            self.advance()
            return INFINITY
        return self.parse_int("time bound")

    def parse_prob(self):
        tok = self.cur
        if tok.kind != "NUMBER":
            self.fail("expected probability literal")
        value = float(tok.text)
        if not 0.0 <= value <= 1.0:
            raise FormulaParseError(
                f"probability literal out of range: {tok.text}", tok.pos)
        self.advance()
        return value

    # -- braced bounds

    def brace_starts(self, comparators):
        """True when the upcoming tokens are '{' followed by one of the
        comparators (distinguishes a time bound from a probability bound)."""
        return (self.at_op("{") and self.peek().kind == "OP"
                and self.peek().text in comparators)

    def parse_tbound(self):
        self.expect_op("{")
        self.expect_op("<=")
        t = self.parse_time()
        self.expect_op("}")
        return t

    def parse_pbound(self):
        self.expect_op("{")
        if not (self.cur.kind == "OP" and self.cur.text in (">=", ">")):
            self.fail("expected '>=' or '>' in probability bound")
        cmp = self.advance().text
        p = self.parse_prob()
        self.expect_op("}")
        return cmp, p

    # -- grammar

    def parse_formula(self):
        left = self.parse_term()
        if self.at_op("~>"):
            self.advance()
            self.expect_op("{")
            self.expect_op(">=")
            tmin = self.parse_int("window lower bound")
            self.expect_op(",")
            self.expect_op("<=")
            tmax = self.parse_time()
            self.expect_op("}")
            cmp, p = self.parse_pbound()
            right = self.parse_term()
            return ProbBound(LeadsTo(left, right, tmin, tmax), cmp, p)
        if isinstance(left, PathFormula):
            self.fail("path formula needs a probability bound "
                      "('[...]{>=p}') or a leads-to continuation")
        return left

    def parse_term(self):
        left = self.parse_implies()
        if self.cur.kind == "IDENT" and self.cur.text in _PATH_OPS:
            op = self.advance().text
            tmax = self.parse_tbound()
            right = self.parse_implies()
            cls = Until if op == "U" else Unless
            return cls(left, right, tmax)
        return left

    def parse_implies(self):
        left = self.parse_or()
        if self.at_op("->"):
            self.advance()
            right = self.parse_implies()  # right-associative
            return Implies(left, right)
        return left

    def parse_or(self):
        left = self.parse_and()
        while self.at_op("|"):
            self.advance()
            left = Or(left, self.parse_and())
        return left

    def parse_and(self):
        left = self.parse_unary()
        while self.at_op("&"):
            self.advance()
            left = And(left, self.parse_unary())
        return left

    def parse_unary(self):
        if self.at_op("!"):
            self.advance()
            return Not(self.parse_unary())
        return self.parse_primary()

    def _ident_is_quantifier(self):
        """An A/E/F/G token acts as a quantifier only when followed by
        something that can start its operand; otherwise it is an atom.
        ``A U{...`` reads the A as an atom: the U there is a path operator."""
        if self.cur.kind != "IDENT" or self.cur.text not in _QUANTIFIERS:
            return False
        nxt = self.peek()
        if nxt.kind == "IDENT":
            if (nxt.text in _PATH_OPS and self.peek(2).kind == "OP"
                    and self.peek(2).text == "{"):
                return False
            return True
        return nxt.kind == "OP" and nxt.text in ("!", "(", "[", "{")

    def parse_primary(self):
        tok = self.cur
        if self.at_op("("):
            self.advance()
            inner = self.parse_formula()
            self.expect_op(")")
            return inner
        if self.at_op("["):
            self.advance()
            inner = self.parse_term()
            self.expect_op("]")
            cmp, p = self.parse_pbound()
            return ProbBound(inner, cmp, p)
        if self._ident_is_quantifier():
            return self.parse_quant()
        if tok.kind == "IDENT":
            self.advance()
            return Atom(tok.text)
        self.fail(f"expected a formula, found {tok.text or 'end of input'!r}")

    def parse_quant(self):
        q = self.advance().text
        if q in ("A", "E"):
            cmp, p = (">=", 1.0) if q == "A" else (">", 0.0)
            if (self.cur.kind == "IDENT" and self.cur.text in ("F", "G")
                    and self._ident_is_quantifier()):
                q2 = self.advance().text
                tmax = self.parse_tbound() if self.brace_starts(("<=",)) else INFINITY
                if self.brace_starts((">=", ">")):
                    self.fail(f"'{q2}' under '{q}' cannot carry its own "
                              "probability bound")
                operand = self.parse_unary()
                path = _fg_path(q2, operand, tmax)
            else:
                path = self.parse_unary()
            return ProbBound(path, cmp, p)
        # F / G
        tmax = self.parse_tbound() if self.brace_starts(("<=",)) else INFINITY
        if self.brace_starts((">=", ">")):
            cmp, p = self.parse_pbound()
        else:
            cmp, p = ">=", 1.0
        operand = self.parse_unary()
        return ProbBound(_fg_path(q, operand, tmax), cmp, p)


def _fg_path(q, operand, tmax):
    if q == "F":
        return Until(TRUE, operand, tmax)
    return Unless(operand, FALSE, tmax)


def parse(text):
    """Parse a formula string into its syntax tree.

    Raises :class:`FormulaParseError` on syntax errors (with position) and
    on probability literals outside [0, 1].
    """
    parser = _Parser(text)
    formula = parser.parse_formula()
    if parser.cur.kind != "EOF":
        parser.fail(f"unexpected trailing input {parser.cur.text!r}")
    return formula


# ---------------------------------------------------------------------------
# Printer

_PREC_IMPLIES = 1
_PREC_OR = 2
_PREC_AND = 3
_PREC_NOT = 4
_PREC_PRIMARY = 5


def _prec(f):
    if isinstance(f, Implies):
        return _PREC_IMPLIES
    if isinstance(f, Or):
        return _PREC_OR
    if isinstance(f, And):
        return _PREC_AND
    if isinstance(f, Not):
        return _PREC_NOT
    return _PREC_PRIMARY


def _fmt_time(t):
    return "inf" if t == INFINITY else str(int(t))


def _fmt_pbound(cmp, p):
    return "{%s%r}" % (cmp, float(p))


def _fmt_state(f, min_prec):
    text = _fmt_node(f)
    if isinstance(f, ProbBound) and isinstance(f.path, LeadsTo):
        return "(" + text + ")"  # leads-to binds loosest; isolate in operands
    if _prec(f) < min_prec:
        return "(" + text + ")"
    return text


def _fmt_operand(f):
    """An operand of U / W / ~> or the inside of brackets: bare path text
    for nested until/unless (legal only under a leads-to), state text with
    parens around embedded leads-to bounds."""
    if isinstance(f, (Until, Unless)):
        return _fmt_path(f)
    return _fmt_state(f, _PREC_IMPLIES)


def _fmt_path(f):
    if isinstance(f, Until):
        return "%s U{<=%s} %s" % (
            _fmt_operand(f.left), _fmt_time(f.tmax), _fmt_operand(f.right))
    if isinstance(f, Unless):
        return "%s W{<=%s} %s" % (
            _fmt_operand(f.left), _fmt_time(f.tmax), _fmt_operand(f.right))
    return _fmt_operand(f)


def _fmt_node(f):
    if isinstance(f, Atom):
        return f.name
    if isinstance(f, Not):
        return "!" + _fmt_state(f.operand, _PREC_NOT)
    if isinstance(f, And):
        return "%s & %s" % (_fmt_state(f.left, _PREC_AND),
                            _fmt_state(f.right, _PREC_AND + 1))
    if isinstance(f, Or):
        return "%s | %s" % (_fmt_state(f.left, _PREC_OR),
                            _fmt_state(f.right, _PREC_OR + 1))
    if isinstance(f, Implies):
        return "%s -> %s" % (_fmt_state(f.left, _PREC_IMPLIES + 1),
                             _fmt_state(f.right, _PREC_IMPLIES))
    if isinstance(f, ProbBound):
        if isinstance(f.path, LeadsTo):
            lead = f.path
            return "%s ~>{>=%d,<=%s}%s %s" % (
                _fmt_path(lead.left), lead.tmin, _fmt_time(lead.tmax),
                _fmt_pbound(f.comparison, f.p), _fmt_path(lead.right))
        return "[%s]%s" % (_fmt_path(f.path),
                           _fmt_pbound(f.comparison, f.p))
    if isinstance(f, (Until, Unless)):
        return _fmt_path(f)
    if isinstance(f, LeadsTo):
        # a bare leads-to has no probability bound; printable for debugging
        return "%s ~>{>=%d,<=%s} %s" % (
            _fmt_path(f.left), f.tmin, _fmt_time(f.tmax), _fmt_path(f.right))
    raise TypeError(f"not a formula node: {f!r}")


def print_formula(f):
    """Render a formula in canonical concrete syntax.

    For any state formula, ``parse(print_formula(f))`` reproduces ``f``
    node for node.  Bare path formulæ render without an enclosing bound
    (useful for messages) and are not round-trippable on their own.
    """
    return _fmt_node(f)


# ---------------------------------------------------------------------------
# Validator

@dataclass(frozen=True)
class Violation:
    """A typed-invariant violation found by :func:`validate`."""

    node: Formula
    message: str

    def __str__(self):
        return f"{self.message}: {print_formula(self.node)}"


def _valid_time(t):
    if t == INFINITY:
        return True
    return isinstance(t, int) and not isinstance(t, bool) and t >= 0


def validate(f):
    """Collect invariant violations in a formula tree.

    Returns an empty list iff every probability lies in [0, 1], every time
    bound is a nonnegative integer or infinity, and every leads-to window
    has ``1 <= tmin <= tmax``.  Violations are data, not exceptions.
    """
    out = []

    def visit(node):
        if isinstance(node, Atom):
            if not (_IDENT_RE.fullmatch(node.name)):
                out.append(Violation(node, "invalid atom name"))
            return
        if isinstance(node, Not):
            visit(node.operand)
            return
        if isinstance(node, (And, Or, Implies)):
            visit(node.left)
            visit(node.right)
            return
        if isinstance(node, ProbBound):
            if node.comparison not in (">=", ">"):
                out.append(Violation(node, "comparison must be '>=' or '>'"))
            if not (isinstance(node.p, (int, float)) and 0.0 <= node.p <= 1.0):
                out.append(Violation(node, "probability out of range"))
            visit(node.path)
            return
        if isinstance(node, (Until, Unless)):
            if not _valid_time(node.tmax):
                out.append(Violation(
                    node, "time bound must be a nonnegative integer or inf"))
            visit(node.left)
            visit(node.right)
            return
        if isinstance(node, LeadsTo):
            if not (isinstance(node.tmin, int) and node.tmin >= 1):
                out.append(Violation(node, "tmin must be >= 1"))
            if not _valid_time(node.tmax):
                out.append(Violation(
                    node, "time bound must be a nonnegative integer or inf"))
            elif isinstance(node.tmin, int) and node.tmin > node.tmax:
                out.append(Violation(node, "tmin exceeds tmax"))
            visit(node.left)
            visit(node.right)
            return
        raise TypeError(f"not a formula node: {node!r}")

    visit(f)
    return out
