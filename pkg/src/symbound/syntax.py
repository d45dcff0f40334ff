"""Terms, formulas and the text grammar shared by the CLI and the tests.

Terms are built from rational constants, variables, ``+ - * /``, integer
powers and unary function applications (``floor(...)``, ``inv(...)``).
Formulas combine relational atoms with and/or/not/implies.  Both Unicode
(``∧ ∨ ¬ ⟹ ≥ ≤ ≠``) and ASCII spellings are accepted.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Tuple, Union

from .polynomial import Poly


class ParseError(ValueError):
    def __init__(self, message: str, line: int = 1, column: int = 1):
        super().__init__(f"{line}:{column}: {message}")
        self.line = line
        self.column = column


# -------------------------------------------------------------------- terms

@dataclass(frozen=True)
class Num:
    value: Fraction


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Add:
    args: Tuple["Term", ...]


@dataclass(frozen=True)
class Mul:
    args: Tuple["Term", ...]


@dataclass(frozen=True)
class Pow:
    base: "Term"
    exp: int


@dataclass(frozen=True)
class App:
    """Unary foreign function application, e.g. ``App("floor", t)``."""
    fn: str
    arg: "Term"


Term = Union[Num, Var, Add, Mul, Pow, App]

FUNCTIONS = {"floor": "floor", "inv": "inv", "recip": "inv"}


def neg(t: Term) -> Term:
    return Mul((Num(Fraction(-1)), t))


def div(a: Term, b: Term) -> Term:
    if isinstance(b, Num):
        if b.value == 0:
            raise ZeroDivisionError("division by the constant 0")
        return Mul((Num(1 / b.value), a))
    return Mul((a, App("inv", b)))


def term_vars(t: Term) -> set:
    if isinstance(t, Var):
        return {t.name}
    if isinstance(t, Num):
        return set()
    if isinstance(t, (Add, Mul)):
        out = set()
        for a in t.args:
            out |= term_vars(a)
        return out
    if isinstance(t, Pow):
        return term_vars(t.base)
    return term_vars(t.arg)


def count_apps(t: Term, fn: str) -> int:
    if isinstance(t, (Num, Var)):
        return 0
    if isinstance(t, (Add, Mul)):
        return sum(count_apps(a, fn) for a in t.args)
    if isinstance(t, Pow):
        return count_apps(t.base, fn)
    return (t.fn == fn) + count_apps(t.arg, fn)


def term_to_poly(t: Term) -> Poly:
    """Convert a function-free term to a polynomial."""
    if isinstance(t, Num):
        return Poly.const(t.value)
    if isinstance(t, Var):
        return Poly.var(t.name)
    if isinstance(t, Add):
        out = Poly()
        for a in t.args:
            out = out + term_to_poly(a)
        return out
    if isinstance(t, Mul):
        out = Poly.const(1)
        for a in t.args:
            out = out * term_to_poly(a)
        return out
    if isinstance(t, Pow):
        return term_to_poly(t.base) ** t.exp
    raise ValueError(f"function application {t.fn}(...) inside a polynomial")


def term_str(t: Term) -> str:
    if isinstance(t, Num):
        v = t.value
        return str(v.numerator) if v.denominator == 1 else f"({v.numerator}/{v.denominator})"
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Add):
        return "(" + " + ".join(term_str(a) for a in t.args) + ")"
    if isinstance(t, Mul):
        return "(" + "*".join(term_str(a) for a in t.args) + ")"
    if isinstance(t, Pow):
        return f"{term_str(t.base)}^{t.exp}"
    return f"{t.fn}({term_str(t.arg)})"


# ----------------------------------------------------------------- formulas

RELATIONS = (">=", ">", "<=", "<", "=", "!=")


@dataclass(frozen=True)
class Rel:
    lhs: Term
    op: str
    rhs: Term


@dataclass(frozen=True)
class And:
    args: Tuple["Formula", ...]


@dataclass(frozen=True)
class Or:
    args: Tuple["Formula", ...]


@dataclass(frozen=True)
class Not:
    arg: "Formula"


@dataclass(frozen=True)
class Implies:
    lhs: "Formula"
    rhs: "Formula"


@dataclass(frozen=True)
class BoolConst:
    value: bool


Formula = Union[Rel, And, Or, Not, Implies, BoolConst]

_NEGATE = {">=": "<", ">": "<=", "<=": ">", "<": ">=", "=": "!=", "!=": "="}


def conjuncts(f: Formula) -> List[Formula]:
    if isinstance(f, And):
        out = []
        for a in f.args:
            out.extend(conjuncts(a))
        return out
    return [f]


def to_nnf(f: Formula, negate: bool = False) -> Formula:
    """Push negations to the atoms; ``!=`` becomes a disjunction of strict atoms."""
    if isinstance(f, BoolConst):
        return BoolConst(f.value != negate)
    if isinstance(f, Rel):
        op = _NEGATE[f.op] if negate else f.op
        if op == "!=":
            return Or((Rel(f.lhs, "<", f.rhs), Rel(f.lhs, ">", f.rhs)))
        return Rel(f.lhs, op, f.rhs)
    if isinstance(f, Not):
        return to_nnf(f.arg, not negate)
    if isinstance(f, Implies):
        return to_nnf(Or((Not(f.lhs), f.rhs)), negate)
    args = tuple(to_nnf(a, negate) for a in f.args)
    if isinstance(f, And) != negate:
        return And(args)
    return Or(args)


def formula_atoms(f: Formula) -> List[Rel]:
    if isinstance(f, Rel):
        return [f]
    if isinstance(f, BoolConst):
        return []
    if isinstance(f, Not):
        return formula_atoms(f.arg)
    if isinstance(f, Implies):
        return formula_atoms(f.lhs) + formula_atoms(f.rhs)
    out = []
    for a in f.args:
        out.extend(formula_atoms(a))
    return out


def formula_str(f: Formula) -> str:
    if isinstance(f, Rel):
        return f"{term_str(f.lhs)} {f.op} {term_str(f.rhs)}"
    if isinstance(f, BoolConst):
        return "true" if f.value else "false"
    if isinstance(f, Not):
        return f"not ({formula_str(f.arg)})"
    if isinstance(f, Implies):
        return f"({formula_str(f.lhs)}) => ({formula_str(f.rhs)})"
    sep = " and " if isinstance(f, And) else " or "
    return "(" + sep.join(formula_str(a) for a in f.args) + ")"


# --------------------------------------------------------------- semantics

def evaluate_term(t: Term, env) -> Fraction:
    """Exact value with mathematical floor; ``inv(0)`` raises ZeroDivisionError."""
    if isinstance(t, Num):
        return t.value
    if isinstance(t, Var):
        return Fraction(env[t.name])
    if isinstance(t, Add):
        return sum((evaluate_term(a, env) for a in t.args), Fraction(0))
    if isinstance(t, Mul):
        out = Fraction(1)
        for a in t.args:
            out *= evaluate_term(a, env)
        return out
    if isinstance(t, Pow):
        return evaluate_term(t.base, env) ** t.exp
    x = evaluate_term(t.arg, env)
    if t.fn == "floor":
        return Fraction(x.numerator // x.denominator)
    if t.fn == "inv":
        return 1 / x
    raise ValueError(f"no semantics for {t.fn!r}")


_CMP = {">=": lambda a, b: a >= b, ">": lambda a, b: a > b, "<=": lambda a, b: a <= b,
        "<": lambda a, b: a < b, "=": lambda a, b: a == b, "!=": lambda a, b: a != b}


def evaluate_formula(f: Formula, env) -> bool:
    if isinstance(f, Rel):
        return _CMP[f.op](evaluate_term(f.lhs, env), evaluate_term(f.rhs, env))
    if isinstance(f, BoolConst):
        return f.value
    if isinstance(f, Not):
        return not evaluate_formula(f.arg, env)
    if isinstance(f, Implies):
        return not evaluate_formula(f.lhs, env) or evaluate_formula(f.rhs, env)
    if isinstance(f, And):
        return all(evaluate_formula(a, env) for a in f.args)
    return any(evaluate_formula(a, env) for a in f.args)


# ------------------------------------------------------------------- parser

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<num>\d+(?:\.\d+)?)
  | (?P<op><=>|==>|=>|->|⟹|⇒|→|>=|<=|!=|==|≥|≤|≠|/\\|\\/|&&|\|\||[-+*/^(),<>=&|!∧∨¬])
  | (?P<name>[A-Za-z_][A-Za-z0-9_'.]*)
""", re.VERBOSE)

_CANON = {
    "≥": ">=", "≤": "<=", "≠": "!=", "==": "=",
    "∧": "and", "&": "and", "&&": "and", "/\\": "and",
    "∨": "or", "|": "or", "||": "or", "\\/": "or",
    "¬": "not", "!": "not",
    "⟹": "=>", "⇒": "=>", "→": "=>", "->": "=>", "==>": "=>",
}
_WORDS = {"and", "or", "not", "implies", "true", "false"}


def tokenize(text: str) -> List[Tuple[str, str, int, int]]:
    toks = []
    pos = 0
    line, col0 = 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - col0 + 1)
        kind = m.lastgroup
        val = m.group()
        if kind == "ws":
            for i, ch in enumerate(val):
                if ch == "\n":
                    line += 1
                    col0 = pos + i + 1
        else:
            col = pos - col0 + 1
            if kind == "op":
                val = _CANON.get(val, val)
                if val in ("and", "or", "not", "=>"):
                    kind = "kw"
            elif kind == "name" and val in _WORDS:
                kind = "kw"
                val = "=>" if val == "implies" else val
            toks.append((kind, val, line, col))
        pos = m.end()
    toks.append(("eof", "", line, pos - col0 + 1))
    return toks


class _Parser:
    def __init__(self, text: str, known_vars=None):
        self.toks = tokenize(text)
        self.i = 0
        self.known = known_vars

    def peek(self):
        return self.toks[self.i]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def error(self, msg, tok=None):
        tok = tok or self.peek()
        raise ParseError(msg, tok[2], tok[3])

    def expect(self, val):
        t = self.take()
        if t[1] != val:
            self.error(f"expected {val!r}, found {t[1] or 'end of input'!r}", t)
        return t

    def at_end(self):
        return self.peek()[0] == "eof"

    # formulas: implies < or < and < not < atom
    def formula(self) -> Formula:
        lhs = self.disj()
        if self.peek()[1] == "=>":
            self.take()
            return Implies(lhs, self.formula())
        return lhs

    def disj(self) -> Formula:
        args = [self.conj()]
        while self.peek()[1] == "or":
            self.take()
            args.append(self.conj())
        return args[0] if len(args) == 1 else Or(tuple(args))

    def conj(self) -> Formula:
        args = [self.unary()]
        while self.peek()[1] == "and" or self.peek()[1] == ",":
            self.take()
            args.append(self.unary())
        return args[0] if len(args) == 1 else And(tuple(args))

    def unary(self) -> Formula:
        tok = self.peek()
        if tok[1] == "not":
            self.take()
            return Not(self.unary())
        if tok[1] in ("true", "false") and tok[0] == "kw":
            self.take()
            return BoolConst(tok[1] == "true")
        if tok[1] == "(":
            # either a parenthesised formula or a term starting with "("
            save = self.i
            self.take()
            try:
                f = self.formula()
                if self.peek()[1] == ")":
                    self.take()
                    if self.peek()[1] not in RELATIONS and self.peek()[1] not in "+-*/^":
                        return f
            except ParseError:
                pass
            self.i = save
        return self.relation()

    def relation(self) -> Formula:
        terms = [self.term()]
        ops = []
        while self.peek()[1] in RELATIONS:
            ops.append(self.take()[1])
            terms.append(self.term())
        if not ops:
            self.error("expected a relation (>=, >, <=, <, =, !=)")
        rels = [Rel(terms[k], ops[k], terms[k + 1]) for k in range(len(ops))]
        return rels[0] if len(rels) == 1 else And(tuple(rels))

    # terms
    def term(self) -> Term:
        args = [self.product()]
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            t = self.product()
            args.append(t if op == "+" else neg(t))
        return args[0] if len(args) == 1 else Add(tuple(args))

    def product(self) -> Term:
        t = self.signed()
        while self.peek()[1] in ("*", "/"):
            op = self.take()[1]
            rhs = self.signed()
            t = Mul((t, rhs)) if op == "*" else div(t, rhs)
        return t

    def signed(self) -> Term:
        if self.peek()[1] == "-":
            self.take()
            return neg(self.signed())
        if self.peek()[1] == "+":
            self.take()
            return self.signed()
        return self.power()

    def power(self) -> Term:
        base = self.atom()
        if self.peek()[1] == "^":
            self.take()
            tok = self.take()
            if tok[0] != "num" or "." in tok[1]:
                self.error("exponent must be a non-negative integer literal", tok)
            return Pow(base, int(tok[1]))
        return base

    def atom(self) -> Term:
        tok = self.take()
        kind, val = tok[0], tok[1]
        if kind == "num":
            return Num(Fraction(val))
        if val == "(":
            t = self.term()
            self.expect(")")
            return t
        if kind == "name":
            if self.peek()[1] == "(" and val in FUNCTIONS:
                self.take()
                arg = self.term()
                self.expect(")")
                return App(FUNCTIONS[val], arg)
            if self.peek()[1] == "(":
                self.error(f"unknown function {val!r}", tok)
            if self.known is not None and val not in self.known:
                self.error(f"undeclared variable {val!r}", tok)
            return Var(val)
        self.error(f"unexpected {val or 'end of input'!r}", tok)


def parse_term(text: str, known_vars=None) -> Term:
    p = _Parser(text, known_vars)
    t = p.term()
    if not p.at_end():
        p.error(f"unexpected {p.peek()[1]!r} after term")
    return t


def parse_formula(text: str, known_vars=None) -> Formula:
    p = _Parser(text, known_vars)
    f = p.formula()
    if not p.at_end():
        p.error(f"unexpected {p.peek()[1]!r} after formula")
    return f
