"""Problem files, the end-to-end pipeline and presentation of results.

A problem file is line oriented::

    # comment
    name: elastic
    vars: x y a2 e' b' a b e v
    keep: a b e v
    assume: x = floor(v*b/e)
    assume: a >= 0 and b >= 0
    objective: x - y
    direction: both
    depth: 3

Indented lines continue the previous entry.  ``assume`` may repeat; the
assumptions are conjoined.  ``vars`` is optional, but when present every
identifier must be declared.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .cone import ConeBound, InconsistentCone, cred
from .numeric import format_rational
from .polynomial import MonomialOrder, Poly, effective_degree
from .polyhedron import ReduceStats
from .saturation import (ForeignMap, InconsistentAssumptions, SaturationConfig, SaturationResult,
                         saturate)
from .syntax import (Add, And, App, BoolConst, Formula, Mul, Num, ParseError, Pow, Rel, Term, Var,
                     conjuncts, count_apps, evaluate_formula, evaluate_term, formula_atoms,
                     parse_formula, parse_term, term_vars, to_nnf)

DIRECTIONS = ("upper", "lower", "both")
ENGINES = ("local", "lp")
ORDER_NAMES = {"effdeg": "effective_degree", "effective_degree": "effective_degree",
               "grevlex": "grevlex", "lex": "lex", "deglex": "deglex"}
KEYS = ("name", "vars", "keep", "assume", "objective", "direction", "depth", "order", "engine")

STAT_FIELDS = ("#eq", "#in", "#floors", "#c-eq", "#c-in", "#c-m",
               "time (s)", "csat (s)", "reduce (s)", "reduce-lp (s)")


@dataclass
class Problem:
    name: str = "problem"
    variables: Optional[List[str]] = None
    keep: Optional[List[str]] = None
    assumptions: List[str] = field(default_factory=list)
    objective: str = "0"
    direction: str = "both"
    depth: int = 3
    order: str = "effdeg"
    engine: str = "local"

    def declared(self) -> Optional[set]:
        return None if self.variables is None else set(self.variables)

    def formula(self) -> Formula:
        parts = [parse_formula(a, self.declared()) for a in self.assumptions]
        if not parts:
            return BoolConst(True)
        return parts[0] if len(parts) == 1 else And(tuple(parts))

    def objective_term(self) -> Term:
        return parse_term(self.objective, self.declared())

    def keep_set(self) -> List[str]:
        if self.keep is not None:
            return list(self.keep)
        if self.variables is not None:
            return list(self.variables)
        names = set(term_vars(self.objective_term()))
        for a in formula_atoms(self.formula()):
            names |= term_vars(a.lhs) | term_vars(a.rhs)
        return sorted(names)


def _names(text: str) -> List[str]:
    return [n for n in text.replace(",", " ").split() if n]


def _check_option(key, value, allowed, line):
    if value not in allowed:
        raise ParseError(f"{key} must be one of {', '.join(allowed)}, not {value!r}", line, 1)


def parse_problem(text: str) -> Problem:
    """Parse a problem file; errors carry the file line and column."""
    entries: List[Tuple[str, str, int, int]] = []  # key, value, line, column of value
    for lineno, raw in enumerate(text.splitlines(), 1):
        body = raw.split("#", 1)[0] if not raw.lstrip().startswith("#") else ""
        if not body.strip():
            continue
        if body[0].isspace():
            if not entries:
                raise ParseError("continuation line without an entry", lineno, 1)
            key, value, l0, c0 = entries[-1]
            entries[-1] = (key, value + "\n" + body, l0, c0)
            continue
        key, sep, value = body.partition(":")
        key = key.strip()
        if not sep or key not in KEYS:
            raise ParseError(f"expected one of {', '.join(k + ':' for k in KEYS)}", lineno, 1)
        col = len(body) - len(value) + 1
        entries.append((key, value, lineno, col))

    prob = Problem()
    seen = set()
    for key, value, line, col in entries:
        if key != "assume" and key in seen:
            raise ParseError(f"duplicate entry {key!r}", line, 1)
        seen.add(key)
        v = "\n".join(part.strip() for part in value.strip().splitlines())
        if key == "name":
            prob.name = v
        elif key == "vars":
            prob.variables = _names(v)
        elif key == "keep":
            prob.keep = _names(v)
        elif key == "assume":
            prob.assumptions.append(v)
        elif key == "objective":
            prob.objective = v
        elif key == "direction":
            _check_option(key, v, DIRECTIONS, line)
            prob.direction = v
        elif key == "depth":
            if not v.isdigit() or int(v) < 1:
                raise ParseError("depth must be a positive integer", line,
                                 col + len(value) - len(value.lstrip()))
            prob.depth = int(v)
        elif key == "order":
            _check_option(key, v, tuple(ORDER_NAMES), line)
            prob.order = v
        elif key == "engine":
            _check_option(key, v, ENGINES, line)
            prob.engine = v

    # parse every expression now so errors point into the file
    declared = prob.declared()
    keep_line = next((l for k, _, l, _ in entries if k == "keep"), 1)
    for key, value, line, col in entries:
        if key in ("assume", "objective"):
            strip = len(value) - len(value.lstrip())
            try:
                if key == "assume":
                    parse_formula(value.strip(), declared)
                else:
                    parse_term(value.strip(), declared)
            except ParseError as e:
                raise _shift(e, line, col + strip, value[:strip]) from None
    if prob.keep is not None and declared is not None:
        for k in prob.keep:
            if k not in declared:
                raise ParseError(f"keep variable {k!r} is not declared", keep_line, 1)
    return prob


def _shift(e: ParseError, line: int, col: int, prefix: str) -> ParseError:
    extra_lines = prefix.count("\n")
    msg = str(e).split(": ", 1)[1]
    if e.line == 1 and not extra_lines:
        return ParseError(msg, line, e.column + col - 1)
    return ParseError(msg, line + extra_lines + e.line - 1, e.column)


def format_problem(p: Problem) -> str:
    out = [f"name: {p.name}"]
    if p.variables is not None:
        out.append("vars: " + " ".join(p.variables))
    if p.keep is not None:
        out.append("keep: " + " ".join(p.keep))
    for a in p.assumptions:
        out.append("assume: " + a.replace("\n", "\n  "))
    out.append("objective: " + p.objective.replace("\n", "\n  "))
    out += [f"direction: {p.direction}", f"depth: {p.depth}",
            f"order: {p.order}", f"engine: {p.engine}"]
    return "\n".join(out) + "\n"


# ------------------------------------------------------------ unpurification

def unpurify(p: Poly, tm: ForeignMap) -> Term:
    """Replace every map variable by its function application, recursively."""
    memo: Dict[str, Term] = {}

    def var(name: str) -> Term:
        if name not in tm:
            return Var(name)
        if name not in memo:
            fn, arg = tm[name]
            memo[name] = App(fn, poly_term(arg))
        return memo[name]

    def poly_term(q: Poly) -> Term:
        parts = []
        for m in sorted(q.terms, key=lambda m: (-len(m), m)):
            c = q.terms[m]
            factors = [var(v) if e == 1 else Pow(var(v), e) for v, e in m]
            if c != 1 or not factors:
                factors.insert(0, Num(c))
            parts.append(factors[0] if len(factors) == 1 else Mul(tuple(factors)))
        if not parts:
            return Num(Fraction(0))
        return parts[0] if len(parts) == 1 else Add(tuple(parts))

    return poly_term(p)


def canonical_poly(t: Term) -> Poly:
    """Polynomial normal form treating each application as an atom.

    Application atoms are named after their function and the normal form of
    their argument, so terms that agree after expanding products compare
    equal.  ``inv(c)`` for a constant ``c`` folds to ``1/c``.
    """
    if isinstance(t, Num):
        return Poly.const(t.value)
    if isinstance(t, Var):
        return Poly.var(t.name)
    if isinstance(t, Add):
        out = Poly()
        for a in t.args:
            out = out + canonical_poly(a)
        return out
    if isinstance(t, Mul):
        out = Poly.const(1)
        for a in t.args:
            out = out * canonical_poly(a)
        return out
    if isinstance(t, Pow):
        return canonical_poly(t.base) ** t.exp
    arg = canonical_poly(t.arg)
    if t.fn == "inv" and arg.is_constant() and arg.constant_term():
        return Poly.const(1 / arg.constant_term())
    if t.fn == "floor" and arg.is_constant():
        c = arg.constant_term()
        return Poly.const(c.numerator // c.denominator)
    return Poly.var(f"{t.fn}[{_canon_str(arg)}]")


def _canon_str(p: Poly) -> str:
    items = sorted(p.terms.items(), key=lambda mc: (-sum(e for _, e in mc[0]), mc[0]))
    return " ".join(f"{format_rational(c)}*{'*'.join(f'{v}^{e}' for v, e in m) or '1'}"
                    for m, c in items)


def render_bound(p: Poly, tm: ForeignMap, order: Optional[MonomialOrder] = None) -> str:
    """Human-readable term; reciprocal factors print as a denominator."""
    memo: Dict[str, str] = {}

    def atom(name: str) -> Tuple[str, bool]:
        # (text, is_reciprocal)
        if name not in tm:
            return name, False
        fn, arg = tm[name]
        if name not in memo:
            memo[name] = render(arg)
        return memo[name], fn == "inv"

    def wrap(s: str, q: Poly) -> str:
        return s if len(q.terms) == 1 and (len(next(iter(q.terms))) <= 1) and \
            next(iter(q.terms.values())) == 1 else f"({s})"

    def render(q: Poly) -> str:
        if q.is_zero():
            return "0"
        if order is not None:
            monos = order.sorted_desc(q.terms)
        else:
            monos = sorted(q.terms, key=lambda m: (-sum(e for _, e in m), m))
        out = ""
        for i, m in enumerate(monos):
            c = q.terms[m]
            num, den = [], []
            for v, e in m:
                text, recip = atom(v)
                if recip:
                    piece = wrap(text, tm[v][1])
                    den.append(piece if e == 1 else f"{piece}^{e}")
                else:
                    if v in tm:
                        text = f"{tm[v][0]}({text})"
                    num.append(text if e == 1 else f"{text}^{e}")
            mag = abs(c)
            body = "*".join(num)
            if mag != 1 or not body:
                body = format_rational(mag) + ("*" + body if body else "")
            if den:
                body += "/" + (den[0] if len(den) == 1 else "(" + "*".join(den) + ")")
            if i == 0:
                out = ("-" if c < 0 else "") + body
            else:
                out += (" - " if c < 0 else " + ") + body
        return out

    return render(p)


# ---------------------------------------------------------------- pipeline

@dataclass
class DirectionReport:
    direction: str
    bounds: List[ConeBound]
    primary: ConeBound
    text: str
    term: Term
    ed: Tuple[int, int]
    unbounded: bool
    seconds: float


@dataclass
class Report:
    problem: Problem
    saturation: SaturationResult
    results: Dict[str, DirectionReport]
    stats: Dict[str, object]

    def lines(self, witness: bool = False) -> List[str]:
        out = []
        order = self.saturation.cone.order
        for d, r in self.results.items():
            rel = {"upper": "<", "lower": ">"}[d] + ("" if r.primary.strict else "=")
            if r.unbounded:
                out.append(f"{d}: unbounded {'above' if d == 'upper' else 'below'}")
            else:
                out.append(f"{d}: {self.problem.objective} {rel} {r.text}    ed {r.ed}")
            if witness:
                for name, (fn, arg) in self.saturation.tm.items():
                    out.append(f"  where {name} = {fn}({arg.to_str(order)})")
                out.append("  witness: " + r.primary.witness.to_text(order))
        return out


class InconsistentProblem(Exception):
    """The assumptions of a problem have no model."""


def input_stats(problem: Problem) -> Dict[str, int]:
    phi = to_nnf(problem.formula())
    atoms = formula_atoms(phi)
    floors = count_apps(problem.objective_term(), "floor")
    for a in atoms:
        floors += count_apps(a.lhs, "floor") + count_apps(a.rhs, "floor")
    return {"#eq": sum(a.op == "=" for a in atoms),
            "#in": sum(a.op != "=" for a in atoms),
            "#floors": floors}


def _select(bounds: List[ConeBound], order: MonomialOrder, direction: str) -> ConeBound:
    # compare as upper bounds (on -t for lower bounds): smaller is better, strict wins ties
    sign = 1 if direction == "upper" else -1
    return min(bounds, key=lambda b: (order.poly_key(b.bound.scale(sign)), not b.strict))


def run(problem: Problem, engine: Optional[str] = None) -> Report:
    """Saturate, reduce the objective in each requested direction, unpurify."""
    engine = engine or problem.engine
    start = time.perf_counter()
    config = SaturationConfig(depth=problem.depth, keep=frozenset(problem.keep_set()),
                              order=ORDER_NAMES[problem.order])
    try:
        sat = saturate(problem.formula(), config, objective=problem.objective_term(),
                       variables=problem.keep_set())
    except (InconsistentAssumptions, InconsistentCone) as e:
        raise InconsistentProblem(str(e) or "assumptions are inconsistent") from e
    cone = sat.cone
    order = cone.order
    target = sat.objective
    reduced = cone.ideal.reduce(target)
    dirs = ("upper", "lower") if problem.direction == "both" else (problem.direction,)
    results = {}
    reduce_time = 0.0
    for d in dirs:
        t0 = time.perf_counter()
        try:
            bounds = cred(cone, target, d, ReduceStats(), engine)
        except InconsistentCone as e:
            raise InconsistentProblem(str(e)) from e
        secs = time.perf_counter() - t0
        reduce_time += secs
        best = _select(bounds, order, d)
        lm = order.lm(best.bound) if not best.bound.is_zero() else ()
        unbounded = not reduced.is_constant() and best.bound == reduced
        results[d] = DirectionReport(d, bounds, best, render_bound(best.bound, sat.tm, order),
                                     unpurify(best.bound, sat.tm),
                                     effective_degree(sat.tm, config.keep, lm),
                                     unbounded, secs)
    stats: Dict[str, object] = dict(input_stats(problem))
    stats.update({"#c-eq": sat.stats.c_eq, "#c-in": sat.stats.c_ineq, "#c-m": sat.stats.monomials,
                  "time (s)": round(time.perf_counter() - start, 3),
                  "csat (s)": round(sat.stats.time_total, 3),
                  "reduce (s)": round(reduce_time, 3) if engine == "local" else None,
                  "reduce-lp (s)": round(reduce_time, 3) if engine == "lp" else None})
    return Report(problem, sat, results, stats)


def report_records(report: Report) -> List[dict]:
    """Line-delimited records: one per direction, carrying the table fields."""
    out = []
    for d, r in report.results.items():
        rec = {"problem": report.problem.name, "depth": report.problem.depth,
               "direction": d, "bound": None if r.unbounded else r.text,
               "strict": r.primary.strict, "ed": list(r.ed), "unbounded": r.unbounded}
        rec.update(report.stats)
        out.append(rec)
    return out


def bound_equals(term: Term, expected: str) -> bool:
    """Exact comparison after canonicalisation, e.g. against ``"v/(a+e) + 1"``."""
    return canonical_poly(term) == canonical_poly(parse_term(expected))


# ------------------------------------------------------ soundness sampling

def _definitions(problem: Problem) -> List[Tuple[str, Term]]:
    """``v = term`` assumptions usable to compute ``v`` from the others."""
    out = []
    for f in conjuncts(problem.formula()):
        if isinstance(f, Rel) and f.op == "=" and isinstance(f.lhs, Var):
            out.append((f.lhs.name, f.rhs))
    return out


def sample_models(problem: Problem, n: int, rng: random.Random, magnitude: int = 50,
                  max_tries: int = 200000) -> List[Dict[str, Fraction]]:
    """Random points satisfying the assumptions under real floor/inv semantics.

    Free variables get random integers (and occasionally halves); defined
    variables are computed from their defining equalities.  Points where a
    reciprocal of zero occurs or an assumption fails are rejected.
    """
    phi = problem.formula()
    obj = problem.objective_term()
    defs = _definitions(problem)
    defined = {v for v, _ in defs}
    names = set(term_vars(obj))
    for a in formula_atoms(phi):
        names |= term_vars(a.lhs) | term_vars(a.rhs)
    free = sorted(names - defined)
    out = []
    for _ in range(max_tries):
        if len(out) >= n:
            break
        env = {}
        for v in free:
            x = Fraction(rng.randint(-magnitude // 5, magnitude))
            if rng.random() < 0.1:
                x += Fraction(1, 2)
            env[v] = x
        try:
            pending = list(defs)
            while pending:
                progress = [(v, t) for v, t in pending if term_vars(t) <= env.keys()]
                if not progress:
                    break
                for v, t in progress:
                    if v not in env:
                        env[v] = evaluate_term(t, env)
                pending = [d for d in pending if d not in progress]
            if not names <= env.keys() or not evaluate_formula(phi, env):
                continue
            evaluate_term(obj, env)
        except ZeroDivisionError:
            continue
        out.append(env)
    return out


def soundness_violations(report: Report, points: Sequence[Dict[str, Fraction]]) -> List[str]:
    """Points where a reported bound fails under real semantics."""
    obj = report.problem.objective_term()
    bad = []
    for env in points:
        value = evaluate_term(obj, env)
        for d, r in report.results.items():
            for b in r.bounds:
                try:
                    bv = evaluate_term(unpurify(b.bound, report.saturation.tm), env)
                except ZeroDivisionError:
                    # the reciprocal axiom presumes a nonzero argument
                    continue
                ok = {("upper", False): value <= bv, ("upper", True): value < bv,
                      ("lower", False): value >= bv, ("lower", True): value > bv}[(d, b.strict)]
                if not ok:
                    bad.append(f"{d} bound fails at {env}")
    return bad
