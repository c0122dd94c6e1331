"""Random-point evaluation and probabilistic zero testing.

Undetermined-function leaves (``w(z)``, ``w'(z)``, ...) are sampled as
independent values; the identities being checked are formal in them.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Mapping

import sympy as sp

from .expr import UndeterminedFunction, ZeroVerdict, to_text

__all__ = [
    "DEFAULT_TRIALS",
    "DEFAULT_TOL",
    "JetAssignment",
    "Inconclusive",
    "random_jet_point",
    "evaluate",
    "numeric_zero_check",
]

DEFAULT_TRIALS = 20
DEFAULT_TOL = 1e-9
SAMPLE_RANGE = 2.0
GUARD = 0.1
RETRY_BUDGET = 100
_PREC = 30


class Inconclusive(RuntimeError):
    pass


@dataclass(frozen=True)
class JetAssignment:
    values: Mapping[sp.Expr, float]
    seed: int

    def as_text(self) -> dict[str, float]:
        return {to_text(k): v for k, v in sorted(self.values.items(), key=lambda kv: str(kv[0]))}


def _guarded_symbols(e: sp.Expr) -> set:
    """Symbols in denominators or logarithm arguments."""
    out = set()
    for node in sp.preorder_traversal(e):
        if isinstance(node, sp.Pow) and node.exp.is_number and node.exp.is_negative:
            out |= node.base.free_symbols
        elif isinstance(node, sp.Pow) and node.exp.is_Rational and not node.exp.is_Integer:
            out |= node.base.free_symbols
        elif isinstance(node, sp.log):
            out |= node.args[0].free_symbols
    return out


def _draw(rng: random.Random, guarded: bool, positive: bool) -> float:
    lo = GUARD if positive else -SAMPLE_RANGE
    while True:
        v = rng.uniform(lo, SAMPLE_RANGE)
        if not guarded or abs(v) >= GUARD:
            return v


def _leaves(e: sp.Expr, space) -> tuple[list, list]:
    symbols = sorted(e.free_symbols, key=str)
    funcs = sorted(e.atoms(UndeterminedFunction), key=str)
    return symbols, funcs


def random_jet_point(space, seed: int, constraints=None, expr: sp.Expr | None = None,
                     extra_guard: set | None = None) -> JetAssignment:
    """Sample every symbol of ``expr`` (or every coordinate of ``space``).

    With ``constraints`` the constrained jet coordinates are computed from the
    oriented rules, so the point lies on the solution manifold.
    """
    rng = random.Random(seed)
    positive = set(getattr(space, "positive", ()) or ())
    if expr is None:
        symbols = list(space.base) + list(space.constant_symbols) + space.coordinates()
        funcs = []
        guard = set()
    else:
        symbols, funcs = _leaves(expr, space)
        guard = _guarded_symbols(expr)
    guard |= extra_guard or set()
    values: dict = {}
    constrained = []
    for s in symbols:
        if constraints is not None and constraints.is_constrained(s):
            constrained.append(s)
            continue
        values[s] = _draw(rng, s in guard, s.name in positive)
    if constrained:
        rules = {s: constraints.constraint_value(s) for s in constrained}
        for r in rules.values():
            guard |= _guarded_symbols(r)
        needed = set().union(*(r.free_symbols for r in rules.values())) - set(values)
        for s in sorted(needed, key=str):
            values[s] = _draw(rng, s in guard, s.name in positive)
        funcs = list(dict.fromkeys(funcs + sorted(set().union(*(r.atoms(UndeterminedFunction)
                                                                for r in rules.values())), key=str)))
    for f in funcs:
        values[f] = _draw(rng, True, False)
    if constrained:
        for s, rule in rules.items():
            values[s] = _evaluate_raw(rule, values)
    return JetAssignment(values, seed)


def _num(v):
    if isinstance(v, complex):
        return sp.Float(v.real, _PREC) + sp.I * sp.Float(v.imag, _PREC)
    return sp.Float(v, _PREC)


def _evaluate_raw(e: sp.Expr, values: Mapping) -> complex:
    funcs = {k: _num(v) for k, v in values.items() if isinstance(k, UndeterminedFunction)}
    syms = {k: _num(v) for k, v in values.items() if not isinstance(k, UndeterminedFunction)}
    # function leaves first: their arguments contain symbols
    out = sp.N(e.xreplace(funcs).xreplace(syms), _PREC)
    if out.has(sp.zoo, sp.nan, sp.oo, -sp.oo):
        raise ZeroDivisionError("singular sample")
    val = complex(out)
    return val.real if val.imag == 0 else val


def evaluate(e: sp.Expr, point: JetAssignment) -> complex:
    return _evaluate_raw(sp.sympify(e), point.values)


def numeric_zero_check(e: sp.Expr, space=None, *, trials: int = DEFAULT_TRIALS, tol: float = DEFAULT_TOL,
                       seed: int = 0, constraints=None) -> ZeroVerdict:
    """Evaluate at ``trials`` random points; NonZero at the first violation."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    e = sp.sympify(e)
    done = 0
    failures = 0
    max_abs = 0.0
    attempt = 0
    while done < trials:
        attempt += 1
        try:
            point = random_jet_point(space, seed * 1_000_003 + attempt, constraints, e)
            val = evaluate(e, point)
        except (ZeroDivisionError, TypeError, ValueError, OverflowError):
            failures += 1
            if failures > RETRY_BUDGET:
                raise Inconclusive("inconclusive: no valid sample")
            continue
        mag = abs(val)
        if mag > tol:
            return ZeroVerdict(ZeroVerdict.NONZERO, done + 1, mag, point.as_text(), val)
        max_abs = max(max_abs, mag)
        done += 1
    return ZeroVerdict(ZeroVerdict.NUMERIC, done, max_abs)
