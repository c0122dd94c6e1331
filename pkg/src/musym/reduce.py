"""Symmetry reduction by a user-supplied invariant ansatz, and splitting.

The ansatz names invariant variables z_k (expressions in the base variables),
replacement forms for the dependent variables built from undetermined
functions of the z_k, and the non-invariant variables s left over after
reduction.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import sympy as sp

from .expr import UndeterminedFunction, function_leaves, normalize, substitute_with_limit, to_text
from .jet import JetSpace, PDESystem

__all__ = [
    "Ansatz",
    "Reduction",
    "NotPolynomialInS",
    "reduce_with_ansatz",
    "split_by_noninvariant",
    "verify_reduction_consistency",
]


class NotPolynomialInS(ValueError):
    def __init__(self, kernel):
        self.kernel = kernel
        super().__init__(f"not polynomial in s: offending kernel {to_text(kernel)}")


@dataclass(frozen=True)
class Ansatz:
    invariants: Mapping[str, str]
    forms: Mapping[str, str]
    functions: Mapping[str, int]
    noninvariant: tuple[str, ...] = ()
    eliminate: str | None = None

    def space_for(self, space: JetSpace) -> JetSpace:
        return space.with_names(extra=tuple(self.invariants), functions=dict(self.functions))

    def parsed(self, space: JetSpace):
        """(z symbol -> expression in base variables, dependent index -> form)."""
        ext = self.space_for(space)
        zs = {sp.Symbol(k): ext.parse(v) for k, v in self.invariants.items()}
        forms = {}
        for name, text in self.forms.items():
            if name not in space.dependent:
                raise ValueError(f"ansatz form for unknown dependent variable {name!r}")
            forms[space.dependent.index(name)] = ext.parse(text)
        for a, f in forms.items():
            if ext.jet_symbols(f):
                raise ValueError("ansatz forms must not contain jet coordinates")
            for leaf in function_leaves(f):
                if not set(leaf.free_symbols) <= set(zs):
                    raise ValueError(f"arguments of {to_text(leaf)} must be declared invariants")
        if len(forms) != space.q:
            raise ValueError("the ansatz needs one form per dependent variable")
        return ext, zs, forms


@dataclass
class Reduction:
    equations: list
    factors: list
    eliminated: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    def as_text(self):
        return [to_text(e) for e in self.equations]


def _lift(forms, zs, space: JetSpace, symbols) -> dict:
    in_base = {a: f.xreplace(zs) for a, f in forms.items()}
    values = {}
    for s in symbols:
        a, J = space.decode(s)
        v = in_base[a]
        for i, c in enumerate(J):
            if c:
                v = sp.diff(v, space.base[i], c)
        values[s] = v
    return values


def _elimination(zs: dict, space: JetSpace, keep: set, preferred: str | None) -> dict:
    """Solve each z = z(x) for one base variable not in ``keep``."""
    rules = {}
    used = set()
    for z, expr in zs.items():
        names = [preferred] if preferred else list(space.independent)
        done = False
        for name in names:
            x = sp.Symbol(name)
            if name in keep or x in used or x not in expr.free_symbols:
                continue
            sols = sp.solve(sp.Eq(z, expr), x, dict=False)
            if len(sols) == 1:
                rules[x] = sols[0]
                used.add(x)
                done = True
                break
        if not done and expr != z:
            raise ValueError(f"cannot express the base variables through invariant {z}")
    return rules


def _cleared(e):
    """Split off an overall factor: e = factor * core with core's denominator 1."""
    if e == 0:
        return sp.S.One, sp.S.Zero
    n, d = sp.fraction(sp.together(e))
    n = sp.expand(n)
    content, prim = sp.factor_terms(n).as_coeff_Mul()
    return normalize(content / d), normalize(n / content)


def reduce_with_ansatz(sys: PDESystem, ansatz: Ansatz) -> Reduction:
    """Substitute the jet lift of the ansatz into each equation and rewrite in z."""
    ext, zs, forms = ansatz.parsed(sys.space)
    elim = _elimination(zs, sys.space, set(ansatz.noninvariant), ansatz.eliminate)
    equations, factors, notes = [], [], []
    for d in sys.expressions:
        values = _lift(forms, zs, sys.space, sys.space.jet_symbols(d))
        base_forms = {sys.space.jet(a): f.xreplace(zs) for a, f in forms.items()}
        values.update(base_forms)
        lifted, limited = substitute_with_limit(d, values)
        if limited:
            notes.append(f"{to_text(d)}: reduced as a one-sided limit at a branch boundary")
        reduced = normalize(lifted.subs(elim))
        factor, core = _cleared(reduced)
        equations.append(core)
        factors.append(factor)
    return Reduction(equations, factors, {str(k): to_text(v) for k, v in elim.items()}, notes)


def _s_monomial(d, s_syms):
    """Write ``d`` as (s-monomial) * (s-free part) or raise."""
    mono = sp.S.One
    rest = sp.S.One
    for f in sp.Mul.make_args(sp.factor(d)):
        base, exp = f.as_base_exp()
        if base in s_syms:
            mono *= f
        elif f.free_symbols & s_syms:
            raise NotPolynomialInS(f)
        else:
            rest *= f
    return mono, rest


def split_by_noninvariant(e, s: Sequence) -> list[tuple[sp.Expr, sp.Expr]]:
    """Group ``e`` by monomials in ``s`` (negative powers allowed)."""
    e = normalize(e)
    s_syms = [sp.Symbol(v) if isinstance(v, str) else v for v in s]
    sset = set(s_syms)
    n, d = sp.fraction(e)
    dmono, drest = _s_monomial(d, sset)
    n = sp.expand(n)
    if not sset & n.free_symbols:
        return [(normalize(1 / dmono), normalize(n / drest))]
    try:
        poly = sp.Poly(n, *s_syms)
    except sp.PolynomialError:
        poly = None
    if poly is None or any(c.free_symbols & sset for c in poly.coeffs()):
        for node in sp.preorder_traversal(n):
            if node.free_symbols & sset and not node.is_Symbol and not node.is_Add and not node.is_Mul \
                    and not (node.is_Pow and node.base in sset and node.exp.is_Integer):
                raise NotPolynomialInS(node)
        raise NotPolynomialInS(n)
    out = []
    for monom, coeff in zip(poly.monoms(), poly.coeffs()):
        m = sp.Mul(*(v ** k for v, k in zip(s_syms, monom)))
        out.append((normalize(m / dmono), normalize(coeff / drest)))
    return out


def verify_reduction_consistency(sys: PDESystem, ansatz: Ansatz, solution_of_components: Mapping, *,
                                 trials=20, tol=1e-9, seed=0):
    """Rebuild u^a(x) from the ansatz and a component solution; verify against ``sys``."""
    from .symcheck import verify_solution

    ext, zs, forms = ansatz.parsed(sys.space)
    sols = {}
    for name, text in solution_of_components.items():
        arity = dict(ansatz.functions).get(name)
        if arity is None:
            raise ValueError(f"{name!r} is not an ansatz function")
        sols[name] = ext.parse(text) if isinstance(text, str) else sp.sympify(text)
    zlist = list(zs)

    def replace(leaf):
        if leaf.base_name not in sols:
            return leaf
        v = sols[leaf.base_name]
        args = dict(zip(zlist, leaf.args)) if len(leaf.args) == len(zlist) else {zlist[0]: leaf.args[0]}
        for k, c in enumerate(leaf.derivs):
            if c:
                v = sp.diff(v, list(args)[k], c)
        return v.xreplace(args)

    solution = {}
    for a, f in forms.items():
        g = f.replace(lambda x: isinstance(x, UndeterminedFunction), replace)
        solution[sys.space.dependent[a]] = normalize(g.xreplace(zs))
    verdict = verify_solution(solution, sys, trials=trials, tol=tol, seed=seed)
    verdict.kind = "reduction-consistency"
    verdict.notes.append("reconstructed: " + "; ".join(f"{k} = {to_text(v)}" for k, v in solution.items()))
    return verdict
