"""Horizontal gl(q)-valued one-forms, gauge maps and their interplay.

The compatibility (horizontal Maurer-Cartan) residual of mu = Lambda_i dx^i is
D_i Lambda_j - D_j Lambda_i + [Lambda_i, Lambda_j]; a gauge map gamma has
horizontal Darboux derivative Lambda_i = gamma^-1 D_i gamma and acts on
vertical fields blockwise on every coefficient vector (Psi^1_J, ..., Psi^q_J).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import sympy as sp

from .expr import ZeroVerdict, is_zero, normalize, to_text
from .jet import JetSpace, PDESystem, total_derivative
from .vfield import Characteristic, ProlongedField

__all__ = [
    "HorizontalForm",
    "GaugeMap",
    "CompatibilityVerdict",
    "compatibility_residual",
    "check_compatibility",
    "darboux_derivative",
    "gauge_act",
    "find_scalar_potential",
    "verify_gauge_factor",
    "PotentialError",
]

GLOBAL = "Global"
ON_SOLUTIONS = "OnSolutionManifold"
FAILS = "Fails"


class PotentialError(ValueError):
    pass


def _matrix(entries) -> sp.ImmutableMatrix:
    m = sp.ImmutableMatrix(entries)
    return m.applyfunc(normalize)


@dataclass(frozen=True)
class HorizontalForm:
    """mu = Lambda_i dx^i, one q x q matrix per independent variable."""

    matrices: tuple[sp.ImmutableMatrix, ...]

    def __post_init__(self):
        mats = tuple(_matrix(m) for m in self.matrices)
        if not mats:
            raise ValueError("a horizontal form needs at least one component")
        shape = mats[0].shape
        if shape[0] != shape[1] or any(m.shape != shape for m in mats):
            raise ValueError("all Lambda_i must be square and share one dimension")
        object.__setattr__(self, "matrices", mats)

    @classmethod
    def scalar(cls, lambdas: Sequence) -> "HorizontalForm":
        return cls(tuple(sp.ImmutableMatrix([[lam]]) for lam in lambdas))

    @classmethod
    def zero(cls, p: int, q: int) -> "HorizontalForm":
        return cls(tuple(sp.zeros(q, q) for _ in range(p)))

    @property
    def q(self) -> int:
        return self.matrices[0].shape[0]

    @property
    def p(self) -> int:
        return len(self.matrices)

    @property
    def is_zero_form(self) -> bool:
        return all(m.is_zero_matrix for m in self.matrices)

    def as_text(self):
        if self.q == 1:
            return [to_text(m[0, 0]) for m in self.matrices]
        return [[[to_text(v) for v in row] for row in m.tolist()] for m in self.matrices]


@dataclass(frozen=True)
class GaugeMap:
    """Invertible q x q matrix gamma with a cached symbolic inverse."""

    matrix: sp.ImmutableMatrix
    inverse: sp.ImmutableMatrix = field(default=None, compare=False)

    def __post_init__(self):
        m = _matrix(self.matrix)
        if m.shape[0] != m.shape[1]:
            raise ValueError("gauge map must be square")
        det = normalize(m.det(method="berkowitz"))
        if det == 0:
            raise ValueError("gauge map is singular: determinant is identically zero")
        inv = (m.adjugate() / det).applyfunc(normalize)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "inverse", sp.ImmutableMatrix(inv))

    @classmethod
    def scalar(cls, g) -> "GaugeMap":
        return cls(sp.ImmutableMatrix([[g]]))

    @classmethod
    def identity(cls, q: int) -> "GaugeMap":
        return cls(sp.eye(q))

    @property
    def q(self) -> int:
        return self.matrix.shape[0]

    def inv(self) -> "GaugeMap":
        return GaugeMap(self.inverse)

    def __matmul__(self, other: "GaugeMap") -> "GaugeMap":
        return GaugeMap(self.matrix * other.matrix)


@dataclass(frozen=True)
class CompatibilityVerdict:
    status: str
    residuals: dict
    restricted: dict
    witnesses: list
    strength: str = "symbolic"

    @property
    def ok(self) -> bool:
        return self.status != FAILS


def _total_matrix(m, i, space):
    return m.applyfunc(lambda v: total_derivative(v, i, space, normal=False))


def compatibility_residual(mu: HorizontalForm, i: int, j: int, space: JetSpace) -> sp.ImmutableMatrix:
    """D_i Lambda_j - D_j Lambda_i + [Lambda_i, Lambda_j], entrywise normalized."""
    if i == j:
        raise ValueError("compatibility residual needs i != j")
    Li, Lj = mu.matrices[i], mu.matrices[j]
    res = _total_matrix(Lj, i, space) - _total_matrix(Li, j, space) + Li * Lj - Lj * Li
    return _matrix(res)


def check_compatibility(mu: HorizontalForm, space: JetSpace, sys: PDESystem | None = None, *,
                        trials: int = 20, tol: float = 1e-9, seed: int = 0) -> CompatibilityVerdict:
    residuals = {}
    for i in range(space.p):
        for j in range(i + 1, space.p):
            residuals[(i, j)] = compatibility_residual(mu, i, j, space)
    if all(m.is_zero_matrix for m in residuals.values()):
        return CompatibilityVerdict(GLOBAL, residuals, {}, [])
    restricted = {}
    witnesses = []
    strength = "symbolic"
    if sys is not None:
        for key, m in residuals.items():
            restricted[key] = m.applyfunc(sys.restrict)
        for key, m in restricted.items():
            for v in m:
                if v == 0:
                    continue
                verdict = is_zero(v, space, constraints=None, trials=trials, tol=tol, seed=seed)
                if verdict.status == ZeroVerdict.NUMERIC:
                    strength = "numeric"
                elif not verdict.is_zero:
                    witnesses.append({"pair": key, "value": verdict.value, "point": verdict.witness})
        if not witnesses:
            return CompatibilityVerdict(ON_SOLUTIONS, residuals, restricted, [], strength)
        return CompatibilityVerdict(FAILS, residuals, restricted, witnesses, strength)
    for key, m in residuals.items():
        for v in m:
            verdict = is_zero(v, space, trials=trials, tol=tol, seed=seed)
            if not verdict.is_zero:
                witnesses.append({"pair": key, "value": verdict.value, "point": verdict.witness})
            elif verdict.status == ZeroVerdict.NUMERIC:
                strength = "numeric"
    status = FAILS if witnesses else GLOBAL
    return CompatibilityVerdict(status, residuals, {}, witnesses, strength)


def darboux_derivative(gamma: GaugeMap, space: JetSpace) -> HorizontalForm:
    """Lambda_i = gamma^-1 (D_i gamma)."""
    return HorizontalForm(tuple(gamma.inverse * _total_matrix(gamma.matrix, i, space)
                                for i in range(space.p)))


def gauge_act(gamma: GaugeMap, Y):
    """Multiply every coefficient vector of ``Y`` by gamma (jet representation)."""
    if isinstance(Y, Characteristic):
        if len(Y.q) != gamma.q:
            raise ValueError("dimension mismatch")
        vec = gamma.matrix * sp.Matrix(Y.q)
        return Characteristic(tuple(normalize(v) for v in vec))
    if isinstance(Y, ProlongedField):
        q = Y.space.q
        if gamma.q != q:
            raise ValueError("dimension mismatch")
        table = {}
        for J in Y.multiindices():
            vec = gamma.matrix * sp.Matrix(Y.vector(J))
            for a in range(q):
                table[(a, J)] = normalize(vec[a])
        return ProlongedField(Y.field, Y.space, Y.order, table, Y.mu, "gauged")
    raise TypeError(f"cannot gauge-act on {type(Y).__name__}")


# ---------------------------------------------------------------------------
# scalar potentials


def _integrate_term(term, v, others):
    """Antiderivative of one additive term in ``v`` from a small supported class."""
    if v not in term.free_symbols:
        return term * v
    # arctan pattern: d/dv arctan(s/v) = -s/(s^2+v^2), d/dv arctan(v/s) = s/(s^2+v^2)
    for s in sorted(term.free_symbols - {v}, key=str):
        for cand in (sp.atan(s / v), sp.atan(v / s)):
            dc = sp.diff(cand, v)
            c = normalize(term / dc)
            if not c.free_symbols - set(others) - {v, s} and not c.free_symbols & {v, s}:
                return c * cand
    num, den = sp.fraction(sp.together(term))
    if num.is_polynomial(v) and den.is_polynomial(v):
        anti = sp.integrate(sp.apart(term, v), v)
    else:
        anti = sp.integrate(term, v, risch=False)
    if anti.has(sp.Integral):
        raise PotentialError(f"antiderivative not in supported class: {to_text(term)}")
    return anti


def _antiderivative(expr, v, others):
    expr = normalize(expr)
    try:
        return _integrate_term(expr, v, others)
    except PotentialError:
        pass
    return sum((_integrate_term(t, v, others) for t in sp.Add.make_args(sp.expand(expr))), sp.S.Zero)


def find_scalar_potential(mu: HorizontalForm, space: JetSpace):
    """Return (V, gamma) with dV/dx^i = lambda_i and gamma = exp(V), for q = 1."""
    if mu.q != 1:
        raise ValueError("scalar potentials need q = 1")
    lams = [m[0, 0] for m in mu.matrices]
    if any(space.jet_symbols(lam) for lam in lams):
        raise PotentialError("jet-dependent coefficients; supply gamma or P explicitly")
    for i in range(space.p):
        for j in range(i + 1, space.p):
            if normalize(sp.diff(lams[j], space.base[i]) - sp.diff(lams[i], space.base[j])) != 0:
                raise PotentialError("mu is not closed, no potential exists")
    base = list(space.base)
    V = sp.S.Zero
    for i, x in enumerate(base):
        remainder = normalize(lams[i] - sp.diff(V, x))
        if remainder == 0:
            continue
        if set(base[:i]) & remainder.free_symbols:
            raise PotentialError("antiderivative not in supported class")
        V = V + _antiderivative(remainder, x, base[i + 1:] + list(space.constant_symbols))
    for i, x in enumerate(base):
        if normalize(sp.diff(V, x) - lams[i]) != 0:
            raise PotentialError("antiderivative not in supported class")
    V = sp.expand(V)
    return V, sp.exp(V)


def verify_gauge_factor(gamma: GaugeMap, mu: HorizontalForm, space: JetSpace,
                        sys: PDESystem | None = None, *, trials: int = 20, tol: float = 1e-9,
                        seed: int = 0) -> CompatibilityVerdict:
    """Check mu - gamma^-1 D gamma entrywise (a gauge factor, never claimed unique)."""
    if gamma.q != mu.q:
        raise ValueError("dimension mismatch")
    dd = darboux_derivative(gamma, space)
    residuals = {i: _matrix(mu.matrices[i] - dd.matrices[i]) for i in range(space.p)}
    if all(m.is_zero_matrix for m in residuals.values()):
        return CompatibilityVerdict(GLOBAL, residuals, {}, [])
    witnesses = []
    restricted = {}
    if sys is not None:
        restricted = {i: m.applyfunc(sys.restrict) for i, m in residuals.items()}
        if all(m.is_zero_matrix for m in restricted.values()):
            return CompatibilityVerdict(ON_SOLUTIONS, residuals, restricted, [])
    source = restricted or residuals
    strength = "symbolic"
    for i, m in source.items():
        for v in m:
            verdict = is_zero(v, space, trials=trials, tol=tol, seed=seed)
            if not verdict.is_zero:
                witnesses.append({"component": i, "value": verdict.value, "point": verdict.witness})
            elif verdict.status == ZeroVerdict.NUMERIC:
                strength = "numeric"
    if witnesses:
        return CompatibilityVerdict(FAILS, residuals, restricted, witnesses, strength)
    return CompatibilityVerdict(ON_SOLUTIONS if restricted else GLOBAL, residuals, restricted, [], strength)
