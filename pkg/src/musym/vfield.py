"""Vector fields, characteristics, standard and mu-prolongations."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import sympy as sp

from .expr import normalize
from .jet import JetSpace, MultiIndex, multiindices, order_of, total_derivative

__all__ = [
    "VectorField",
    "Characteristic",
    "ProlongedField",
    "characteristic",
    "evolutionary",
    "prolong_standard",
    "prolong_mu",
    "apply",
    "recursion_residual",
    "nabla",
]


@dataclass(frozen=True)
class VectorField:
    """X = xi^i d/dx^i + phi^a d/du^a (coefficients may depend on jets)."""

    xi: tuple[sp.Expr, ...]
    phi: tuple[sp.Expr, ...]

    def __post_init__(self):
        object.__setattr__(self, "xi", tuple(normalize(c) for c in self.xi))
        object.__setattr__(self, "phi", tuple(normalize(c) for c in self.phi))

    @classmethod
    def evolutionary(cls, q: Sequence, p: int) -> "VectorField":
        return cls((sp.S.Zero,) * p, tuple(q))

    @classmethod
    def parse(cls, space: JetSpace, xi: Mapping[str, str] | None = None,
              phi: Mapping[str, str] | None = None) -> "VectorField":
        xi = xi or {}
        phi = phi or {}
        unknown = (set(xi) - set(space.independent)) | (set(phi) - set(space.dependent))
        if unknown:
            raise ValueError(f"unknown variables in vector field: {sorted(unknown)}")
        return cls(tuple(space.parse(xi.get(x, "0")) for x in space.independent),
                   tuple(space.parse(phi.get(u, "0")) for u in space.dependent))

    @property
    def is_evolutionary(self) -> bool:
        return all(c == 0 for c in self.xi)

    def scaled(self, factor) -> "VectorField":
        return VectorField(tuple(factor * c for c in self.xi), tuple(factor * c for c in self.phi))

    def __add__(self, other: "VectorField") -> "VectorField":
        return VectorField(tuple(a + b for a, b in zip(self.xi, other.xi)),
                           tuple(a + b for a, b in zip(self.phi, other.phi)))


@dataclass(frozen=True)
class Characteristic:
    q: tuple[sp.Expr, ...]

    @property
    def is_trivial(self) -> bool:
        return all(c == 0 for c in self.q)


def characteristic(X: VectorField, space: JetSpace) -> Characteristic:
    """Q^a = phi^a - u^a_i xi^i."""
    out = []
    for a, phi in enumerate(X.phi):
        val = phi - sum(space.jet(a, MultiIndex.unit(space.p, i)) * X.xi[i] for i in range(space.p))
        out.append(normalize(val))
    return Characteristic(tuple(out))


def evolutionary(X: VectorField, space: JetSpace) -> VectorField:
    return VectorField.evolutionary(characteristic(X, space).q, space.p)


def _lam(mu, i):
    return None if mu is None else mu.matrices[i]


def nabla(vec: Sequence[sp.Expr], i: int, mu, space: JetSpace) -> tuple[sp.Expr, ...]:
    """(nabla_i v)^a = D_i v^a + (Lambda_i)^a_b v^b."""
    lam = _lam(mu, i)
    out = []
    for a in range(len(vec)):
        val = total_derivative(vec[a], i, space, normal=False)
        if lam is not None:
            val += sum(lam[a, b] * vec[b] for b in range(len(vec)))
        out.append(normalize(val))
    return tuple(out)


@dataclass(frozen=True)
class ProlongedField:
    """Base field plus the coefficient table Psi^a_J for |J| <= order."""

    field: VectorField
    space: JetSpace
    order: int
    table: Mapping[tuple[int, MultiIndex], sp.Expr]
    mu: object = None
    kind: str = "standard"

    @property
    def xi(self):
        return self.field.xi

    def coefficient(self, a: int, J: Sequence[int]) -> sp.Expr:
        return self.table[(a, MultiIndex(J))]

    def vector(self, J: Sequence[int]) -> tuple[sp.Expr, ...]:
        J = MultiIndex(J)
        return tuple(self.table[(a, J)] for a in range(self.space.q))

    def extended(self, n: int) -> "ProlongedField":
        if n <= self.order:
            return self
        if self.kind == "gauged":
            raise ValueError("a gauge-transformed table cannot be extended; re-prolong first")
        if self.kind == "standard":
            return prolong_standard(self.field, self.space, n)
        return prolong_mu(self.field, self.mu, self.space, n)

    def multiindices(self):
        return list(multiindices(self.space.p, self.order))


def _check_mu(mu, space):
    if mu is None:
        return
    if len(mu.matrices) != space.p:
        raise ValueError("dimension mismatch: mu needs one matrix per independent variable")
    for m in mu.matrices:
        if m.shape != (space.q, space.q):
            raise ValueError(f"dimension mismatch: mu matrices must be {space.q}x{space.q}")


def _parent(J: MultiIndex) -> int:
    return max(k for k, c in enumerate(J) if c > 0)


def _prolong_formula(X: VectorField, mu, space: JetSpace, n: int) -> dict:
    """Recursion Psi^a_{J,i} = (nabla_i)^a_b Psi^b_J - u^b_{J,m} (nabla_i)^a_b xi^m.

    With ``mu`` None this is the ordinary prolongation formula.
    """
    p, q = space.p, space.q
    table = {}
    zero = MultiIndex.zero(p)
    for a in range(q):
        table[(a, zero)] = X.phi[a]
    dxi = {}
    for J in multiindices(p, n):
        if J.order == 0:
            continue
        i = _parent(J)
        K = J.shift(i, -1)
        lam = _lam(mu, i)
        for a in range(q):
            val = total_derivative(table[(a, K)], i, space, normal=False)
            if lam is not None:
                val += sum(lam[a, b] * table[(b, K)] for b in range(q))
            for m in range(p):
                if X.xi[m] == 0:
                    continue
                if (i, m) not in dxi:
                    dxi[(i, m)] = total_derivative(X.xi[m], i, space, normal=False)
                val -= space.jet(a, K.shift(m)) * dxi[(i, m)]
                if lam is not None:
                    val -= sum(space.jet(b, K.shift(m)) * lam[a, b] for b in range(q)) * X.xi[m]
            table[(a, J)] = normalize(val)
    return table


def _evolutionary_composition(Q: Sequence[sp.Expr], mu, space: JetSpace, n: int) -> dict:
    """Psi_J = nabla_1^{j1} ... nabla_p^{jp} Q by operator composition."""
    p, q = space.p, space.q
    vectors = {MultiIndex.zero(p): tuple(Q)}
    for J in multiindices(p, n):
        if J.order == 0:
            continue
        i = min(k for k, c in enumerate(J) if c > 0)
        vectors[J] = nabla(vectors[J.shift(i, -1)], i, mu, space)
    return {(a, J): vec[a] for J, vec in vectors.items() for a in range(q)}


def prolong_standard(X: VectorField, space: JetSpace, n: int) -> ProlongedField:
    if n < 1:
        raise ValueError("prolongation order must be >= 1")
    return ProlongedField(X, space, n, _prolong_formula(X, None, space, n), None, "standard")


def prolong_mu(X: VectorField, mu, space: JetSpace, n: int) -> ProlongedField:
    """mu-prolongation; compatibility of ``mu`` is not checked here."""
    if n < 1:
        raise ValueError("prolongation order must be >= 1")
    _check_mu(mu, space)
    if X.is_evolutionary:
        table = _evolutionary_composition(X.phi, mu, space, n)
    else:
        table = _prolong_formula(X, mu, space, n)
    return ProlongedField(X, space, n, table, mu, "mu")


def apply(Yp: ProlongedField, e: sp.Expr) -> sp.Expr:
    """xi^i de/dx^i + Psi^a_J de/du^a_J, extending the prolongation if needed."""
    e = sp.sympify(e)
    space = Yp.space
    need = order_of(e, space)
    if need > Yp.order:
        Yp = Yp.extended(need)
    out = sp.S.Zero
    for i, x in enumerate(space.base):
        if Yp.xi[i] != 0:
            out += Yp.xi[i] * sp.diff(e, x)
    for s in space.jet_symbols(e):
        a, J = space.decode(s)
        out += Yp.table[(a, J)] * sp.diff(e, s)
    return normalize(out)


def recursion_residual(X: VectorField, mu, space: JetSpace, n: int) -> dict:
    """Residuals of F_{J,i} = (D_i + Lambda_i) F_J + Lambda_i D_J Q with F = Psi - Phi.

    Keys are (a, J, i); every entry should normalize to zero.
    """
    Y = prolong_mu(X, mu, space, n)
    W = prolong_standard(X, space, n)
    Q = characteristic(X, space).q
    p, q = space.p, space.q
    DQ = {MultiIndex.zero(p): tuple(Q)}
    F = {key: normalize(Y.table[key] - W.table[key]) for key in Y.table}
    out = {}
    for J in multiindices(p, n - 1):
        if J not in DQ:
            i0 = _parent(J)
            DQ[J] = tuple(total_derivative(c, i0, space) for c in DQ[J.shift(i0, -1)])
        FJ = tuple(F[(a, J)] for a in range(q))
        for i in range(p):
            lam = _lam(mu, i)
            step = nabla(FJ, i, mu, space)
            for a in range(q):
                extra = sum(lam[a, b] * DQ[J][b] for b in range(q)) if lam is not None else 0
                out[(a, J, i)] = normalize(F[(a, J.shift(i))] - step[a] - extra)
    return out
