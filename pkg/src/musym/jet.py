"""Jet coordinates, total derivatives and oriented PDE systems."""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import sympy as sp

from .expr import normalize

__all__ = [
    "MultiIndex",
    "JetSpace",
    "OrientationError",
    "OrientationCycle",
    "InconsistentSystem",
    "Equation",
    "PDESystem",
    "total_derivative",
    "total_derivative_multi",
    "order_of",
]


class MultiIndex(tuple):
    """Derivative counts per independent variable."""

    def __new__(cls, counts: Iterable[int]):
        counts = tuple(int(c) for c in counts)
        if any(c < 0 for c in counts):
            raise ValueError("multiindex entries must be nonnegative")
        return super().__new__(cls, counts)

    @classmethod
    def zero(cls, p: int) -> "MultiIndex":
        return cls((0,) * p)

    @classmethod
    def unit(cls, p: int, i: int) -> "MultiIndex":
        return cls(1 if k == i else 0 for k in range(p))

    @property
    def order(self) -> int:
        return sum(self)

    def __add__(self, other):
        if len(self) != len(other):
            raise ValueError("multiindex length mismatch")
        return MultiIndex(a + b for a, b in zip(self, other))

    def __sub__(self, other):
        return MultiIndex(a - b for a, b in zip(self, other))

    def shift(self, i: int, by: int = 1) -> "MultiIndex":
        return MultiIndex(c + by if k == i else c for k, c in enumerate(self))

    def divides(self, other) -> bool:
        return all(a <= b for a, b in zip(self, other))

    def rank_key(self):
        # graded lexicographic, earlier variables weigh more on ties
        return (self.order, tuple(self))

    def __repr__(self):
        return f"MultiIndex{tuple(self)}"


def multiindices(p: int, n: int) -> Iterator[MultiIndex]:
    """All multiindices of order <= n, by increasing order."""
    for k in range(n + 1):
        for combo in itertools.combinations_with_replacement(range(p), k):
            counts = [0] * p
            for i in combo:
                counts[i] += 1
            yield MultiIndex(counts)


_BRACKET = re.compile(r"^([A-Za-z][A-Za-z0-9]*)\[(\d+(?:,\d+)*)\]$")


@dataclass(frozen=True)
class JetSpace:
    """Coordinate frame: independent/dependent variables plus declared names."""

    independent: tuple[str, ...]
    dependent: tuple[str, ...]
    order: int = 1
    constants: tuple[str, ...] = ()
    functions: tuple[tuple[str, int], ...] = ()
    positive: frozenset[str] = frozenset()
    extra: tuple[str, ...] = ()
    _decode: dict = field(default_factory=dict, compare=False, hash=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "independent", tuple(self.independent))
        object.__setattr__(self, "dependent", tuple(self.dependent))
        object.__setattr__(self, "constants", tuple(self.constants))
        object.__setattr__(self, "functions", tuple(dict(self.functions).items()))
        object.__setattr__(self, "positive", frozenset(self.positive))
        object.__setattr__(self, "extra", tuple(self.extra))
        if not self.independent or not self.dependent or self.order < 1:
            raise ValueError("need p >= 1, q >= 1 and n >= 1")
        names = list(self.independent) + list(self.dependent) + list(self.constants) + list(self.extra)
        if len(set(names)) != len(names):
            raise ValueError("duplicate variable or constant names")

    # -- basic shape
    @property
    def p(self) -> int:
        return len(self.independent)

    @property
    def q(self) -> int:
        return len(self.dependent)

    @property
    def short_names(self) -> bool:
        return all(len(x) == 1 for x in self.independent)

    @property
    def base(self) -> tuple[sp.Symbol, ...]:
        return tuple(sp.Symbol(x) for x in self.independent)

    @property
    def constant_symbols(self) -> tuple[sp.Symbol, ...]:
        return tuple(sp.Symbol(c) for c in self.constants)

    def with_names(self, *, extra=(), functions=None, order=None) -> "JetSpace":
        funcs = dict(self.functions)
        funcs.update(functions or {})
        return JetSpace(self.independent, self.dependent, order or self.order,
                        self.constants, funcs, self.positive,
                        tuple(dict.fromkeys(self.extra + tuple(extra))))

    def with_order(self, n: int) -> "JetSpace":
        return self.with_names(order=n)

    # -- jet symbols
    def jet_name(self, a: int, J: Sequence[int]) -> str:
        name = self.dependent[a]
        if not any(J):
            return name
        if self.short_names:
            return name + "_" + "".join(x * j for x, j in zip(self.independent, J))
        return f"{name}[{','.join(map(str, J))}]"

    def jet(self, a: int, J: Sequence[int] | None = None) -> sp.Symbol:
        if J is None:
            J = (0,) * self.p
        return sp.Symbol(self.jet_name(a, tuple(J)))

    def u(self, name: str, J: Sequence[int] | None = None) -> sp.Symbol:
        return self.jet(self.dependent.index(name), J)

    def decode(self, sym) -> tuple[int, MultiIndex] | None:
        """Return (dependent index, multiindex) for a jet coordinate, else None."""
        if not isinstance(sym, sp.Symbol):
            return None
        name = sym.name
        if name in self._decode:
            return self._decode[name]
        result = self._decode_name(name)
        if result is not None and self.jet_name(*result) != name:
            result = None
        self._decode[name] = result
        return result

    def _decode_name(self, name: str):
        if name in self.dependent:
            return self.dependent.index(name), MultiIndex.zero(self.p)
        m = _BRACKET.match(name)
        if m and m.group(1) in self.dependent:
            J = tuple(int(v) for v in m.group(2).split(","))
            if len(J) == self.p:
                return self.dependent.index(m.group(1)), MultiIndex(J)
            return None
        if self.short_names and "_" in name:
            head, _, tail = name.rpartition("_")
            if head in self.dependent and tail and all(c in self.independent for c in tail):
                counts = [tail.count(x) for x in self.independent]
                return self.dependent.index(head), MultiIndex(counts)
        return None

    def is_jet(self, sym) -> bool:
        return self.decode(sym) is not None

    def jet_symbols(self, e: sp.Expr) -> list[sp.Symbol]:
        out = [s for s in e.free_symbols if self.decode(s) is not None]
        return sorted(out, key=lambda s: self.rank_key(s))

    def rank_key(self, sym):
        a, J = self.decode(sym)
        return (J.order, tuple(J), a)

    def coordinates(self, n: int | None = None) -> list[sp.Symbol]:
        """Every jet coordinate u^a_J with |J| <= n, duplicate-free."""
        n = self.order if n is None else n
        return [self.jet(a, J) for J in multiindices(self.p, n) for a in range(self.q)]

    # -- parser hooks
    def lookup(self, name: str):
        if name in self.independent or name in self.constants or name in self.extra:
            return sp.Symbol(name)
        dec = self._decode_name(name)
        if dec is not None:
            return self.jet(*dec)
        return None

    def jet_from_indices(self, name, indices):
        if name in self.dependent and len(indices) == self.p:
            return self.jet(self.dependent.index(name), indices)
        return None

    def function_arity(self, name):
        return dict(self.functions).get(name)

    def positive_names(self):
        return self.positive

    def parse(self, text: str) -> sp.Expr:
        from .expr import parse
        return parse(text, self)


def order_of(e: sp.Expr, space: JetSpace) -> int:
    """Highest derivative order of any jet coordinate in ``e`` (0 if none)."""
    orders = [space.decode(s)[1].order for s in space.jet_symbols(e)]
    return max(orders, default=0)


def total_derivative(e: sp.Expr, i: int, space: JetSpace, *, normal: bool = True) -> sp.Expr:
    """D_i e = de/dx^i + sum u^a_{J+e_i} de/du^a_J."""
    e = sp.sympify(e)
    out = sp.diff(e, space.base[i])
    for s in space.jet_symbols(e):
        a, J = space.decode(s)
        out += space.jet(a, J.shift(i)) * sp.diff(e, s)
    return normalize(out) if normal else out


def total_derivative_multi(e: sp.Expr, J: Sequence[int], space: JetSpace) -> sp.Expr:
    for i, count in enumerate(J):
        for _ in range(count):
            e = total_derivative(e, i, space)
    return e


# ---------------------------------------------------------------------------
# PDE systems


class OrientationError(ValueError):
    pass


class OrientationCycle(OrientationError):
    def __init__(self, message="orientation cycle"):
        super().__init__(message)


class InconsistentSystem(OrientationError):
    """An equation reduced to a nonzero relation free of jet coordinates."""

    def __init__(self, relation):
        self.relation = relation
        super().__init__(f"system is inconsistent: reduces to {relation} = 0")


@dataclass(frozen=True)
class Equation:
    """Delta = factor * (lead - rhs); ``factor`` is declared nonzero."""

    expr: sp.Expr
    lead: sp.Symbol
    rhs: sp.Expr
    factor: sp.Expr
    label: str = ""


_MAX_PASSES = 60


def _solve_linear(expr, lead):
    coeff = normalize(sp.diff(expr, lead))
    if coeff == 0:
        return None
    if normalize(sp.diff(coeff, lead)) != 0:
        return None
    rest = normalize(expr - coeff * lead)
    return normalize(-rest / coeff), coeff


class PDESystem:
    """Oriented equations generating rewrite rules for the solution manifold.

    Equations are added in order; each is reduced by the rules before it and
    solved for its declared leading derivative, after which earlier right-hand
    sides are re-reduced.  Instances are not mutated after construction apart
    from an internal memo of differential consequences.
    """

    def __init__(self, space: JetSpace, equations: Sequence[Equation]):
        self.space = space
        self.equations = tuple(equations)
        self._memo: dict = {}
        self._busy: set = set()
        leads = [space.decode(eq.lead) for eq in self.equations]
        if len(set(map(tuple, ((a, tuple(J)) for a, J in leads)))) != len(leads):
            raise OrientationError("leading derivatives must be pairwise distinct")
        self._leads = leads
        for k, eq in enumerate(self.equations):
            bad = [s for s in space.jet_symbols(eq.rhs) if self._rule_for(s) is not None]
            if bad:
                raise OrientationCycle(
                    f"orientation cycle: right-hand side of equation {k} contains constrained {bad[0]}")

    # -- construction
    @classmethod
    def build(cls, space: JetSpace, items: Iterable, labels: Sequence[str] | None = None) -> "PDESystem":
        """Build from ``(expr, lead)`` pairs (expressions or strings)."""
        system = cls(space, ())
        for k, (expr, lead) in enumerate(items):
            label = labels[k] if labels else f"Delta_{k + 1}"
            system = system.extend(expr, lead, label=label)
        return system

    def extend(self, expr, lead, label: str = "") -> "PDESystem":
        space = self.space
        if isinstance(expr, str):
            expr = space.parse(expr)
        if isinstance(lead, str):
            lead = space.parse(lead)
        if space.decode(lead) is None:
            raise OrientationError(f"{lead} is not a jet coordinate")
        original = normalize(expr)
        if self._rule_for(lead) is not None:
            raise OrientationError(f"leading derivative {lead} is already constrained")
        reduced = self.restrict(original)
        if lead not in reduced.free_symbols:
            if reduced == 0:
                raise OrientationError(f"equation {label or expr} is a consequence of the others")
            if not space.jet_symbols(reduced):
                raise InconsistentSystem(reduced)
            raise OrientationError(f"cannot orient {label or expr} for {lead}: it does not occur")
        solved = _solve_linear(reduced, lead)
        if solved is None:
            raise OrientationError(f"cannot orient {label or expr} for {lead}: not linear in it")
        rhs, factor = solved
        new_eq = Equation(original, lead, rhs, factor, label)
        staged = PDESystem.__new__(PDESystem)
        staged.space = space
        staged.equations = (new_eq,)
        staged._memo, staged._busy = {}, set()
        staged._leads = [space.decode(lead)]
        if lead in rhs.free_symbols or staged._constrained_in(rhs):
            raise OrientationCycle()
        eqs = []
        for eq in self.equations:
            new_rhs = staged.restrict(eq.rhs)
            eqs.append(Equation(eq.expr, eq.lead, new_rhs, eq.factor, eq.label))
        eqs.append(new_eq)
        return PDESystem(space, eqs)

    def _constrained_in(self, e):
        return [s for s in self.space.jet_symbols(e) if self._rule_for(s) is not None]

    def reoriented(self, index: int, lead) -> "PDESystem":
        """Same equations with equation ``index`` oriented for ``lead``."""
        items = [(eq.expr, eq.lead) for eq in self.equations]
        labels = [eq.label for eq in self.equations]
        items[index] = (items[index][0], lead)
        return PDESystem.build(self.space, items, labels)

    # -- queries
    @property
    def order(self) -> int:
        return max((order_of(eq.expr, self.space) for eq in self.equations), default=0)

    @property
    def expressions(self) -> list[sp.Expr]:
        return [eq.expr for eq in self.equations]

    def __len__(self):
        return len(self.equations)

    def _rule_for(self, sym):
        dec = self.space.decode(sym)
        if dec is None:
            return None
        a, J = dec
        best = None
        for k, (b, L) in enumerate(self._leads):
            if b == a and L.divides(J):
                if best is None or L.order > self._leads[best][1].order:
                    best = k
        return best

    def is_constrained(self, sym) -> bool:
        return self._rule_for(sym) is not None

    def constraint_value(self, sym) -> sp.Expr | None:
        """Value of a constrained coordinate on the solution manifold, else None."""
        k = self._rule_for(sym)
        if k is None:
            return None
        _, J = self.space.decode(sym)
        return self._consequence(k, J - self._leads[k][1])

    def differential_consequence(self, alpha: int, K: Sequence[int]) -> tuple[sp.Symbol, sp.Expr]:
        """Oriented rule u^a_{L+K} -> restrict(D_K f_alpha)."""
        K = MultiIndex(K)
        a, L = self._leads[alpha]
        return self.space.jet(a, L + K), self._consequence(alpha, K)

    def _consequence(self, alpha: int, K: MultiIndex) -> sp.Expr:
        key = (alpha, K)
        if key in self._memo:
            return self._memo[key]
        if key in self._busy:
            raise OrientationCycle()
        self._busy.add(key)
        try:
            if K.order == 0:
                value = self.equations[alpha].rhs
            else:
                i = max(k for k, c in enumerate(K) if c > 0)
                prev = self._consequence(alpha, K.shift(i, -1))
                value = self.restrict(total_derivative(prev, i, self.space, normal=False))
        finally:
            self._busy.discard(key)
        self._memo[key] = value
        return value

    def restrict(self, e) -> sp.Expr:
        """Replace every constrained coordinate by its differential consequence."""
        e = sp.sympify(e)
        for _ in range(_MAX_PASSES):
            subs = {}
            for s in self.space.jet_symbols(e):
                k = self._rule_for(s)
                if k is not None:
                    a, J = self.space.decode(s)
                    subs[s] = self._consequence(k, J - self._leads[k][1])
            if not subs:
                return normalize(e)
            e = e.xreplace(subs)
        raise OrientationCycle()

    def describe(self) -> list[str]:
        from .expr import to_text
        return [f"{eq.lead} = {to_text(eq.rhs)}" for eq in self.equations]
