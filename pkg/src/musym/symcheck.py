"""Symmetry verdicts: exact, mu-, strong-mu, conditional, partial, nonlocal.

Every verdict is decided by restriction to the solution manifold followed by
the two-tier zero test; R_alpha^beta in Y(Delta) = R Delta is never solved for.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import sympy as sp

from . import oracle
from .expr import ZeroVerdict, is_zero, normalize, proportionality_factor, substitute_with_limit, to_text
from .jet import InconsistentSystem, JetSpace, OrientationError, PDESystem, total_derivative
from .muform import FAILS, CompatibilityVerdict, GaugeMap, HorizontalForm, check_compatibility, gauge_act
from .vfield import (Characteristic, ProlongedField, VectorField, apply, characteristic, prolong_mu,
                     prolong_standard)

__all__ = [
    "VERIFIED",
    "VERIFIED_NUMERIC",
    "REFUTED",
    "IncompatibleMu",
    "SymmetryVerdict",
    "check_standard_symmetry",
    "check_mu_symmetry",
    "gauge_equivalent_symmetry",
    "build_conditional_system",
    "check_conditional_symmetry",
    "partial_symmetry_analysis",
    "check_invariant_function",
    "verify_solution",
    "check_nonlocal_exponential",
    "sign_relation",
    "orient_automatically",
    "match_up_to_factor",
    "corroborate",
]

VERIFIED = "Verified"
VERIFIED_NUMERIC = "VerifiedNumeric"
REFUTED = "Refuted"


class IncompatibleMu(ValueError):
    def __init__(self, verdict: CompatibilityVerdict | None = None):
        self.verdict = verdict
        super().__init__("incompatible μ: compatibility fails even on the solution manifold")


@dataclass
class SymmetryVerdict:
    kind: str
    outcome: str
    residuals: list = field(default_factory=list)
    witnesses: list = field(default_factory=list)
    strength: str = "symbolic"
    chain: list = field(default_factory=list)
    order: int | None = None
    notes: list = field(default_factory=list)
    systems: list = field(default_factory=list, repr=False, compare=False)

    @property
    def verified(self) -> bool:
        return self.outcome != REFUTED

    def residual_text(self) -> list[str]:
        return [to_text(r) for r in self.residuals]


@dataclass(frozen=True)
class _Tolerances:
    trials: int = oracle.DEFAULT_TRIALS
    tol: float = oracle.DEFAULT_TOL
    seed: int = 0


def _judge(kind, residuals, space, tols: _Tolerances, notes=None, labels=None) -> SymmetryVerdict:
    """Zero-test each (already restricted) residual and fold into a verdict."""
    witnesses = []
    numeric = False
    for k, r in enumerate(residuals):
        verdict = is_zero(r, space, trials=tols.trials, tol=tols.tol, seed=tols.seed)
        if verdict.status == ZeroVerdict.NUMERIC:
            numeric = True
        elif not verdict.is_zero:
            witnesses.append({"index": labels[k] if labels else k, "value": _plain(verdict.value),
                              "point": verdict.witness})
    if witnesses:
        outcome = REFUTED
    else:
        outcome = VERIFIED_NUMERIC if numeric else VERIFIED
    return SymmetryVerdict(kind, outcome, list(residuals), witnesses,
                           "numeric" if numeric else "symbolic", notes=list(notes or []))


def _plain(v):
    if isinstance(v, complex) and v.imag == 0:
        return v.real
    return v if not isinstance(v, complex) else str(v)


def _tols(trials, tol, seed):
    return _Tolerances(trials, tol, seed)


# ---------------------------------------------------------------------------
# exact and mu-symmetries


def check_standard_symmetry(X: VectorField, sys: PDESystem, *, trials=oracle.DEFAULT_TRIALS,
                            tol=oracle.DEFAULT_TOL, seed=0) -> SymmetryVerdict:
    space = sys.space
    W = prolong_standard(X, space, max(sys.order, 1))
    residuals = [sys.restrict(apply(W, d)) for d in sys.expressions]
    return _judge("standard", residuals, space, _tols(trials, tol, seed))


def _ensure_compatible(mu, sys, tols) -> CompatibilityVerdict:
    verdict = check_compatibility(mu, sys.space, sys, trials=tols.trials, tol=tols.tol, seed=tols.seed)
    if verdict.status == FAILS:
        raise IncompatibleMu(verdict)
    return verdict


def check_mu_symmetry(X: VectorField, mu: HorizontalForm, sys: PDESystem, *, strong: bool = False,
                      trials=oracle.DEFAULT_TRIALS, tol=oracle.DEFAULT_TOL, seed=0) -> SymmetryVerdict:
    """mu-symmetry (restricted) or strong mu-symmetry (unrestricted) check."""
    tols = _tols(trials, tol, seed)
    compat = _ensure_compatible(mu, sys, tols)
    space = sys.space
    Y = prolong_mu(X, mu, space, max(sys.order, 1))
    raw = [apply(Y, d) for d in sys.expressions]
    notes = [f"compatibility: {compat.status}"]
    if strong:
        verdict = _judge("strong-mu", raw, space, tols, notes)
        if verdict.verified:
            verdict.notes.append("strong mu-symmetry implies mu-symmetry")
        return verdict
    return _judge("mu", [sys.restrict(r) for r in raw], space, tols, notes)


def sign_relation(a: Sequence, b: Sequence) -> int | None:
    """+1 if a == b, -1 if a == -b componentwise (normal forms), else None."""
    a = [normalize(v) for v in a]
    b = [normalize(v) for v in b]
    if all(normalize(x - y) == 0 for x, y in zip(a, b)):
        return 1
    if all(normalize(x + y) == 0 for x, y in zip(a, b)):
        return -1
    return None


def gauge_equivalent_symmetry(X: VectorField, gamma: GaugeMap, sys: PDESystem, *,
                              trials=oracle.DEFAULT_TRIALS, tol=oracle.DEFAULT_TOL,
                              seed=0) -> tuple[Characteristic, SymmetryVerdict]:
    """X~ = gamma . Q (evolutionary representative) and its standard-symmetry verdict."""
    Xt = gauge_act(gamma, characteristic(X, sys.space))
    field_t = VectorField.evolutionary(Xt.q, sys.space.p)
    verdict = check_standard_symmetry(field_t, sys, trials=trials, tol=tol, seed=seed)
    verdict.kind = "gauge-equivalent standard"
    verdict.notes.append("X~ = gamma * (phi - u_i xi^i); a gauge factor, not necessarily unique")
    return Xt, verdict


# ---------------------------------------------------------------------------
# orientation helpers


def _candidates(e, sys: PDESystem):
    space = sys.space
    free = [s for s in space.jet_symbols(e) if not sys.is_constrained(s)]
    return sorted(free, key=space.rank_key, reverse=True)


def orient_automatically(sys: PDESystem, e, label: str = "", hint=None) -> PDESystem:
    """Append ``e`` oriented for ``hint`` or the highest-ranked coordinate that works."""
    space = sys.space
    if hint is not None:
        return sys.extend(e, space.parse(hint) if isinstance(hint, str) else hint, label=label)
    reduced = sys.restrict(e)
    if reduced != 0 and not space.jet_symbols(reduced):
        raise InconsistentSystem(reduced)
    last = None
    for s in _candidates(reduced, sys):
        try:
            return sys.extend(e, s, label=label)
        except InconsistentSystem:
            raise
        except OrientationError as exc:
            last = exc
    raise OrientationError(f"cannot orient {label or to_text(e)}: "
                           + (str(last) if last else "no jet coordinate available"))


# ---------------------------------------------------------------------------
# conditional symmetries


def build_conditional_system(X: VectorField, sys: PDESystem, leads: Sequence | None = None) -> PDESystem:
    """Append Q^a = 0 for each a with Q^a not identically zero."""
    Q = characteristic(X, sys.space).q
    out = sys
    for a, qa in enumerate(Q):
        if qa == 0:
            continue
        hint = leads[a] if leads else None
        try:
            out = orient_automatically(out, qa, label=f"Q_{sys.space.dependent[a]}", hint=hint)
        except InconsistentSystem:
            raise
        except OrientationError as exc:
            raise OrientationError(f"cannot orient characteristic Q^{a + 1} = {to_text(qa)}: {exc}") from exc
    return out


def check_conditional_symmetry(X: VectorField, sys: PDESystem, mu: HorizontalForm | None = None,
                               candidate_solution: Mapping | None = None, leads: Sequence | None = None,
                               *, trials=oracle.DEFAULT_TRIALS, tol=oracle.DEFAULT_TOL,
                               seed=0) -> SymmetryVerdict:
    """Symmetry of the augmented system Delta = 0, Q = 0 (existence not decided)."""
    space = sys.space
    notes = ["invariant-solution existence not decided"]
    try:
        aug = build_conditional_system(X, sys, leads)
    except InconsistentSystem as exc:
        notes.insert(0, f"augmented system is inconsistent: reduces to {to_text(exc.relation)} = 0; "
                        "criterion holds vacuously")
        verdict = SymmetryVerdict("conditional", VERIFIED, [], [], notes=notes)
        if mu is not None:
            base = check_mu_symmetry(X, mu, sys, trials=trials, tol=tol, seed=seed)
            verdict.notes.append(f"mu-symmetry of the original system: {base.outcome}")
        return verdict
    std = check_standard_symmetry(X, aug, trials=trials, tol=tol, seed=seed)
    verdict = SymmetryVerdict("conditional", std.outcome, std.residuals, std.witnesses, std.strength,
                              notes=[f"augmented system: {'; '.join(aug.describe())}"])
    if mu is not None:
        muv = check_mu_symmetry(X, mu, aug, trials=trials, tol=tol, seed=seed)
        agree = muv.verified == std.verified
        verdict.notes.append(f"mu verdict on augmented system: {muv.outcome}; "
                             f"standard verdict: {std.outcome}; agreement: {agree}")
        if not agree:
            verdict.outcome = REFUTED
            verdict.witnesses.append({"index": "mu/standard disagreement", "value": None, "point": None})
    if candidate_solution is not None:
        sol = verify_solution(candidate_solution, sys, trials=trials, tol=tol, seed=seed)
        inv = verify_solution(candidate_solution, [c for c in characteristic(X, space).q if c != 0],
                              space, trials=trials, tol=tol, seed=seed)
        verdict.notes.append(f"candidate solves the system: {sol.outcome}; candidate is X-invariant: "
                             f"{inv.outcome}")
        if not (sol.verified and inv.verified):
            verdict.outcome = REFUTED
            verdict.witnesses.extend(sol.witnesses + inv.witnesses)
    verdict.notes.extend(notes)
    return verdict


# ---------------------------------------------------------------------------
# partial symmetries


@dataclass
class ChainLevel:
    k: int
    residuals: list
    system: list

    def as_dict(self):
        return {"k": self.k, "residuals": [to_text(r) for r in self.residuals], "system": self.system}


def partial_symmetry_analysis(X: VectorField, sys: PDESystem, mu: HorizontalForm | None = None,
                              max_order: int = 4, hints: Mapping[int, Sequence] | None = None, *,
                              trials=oracle.DEFAULT_TRIALS, tol=oracle.DEFAULT_TOL,
                              seed=0) -> SymmetryVerdict:
    """Iterate Delta^(k+1) = Y(Delta^(k)) restricted to S_k; order l is the first k >= 1 with zero."""
    tols = _tols(trials, tol, seed)
    space = sys.space
    notes = []
    if mu is not None:
        compat = _ensure_compatible(mu, sys, tols)
        notes.append(f"compatibility: {compat.status}")
    hints = hints or {}
    current = list(sys.expressions)
    S_k = sys
    chain = [ChainLevel(0, current, S_k.describe())]
    systems = [S_k]
    numeric = False
    for k in range(1, max_order + 1):
        n = max(S_k.order, max((_order(e, space) for e in current), default=1), 1)
        Y = prolong_mu(X, mu, space, n) if mu is not None else prolong_standard(X, space, n)
        nxt = [S_k.restrict(apply(Y, e)) for e in current]
        nonzero = []
        for e in nxt:
            if e == 0:
                continue
            v = is_zero(e, space, trials=tols.trials, tol=tols.tol, seed=tols.seed)
            if v.status == ZeroVerdict.NUMERIC:
                numeric = True
            elif not v.is_zero:
                nonzero.append(e)
        chain.append(ChainLevel(k, nxt, S_k.describe()))
        if not nonzero:
            outcome = VERIFIED_NUMERIC if numeric else VERIFIED
            if k == 1:
                notes.append("exact (mu-)symmetry" if mu is not None else "exact symmetry")
            else:
                notes.append(f"partial {'mu-' if mu is not None else ''}symmetry of order {k}")
            return SymmetryVerdict("partial", outcome, nxt, [], "numeric" if numeric else "symbolic",
                                   chain=[c.as_dict() for c in chain], order=k, notes=notes,
                                   systems=systems)
        level_hints = list(hints.get(k, ()))
        for j, e in enumerate(nonzero):
            hint = level_hints[j] if j < len(level_hints) else None
            if S_k.restrict(e) == 0:
                continue
            S_k = orient_automatically(S_k, e, label=f"Delta^({k})_{j + 1}", hint=hint)
        systems.append(S_k)
        current = nonzero
    notes.append(f"no order <= {max_order}")
    return SymmetryVerdict("partial", REFUTED, current, [{"index": "chain", "value": None,
                                                          "point": None}],
                           chain=[c.as_dict() for c in chain], order=None, notes=notes, systems=systems)


def _order(e, space):
    from .jet import order_of
    return order_of(e, space)


def match_up_to_factor(computed, expected, sys: PDESystem | None = None, allowed=None):
    """Nonzero jet-free factor f with computed = f * expected (modulo ``sys``), else None."""
    if sys is not None:
        computed, expected = sys.restrict(computed), sys.restrict(expected)
    return proportionality_factor(computed, expected, allowed)


# ---------------------------------------------------------------------------
# invariants, solutions, nonlocal symmetries


def check_invariant_function(zeta, Yp: ProlongedField, *, trials=oracle.DEFAULT_TRIALS,
                             tol=oracle.DEFAULT_TOL, seed=0) -> ZeroVerdict:
    return is_zero(apply(Yp, zeta), Yp.space, trials=trials, tol=tol, seed=seed)


def _jet_lift(solution: Mapping, space: JetSpace, symbols) -> dict:
    values = {}
    by_index = {}
    for key, expr in solution.items():
        a = space.dependent.index(key) if isinstance(key, str) else int(key)
        expr = space.parse(expr) if isinstance(expr, str) else sp.sympify(expr)
        if space.jet_symbols(expr):
            raise ValueError("solution expressions must not contain jet coordinates")
        by_index[a] = expr
    for s in symbols:
        a, J = space.decode(s)
        if a not in by_index:
            raise ValueError(f"no solution supplied for {space.dependent[a]}")
        v = by_index[a]
        for i, c in enumerate(J):
            if c:
                v = sp.diff(v, space.base[i], c)
        values[s] = sp.factor(v)
    return values


def verify_solution(solution: Mapping, equations, space: JetSpace | None = None, *,
                    trials=oracle.DEFAULT_TRIALS, tol=oracle.DEFAULT_TOL, seed=0) -> SymmetryVerdict:
    """Substitute the jet lift of ``solution`` into each equation."""
    if isinstance(equations, PDESystem):
        space = equations.space
        exprs = equations.expressions
    else:
        exprs = [space.parse(e) if isinstance(e, str) else sp.sympify(e) for e in equations]
    residuals = []
    notes = []
    for e in exprs:
        values = _jet_lift(solution, space, space.jet_symbols(e))
        r, limited = substitute_with_limit(e, values)
        if limited:
            notes.append(f"{to_text(e)}: evaluated as a one-sided limit at a branch boundary")
        residuals.append(r)
    verdict = _judge("solution", residuals, space, _tols(trials, tol, seed), notes)
    return verdict


def check_nonlocal_exponential(X: VectorField, P: Sequence, sys: PDESystem, *,
                               trials=oracle.DEFAULT_TRIALS, tol=oracle.DEFAULT_TOL,
                               seed=0) -> SymmetryVerdict:
    """(a) P closed on the solution manifold; (b) X is a mu-symmetry for mu = P_i dx^i."""
    space = sys.space
    if space.q != 1:
        raise ValueError("nonlocal exponential symmetries need q = 1")
    P = [space.parse(v) if isinstance(v, str) else sp.sympify(v) for v in P]
    if len(P) != space.p:
        raise ValueError("dimension mismatch: one P_i per independent variable")
    tols = _tols(trials, tol, seed)
    closed = []
    for i in range(space.p):
        for j in range(i + 1, space.p):
            d = total_derivative(P[j], i, space) - total_derivative(P[i], j, space)
            closed.append(sys.restrict(d))
    cv = _judge("closure", closed, space, tols)
    notes = [f"D_i P_j - D_j P_i on the solution manifold: {cv.outcome}"]
    if characteristic(X, space).is_trivial:
        notes.append("X has trivial characteristic")
    if not cv.verified:
        return SymmetryVerdict("nonlocal", REFUTED, closed, cv.witnesses, cv.strength, notes=notes)
    mu = HorizontalForm.scalar(P)
    if mu.is_zero_form:
        mv = check_standard_symmetry(X, sys, trials=trials, tol=tol, seed=seed)
        notes.append("P = 0: ordinary standard symmetry check")
    else:
        mv = check_mu_symmetry(X, mu, sys, trials=trials, tol=tol, seed=seed)
    strength = "numeric" if "numeric" in (cv.strength, mv.strength) else "symbolic"
    outcome = mv.outcome
    if outcome == VERIFIED and cv.outcome == VERIFIED_NUMERIC:
        outcome = VERIFIED_NUMERIC
    return SymmetryVerdict("nonlocal", outcome, closed + mv.residuals, mv.witnesses, strength,
                           notes=notes + mv.notes)


def corroborate(e, sys: PDESystem, *, trials=oracle.DEFAULT_TRIALS, tol=oracle.DEFAULT_TOL,
                seed=0) -> ZeroVerdict:
    """Numeric check of an unrestricted expression at points sampled on S_Delta."""
    return oracle.numeric_zero_check(e, sys.space, trials=trials, tol=tol, seed=seed, constraints=sys)
