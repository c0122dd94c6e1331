"""Command-line front end.

Exit codes: 0 all checks verified/proved, 1 something refuted, 2 inconclusive
(numeric-only or skipped), 3 input or validation error.
"""
from __future__ import annotations

import argparse
import json
import sys
from typing import Callable

import sympy as sp

from . import oracle
from .expr import ParseError, ZeroVerdict, normalize, proportionality_factor, to_text
from .jet import OrientationError
from .muform import (FAILS, GaugeMap, PotentialError, check_compatibility, darboux_derivative,
                     find_scalar_potential, verify_gauge_factor)
from .problem import Problem, ProblemError, load
from .reduce import NotPolynomialInS, reduce_with_ansatz, split_by_noninvariant, verify_reduction_consistency
from .symcheck import (REFUTED, VERIFIED, VERIFIED_NUMERIC, IncompatibleMu, SymmetryVerdict,
                       check_conditional_symmetry, check_invariant_function, check_mu_symmetry,
                       check_nonlocal_exponential, check_standard_symmetry, corroborate,
                       gauge_equivalent_symmetry, match_up_to_factor, partial_symmetry_analysis,
                       sign_relation, verify_solution)
from .vfield import apply, prolong_mu, prolong_standard

__all__ = ["main", "run", "COMMANDS"]

EXIT_OK, EXIT_REFUTED, EXIT_INCONCLUSIVE, EXIT_INPUT = 0, 1, 2, 3

_FAILING = {REFUTED, ZeroVerdict.NONZERO, "NonZero", FAILS, "Mismatch"}
_NUMERIC = {VERIFIED_NUMERIC, "NumericZero", "Skipped"}


class Options:
    def __init__(self, ns):
        self.trials = ns.trials
        self.tol = ns.tol
        self.seed = ns.seed
        self.strong = getattr(ns, "strong", False)
        self.max_order = getattr(ns, "max_order", None)
        self.gauge_mode = getattr(ns, "gauge_mode", None)

    @property
    def kw(self):
        return {"trials": self.trials, "tol": self.tol, "seed": self.seed}


# ---------------------------------------------------------------------------
# records


def _text(v):
    if isinstance(v, sp.Basic):
        return to_text(v)
    if isinstance(v, complex):
        return str(v)
    return v


def _witnesses(ws):
    out = []
    for w in ws:
        out.append({k: (_text(v) if k != "point" else v) for k, v in w.items()})
    return out


def record(fixture, kind, subject, outcome, strength="symbolic", residuals=(), witnesses=(), notes=(),
           **extra) -> dict:
    rec = {"fixture": fixture, "kind": kind, "subject": subject, "outcome": outcome, "strength": strength,
           "residuals": [_text(r) for r in residuals], "witnesses": _witnesses(witnesses),
           "notes": list(notes)}
    rec.update(extra)
    return rec


def from_verdict(fixture, subject, v: SymmetryVerdict, notes=(), **extra) -> dict:
    if v.chain:
        extra.setdefault("chain", v.chain)
    if v.order is not None:
        extra.setdefault("order", v.order)
    return record(fixture, v.kind, subject, v.outcome, v.strength, v.residuals, v.witnesses,
                  list(notes) + v.notes, **extra)


def from_zero(fixture, kind, subject, z: ZeroVerdict, residual=None, notes=()) -> dict:
    outcome = {"proved": "ProvedZero", "numeric": "NumericZero", "nonzero": "NonZero"}[z.status]
    ws = [] if z.is_zero else [{"value": z.value, "point": z.witness}]
    extra = {"trials": z.trials, "max_abs": z.max_abs} if z.status == ZeroVerdict.NUMERIC else {}
    return record(fixture, kind, subject, outcome, "symbolic" if z.is_proved else "numeric",
                  [residual] if residual is not None else [], ws, notes, **extra)


# ---------------------------------------------------------------------------
# commands


def _data(pb: Problem, key, command):
    if not pb.data.get(key):
        raise ProblemError(f"{command} needs '{key}' in the problem file")
    return pb.data[key]


def _fields(pb: Problem, command):
    return pb.require("fields", command)


def cmd_check_standard(pb: Problem, opt: Options):
    return [from_verdict(pb.name, f.name, check_standard_symmetry(f.field, pb.system, **opt.kw),
                         pb.assumptions)
            for f in _fields(pb, "check-standard")]


def cmd_check_mu(pb: Problem, opt: Options):
    mu = pb.require("mu", "check-mu")
    out = []
    for f in _fields(pb, "check-mu"):
        v = check_mu_symmetry(f.field, mu, pb.system, strong=opt.strong, **opt.kw)
        notes = pb.assumptions + (["residuals restricted to the solution manifold"] if not opt.strong else [])
        compat = next((n.split(": ", 1)[1] for n in v.notes if n.startswith("compatibility: ")), "?")
        label = "strong μ-symmetry" if opt.strong else "μ-symmetry"
        where = "unrestricted" if opt.strong else "on S_Δ"
        out.append(from_verdict(pb.name, f.name, v, notes,
                                summary=f"{label}: {v.outcome} ({where}); compatibility: {compat}"))
    return out


def cmd_compat(pb: Problem, opt: Options):
    mu = pb.require("mu", "compat")
    v = check_compatibility(mu, pb.space, pb.system, **opt.kw)
    residuals = [e for m in v.residuals.values() for e in m]
    restricted = [e for m in v.restricted.values() for e in m]
    return [record(pb.name, "compatibility", "mu", v.status, v.strength, residuals, v.witnesses,
                   pb.assumptions, restricted=[to_text(e) for e in restricted])]


def cmd_gauge(pb: Problem, opt: Options):
    mu = pb.require("mu", "gauge")
    mode = opt.gauge_mode or ("verify" if pb.gamma is not None else "derive")
    out = []
    if mode == "derive":
        try:
            V, gamma = find_scalar_potential(mu, pb.space)
        except (PotentialError, ValueError) as exc:
            return [record(pb.name, "potential", "mu", "Skipped", "symbolic", notes=[str(exc)])]
        back = darboux_derivative(GaugeMap.scalar(gamma), pb.space)
        resid = [normalize(a[0, 0] - b[0, 0]) for a, b in zip(back.matrices, mu.matrices)]
        ok = all(r == 0 for r in resid)
        out.append(record(pb.name, "potential", "mu", VERIFIED if ok else REFUTED, "symbolic", resid,
                          notes=["V verified by differentiation", "a gauge factor, not unique"],
                          potential=to_text(V), gamma=to_text(gamma)))
        return out
    gamma = pb.require("gamma", "gauge --verify")
    v = verify_gauge_factor(gamma, mu, pb.space, pb.system, **opt.kw)
    dd = darboux_derivative(gamma, pb.space)
    out.append(record(pb.name, "gauge-factor", "gamma", v.status, v.strength,
                      [e for m in v.residuals.values() for e in m], v.witnesses,
                      ["gamma is a gauge factor for mu (not claimed unique)"],
                      darboux=[[[to_text(e) for e in row] for row in m.tolist()] for m in dd.matrices]))
    for f in pb.fields:
        Xt, sv = gauge_equivalent_symmetry(f.field, gamma, pb.system, **opt.kw)
        notes = [f"X~ = ({', '.join(to_text(c) for c in Xt.q)})"]
        if f.gauged is not None:
            sign = sign_relation(Xt.q, f.gauged)
            if sign is None:
                notes.append("X~ does not match the declared gauged field")
            else:
                notes.append(f"declared gauged field = {'+' if sign > 0 else '-'}gamma*Q")
        out.append(from_verdict(pb.name, f.name, sv, notes))
    return out


def cmd_conditional(pb: Problem, opt: Options):
    cond = pb.data.get("conditional", {})
    out = []
    for f in _fields(pb, "conditional"):
        v = check_conditional_symmetry(f.field, pb.system, pb.mu, cond.get("candidate_solution"),
                                       cond.get("solve_for"), **opt.kw)
        out.append(from_verdict(pb.name, f.name, v))
    return out


def _expected_list(v):
    return v if isinstance(v, list) else [v]


def cmd_partial(pb: Problem, opt: Options):
    cfg = pb.data.get("partial", {})
    max_order = opt.max_order or cfg.get("max_order", 4)
    hints = {int(k): v for k, v in cfg.get("hints", {}).items()}
    out = []
    for f in _fields(pb, "partial"):
        v = partial_symmetry_analysis(f.field, pb.system, pb.mu, max_order, hints, **opt.kw)
        notes = []
        allowed = set(pb.space.base) | set(pb.space.constant_symbols)
        for k, texts in cfg.get("expected", {}).items():
            k = int(k)
            if k >= len(v.chain):
                notes.append(f"Delta^({k}) not reached")
                v.outcome = REFUTED
                continue
            computed = [pb.expr(t) for t in v.chain[k]["residuals"]]
            ctx = v.systems[k - 1]
            for j, text in enumerate(_expected_list(texts)):
                exp = pb.expr(text)
                got = computed[j] if j < len(computed) else sp.S.Zero
                if exp == 0:
                    ok = ctx.restrict(got) == 0
                    factor = "1"
                else:
                    fac = match_up_to_factor(got, exp, ctx, allowed)
                    ok = fac is not None
                    factor = to_text(fac) if ok else "-"
                notes.append(f"Delta^({k})[{j}] matches declared form up to factor {factor}"
                             if ok else f"Delta^({k})[{j}] does not match the declared form")
                if not ok:
                    v.outcome = REFUTED
                    v.witnesses.append({"index": f"Delta^({k})[{j}]", "value": None, "point": None})
        if "expected_order" in cfg and v.order != cfg["expected_order"]:
            notes.append(f"order {v.order} differs from declared {cfg['expected_order']}")
            v.outcome = REFUTED
            v.witnesses.append({"index": "order", "value": v.order, "point": None})
        out.append(from_verdict(pb.name, f.name, v, notes))
    return out


def cmd_nonlocal(pb: Problem, opt: Options):
    P = pb.require("P", "nonlocal")
    return [from_verdict(pb.name, f.name, check_nonlocal_exponential(f.field, P, pb.system, **opt.kw))
            for f in _fields(pb, "nonlocal")]


def cmd_invariants(pb: Problem, opt: Options):
    zetas = _data(pb, "invariants", "invariants")
    out = []
    from .jet import order_of
    for f in _fields(pb, "invariants"):
        exprs = [pb.expr(z) for z in zetas]
        n = max(1, max(order_of(e, pb.space) for e in exprs))
        if pb.mu is not None:
            Y, label = prolong_mu(f.field, pb.mu, pb.space, n), "mu-prolongation"
        else:
            Y, label = prolong_standard(f.field, pb.space, n), "standard prolongation"
        for text, e in zip(zetas, exprs):
            z = check_invariant_function(e, Y, **opt.kw)
            out.append(from_zero(pb.name, "invariant", f"{f.name}: {text}", z, apply(Y, e), [label]))
    return out


def cmd_reduce(pb: Problem, opt: Options):
    ansatz = pb.ansatz
    if ansatz is None:
        raise ProblemError("reduce needs 'ansatz' in the problem file")
    cfg = pb.data["ansatz"]
    red = reduce_with_ansatz(pb.system, ansatz)
    out = []
    components = []
    for k, (eq, fac) in enumerate(zip(red.equations, red.factors)):
        if eq == 0:
            out.append(record(pb.name, "reduction", pb.system.equations[k].label, VERIFIED, "symbolic", [eq],
                              notes=red.notes + ["equation is satisfied identically by the ansatz"]))
            continue
        try:
            parts = split_by_noninvariant(eq, ansatz.noninvariant) if ansatz.noninvariant else [(1, eq)]
        except NotPolynomialInS as exc:
            out.append(record(pb.name, "reduction", pb.system.equations[k].label, "Skipped", notes=[str(exc)]))
            continue
        components.extend(c for _, c in parts)
        out.append(record(pb.name, "reduction", pb.system.equations[k].label, VERIFIED, "symbolic", [eq],
                          notes=red.notes + [f"cleared factor {to_text(fac)}", f"eliminated {red.eliminated}"],
                          split=[{"monomial": to_text(m), "component": to_text(sp.factor(c))} for m, c in parts]))
    expected = cfg.get("expected_components")
    if expected:
        ext = ansatz.space_for(pb.space)
        missing = []
        for text in expected:
            e = ext.parse(text)
            if not any(proportionality_factor(c, e, set()) is not None for c in components):
                missing.append(text)
        extra = len(components) - len(expected)
        outcome = VERIFIED if not missing and extra == 0 else "Mismatch"
        notes = [f"missing: {missing}"] if missing else []
        if extra:
            notes.append(f"{len(components)} components computed, {len(expected)} declared")
        out.append(record(pb.name, "components", "split", outcome, "symbolic",
                          [to_text(sp.factor(c)) for c in components], notes=notes + ["compared up to numeric factors"]))
    for sol in cfg.get("component_solutions", []):
        v = verify_reduction_consistency(pb.system, ansatz, sol, **opt.kw)
        out.append(from_verdict(pb.name, json.dumps(sol), v))
    return out


def cmd_verify_solution(pb: Problem, opt: Options):
    sols = _data(pb, "solutions", "verify-solution")
    return [from_verdict(pb.name, ", ".join(f"{k} = {v}" for k, v in s.items()),
                         verify_solution(s, pb.system, **opt.kw), pb.assumptions) for s in sols]


def cmd_oracle(pb: Problem, opt: Options):
    """Numeric corroboration at points sampled on the solution manifold."""
    out = []
    if pb.mu is not None:
        from .muform import compatibility_residual
        for i in range(pb.space.p):
            for j in range(i + 1, pb.space.p):
                for e in compatibility_residual(pb.mu, i, j, pb.space):
                    if e == 0:
                        continue
                    z = corroborate(e, pb.system, **opt.kw)
                    out.append(from_zero(pb.name, "oracle-compatibility", f"({i},{j})", z, e))
    for f in pb.fields:
        n = max(pb.system.order, 1)
        Y = prolong_mu(f.field, pb.mu, pb.space, n) if pb.mu is not None else prolong_standard(f.field, pb.space, n)
        for eq in pb.system.equations:
            e = apply(Y, eq.expr)
            z = corroborate(e, pb.system, **opt.kw) if e != 0 else ZeroVerdict.proved()
            out.append(from_zero(pb.name, "oracle-symmetry", f"{f.name} on {eq.label}", z, e,
                                 ["sampled on the solution manifold; numeric agreement is the expected outcome"]))
    if not out:
        out.append(record(pb.name, "oracle", "-", "Skipped", notes=["nothing to corroborate"]))
    return out


COMMANDS: dict[str, Callable] = {
    "check-standard": cmd_check_standard,
    "check-mu": cmd_check_mu,
    "compat": cmd_compat,
    "gauge": cmd_gauge,
    "conditional": cmd_conditional,
    "partial": cmd_partial,
    "nonlocal": cmd_nonlocal,
    "invariants": cmd_invariants,
    "reduce": cmd_reduce,
    "verify-solution": cmd_verify_solution,
    "oracle": cmd_oracle,
}


# ---------------------------------------------------------------------------
# driver


def exit_code(command: str, checks: list[dict]) -> int:
    outcomes = [c["outcome"] for c in checks]
    if any(o in _FAILING for o in outcomes):
        return EXIT_REFUTED
    if command == "oracle":
        return EXIT_INCONCLUSIVE if "Skipped" in outcomes else EXIT_OK
    if any(o in _NUMERIC or c.get("strength") == "numeric" for o, c in zip(outcomes, checks)):
        return EXIT_INCONCLUSIVE
    return EXIT_OK


def run(command: str, files: list[str], opt: Options) -> tuple[dict, int]:
    report = {"command": command, "fixtures": list(files), "checks": [], "seed": opt.seed,
              "tolerances": {"trials": opt.trials, "tol": opt.tol}}
    try:
        for path in files:
            pb = load(path)
            checks = COMMANDS[command](pb, opt)
            for c in checks:
                c["notes"] = list(dict.fromkeys(c["notes"] + pb.notes))
            report["checks"].extend(checks)
    except IncompatibleMu as exc:
        report["error"] = str(exc)
        return report, EXIT_INPUT
    except oracle.Inconclusive as exc:
        report["error"] = str(exc)
        return report, EXIT_INCONCLUSIVE
    except (ProblemError, ParseError, OrientationError, ValueError, ZeroDivisionError) as exc:
        report["error"] = str(exc)
        return report, EXIT_INPUT
    return report, exit_code(command, report["checks"])


def format_text(report: dict, code: int) -> str:
    lines = [f"{report['command']}: {', '.join(report['fixtures'])}"]
    for c in report["checks"]:
        head = f"[{c['fixture']}] {c['kind']} {c['subject']}: {c['outcome']}"
        if c["outcome"] not in ("Skipped",):
            head += f" ({c['strength']})"
        if "summary" in c:
            head = f"[{c['fixture']}] {c['subject']}: {c['summary']}; strength: {c['strength']}"
        if "order" in c:
            head += f", order {c['order']}"
        lines.append(head)
        for r in c["residuals"]:
            lines.append(f"    residual: {r}")
        for k in ("restricted", "split"):
            for item in c.get(k, []):
                lines.append(f"    {k}: {item}")
        for level in c.get("chain", []):
            lines.append(f"    Delta^({level['k']}): {level['residuals']}")
        for key in ("potential", "gamma"):
            if key in c:
                lines.append(f"    {key}: {c[key]}")
        for w in c["witnesses"]:
            lines.append(f"    witness: {w}")
        for n in c["notes"]:
            lines.append(f"    note: {n}")
    if "error" in report:
        lines.append(f"error: {report['error']}")
    lines.append(f"exit {code}")
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("files", nargs="+", help="problem files or bundled fixture names")
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--trials", type=int, default=oracle.DEFAULT_TRIALS)
    common.add_argument("--tol", type=float, default=oracle.DEFAULT_TOL)
    common.add_argument("--seed", type=int, default=0)
    parser = argparse.ArgumentParser(prog="musym", description="Standard and mu-symmetry verification for PDEs")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, parents=[common])
        if name == "check-mu":
            p.add_argument("--strong", action="store_true", help="require Y(Delta) = 0 without restriction")
        elif name == "partial":
            p.add_argument("--max-order", type=int, dest="max_order")
        elif name == "gauge":
            g = p.add_mutually_exclusive_group()
            g.add_argument("--derive-potential", dest="gauge_mode", action="store_const", const="derive")
            g.add_argument("--verify", dest="gauge_mode", action="store_const", const="verify")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    if ns.trials < 1:
        print("error: --trials must be >= 1", file=sys.stderr)
        return EXIT_INPUT
    opt = Options(ns)
    report, code = run(ns.command, ns.files, opt)
    if ns.format == "json":
        print(json.dumps(report, indent=2, default=str))
    else:
        print(format_text(report, code))
    return code


if __name__ == "__main__":
    sys.exit(main())
