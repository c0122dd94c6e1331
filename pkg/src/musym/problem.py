"""Problem files: JSON (``"schema": 1``) with expression-valued strings."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any

import jsonschema
import sympy as sp

from .jet import JetSpace, PDESystem
from .muform import GaugeMap, HorizontalForm
from .reduce import Ansatz
from .vfield import VectorField

__all__ = ["ProblemError", "Problem", "NamedField", "load", "load_data", "fixture_names", "resolve"]


class ProblemError(ValueError):
    pass


_EXPR = {"type": "string", "minLength": 1}
_EXPR_MAP = {"type": "object", "additionalProperties": _EXPR}
_MATRIX = {"type": "array", "items": {"type": "array", "items": _EXPR, "minItems": 1}, "minItems": 1}

_FIELD = {
    "type": "object",
    "properties": {
        "name": {"type": "string"},
        "xi": _EXPR_MAP,
        "phi": _EXPR_MAP,
        "q": _EXPR_MAP,
        "gauged": _EXPR_MAP,
    },
    "additionalProperties": False,
}

SCHEMA = {
    "type": "object",
    "required": ["schema", "independent", "dependent", "equations"],
    "properties": {
        "schema": {"const": 1},
        "name": {"type": "string"},
        "description": {"type": "string"},
        "independent": {"type": "array", "items": {"type": "string"}, "minItems": 1},
        "dependent": {"type": "array", "items": {"type": "string"}, "minItems": 1},
        "order": {"type": "integer", "minimum": 1},
        "constants": {"type": "array", "items": {"type": "string"}},
        "functions": {"type": "object", "additionalProperties": {"type": "integer", "minimum": 1}},
        "assumptions": {
            "type": "object",
            "properties": {"positive": {"type": "array", "items": {"type": "string"}}},
            "additionalProperties": False,
        },
        "equations": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["expr", "solve_for"],
                "properties": {"expr": _EXPR, "solve_for": _EXPR, "label": {"type": "string"}},
                "additionalProperties": False,
            },
        },
        "vector_fields": {"type": "array", "items": _FIELD},
        "mu": {"type": "array", "items": {"anyOf": [_EXPR, _MATRIX]}},
        "gamma": {"anyOf": [_EXPR, _MATRIX]},
        "nonlocal_P": {"type": "array", "items": _EXPR},
        "invariants": {"type": "array", "items": _EXPR},
        "solutions": {"type": "array", "items": _EXPR_MAP},
        "conditional": {
            "type": "object",
            "properties": {
                "solve_for": {"type": "array", "items": _EXPR},
                "candidate_solution": _EXPR_MAP,
            },
            "additionalProperties": False,
        },
        "partial": {
            "type": "object",
            "properties": {
                "max_order": {"type": "integer", "minimum": 1},
                "hints": {"type": "object", "additionalProperties": {"type": "array", "items": _EXPR}},
                "expected": {"type": "object",
                             "additionalProperties": {"anyOf": [_EXPR, {"type": "array", "items": _EXPR}]}},
                "expected_order": {"type": "integer"},
            },
            "additionalProperties": False,
        },
        "ansatz": {
            "type": "object",
            "required": ["invariants", "forms", "functions"],
            "properties": {
                "invariants": _EXPR_MAP,
                "forms": _EXPR_MAP,
                "functions": {"type": "object", "additionalProperties": {"type": "integer", "minimum": 1}},
                "noninvariant": {"type": "array", "items": {"type": "string"}},
                "eliminate": {"type": "string"},
                "component_solutions": {"type": "array", "items": _EXPR_MAP},
                "expected_components": {"type": "array", "items": _EXPR},
            },
            "additionalProperties": False,
        },
        "notes": {"type": "array", "items": {"type": "string"}},
    },
    "additionalProperties": False,
}


@dataclass
class NamedField:
    name: str
    field: VectorField
    gauged: tuple | None = None


@dataclass
class Problem:
    name: str
    data: dict
    space: JetSpace
    system: PDESystem
    fields: list = field(default_factory=list)
    mu: HorizontalForm | None = None
    gamma: GaugeMap | None = None
    P: list | None = None
    notes: list = field(default_factory=list)

    def require(self, attr: str, command: str):
        value = getattr(self, attr)
        if value is None or value == []:
            label = {"fields": "vector_fields", "P": "nonlocal_P"}.get(attr, attr)
            raise ProblemError(f"{command} needs '{label}' in the problem file")
        return value

    def expr(self, text: str):
        return self.space.parse(text)

    @property
    def ansatz(self) -> Ansatz | None:
        a = self.data.get("ansatz")
        if a is None:
            return None
        return Ansatz(a["invariants"], a["forms"], a["functions"], tuple(a.get("noninvariant", ())),
                      a.get("eliminate"))

    @property
    def assumptions(self) -> list[str]:
        pos = self.data.get("assumptions", {}).get("positive", [])
        return [f"branch assumption {p} > 0 (abs dropped)" for p in pos]


def fixture_names() -> list[str]:
    root = resources.files("musym") / "fixtures"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def resolve(path: str) -> Path:
    """A file path, or the name of a bundled fixture (with or without .json)."""
    p = Path(path)
    if p.is_file():
        return p
    stem = p.name[:-5] if p.name.endswith(".json") else p.name
    candidate = resources.files("musym") / "fixtures" / f"{stem}.json"
    if candidate.is_file():
        return Path(str(candidate))
    raise ProblemError(f"no such problem file or bundled fixture: {path}")


def load(path: str) -> Problem:
    p = resolve(path)
    try:
        data = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ProblemError(f"{p}: invalid JSON: {exc}") from exc
    return load_data(data, name=p.stem)


def _matrix(space, entry, q):
    if isinstance(entry, str):
        if q != 1:
            raise ProblemError("scalar entries need q = 1; give q x q matrices")
        return sp.ImmutableMatrix([[space.parse(entry)]])
    m = sp.ImmutableMatrix([[space.parse(v) for v in row] for row in entry])
    if m.shape != (q, q):
        raise ProblemError(f"matrices must be {q}x{q}, got {m.shape[0]}x{m.shape[1]}")
    return m


def load_data(data: dict[str, Any], name: str = "problem") -> Problem:
    try:
        jsonschema.validate(data, SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(map(str, exc.absolute_path)) or "(root)"
        raise ProblemError(f"schema violation at {where}: {exc.message}") from exc
    positive = data.get("assumptions", {}).get("positive", [])
    try:
        base = JetSpace(tuple(data["independent"]), tuple(data["dependent"]), data.get("order", 1),
                        tuple(data.get("constants", ())), data.get("functions", {}), frozenset(positive))
        system = PDESystem.build(base, [(e["expr"], e["solve_for"]) for e in data["equations"]],
                                 [e.get("label", f"Delta_{k + 1}") for k, e in enumerate(data["equations"])])
        space = base.with_order(max(base.order, system.order))
        system = PDESystem(space, system.equations)
        fields = []
        for k, f in enumerate(data.get("vector_fields", [])):
            name_k = f.get("name", f"X{k + 1}" if len(data["vector_fields"]) > 1 else "X")
            if "q" in f:
                if "xi" in f or "phi" in f:
                    raise ProblemError(f"field {name_k}: give either q or (xi, phi)")
                vf = VectorField.parse(space, {}, f["q"])
            else:
                vf = VectorField.parse(space, f.get("xi"), f.get("phi"))
            gauged = None
            if "gauged" in f:
                gauged = tuple(space.parse(f["gauged"].get(u, "0")) for u in space.dependent)
            fields.append(NamedField(name_k, vf, gauged))
        mu = None
        if "mu" in data:
            if len(data["mu"]) != space.p:
                raise ProblemError("mu needs one entry per independent variable")
            mu = HorizontalForm(tuple(_matrix(space, m, space.q) for m in data["mu"]))
        gamma = GaugeMap(_matrix(space, data["gamma"], space.q)) if "gamma" in data else None
        P = [space.parse(v) for v in data["nonlocal_P"]] if "nonlocal_P" in data else None
        if P is not None and len(P) != space.p:
            raise ProblemError("nonlocal_P needs one entry per independent variable")
    except ProblemError:
        raise
    except (ValueError, ZeroDivisionError) as exc:
        raise ProblemError(str(exc)) from exc
    return Problem(data.get("name", name), data, space, system, fields, mu, gamma, P,
                   list(data.get("notes", [])))
