"""Symbolic expression kernel.

Expressions are plain (immutable) sympy trees.  This module adds what the rest
of the package needs on top of sympy: a small infix parser with jet-coordinate
shorthand, a printer whose output reparses, undetermined functions with formal
derivative leaves, a canonical normal form and a two-tier zero test.
"""
from __future__ import annotations

import functools
import re
from dataclasses import dataclass, field
from typing import Any, Mapping

import sympy as sp
from sympy.core.function import ArgumentIndexError
from sympy.printing.str import StrPrinter

Expression = sp.Expr

__all__ = [
    "Expression",
    "ParseError",
    "UnknownIdentifier",
    "SingularDenominator",
    "UndeterminedFunction",
    "undetermined",
    "parse",
    "to_text",
    "diff_partial",
    "substitute",
    "normalize",
    "ZeroVerdict",
    "is_zero",
    "proportionality_factor",
    "function_leaves",
]


class ParseError(ValueError):
    def __init__(self, message: str, position: int, text: str = ""):
        self.position = position
        self.text = text
        super().__init__(f"{message} at position {position}")


class UnknownIdentifier(ParseError):
    pass


class SingularDenominator(ZeroDivisionError):
    pass


# ---------------------------------------------------------------------------
# undetermined functions


class UndeterminedFunction(sp.Function):
    """Base class for applied undetermined functions such as ``w(z)``.

    Concrete classes are made by :func:`undetermined`; ``base_name`` and
    ``derivs`` (formal derivative counts per argument) are class attributes.
    """

    base_name = ""
    derivs: tuple[int, ...] = ()

    def fdiff(self, argindex=1):
        if not 1 <= argindex <= len(self.args):
            raise ArgumentIndexError(self, argindex)
        counts = list(self.derivs)
        counts[argindex - 1] += 1
        return undetermined(self.base_name, len(counts), tuple(counts))(*self.args)

    def _eval_is_commutative(self):
        return True


@functools.lru_cache(maxsize=None)
def undetermined(name: str, arity: int, derivs: tuple[int, ...] | None = None):
    """Return the function class ``name`` of the given arity and derivative counts."""
    if derivs is None:
        derivs = (0,) * arity
    if len(derivs) != arity:
        raise ValueError("derivative counts must match the arity")
    label = name if not any(derivs) else f"{name}__d{'_'.join(map(str, derivs))}"
    return type(label, (UndeterminedFunction,), {
        "nargs": arity,
        "base_name": name,
        "derivs": tuple(derivs),
    })


def function_leaves(e: sp.Expr) -> set[sp.Expr]:
    return set(e.atoms(UndeterminedFunction))


# ---------------------------------------------------------------------------
# printing


class _Printer(StrPrinter):
    def _print_Function(self, expr):
        if isinstance(expr, UndeterminedFunction):
            args = ", ".join(self._print(a) for a in expr.args)
            derivs = expr.derivs
            if not any(derivs):
                head = expr.base_name
            elif len(derivs) == 1:
                head = expr.base_name + "'" * derivs[0]
            else:
                head = expr.base_name + "'[" + ",".join(map(str, derivs)) + "]"
            return f"{head}({args})"
        return super()._print_Function(expr)

    def _print_atan(self, expr):
        return f"arctan({self._print(expr.args[0])})"

    def _print_Abs(self, expr):
        return f"abs({self._print(expr.args[0])})"

    def _print_ImaginaryUnit(self, expr):
        return "i"

    def _print_Exp1(self, expr):
        return "exp(1)"


_PRINTER = _Printer({"order": None})


def to_text(e: Any) -> str:
    """Print an expression in the input grammar (the result reparses)."""
    # symbol names never contain '*', so the operator swap is safe
    return _PRINTER.doprint(sp.sympify(e)).replace("**", "^")


# ---------------------------------------------------------------------------
# parsing

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d*)?|\.\d+)"
    r"|(?P<name>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>\*\*|[-+*/^(),\[\]']))"
)

_BUILTINS = {
    "exp": sp.exp,
    "log": sp.log,
    "ln": sp.log,
    "sin": sp.sin,
    "cos": sp.cos,
    "tan": sp.tan,
    "arctan": sp.atan,
    "atan": sp.atan,
    "sqrt": sp.sqrt,
}


@dataclass
class _Tok:
    kind: str
    value: str
    pos: int


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", pos, text)
        kind = m.lastgroup
        toks.append(_Tok(kind, m.group(kind), m.start(kind)))
        pos = m.end()
    toks.append(_Tok("end", "", len(text)))
    return toks


class _Parser:
    def __init__(self, text: str, namespace):
        self.text = text
        self.ns = namespace
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self, value=None):
        tok = self.toks[self.i]
        if value is None:
            return tok
        return tok if tok.value == value and tok.kind == "op" else None

    def take(self, value=None):
        tok = self.toks[self.i]
        if value is not None and (tok.kind != "op" or tok.value != value):
            what = tok.value or "end of input"
            raise ParseError(f"expected {value!r}, found {what!r}", tok.pos, self.text)
        self.i += 1
        return tok

    def parse(self):
        e = self.expr()
        tok = self.peek()
        if tok.kind != "end":
            raise ParseError(f"unexpected {tok.value!r}", tok.pos, self.text)
        return e

    def expr(self):
        e = self.term()
        while self.peek("+") or self.peek("-"):
            op = self.take().value
            rhs = self.term()
            e = e + rhs if op == "+" else e - rhs
        return e

    def term(self):
        e = self.unary()
        while self.peek("*") or self.peek("/"):
            tok = self.take()
            rhs = self.unary()
            if tok.value == "*":
                e = e * rhs
            else:
                if rhs == 0:
                    raise SingularDenominator(f"division by zero at position {tok.pos}")
                e = e / rhs
        return e

    def unary(self):
        if self.peek("-"):
            self.take()
            return -self.unary()
        if self.peek("+"):
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek("^") or self.peek("**"):
            self.take()
            return base ** self.unary()
        return base

    def _index_list(self):
        self.take("[")
        vals = []
        while True:
            tok = self.take()
            if tok.kind != "num" or not tok.value.isdigit():
                raise ParseError("expected a nonnegative integer index", tok.pos, self.text)
            vals.append(int(tok.value))
            if self.peek("]"):
                self.take()
                return tuple(vals)
            self.take(",")

    def atom(self):
        tok = self.peek()
        if tok.kind == "num":
            self.take()
            return sp.Rational(tok.value)
        if tok.kind == "op" and tok.value == "(":
            self.take()
            e = self.expr()
            self.take(")")
            return e
        if tok.kind == "name":
            return self.named()
        raise ParseError(f"unexpected {tok.value or 'end of input'!r}", tok.pos, self.text)

    def named(self):
        tok = self.take()
        name = tok.value
        indices = None
        primes = 0
        if self.peek("["):
            indices = self._index_list()
        while self.peek("'"):
            self.take()
            primes += 1
        if self.peek("("):
            self.take()
            args = [self.expr()]
            while self.peek(","):
                self.take()
                args.append(self.expr())
            self.take(")")
            return self.apply(name, args, indices, primes, tok)
        if primes:
            raise ParseError("derivative marks need an argument list", tok.pos, self.text)
        if indices is not None:
            sym = self.ns.jet_from_indices(name, indices)
            if sym is None:
                raise UnknownIdentifier(f"unknown jet coordinate {name}{list(indices)}", tok.pos, self.text)
            return sym
        if name == "i":
            return sp.I
        if name == "pi":
            return sp.pi
        sym = self.ns.lookup(name)
        if sym is None:
            raise UnknownIdentifier(f"unknown identifier {name!r}", tok.pos, self.text)
        return sym

    def apply(self, name, args, indices, primes, tok):
        if name == "abs":
            if len(args) != 1:
                raise ParseError("abs takes one argument", tok.pos, self.text)
            arg = args[0]
            if arg.is_Symbol and arg.name in self.ns.positive_names():
                return arg
            return sp.Abs(arg)
        if name in _BUILTINS and indices is None and not primes:
            if len(args) != 1:
                raise ParseError(f"{name} takes one argument", tok.pos, self.text)
            return _BUILTINS[name](args[0])
        arity = self.ns.function_arity(name)
        if arity is None:
            raise UnknownIdentifier(f"unknown function {name!r}", tok.pos, self.text)
        if len(args) != arity:
            raise ParseError(f"{name} expects {arity} argument(s), got {len(args)}", tok.pos, self.text)
        if indices is not None:
            if primes or len(indices) != arity:
                raise ParseError("derivative index list must match the arity", tok.pos, self.text)
            derivs = indices
        elif primes:
            if arity != 1:
                raise ParseError("prime notation needs a one-argument function", tok.pos, self.text)
            derivs = (primes,)
        else:
            derivs = (0,) * arity
        return undetermined(name, arity, tuple(derivs))(*args)


@dataclass(frozen=True)
class Namespace:
    """Minimal symbol table for :func:`parse` when no jet space is involved."""

    symbols: tuple[str, ...] = ()
    functions: Mapping[str, int] = field(default_factory=dict)
    positive: frozenset[str] = frozenset()

    def lookup(self, name):
        return sp.Symbol(name) if name in self.symbols else None

    def jet_from_indices(self, name, indices):
        return None

    def function_arity(self, name):
        return self.functions.get(name)

    def positive_names(self):
        return self.positive


def parse(text: str, namespace=None) -> sp.Expr:
    """Parse ``text`` against ``namespace`` and return the normalized expression.

    ``namespace`` is anything with ``lookup``, ``jet_from_indices``,
    ``function_arity`` and ``positive_names`` (a :class:`~musym.jet.JetSpace`
    or a :class:`Namespace`).
    """
    if namespace is None:
        namespace = Namespace()
    return normalize(parse_raw(text, namespace))


def parse_raw(text: str, namespace) -> sp.Expr:
    return sp.sympify(_Parser(text, namespace).parse())


# ---------------------------------------------------------------------------
# calculus and rewriting


def diff_partial(e: sp.Expr, s: sp.Symbol) -> sp.Expr:
    """Partial derivative, every other symbol independent; chain rule through
    undetermined functions yields formal derivative leaves."""
    return normalize(sp.diff(e, s))


def substitute(e: sp.Expr, rules: Mapping) -> sp.Expr:
    """Simultaneous single-pass replacement followed by normalization."""
    if not rules:
        return normalize(e)
    rules = {sp.sympify(k): sp.sympify(v) for k, v in rules.items()}
    if all(k.is_Atom or isinstance(k, UndeterminedFunction) for k in rules):
        out = e.xreplace(rules)
    else:
        out = e.subs(rules, simultaneous=True)
    return normalize(out)


def substitute_with_limit(e: sp.Expr, values: Mapping) -> tuple[sp.Expr, bool]:
    """xreplace ``values`` and normalize; at a singular point fall back to the
    one-sided limit with every substituted value shifted by +epsilon.

    Returns (result, used_limit).
    """
    try:
        out = normalize(e.xreplace(values))
        if not out.has(sp.nan, sp.zoo):
            return out, False
    except SingularDenominator:
        pass
    eps = sp.Symbol("epsilon_", positive=True)
    shifted = {k: v + eps for k, v in values.items()}
    return normalize(sp.limit(e.xreplace(shifted), eps, 0, "+")), True


def _log_exp(e):
    return e.replace(
        lambda a: isinstance(a, sp.log) and isinstance(a.args[0], sp.exp),
        lambda a: a.args[0].args[0],
    )


def _check_finite(e):
    if e.has(sp.zoo, sp.nan, sp.oo, -sp.oo):
        raise SingularDenominator("singular denominator")
    return e


def _is_polynomial(e) -> bool:
    for node in sp.preorder_traversal(e):
        if node.is_Symbol or node.is_Number or node is sp.I or node.is_Add or node.is_Mul:
            continue
        if node.is_Pow and node.exp.is_Integer and node.exp >= 0:
            continue
        return False
    return True


def normalize(e: Any) -> sp.Expr:
    """Canonical form: rational normalization over transcendental kernels.

    exp factors merge, ``log(exp(a))`` collapses, ``i^2 = -1``; the result is a
    reduced fraction of expanded polynomials in the kernels.
    """
    e = sp.sympify(e)
    if e.is_Atom:
        return _check_finite(e)
    if _is_polynomial(e):
        return sp.expand(e)
    e = _log_exp(e)
    # together first: cancel alone expands powers of sums before combining
    e = sp.cancel(sp.together(e))
    n, d = sp.fraction(e)
    if d == 0:
        raise SingularDenominator("singular denominator")
    n = sp.powsimp(sp.expand(n), combine="exp")
    d = sp.powsimp(sp.expand(d), combine="exp")
    out = sp.cancel(n / d)
    return _check_finite(out)


def proportionality_factor(a: sp.Expr, b: sp.Expr, allowed=None):
    """Return ``a/b`` normalized if it involves only ``allowed`` symbols and no
    undetermined functions (a declared nonzero factor), else ``None``."""
    if normalize(b) == 0:
        return None
    ratio = normalize(sp.sympify(a) / b)
    if ratio == 0 or function_leaves(ratio):
        return None
    if allowed is not None and not ratio.free_symbols <= set(allowed):
        return None
    return ratio


# ---------------------------------------------------------------------------
# zero testing


@dataclass(frozen=True)
class ZeroVerdict:
    """Outcome of a zero test: ``proved``, ``numeric`` or ``nonzero``."""

    status: str
    trials: int = 0
    max_abs: float = 0.0
    witness: Mapping | None = None
    value: complex | None = None

    PROVED = "proved"
    NUMERIC = "numeric"
    NONZERO = "nonzero"

    @classmethod
    def proved(cls):
        return cls(cls.PROVED)

    @property
    def is_zero(self) -> bool:
        return self.status != self.NONZERO

    @property
    def is_proved(self) -> bool:
        return self.status == self.PROVED

    def describe(self) -> str:
        if self.status == self.PROVED:
            return "ProvedZero"
        if self.status == self.NUMERIC:
            return f"NumericZero(trials={self.trials}, max|value|={self.max_abs:.3g})"
        return f"NonZero(value={self.value})"


def is_zero(e: sp.Expr, space=None, *, constraints=None, trials: int = 20,
            tol: float = 1e-9, seed: int = 0) -> ZeroVerdict:
    """Two-tier zero test: canonical form first, random evaluation second.

    With ``constraints`` (a PDE system) the expression is first restricted to
    the solution manifold and sampled at points lying on it.
    """
    from . import oracle

    if constraints is not None:
        e = constraints.restrict(e)
    if normalize(e) == 0:
        return ZeroVerdict.proved()
    return oracle.numeric_zero_check(e, space, trials=trials, tol=tol, seed=seed,
                                     constraints=constraints)
