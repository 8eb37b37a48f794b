"""Exactly differentiable scalar fields and their jets.

A :class:`ScalarField` is ``numerator / prod(base_i ** power_i)`` with
polynomial numerator and bases over the rationals.  Keeping the
denominator factored makes repeated differentiation and projective
composition cheap: a partial derivative raises each power by one instead
of squaring the whole denominator.
"""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Mapping, Sequence

import numpy as np

from .algebra import axis_name
from .momentlab import multi_indices
from .transforms import AffineMap, PoleError, ProjectiveMap
from .translator import DERIVATIVES, InvariantExpr

Exps = tuple[int, ...]


class FieldSyntaxError(ValueError):
    def __init__(self, message: str, text: str, pos: int):
        self.line = text.count("\n", 0, pos) + 1
        self.column = pos - (text.rfind("\n", 0, pos) + 1) + 1
        super().__init__(f"{message} at line {self.line}, column {self.column}")


class JetOrderError(ValueError):
    pass


class StencilError(ArithmeticError):
    pass


def _is_exact_point(p: Sequence) -> bool:
    return all(isinstance(v, (int, Fraction)) for v in p)


class FieldPoly:
    """Polynomial in ``dim`` variables, exponent tuples to rational coefficients."""

    __slots__ = ("dim", "coeffs", "_float")

    def __init__(self, dim: int, coeffs: Mapping[Exps, object] = ()):
        self.dim = dim
        acc: dict[Exps, Fraction] = {}
        for e, c in dict(coeffs).items():
            e = tuple(e)
            if len(e) != dim:
                raise ValueError("exponent length does not match dimension")
            acc[e] = acc.get(e, Fraction(0)) + Fraction(c)
        self.coeffs = {e: c for e, c in acc.items() if c}
        self._float = None

    @classmethod
    def constant(cls, c, dim: int) -> "FieldPoly":
        return cls(dim, {(0,) * dim: c})

    @classmethod
    def var(cls, axis: int, dim: int) -> "FieldPoly":
        """Coordinate ``axis`` (0-based)."""
        e = [0] * dim
        e[axis] = 1
        return cls(dim, {tuple(e): 1})

    @classmethod
    def linear(cls, coeffs: Sequence, const, dim: int) -> "FieldPoly":
        out = {(0,) * dim: Fraction(const)}
        for a, c in enumerate(coeffs):
            e = [0] * dim
            e[a] = 1
            out[tuple(e)] = Fraction(c)
        return cls(dim, out)

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_constant(self) -> bool:
        return all(not any(e) for e in self.coeffs)

    def constant_value(self) -> Fraction:
        return self.coeffs.get((0,) * self.dim, Fraction(0))

    def degree(self) -> int:
        return max((sum(e) for e in self.coeffs), default=0)

    def __add__(self, other: "FieldPoly") -> "FieldPoly":
        acc = dict(self.coeffs)
        for e, c in other.coeffs.items():
            acc[e] = acc.get(e, 0) + c
        return FieldPoly(self.dim, acc)

    def __neg__(self) -> "FieldPoly":
        return FieldPoly(self.dim, {e: -c for e, c in self.coeffs.items()})

    def __sub__(self, other: "FieldPoly") -> "FieldPoly":
        return self + (-other)

    def __mul__(self, other) -> "FieldPoly":
        if not isinstance(other, FieldPoly):
            c = Fraction(other)
            return FieldPoly(self.dim, {e: v * c for e, v in self.coeffs.items()})
        acc: dict[Exps, Fraction] = {}
        for ea, ca in self.coeffs.items():
            for eb, cb in other.coeffs.items():
                e = tuple(x + y for x, y in zip(ea, eb))
                acc[e] = acc.get(e, 0) + ca * cb
        return FieldPoly(self.dim, acc)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "FieldPoly":
        out = FieldPoly.constant(1, self.dim)
        base = self
        while n:
            if n & 1:
                out = out * base
            n >>= 1
            if n:
                base = base * base
        return out

    def __eq__(self, other):
        return isinstance(other, FieldPoly) and self.dim == other.dim and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.dim, frozenset(self.coeffs.items())))

    def partial(self, axis: int) -> "FieldPoly":
        acc = {}
        for e, c in self.coeffs.items():
            if e[axis]:
                ne = e[:axis] + (e[axis] - 1,) + e[axis + 1:]
                acc[ne] = c * e[axis]
        return FieldPoly(self.dim, acc)

    def evaluate(self, p: Sequence):
        if _is_exact_point(p):
            coeffs = self.coeffs.items()
            total = Fraction(0)
        else:
            if self._float is None:
                self._float = [(e, float(c)) for e, c in self.coeffs.items()]
            coeffs = self._float
            p = [float(v) for v in p]
            total = 0.0
        powers = [[1] * (self.degree() + 1) for _ in range(self.dim)]
        for a in range(self.dim):
            for k in range(1, len(powers[a])):
                powers[a][k] = powers[a][k - 1] * p[a]
        for e, c in coeffs:
            t = c
            for a, k in enumerate(e):
                if k:
                    t = t * powers[a][k]
            total += t
        return total

    def substitute(self, forms: Sequence["FieldPoly"], weight: "FieldPoly | None" = None) -> "FieldPoly":
        """Replace variable ``i`` by ``forms[i]``.  With ``weight`` the result is
        homogenised: each term of degree ``k`` gets ``weight ** (deg - k)``."""
        n = self.degree()
        dim = forms[0].dim
        cache: dict[tuple[int, int], FieldPoly] = {}

        def pw(i, k):
            if (i, k) not in cache:
                base = weight if i < 0 else forms[i]
                cache[(i, k)] = base ** k
            return cache[(i, k)]

        out = FieldPoly(dim)
        for e, c in self.coeffs.items():
            t = FieldPoly.constant(c, dim)
            for i, k in enumerate(e):
                if k:
                    t = t * pw(i, k)
            if weight is not None and n - sum(e):
                t = t * pw(-1, n - sum(e))
            out = out + t
        return out

    def render(self) -> str:
        if not self.coeffs:
            return "0"
        parts = []
        for i, e in enumerate(sorted(self.coeffs, key=lambda e: (-sum(e), tuple(-x for x in e)))):
            c = self.coeffs[e]
            names = [axis_name(a + 1, self.dim) + (f"^{k}" if k > 1 else "") for a, k in enumerate(e) if k]
            mag = abs(c)
            if not names:
                body = str(mag)
            elif mag == 1:
                body = "*".join(names)
            else:
                body = f"{mag}*" + "*".join(names)
            sign = "-" if c < 0 else "+"
            parts.append((sign if sign == "-" else "") + body if i == 0 else f" {sign} {body}")
        return "".join(parts)

    __str__ = render


class ScalarField:
    """``numerator / prod(base ** power)`` with exact partial derivatives."""

    def __init__(self, numerator: FieldPoly, denominator: Sequence[tuple[FieldPoly, int]] = ()):
        num = numerator
        den: list[tuple[FieldPoly, int]] = []
        for base, p in denominator:
            if p == 0:
                continue
            if base.is_zero():
                raise ZeroDivisionError("denominator factor is identically zero")
            if base.is_constant():
                num = num * (1 / base.constant_value() ** p)
            else:
                den.append((base, p))
        self.dim = numerator.dim
        self.numerator = num
        self.denominator = tuple(den)
        self._partials: dict[int, ScalarField] = {}

    @classmethod
    def polynomial(cls, poly: FieldPoly) -> "ScalarField":
        return cls(poly)

    @classmethod
    def constant(cls, c, dim: int) -> "ScalarField":
        return cls(FieldPoly.constant(c, dim))

    @property
    def is_polynomial(self) -> bool:
        return not self.denominator

    def _den_poly(self) -> FieldPoly:
        out = FieldPoly.constant(1, self.dim)
        for b, p in self.denominator:
            out = out * b ** p
        return out

    def __add__(self, other):
        other = _as_field(other, self.dim)
        powers: dict[FieldPoly, int] = {}
        for b, p in self.denominator + other.denominator:
            powers[b] = max(powers.get(b, 0), p)

        def lifted(f: ScalarField) -> FieldPoly:
            mine = dict(f.denominator)
            out = f.numerator
            for b, p in powers.items():
                extra = p - mine.get(b, 0)
                if extra:
                    out = out * b ** extra
            return out

        return ScalarField(lifted(self) + lifted(other), tuple(powers.items()))

    __radd__ = __add__

    def __neg__(self):
        return ScalarField(-self.numerator, self.denominator)

    def __sub__(self, other):
        return self + (-_as_field(other, self.dim))

    def __rsub__(self, other):
        return _as_field(other, self.dim) - self

    def __mul__(self, other):
        other = _as_field(other, self.dim)
        powers: dict[FieldPoly, int] = {}
        for b, p in self.denominator + other.denominator:
            powers[b] = powers.get(b, 0) + p
        return ScalarField(self.numerator * other.numerator, tuple(powers.items()))

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _as_field(other, self.dim)
        if other.numerator.is_zero():
            raise ZeroDivisionError("division by the zero field")
        powers: dict[FieldPoly, int] = {}
        for b, p in self.denominator:
            powers[b] = powers.get(b, 0) + p
        powers[other.numerator] = powers.get(other.numerator, 0) + 1
        return ScalarField(self.numerator * other._den_poly(), tuple(powers.items()))

    def __pow__(self, n: int):
        out = ScalarField.constant(1, self.dim)
        for _ in range(n):
            out = out * self
        return out

    def partial(self, axis: int) -> "ScalarField":
        """Exact derivative along ``axis`` (0-based), memoised."""
        if axis not in self._partials:
            moving = [(i, b, p, b.partial(axis)) for i, (b, p) in enumerate(self.denominator)]
            moving = [(i, b, p, db) for i, b, p, db in moving if not db.is_zero()]
            if not moving:
                out = ScalarField(self.numerator.partial(axis), self.denominator)
            else:
                prod_b = FieldPoly.constant(1, self.dim)
                for _, b, _, _ in moving:
                    prod_b = prod_b * b
                num = self.numerator.partial(axis) * prod_b
                for i, _, p, db in moving:
                    others = FieldPoly.constant(p, self.dim)
                    for j, b2, _, _ in moving:
                        if j != i:
                            others = others * b2
                    num = num - self.numerator * db * others
                bumped = {i for i, _, _, _ in moving}
                den = tuple((b, p + 1 if i in bumped else p) for i, (b, p) in enumerate(self.denominator))
                out = ScalarField(num, den)
            self._partials[axis] = out
        return self._partials[axis]

    def derivative(self, idx: Sequence[int]) -> "ScalarField":
        out = self
        for axis, n in enumerate(idx):
            for _ in range(n):
                out = out.partial(axis)
        return out

    def __call__(self, p: Sequence):
        return self.evaluate(p)

    def evaluate(self, p: Sequence):
        if len(p) != self.dim:
            raise ValueError("point dimension mismatch")
        den = 1
        for b, k in self.denominator:
            v = b.evaluate(p)
            if v == 0 or (isinstance(v, float) and not math.isfinite(v)):
                raise PoleError(f"pole at {tuple(p)}")
            den = den * v ** k
        return self.numerator.evaluate(p) / den if self.denominator else self.numerator.evaluate(p)

    def equals(self, other: "ScalarField") -> bool:
        """Exact equality as rational functions (cross-multiplied)."""
        return (self.numerator * other._den_poly() - other.numerator * self._den_poly()).is_zero()

    def render(self) -> str:
        num = self.numerator.render()
        if not self.denominator:
            return num
        den = "*".join(f"({b.render()})" + (f"^{p}" if p > 1 else "") for b, p in self.denominator)
        return f"({num}) / {den}"

    __str__ = render

    def __repr__(self):
        return f"ScalarField({self.render()!r})"


def _as_field(x, dim: int) -> ScalarField:
    if isinstance(x, ScalarField):
        if x.dim != dim:
            raise ValueError("dimension mismatch")
        return x
    if isinstance(x, FieldPoly):
        return ScalarField(x)
    return ScalarField.constant(x, dim)


def partial(fld: ScalarField, axis: int) -> ScalarField:
    return fld.partial(axis)


def compose_affine(fld: ScalarField, T: AffineMap) -> ScalarField:
    """Field ``x -> fld(T(x))`` with exact coefficients (``T`` entries are
    taken at face value when they are floats)."""
    if T.dim != fld.dim:
        raise ValueError("map and field dimensions differ")
    forms = [FieldPoly.linear(row, t, fld.dim) for row, t in zip(T.matrix, T.translation)]
    return ScalarField(fld.numerator.substitute(forms),
                       tuple((b.substitute(forms), p) for b, p in fld.denominator))


def compose_projective(fld: ScalarField, P: ProjectiveMap) -> ScalarField:
    """Field ``x -> fld(P(x))`` as an exact rational function."""
    d = fld.dim
    if P.dim != d:
        raise ValueError("map and field dimensions differ")
    rows = P.matrix
    forms = [FieldPoly.linear(r[:d], r[d], d) for r in rows[:d]]
    w = FieldPoly.linear(rows[d][:d], rows[d][d], d)
    num = fld.numerator.substitute(forms, w)
    excess = -fld.numerator.degree()
    den: list[tuple[FieldPoly, int]] = []
    for b, p in fld.denominator:
        den.append((b.substitute(forms, w), p))
        excess += b.degree() * p
    if excess > 0:
        num = num * w ** excess
    elif excess < 0:
        den.append((w, -excess))
    return ScalarField(num, tuple(den))


@dataclass(frozen=True)
class JetPoint:
    position: tuple
    derivatives: dict
    order: int

    def __getitem__(self, idx):
        try:
            return self.derivatives[tuple(idx)]
        except KeyError:
            raise JetOrderError(f"jet of order {self.order} has no entry {tuple(idx)}") from None


def jet(fld: ScalarField, p: Sequence, order: int) -> JetPoint:
    """All partial derivatives of order ``<= order`` at ``p``; exact for rational ``p``."""
    p = tuple(p)
    derivs = {}
    for r in range(order + 1):
        for idx in multi_indices(fld.dim, r):
            derivs[idx] = fld.derivative(idx).evaluate(p)
    return JetPoint(p, derivs, order)


def derivative_vector(fld: ScalarField, p: Sequence, order: int) -> list:
    return [fld.derivative(idx).evaluate(tuple(p)) for idx in multi_indices(fld.dim, order)]


def eval_deriv_expr(e: InvariantExpr, jet_point: JetPoint, J=None):
    """Substitute jet values; divide by ``J**power`` when ``J`` is given."""
    if e.form != DERIVATIVES:
        raise ValueError("expected a derivative-form expression")
    if e.max_order() > jet_point.order:
        raise JetOrderError(f"expression needs order {e.max_order()}, jet has {jet_point.order}")
    value = e.evaluate(jet_point.__getitem__)
    if J is not None and e.power:
        if J == 0:
            raise ZeroDivisionError("zero Jacobian")
        value = value / J ** e.power
    return value


# --------------------------------------------------------------------------
# Finite differences

def central_stencil(k: int) -> tuple[tuple[int, Fraction], ...]:
    """Second-order central weights for the ``k``-th derivative on integer offsets."""
    if k == 0:
        return ((0, Fraction(1)),)
    half = (k + 1) // 2
    offsets = list(range(-half, half + 1))
    n = len(offsets)
    a = [[Fraction(o) ** m for o in offsets] + [Fraction(math.factorial(k) if m == k else 0)] for m in range(n)]
    for c in range(n):
        piv = next(r for r in range(c, n) if a[r][c] != 0)
        a[c], a[piv] = a[piv], a[c]
        a[c] = [v / a[c][c] for v in a[c]]
        for r in range(n):
            if r != c and a[r][c] != 0:
                f = a[r][c]
                a[r] = [x - f * y for x, y in zip(a[r], a[c])]
    return tuple((o, a[i][n]) for i, o in enumerate(offsets) if a[i][n] != 0)


def _fd(f: Callable, p: np.ndarray, idx: Sequence[int], h: float) -> float:
    stencils = [central_stencil(k) for k in idx]
    total = 0.0
    for combo in itertools.product(*stencils):
        w = 1.0
        shift = np.zeros(len(p))
        for a, (o, c) in enumerate(combo):
            w *= float(c)
            shift[a] = o * h
        try:
            val = float(f(tuple(p + shift)))
        except Exception as exc:  # noqa: BLE001 - any evaluator failure aborts the stencil
            raise StencilError(f"evaluation failed at {tuple(p + shift)}: {exc}") from exc
        total += w * val
    return total / h ** sum(idx)


def fd_jet(f: Callable, p: Sequence, order: int, h: float = 1e-3, richardson: bool = True) -> JetPoint:
    """Central-difference jet of a black-box evaluator.

    ``h`` is relative to ``max(1, |p|_inf)``.  The plain estimate has
    ``O(h^2)`` error; one Richardson step combines ``h`` and ``h/2``.
    """
    p_arr = np.asarray(p, dtype=float)
    step = h * max(1.0, float(np.max(np.abs(p_arr))) if len(p_arr) else 1.0)
    derivs = {}
    for r in range(order + 1):
        for idx in multi_indices(len(p_arr), r):
            coarse = _fd(f, p_arr, idx, step)
            if richardson and r:
                fine = _fd(f, p_arr, idx, step / 2)
                derivs[idx] = (4 * fine - coarse) / 3
            else:
                derivs[idx] = coarse
    return JetPoint(tuple(float(v) for v in p_arr), derivs, order)


# --------------------------------------------------------------------------
# Random fields and the literal grammar

def random_polynomial_field(rng: np.random.Generator, dim: int, degree: int = 3) -> ScalarField:
    """Every monomial up to ``degree`` with coefficient ``n/q``, ``n`` in [-6, 6], ``q`` in 1..3."""
    coeffs = {}
    for r in range(degree + 1):
        for e in multi_indices(dim, r):
            coeffs[e] = Fraction(int(rng.integers(-6, 7)), int(rng.integers(1, 4)))
    top = multi_indices(dim, degree)[0]
    if coeffs[top] == 0:
        coeffs[top] = Fraction(1)
    return ScalarField(FieldPoly(dim, coeffs))


_FIELD_TOKEN = re.compile(r"\s*(?:(?P<num>\d+(?:\.\d+)?)|(?P<var>[a-z]\d*)|(?P<op>[-+*/^()]))")


def parse_field(text: str, dim: int | None = None) -> ScalarField:
    """Parse literals such as ``3/2*x^2*y - y^3 + x``.

    Variables are ``x, y, z`` (and ``w`` in 4-D) or ``x1 .. xd``.
    Division by a non-constant gives a rational field.
    """
    toks = []
    pos = 0
    while pos < len(text):
        if not text[pos:].strip():
            break
        m = _FIELD_TOKEN.match(text, pos)
        if not m:
            start = len(text) - len(text[pos:].lstrip())
            raise FieldSyntaxError(f"unexpected character {text[start]!r}", text, start)
        toks.append((m.lastgroup, m.group(m.lastgroup), m.start(m.lastgroup)))
        pos = m.end()
    toks.append(("end", "", len(text)))

    def axis_of(name: str, at: int) -> int:
        if name in "xyzw" and len(name) == 1:
            return "xyzw".index(name)
        if name[0] == "x" and name[1:].isdigit() and int(name[1:]) >= 1:
            return int(name[1:]) - 1
        raise FieldSyntaxError(f"unknown variable {name!r}", text, at)

    used = [axis_of(v, at) for kind, v, at in toks if kind == "var"]
    d = dim if dim is not None else max([1] + [a + 1 for a in used])
    if any(a >= d for a in used):
        bad = next(t for t in toks if t[0] == "var" and axis_of(t[1], t[2]) >= d)
        raise FieldSyntaxError(f"variable {bad[1]!r} exceeds dimension {d}", text, bad[2])
    i = 0

    def peek():
        return toks[i]

    def take(value=None):
        nonlocal i
        tok = toks[i]
        if value is not None and tok[1] != value:
            raise FieldSyntaxError(f"expected {value!r}, found {tok[1] or 'end of input'!r}", text, tok[2])
        i += 1
        return tok

    def expr():
        out = term()
        while peek()[1] in ("+", "-") and peek()[0] == "op":
            op = take()[1]
            rhs = term()
            out = out + rhs if op == "+" else out - rhs
        return out

    def term():
        out = unary()
        while peek()[1] in ("*", "/") and peek()[0] == "op":
            op = take()[1]
            at = peek()[2]
            rhs = unary()
            if op == "*":
                out = out * rhs
            else:
                try:
                    out = out / rhs
                except ZeroDivisionError:
                    raise FieldSyntaxError("division by zero", text, at) from None
        return out

    def unary():
        if peek()[0] == "op" and peek()[1] in ("+", "-"):
            sign = take()[1]
            inner = unary()
            return -inner if sign == "-" else inner
        return power()

    def power():
        base = atom()
        if peek()[1] == "^":
            take()
            tok = take()
            if tok[0] != "num" or not tok[1].isdigit():
                raise FieldSyntaxError("exponent must be a non-negative integer", text, tok[2])
            base = base ** int(tok[1])
        return base

    def atom():
        kind, val, at = peek()
        if kind == "num":
            take()
            return ScalarField.constant(Fraction(val), d)
        if kind == "var":
            take()
            return ScalarField(FieldPoly.var(axis_of(val, at), d))
        if val == "(":
            take()
            out = expr()
            take(")")
            return out
        raise FieldSyntaxError(f"unexpected {val or 'end of input'!r}", text, at)

    out = expr()
    if peek()[0] != "end":
        raise FieldSyntaxError(f"unexpected {peek()[1]!r}", text, peek()[2])
    return out
