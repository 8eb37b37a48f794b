"""Exact multivariate polynomials over indexed point coordinates.

A variable is a pair ``(point, axis)`` with both indices 1-based, so
``(2, 1)`` is ``x2`` and ``(1, 2)`` is ``y1``.  Coefficients are
:class:`fractions.Fraction` throughout.

Canonical term order is graded lexicographic, highest first: terms are
sorted by total degree (descending) and then by their exponent vectors
compared lexicographically over the variables ordered point-major,
``x1 > y1 > z1 > x2 > y2 > ...``.  Inside a monomial the factors are
rendered axis-major (``x1*x2*y1*y2``).
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Iterable, Mapping

Var = tuple[int, int]
Monomial = tuple[tuple[Var, int], ...]

_AXIS_NAMES = "xyzw"
_SENTINEL = ((1 << 62, 0), 0)


class DimensionMismatch(ValueError):
    pass


def axis_name(axis: int, dim: int) -> str:
    """Letter used for ``axis`` (1-based) when rendering in dimension ``dim``."""
    if dim <= len(_AXIS_NAMES):
        return _AXIS_NAMES[axis - 1]
    return f"u{axis}_"


def mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    exps = dict(a)
    for v, e in b:
        exps[v] = exps.get(v, 0) + e
    return tuple(sorted(exps.items()))


def mono_degree(m: Monomial) -> int:
    return sum(e for _, e in m)


def mono_key(m: Monomial):
    # Ascending sort on this key gives the descending graded-lex order.
    return (-mono_degree(m), tuple((v, -e) for v, e in m) + (_SENTINEL,))


def _fmt_coeff(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


class CoordPolynomial:
    """Immutable polynomial in the coordinates of numbered points.

    >>> x1, y2 = CoordPolynomial.var(1, 1, 2), CoordPolynomial.var(2, 2, 2)
    >>> str((x1 * y2) * (x1 * y2))
    'x1^2*y2^2'
    """

    __slots__ = ("dim", "_terms", "_hash")

    def __init__(self, dim: int, terms: Mapping[Monomial, Fraction] | Iterable = ()):
        if dim < 1:
            raise ValueError("dimension must be positive")
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: dict[Monomial, Fraction] = {}
        for mono, c in items:
            mono = tuple(sorted((tuple(v), int(e)) for v, e in mono if e))
            for (j, a), e in mono:
                if j < 1 or not 1 <= a <= dim or e < 0:
                    raise ValueError(f"bad variable {(j, a)}^{e} for dim {dim}")
            acc[mono] = acc.get(mono, Fraction(0)) + Fraction(c)
        ordered = sorted(((m, c) for m, c in acc.items() if c), key=lambda t: mono_key(t[0]))
        self.dim = dim
        self._terms: tuple[tuple[Monomial, Fraction], ...] = tuple(ordered)
        self._hash = None

    @classmethod
    def _raw(cls, dim: int, acc: dict[Monomial, Fraction]) -> "CoordPolynomial":
        # Fast path for already-canonical monomials.
        obj = cls.__new__(cls)
        obj.dim = dim
        obj._terms = tuple(sorted(((m, c) for m, c in acc.items() if c), key=lambda t: mono_key(t[0])))
        obj._hash = None
        return obj

    @classmethod
    def zero(cls, dim: int) -> "CoordPolynomial":
        return cls(dim)

    @classmethod
    def constant(cls, value, dim: int) -> "CoordPolynomial":
        return cls(dim, {(): Fraction(value)})

    @classmethod
    def var(cls, point: int, axis: int, dim: int) -> "CoordPolynomial":
        return cls(dim, {(((point, axis), 1),): Fraction(1)})

    @property
    def terms(self) -> tuple[tuple[Fraction, Monomial], ...]:
        """``(coefficient, monomial)`` pairs in canonical order."""
        return tuple((c, m) for m, c in self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def points(self) -> set[int]:
        return {j for m, _ in self._terms for (j, _a), _e in m}

    def degree(self) -> int:
        return max((mono_degree(m) for m, _ in self._terms), default=0)

    def _check(self, other: "CoordPolynomial") -> None:
        if self.dim != other.dim:
            raise DimensionMismatch(f"dimension mismatch: {self.dim} vs {other.dim}")

    def _coerce(self, other) -> "CoordPolynomial":
        if isinstance(other, CoordPolynomial):
            self._check(other)
            return other
        if isinstance(other, (int, Fraction)):
            return CoordPolynomial.constant(other, self.dim)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        acc = dict(self._terms)
        for m, c in other._terms:
            acc[m] = acc.get(m, 0) + c
        return CoordPolynomial._raw(self.dim, acc)

    __radd__ = __add__

    def __neg__(self):
        return CoordPolynomial._raw(self.dim, {m: -c for m, c in self._terms})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        acc: dict[Monomial, Fraction] = {}
        for ma, ca in self._terms:
            for mb, cb in other._terms:
                m = mono_mul(ma, mb)
                acc[m] = acc.get(m, 0) + ca * cb
        return CoordPolynomial._raw(self.dim, acc)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative power")
        out = CoordPolynomial.constant(1, self.dim)
        for _ in range(n):
            out = out * self
        return out

    def scale(self, c) -> "CoordPolynomial":
        c = Fraction(c)
        return CoordPolynomial._raw(self.dim, {m: v * c for m, v in self._terms})

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = CoordPolynomial.constant(other, self.dim)
        if not isinstance(other, CoordPolynomial):
            return NotImplemented
        return self.dim == other.dim and self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.dim, self._terms))
        return self._hash

    def evaluate(self, values: Mapping[Var, object]):
        """Evaluate at ``values[(point, axis)]``; exact if the values are rational."""
        total = 0
        for m, c in self._terms:
            t = c
            for v, e in m:
                t = t * values[v] ** e
            total = total + t
        return total

    def rename_points(self, mapping: Mapping[int, int]) -> "CoordPolynomial":
        acc = {}
        for m, c in self._terms:
            nm = tuple(sorted(((mapping.get(j, j), a), e) for (j, a), e in m))
            acc[nm] = acc.get(nm, 0) + c
        return CoordPolynomial._raw(self.dim, acc)

    def render(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for i, (m, c) in enumerate(self._terms):
            factors = [
                axis_name(a, self.dim) + str(j) + (f"^{e}" if e > 1 else "")
                for (j, a), e in sorted(m, key=lambda t: (t[0][1], t[0][0]))
            ]
            mag = abs(c)
            if not factors:
                body = _fmt_coeff(mag)
            elif mag == 1:
                body = "*".join(factors)
            else:
                body = _fmt_coeff(mag) + "*" + "*".join(factors)
            if i == 0:
                parts.append(("-" if c < 0 else "") + body)
            else:
                parts.append((" - " if c < 0 else " + ") + body)
        return "".join(parts)

    __str__ = render

    def __repr__(self):
        return f"CoordPolynomial(dim={self.dim}, {self.render()!r})"


def poly_add(a: CoordPolynomial, b: CoordPolynomial) -> CoordPolynomial:
    a._check(b)
    return a + b


def poly_mul(a: CoordPolynomial, b: CoordPolynomial) -> CoordPolynomial:
    a._check(b)
    return a * b


def rational_content(coeffs: Iterable[Fraction]) -> Fraction:
    """Positive rational gcd of ``coeffs``: every ``c / content`` is an integer, jointly coprime."""
    num, den = 0, 1
    for c in coeffs:
        c = Fraction(c)
        num = gcd(num, c.numerator)
        den = den * c.denominator // gcd(den, c.denominator)
    if num == 0:
        raise ValueError("content of the zero polynomial is undefined")
    return Fraction(num, den)


def content_normalize(p: CoordPolynomial) -> tuple[CoordPolynomial, Fraction]:
    """Split ``p`` as ``c * q`` with ``q`` primitive and its leading coefficient positive."""
    if p.is_zero():
        raise ValueError("cannot normalize the zero polynomial")
    c = rational_content(coef for coef, _ in p.terms)
    if p.terms[0][0] < 0:
        c = -c
    return p.scale(1 / c), c
