"""Translate expanded coordinate polynomials into moment expressions and
moment expressions into derivative expressions.

A symbol is a multi-index ``(i1, ..., id)``.  In moment form it stands for
the central moment ``mu_{i1...id}``; in derivative form for the partial
derivative of ``H`` with those orders along each axis.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Mapping

from .algebra import CoordPolynomial, axis_name, rational_content
from .generators import GenForm, PISpec

MOMENTS = "moments"
DERIVATIVES = "derivatives"

MultiIndex = tuple[int, ...]
Term = tuple[MultiIndex, ...]


def _symbol_key(idx: MultiIndex):
    return (sum(idx), idx)


def canonical_term(symbols: Iterable[MultiIndex]) -> Term:
    """Symbols of one product, highest order first, then by multi-index descending."""
    return tuple(sorted((tuple(s) for s in symbols), key=_symbol_key, reverse=True))


def _term_key(term: Term):
    return tuple(_symbol_key(s) for s in term)


class SymbolPoly:
    """Polynomial in moment/derivative symbols with exact coefficients."""

    __slots__ = ("dim", "terms")

    def __init__(self, dim: int, terms: Mapping[Term, Fraction] | Iterable = ()):
        self.dim = dim
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: dict[Term, Fraction] = {}
        for term, c in items:
            term = canonical_term(term)
            if any(len(s) != dim for s in term):
                raise ValueError(f"symbol arity does not match dimension {dim}")
            acc[term] = acc.get(term, Fraction(0)) + Fraction(c)
        self.terms = {t: c for t, c in acc.items() if c}

    @classmethod
    def symbol(cls, *idx: int) -> "SymbolPoly":
        return cls(len(idx), {(tuple(idx),): 1})

    def _lift(self, other):
        if isinstance(other, SymbolPoly):
            if other.dim != self.dim:
                raise ValueError("dimension mismatch")
            return other
        return SymbolPoly(self.dim, {(): Fraction(other)})

    def __add__(self, other):
        other = self._lift(other)
        acc = dict(self.terms)
        for t, c in other.terms.items():
            acc[t] = acc.get(t, 0) + c
        return SymbolPoly(self.dim, acc)

    __radd__ = __add__

    def __neg__(self):
        return SymbolPoly(self.dim, {t: -c for t, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        other = self._lift(other)
        acc: dict[Term, Fraction] = {}
        for ta, ca in self.terms.items():
            for tb, cb in other.terms.items():
                t = canonical_term(ta + tb)
                acc[t] = acc.get(t, 0) + ca * cb
        return SymbolPoly(self.dim, acc)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        out = SymbolPoly(self.dim, {(): 1})
        for _ in range(n):
            out = out * self
        return out

    def ordered(self) -> tuple[tuple[Fraction, Term], ...]:
        return tuple((self.terms[t], t) for t in sorted(self.terms, key=_term_key, reverse=True))


def render_symbol(idx: MultiIndex, form: str) -> str:
    dim = len(idx)
    if form == MOMENTS:
        if all(i < 10 for i in idx):
            return "mu" + "".join(map(str, idx))
        return "mu[" + ",".join(map(str, idx)) + "]"
    letters = "".join(axis_name(a + 1, dim) * n for a, n in enumerate(idx))
    return "H_" + letters if letters else "H"


@dataclass(frozen=True, eq=False)
class InvariantExpr:
    """Polynomial in moment or derivative symbols with a normalization law.

    Moment forms are divided by ``mu00**power``; derivative forms by
    ``J**power`` where ``J`` is the Jacobian of the map.
    """

    dim: int
    form: str
    terms: tuple[tuple[Fraction, Term], ...]
    power: int = 0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.form not in (MOMENTS, DERIVATIVES):
            raise ValueError(f"unknown form {self.form!r}")
        ordered = SymbolPoly(self.dim, [(t, c) for c, t in self.terms]).ordered()
        object.__setattr__(self, "terms", ordered)

    @classmethod
    def from_poly(cls, poly: SymbolPoly, form: str, power: int = 0, **meta) -> "InvariantExpr":
        return cls(poly.dim, form, tuple((c, t) for t, c in poly.terms.items()), power, meta)

    @property
    def normalization(self) -> str:
        return "mu00" if self.form == MOMENTS else "jacobian"

    @property
    def degree(self) -> int:
        return max((len(t) for _, t in self.terms), default=0)

    def symbols(self) -> set[MultiIndex]:
        return {s for _, t in self.terms for s in t}

    def max_order(self) -> int:
        return max((sum(s) for s in self.symbols()), default=0)

    def order_profiles(self) -> set[tuple[int, ...]]:
        return {tuple(sorted((sum(s) for s in t), reverse=True)) for _, t in self.terms}

    def is_homogeneous(self) -> bool:
        return len(self.order_profiles()) <= 1

    def total_order(self) -> int:
        profiles = self.order_profiles()
        if len(profiles) != 1:
            raise ValueError("expression is not homogeneous")
        return sum(profiles.pop())

    def weight(self) -> Fraction:
        """Exponent ``w`` with ``value(transformed) = J**w * value(original)``
        for the similarity family, and for the affine family when the
        expression is an affine invariant.

        Moments pick up one factor ``J`` of mass per symbol plus
        ``J**(order/d)`` from the coordinates; the ``mu00`` denominator
        cancels ``power`` of them.  Derivatives only carry the coordinate part.
        """
        coord = Fraction(self.total_order(), self.dim)
        if self.form == MOMENTS:
            return self.degree + coord - self.power
        return coord

    def evaluate(self, lookup: Callable[[MultiIndex], object]):
        """Numerator value with ``lookup(symbol)`` supplying each symbol."""
        cache: dict[MultiIndex, object] = {}
        total = 0
        for c, term in self.terms:
            t = c
            for s in term:
                if s not in cache:
                    cache[s] = lookup(s)
                t = t * cache[s]
            total = total + t
        return total

    def evaluate_with_scale(self, lookup: Callable[[MultiIndex], object]):
        """``(value, sum of |term|)``; the second number measures cancellation."""
        cache: dict[MultiIndex, object] = {}
        total, scale = 0, 0
        for c, term in self.terms:
            t = c
            for s in term:
                if s not in cache:
                    cache[s] = lookup(s)
                t = t * cache[s]
            total = total + t
            scale = scale + abs(t)
        return total, scale

    def scaled(self, c) -> "InvariantExpr":
        c = Fraction(c)
        return InvariantExpr(self.dim, self.form, tuple((v * c, t) for v, t in self.terms),
                             self.power, dict(self.meta))

    def same_terms(self, other: "InvariantExpr") -> bool:
        return self.dim == other.dim and self.terms == other.terms

    def render(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for i, (c, term) in enumerate(self.terms):
            names: list[str] = []
            run: dict[MultiIndex, int] = {}
            for s in term:
                run[s] = run.get(s, 0) + 1
            for s, n in run.items():
                names.append(render_symbol(s, self.form) + (f"^{n}" if n > 1 else ""))
            mag = abs(c)
            coeff = str(mag)
            if not names:
                body = coeff
            elif mag == 1:
                body = "*".join(names)
            else:
                body = coeff + "*" + "*".join(names)
            if i == 0:
                parts.append(("-" if c < 0 else "") + body)
            else:
                parts.append((" - " if c < 0 else " + ") + body)
        text = "".join(parts)
        if self.power:
            den = render_symbol((0,) * self.dim, MOMENTS) if self.form == MOMENTS else "J"
            text = f"({text}) / {den}^{self.power}"
        return text

    __str__ = render

    def to_json(self) -> dict:
        return {
            "dim": self.dim,
            "form": self.form,
            "terms": [{"coeff": str(c), "symbols": [list(s) for s in t]} for c, t in self.terms],
            "normalization": {"kind": self.normalization, "power": self.power},
            "meta": self.meta,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, data: dict) -> "InvariantExpr":
        form = data["form"]
        norm = data.get("normalization", {})
        kind = norm.get("kind", "mu00" if form == MOMENTS else "jacobian")
        if (form == MOMENTS) != (kind == "mu00"):
            raise ValueError(f"normalization {kind!r} does not fit form {form!r}")
        terms = tuple((Fraction(t["coeff"]), tuple(tuple(s) for s in t["symbols"])) for t in data["terms"])
        return cls(int(data["dim"]), form, terms, int(norm.get("power", 0)), dict(data.get("meta", {})))

    @classmethod
    def loads(cls, text: str) -> "InvariantExpr":
        return cls.from_json(json.loads(text))


def moment_poly(p: CoordPolynomial) -> SymbolPoly:
    """Per-monomial translation: the exponents of point ``j`` become the
    multi-index of one moment factor."""
    acc: dict[Term, Fraction] = {}
    for c, mono in p.terms:
        per_point: dict[int, list[int]] = {}
        for (j, a), e in mono:
            per_point.setdefault(j, [0] * p.dim)[a - 1] += e
        term = canonical_term(tuple(v) for v in per_point.values())
        acc[term] = acc.get(term, 0) + c
    return SymbolPoly(p.dim, acc)


def to_moments(p: CoordPolynomial, spec: PISpec | GenForm | None = None) -> InvariantExpr:
    """Translate an expansion into a content-normalized moment expression.

    The stripped constant is kept in ``meta["constant"]``.  All-``g`` specs
    get the ``mu00**(m + k)`` denominator.
    """
    poly = moment_poly(p)
    meta: dict = {}
    power = 0
    if spec is not None:
        k = spec.k
        meta = {"m": spec.m, "k": k, "source": str(spec)}
        if spec.is_affine and k:
            power = spec.m + k
    if not poly.terms:
        meta["constant"] = "0"
        meta["zero"] = True
        return InvariantExpr(p.dim, MOMENTS, (), power, meta)
    ordered = poly.ordered()
    c = rational_content(coef for coef, _ in ordered)
    if ordered[0][0] < 0:
        c = -c
    meta["constant"] = str(c)
    return InvariantExpr(p.dim, MOMENTS, tuple((coef / c, t) for coef, t in ordered), power, meta)


def to_derivatives(e: InvariantExpr) -> InvariantExpr:
    """Swap each moment for the derivative of the same multi-index; the
    ``mu00`` denominator becomes ``J**k`` with ``k`` the ``g`` count."""
    if e.form != MOMENTS:
        raise ValueError("expected a moment-form expression")
    k = e.meta.get("k")
    if k is None:
        k = e.power - e.degree if e.power else 0
    meta = dict(e.meta)
    meta["k"] = k
    return InvariantExpr(e.dim, DERIVATIVES, e.terms, k, meta)


def central_shift_note(e: InvariantExpr) -> bool:
    """True when a first-order moment appears: the moment form then vanishes
    on central moments while the derivative form does not."""
    if e.form != MOMENTS:
        raise ValueError("expected a moment-form expression")
    return any(sum(s) == 1 for s in e.symbols())
