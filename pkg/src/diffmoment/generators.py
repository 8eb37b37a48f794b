"""Generating functions ``f`` (inner product) and ``g`` (determinant) and
primitive-invariant specs built from products of them.

Spec strings look like ``g(1,2)*g(1,2)``, ``f(1,1)`` or
``1/2*g(1,2,3)*g(2,3,4)``.  Point indices are 1-based.  A *form* is a
rational linear combination of specs, e.g. ``f(1,2)^2 - 2*g(1,2)^2``.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from typing import Iterator, Sequence

from .algebra import CoordPolynomial


class SpecSyntaxError(ValueError):
    def __init__(self, message: str, text: str, pos: int):
        self.line = text.count("\n", 0, pos) + 1
        self.column = pos - (text.rfind("\n", 0, pos) + 1) + 1
        super().__init__(f"{message} at line {self.line}, column {self.column}")


@dataclass(frozen=True, order=True)
class GenFactor:
    kind: str  # "f" or "g"
    points: tuple[int, ...]

    def __post_init__(self):
        if self.kind not in ("f", "g"):
            raise ValueError(f"unknown generating function {self.kind!r}")
        object.__setattr__(self, "points", tuple(int(p) for p in self.points))
        if self.kind == "f" and len(self.points) != 2:
            raise ValueError("f takes exactly two points")
        if any(p < 1 for p in self.points):
            raise ValueError("point indices are 1-based")

    def polynomial(self, dim: int) -> CoordPolynomial:
        if self.kind == "f":
            return eval_f(self.points[0], self.points[1], dim)
        return eval_g(self.points, dim)

    def relabel(self, mapping) -> "GenFactor":
        return GenFactor(self.kind, tuple(mapping[p] for p in self.points))

    def __str__(self):
        return f"{self.kind}({','.join(map(str, self.points))})"


@dataclass(frozen=True)
class PISpec:
    """A product of generating functions, optionally scaled by a rational constant."""

    dim: int
    factors: tuple[GenFactor, ...]
    coeff: Fraction = field(default=Fraction(1))

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        object.__setattr__(self, "coeff", Fraction(self.coeff))
        if self.dim < 1:
            raise ValueError("dimension must be positive")
        if not self.factors:
            raise ValueError("a spec needs at least one factor")
        for fac in self.factors:
            if fac.kind == "g" and len(fac.points) != self.dim:
                raise ValueError(f"{fac} has arity {len(fac.points)}, expected {self.dim}")

    @property
    def k(self) -> int:
        return sum(1 for fac in self.factors if fac.kind == "g")

    @property
    def l(self) -> int:  # noqa: E743
        return sum(1 for fac in self.factors if fac.kind == "f")

    @property
    def freq(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for fac in self.factors:
            for p in fac.points:
                out[p] = out.get(p, 0) + 1
        return dict(sorted(out.items()))

    @property
    def m(self) -> int:
        return len(self.freq)

    @property
    def is_affine(self) -> bool:
        return self.l == 0

    def relabeled(self) -> "PISpec":
        """Rename points to 1..m in order of first appearance."""
        order: dict[int, int] = {}
        for fac in self.factors:
            for p in fac.points:
                order.setdefault(p, len(order) + 1)
        return PISpec(self.dim, tuple(f.relabel(order) for f in self.factors), self.coeff)

    def __str__(self):
        body = "*".join(str(f) for f in self.factors)
        if self.coeff == 1:
            return body
        return f"{self.coeff}*{body}"

    def to_json(self) -> dict:
        return {"dim": self.dim, "spec": str(self), "m": self.m, "k": self.k, "l": self.l,
                "freq": {str(p): n for p, n in self.freq.items()}}


@dataclass(frozen=True)
class GenForm:
    """Rational linear combination of specs sharing one dimension."""

    dim: int
    terms: tuple[PISpec, ...]

    def __str__(self):
        out = []
        for i, t in enumerate(self.terms):
            s = str(t)
            if i and s.startswith("-"):
                out.append(" - " + s[1:])
            else:
                out.append((" + " if i else "") + s)
        return "".join(out)

    @property
    def k(self) -> int | None:
        ks = {t.k for t in self.terms}
        return ks.pop() if len(ks) == 1 else None

    @property
    def m(self) -> int:
        return max(t.m for t in self.terms)

    @property
    def freq(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for t in self.terms:
            for p, n in t.freq.items():
                out[p] = max(out.get(p, 0), n)
        return out

    @property
    def is_affine(self) -> bool:
        return all(t.is_affine for t in self.terms) and self.k is not None


def eval_f(i: int, j: int, dim: int) -> CoordPolynomial:
    """Inner product of the coordinate vectors of points ``i`` and ``j``."""
    if dim < 1:
        raise ValueError("dimension must be positive")
    acc = {}
    for a in range(1, dim + 1):
        if i == j:
            key = (((i, a), 2),)
        else:
            key = tuple(((p, a), 1) for p in sorted((i, j)))
        acc[key] = 1
    return CoordPolynomial(dim, acc)


def _perm_sign(perm: Sequence[int]) -> int:
    sign, seen = 1, [False] * len(perm)
    for s in range(len(perm)):
        if seen[s]:
            continue
        n, c = 0, s
        while not seen[c]:
            seen[c] = True
            c = perm[c]
            n += 1
        if n % 2 == 0:
            sign = -sign
    return sign


def eval_g(points: Sequence[int], dim: int) -> CoordPolynomial:
    """Determinant whose rows are the coordinate vectors of ``points``."""
    points = tuple(points)
    if len(points) != dim:
        raise ValueError(f"g takes {dim} points in dimension {dim}, got {len(points)}")
    if len(set(points)) < dim:
        return CoordPolynomial.zero(dim)
    acc = {}
    for perm in itertools.permutations(range(dim)):
        mono = tuple(sorted(((points[r], perm[r] + 1), 1) for r in range(dim)))
        acc[mono] = _perm_sign(perm)
    return CoordPolynomial(dim, acc)


def expand_spec(spec: PISpec) -> CoordPolynomial:
    """Multiply out a spec into a coordinate polynomial (possibly zero)."""
    polys = [fac.polynomial(spec.dim) for fac in spec.factors]
    return reduce(lambda a, b: a * b, polys).scale(spec.coeff)


def expand(obj: PISpec | GenForm) -> CoordPolynomial:
    if isinstance(obj, PISpec):
        return expand_spec(obj)
    return reduce(lambda a, b: a + b, (expand_spec(t) for t in obj.terms))


# --------------------------------------------------------------------------
# Parsing

_TOKEN = re.compile(r"\s*(?:(?P<num>\d+)|(?P<name>[fg])|(?P<op>[-+*/^(),]))")


def _tokenize(text: str):
    pos, out = 0, []
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            start = len(text) - len(text[pos:].lstrip())
            raise SpecSyntaxError(f"unexpected character {text[start]!r}", text, start)
        kind = m.lastgroup
        out.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


class _SpecParser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self, kind=None, value=None):
        tok = self.toks[self.i]
        if (kind and tok[0] != kind) or (value and tok[1] != value):
            want = value or kind
            got = tok[1] or "end of input"
            raise SpecSyntaxError(f"expected {want!r}, found {got!r}", self.text, tok[2])
        self.i += 1
        return tok

    def form(self) -> list[tuple[Fraction, list[GenFactor]]]:
        terms = []
        sign = 1
        if self.peek()[1] in "+-" and self.peek()[0] == "op":
            sign = -1 if self.take()[1] == "-" else 1
        terms.append(self.term(sign))
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            sign = -1 if self.take()[1] == "-" else 1
            terms.append(self.term(sign))
        self.take("end")
        return terms

    def term(self, sign: int):
        coeff = Fraction(sign)
        factors: list[GenFactor] = []
        while True:
            tok = self.peek()
            if tok[0] == "num":
                num = int(self.take()[1])
                den = 1
                if self.peek()[1] == "/":
                    self.take()
                    den = int(self.take("num")[1])
                    if den == 0:
                        raise SpecSyntaxError("division by zero", self.text, tok[2])
                coeff *= Fraction(num, den)
            elif tok[0] == "name":
                factors.extend(self.factor())
            else:
                raise SpecSyntaxError(f"expected f(...), g(...) or a number, found {tok[1] or 'end of input'!r}",
                                      self.text, tok[2])
            if self.peek()[1] == "*":
                self.take()
                continue
            break
        if not factors:
            raise SpecSyntaxError("term has no generating function", self.text, self.peek()[2])
        return coeff, factors

    def index(self) -> int:
        tok = self.take("num")
        if int(tok[1]) < 1:
            raise SpecSyntaxError("point indices are 1-based", self.text, tok[2])
        return int(tok[1])

    def factor(self) -> list[GenFactor]:
        name_tok = self.take("name")
        self.take("op", "(")
        pts = [self.index()]
        while self.peek()[1] == ",":
            self.take()
            pts.append(self.index())
        self.take("op", ")")
        power = 1
        if self.peek()[1] == "^":
            self.take()
            power = int(self.take("num")[1])
        try:
            fac = GenFactor(name_tok[1], tuple(pts))
        except ValueError as exc:
            raise SpecSyntaxError(str(exc), self.text, name_tok[2]) from None
        return [fac] * power


def _infer_dim(raw, dim: int | None, text: str) -> int:
    arities = {len(f.points) for _, facs in raw for f in facs if f.kind == "g"}
    if len(arities) > 1:
        raise SpecSyntaxError("g factors disagree on arity", text, 0)
    if arities:
        inferred = arities.pop()
        if dim is not None and dim != inferred:
            raise SpecSyntaxError(f"g arity {inferred} does not match dimension {dim}", text, 0)
        return inferred
    return 2 if dim is None else dim


def parse_form(text: str, dim: int | None = None) -> GenForm:
    raw = _SpecParser(text).form()
    d = _infer_dim(raw, dim, text)
    return GenForm(d, tuple(PISpec(d, tuple(facs), c) for c, facs in raw))


def parse_spec(text: str, dim: int | None = None) -> PISpec:
    """Parse a single product such as ``g(2,1)*g(2,3)``."""
    form = parse_form(text, dim)
    if len(form.terms) != 1:
        raise SpecSyntaxError("expected a single product, got a sum", text, 0)
    return form.terms[0]


def parse(text: str, dim: int | None = None) -> PISpec | GenForm:
    form = parse_form(text, dim)
    return form.terms[0] if len(form.terms) == 1 else form


# --------------------------------------------------------------------------
# Geometric primitives expressed through f and g

def distance_sq(i: int, dim: int = 2) -> PISpec:
    return PISpec(dim, (GenFactor("f", (i, i)),))


def angle_core(i: int, j: int, dim: int = 2) -> PISpec:
    return PISpec(dim, (GenFactor("f", (i, j)),))


def area_core(i: int, j: int) -> PISpec:
    """Half the squared cross product of two planar vectors."""
    g = GenFactor("g", (i, j))
    return PISpec(2, (g, g), Fraction(1, 2))


# --------------------------------------------------------------------------
# Enumeration

def _factor_key(fac: GenFactor):
    return (fac.kind, tuple(sorted(fac.points)))


def canonical_spec(spec: PISpec) -> PISpec:
    """Orbit representative under point relabeling and factor reordering.

    Point lists are sorted, which drops the sign of ``g``; the result
    spans the same invariant up to a constant.
    """
    used = sorted(spec.freq)
    best = None
    for perm in itertools.permutations(range(1, len(used) + 1)):
        mapping = dict(zip(used, perm))
        key = tuple(sorted(_factor_key(f.relabel(mapping)) for f in spec.factors))
        if best is None or key < best:
            best = key
    return PISpec(spec.dim, tuple(GenFactor(k, p) for k, p in best))


def _alphabet(dim: int, m_max: int, affine_only: bool) -> list[GenFactor]:
    pts = range(1, m_max + 1)
    out = []
    if not affine_only:
        out += [GenFactor("f", (i, j)) for i, j in itertools.combinations_with_replacement(pts, 2)]
    out += [GenFactor("g", c) for c in itertools.combinations(pts, dim)]
    return out


def _multisets(alphabet, order_max: int) -> Iterator[tuple[GenFactor, ...]]:
    freq: dict[int, int] = {}
    chosen: list[GenFactor] = []

    def rec(start: int):
        if chosen:
            yield tuple(chosen)
        for idx in range(start, len(alphabet)):
            fac = alphabet[idx]
            if any(freq.get(p, 0) + fac.points.count(p) > order_max for p in set(fac.points)):
                continue
            for p in fac.points:
                freq[p] = freq.get(p, 0) + 1
            chosen.append(fac)
            yield from rec(idx)
            chosen.pop()
            for p in fac.points:
                freq[p] -= 1

    yield from rec(0)


def enumerate_specs(dim: int, m_max: int, order_max: int, affine_only: bool = False) -> list[PISpec]:
    """All specs with at most ``m_max`` points and every point frequency at
    most ``order_max``, one per relabeling orbit, whose moment translation
    is nonzero (a nonzero expansion can still translate to zero, e.g.
    ``g(1,2)*g(2,3)*g(3,1)``).

    With ``affine_only`` only ``g`` factors are used and their count is even.
    """
    if m_max < 1 or order_max < 1:
        raise ValueError("m_max and order_max must be at least 1")
    seen: dict[tuple, PISpec] = {}
    for facs in _multisets(_alphabet(dim, m_max, affine_only), order_max):
        k = sum(1 for f in facs if f.kind == "g")
        if affine_only and k % 2:
            continue
        canon = canonical_spec(PISpec(dim, facs))
        key = tuple(_factor_key(f) for f in canon.factors)
        if key in seen:
            continue
        seen[key] = canon
    from .translator import moment_poly

    out = [s for s in seen.values() if moment_poly(expand_spec(s)).terms]
    out.sort(key=lambda s: (s.m, len(s.factors), tuple(_factor_key(f) for f in s.factors)))
    return out
