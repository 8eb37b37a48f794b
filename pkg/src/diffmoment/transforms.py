"""Affine and projective maps plus seeded samplers for each transform group.

Maps hold plain Python numbers so the same object works in floating point
and, with :class:`~fractions.Fraction` entries, in exact arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

GROUPS = ("rotation", "similarity", "affine", "projective")

# Sampling constants for the affine family.
AFFINE_ENTRY_RANGE = 2.0
MIN_JACOBIAN = 0.1
MAX_JACOBIAN = 5.0
MAX_CONDITION = 1e3
TRANSLATION_RANGE = 3.0
# Projective perturbation: bottom-row entries and the top-block jitter.
PERSPECTIVE_RANGE = 0.2
PROJECTIVE_JITTER = 0.3
MIN_HORIZON_DISTANCE = 0.2


class SingularMap(ValueError):
    pass


class PoleError(ArithmeticError):
    """Raised when a point lies on the horizon of a projective map or a
    pole of a rational field."""


def det(rows: Sequence[Sequence]) -> object:
    """Determinant; exact Gaussian elimination for rational input, numpy otherwise."""
    n = len(rows)
    if n == 0:
        return 1
    if all(isinstance(v, (int, Fraction)) for r in rows for v in r):
        a = [[Fraction(v) for v in r] for r in rows]
        sign = 1
        out = Fraction(1)
        for c in range(n):
            piv = next((r for r in range(c, n) if a[r][c] != 0), None)
            if piv is None:
                return Fraction(0)
            if piv != c:
                a[c], a[piv] = a[piv], a[c]
                sign = -sign
            out *= a[c][c]
            for r in range(c + 1, n):
                f = a[r][c] / a[c][c]
                if f:
                    a[r] = [x - f * y for x, y in zip(a[r], a[c])]
        return sign * out
    return float(np.linalg.det(np.array(rows, dtype=float)))


def _is_exact(values) -> bool:
    return all(isinstance(v, (int, Fraction)) for v in values)


@dataclass(frozen=True)
class AffineMap:
    """``x -> matrix @ x + translation``."""

    matrix: tuple[tuple, ...]
    translation: tuple

    def __post_init__(self):
        mat = tuple(tuple(r) for r in np.asarray(self.matrix, dtype=object).tolist())
        vec = tuple(np.asarray(self.translation, dtype=object).tolist())
        d = len(mat)
        if any(len(r) != d for r in mat) or len(vec) != d:
            raise ValueError("matrix must be square and match the translation length")
        object.__setattr__(self, "matrix", mat)
        object.__setattr__(self, "translation", vec)

    @classmethod
    def identity(cls, dim: int, exact: bool = False) -> "AffineMap":
        one, zero = (Fraction(1), Fraction(0)) if exact else (1.0, 0.0)
        return cls(tuple(tuple(one if i == j else zero for j in range(dim)) for i in range(dim)),
                   (zero,) * dim)

    @property
    def dim(self) -> int:
        return len(self.matrix)

    @property
    def exact(self) -> bool:
        return _is_exact(v for r in self.matrix for v in r) and _is_exact(self.translation)

    def jacobian(self):
        return det(self.matrix)

    def condition(self) -> float:
        return float(np.linalg.cond(np.array(self.matrix, dtype=float)))

    def array(self) -> np.ndarray:
        return np.array(self.matrix, dtype=float)

    def __call__(self, x: Sequence):
        return tuple(sum((a * xi for a, xi in zip(row, x)), t) for row, t in zip(self.matrix, self.translation))

    def transposed(self) -> "AffineMap":
        return AffineMap(tuple(zip(*self.matrix)), self.translation)

    def to_projective(self) -> "ProjectiveMap":
        zero, one = (Fraction(0), Fraction(1)) if self.exact else (0.0, 1.0)
        rows = [tuple(r) + (t,) for r, t in zip(self.matrix, self.translation)]
        rows.append((zero,) * self.dim + (one,))
        return ProjectiveMap(tuple(rows))

    def to_json(self) -> dict:
        return {"matrix": [[str(v) if isinstance(v, Fraction) else float(v) for v in r] for r in self.matrix],
                "translation": [str(v) if isinstance(v, Fraction) else float(v) for v in self.translation]}


@dataclass(frozen=True)
class ProjectiveMap:
    """Homogeneous ``(d+1) x (d+1)`` matrix acting by ``x -> (A x + t) / (c.x + s)``."""

    matrix: tuple[tuple, ...]

    def __post_init__(self):
        mat = tuple(tuple(r) for r in np.asarray(self.matrix, dtype=object).tolist())
        if any(len(r) != len(mat) for r in mat) or len(mat) < 2:
            raise ValueError("projective matrix must be square with size >= 2")
        if det(mat) == 0:
            raise SingularMap("projective matrix is singular")
        object.__setattr__(self, "matrix", mat)

    @property
    def dim(self) -> int:
        return len(self.matrix) - 1

    @property
    def exact(self) -> bool:
        return _is_exact(v for r in self.matrix for v in r)

    def denominator(self, x: Sequence):
        row = self.matrix[-1]
        return sum((a * xi for a, xi in zip(row, x)), row[-1])

    def __call__(self, x: Sequence):
        w = self.denominator(x)
        if w == 0:
            raise PoleError(f"point {tuple(x)} lies on the horizon")
        return tuple(sum((a * xi for a, xi in zip(row, x)), row[-1]) / w for row in self.matrix[:-1])

    def local_jacobian(self, x: Sequence):
        """Determinant of the derivative at ``x``: ``det(M) / w(x)**(d+1)``."""
        w = self.denominator(x)
        if w == 0:
            raise PoleError(f"point {tuple(x)} lies on the horizon")
        return det(self.matrix) / w ** (self.dim + 1)

    def to_json(self) -> dict:
        return {"matrix": [[str(v) if isinstance(v, Fraction) else float(v) for v in r] for r in self.matrix]}


# --------------------------------------------------------------------------
# Samplers. All randomness goes through the numpy Generator passed in.

def random_rotation(rng: np.random.Generator, dim: int) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((dim, dim)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def _translation(rng, dim):
    return rng.uniform(-TRANSLATION_RANGE, TRANSLATION_RANGE, dim)


def sample_affine(rng: np.random.Generator, dim: int, group: str = "affine") -> AffineMap:
    """Random map from ``group`` with positive Jacobian.

    Affine matrices have entries uniform in [-2, 2] and are resampled
    until ``0.1 <= J <= 5`` and the condition number is at most 1e3.
    """
    if group == "rotation":
        a = random_rotation(rng, dim)
    elif group == "similarity":
        a = rng.uniform(0.5, 2.0) * random_rotation(rng, dim)
    elif group == "affine":
        while True:
            a = rng.uniform(-AFFINE_ENTRY_RANGE, AFFINE_ENTRY_RANGE, (dim, dim))
            j = np.linalg.det(a)
            if MIN_JACOBIAN <= j <= MAX_JACOBIAN and np.linalg.cond(a) <= MAX_CONDITION:
                break
    else:
        raise ValueError(f"{group!r} is not an affine-family group")
    return AffineMap(a.tolist(), _translation(rng, dim).tolist())


def sample_rational_affine(rng: np.random.Generator, dim: int, denominator: int = 4) -> AffineMap:
    """Affine map with small rational entries (multiples of ``1/denominator``)."""
    lim = int(AFFINE_ENTRY_RANGE * denominator)
    while True:
        a = [[Fraction(int(v), denominator) for v in rng.integers(-lim, lim + 1, dim)] for _ in range(dim)]
        j = det(a)
        if MIN_JACOBIAN <= j <= MAX_JACOBIAN and np.linalg.cond(np.array(a, dtype=float)) <= MAX_CONDITION:
            break
    t = [Fraction(int(v), denominator) for v in rng.integers(-3 * denominator, 3 * denominator + 1, dim)]
    return AffineMap(a, t)


def _rational_rotation(rng: np.random.Generator, dim: int) -> list[list[Fraction]]:
    """Cayley transform ``(I - S)(I + S)^-1`` of a random rational skew matrix."""
    s = [[Fraction(0)] * dim for _ in range(dim)]
    for i in range(dim):
        for j in range(i + 1, dim):
            v = Fraction(int(rng.integers(-6, 7)), 4)
            s[i][j], s[j][i] = v, -v
    eye = [[Fraction(int(i == j)) for j in range(dim)] for i in range(dim)]
    minus = [[eye[i][j] - s[i][j] for j in range(dim)] for i in range(dim)]
    plus = [[eye[i][j] + s[i][j] for j in range(dim)] for i in range(dim)]
    inv = _rational_inverse(plus)
    return [[sum(minus[i][k] * inv[k][j] for k in range(dim)) for j in range(dim)] for i in range(dim)]


def _rational_inverse(a: list[list[Fraction]]) -> list[list[Fraction]]:
    n = len(a)
    m = [list(r) + [Fraction(int(i == j)) for j in range(n)] for i, r in enumerate(a)]
    for c in range(n):
        piv = next(r for r in range(c, n) if m[r][c] != 0)
        m[c], m[piv] = m[piv], m[c]
        m[c] = [v / m[c][c] for v in m[c]]
        for r in range(n):
            if r != c and m[r][c] != 0:
                f = m[r][c]
                m[r] = [x - f * y for x, y in zip(m[r], m[c])]
    return [r[n:] for r in m]


def sample_exact(rng: np.random.Generator, dim: int, group: str = "affine") -> AffineMap:
    """Rational-entry counterpart of :func:`sample_affine`."""
    if group == "affine":
        return sample_rational_affine(rng, dim)
    if group not in ("rotation", "similarity"):
        raise ValueError(f"{group!r} is not an affine-family group")
    a = _rational_rotation(rng, dim)
    if group == "similarity":
        s = Fraction(int(rng.integers(2, 9)), 4)
        a = [[s * v for v in r] for r in a]
    t = [Fraction(int(v), 4) for v in rng.integers(-12, 13, dim)]
    return AffineMap(a, t)


def sample_projective(rng: np.random.Generator, dim: int) -> ProjectiveMap:
    """Identity perturbed in the top block by up to 0.3 per entry and given a
    perspective row with entries in [-0.2, 0.2]."""
    while True:
        m = np.eye(dim + 1)
        m[:dim, :] += rng.uniform(-PROJECTIVE_JITTER, PROJECTIVE_JITTER, (dim, dim + 1))
        m[dim, :dim] = rng.uniform(-PERSPECTIVE_RANGE, PERSPECTIVE_RANGE, dim)
        if np.linalg.det(m) > MIN_JACOBIAN and np.linalg.cond(m) <= MAX_CONDITION:
            return ProjectiveMap(m.tolist())


def sample_point(rng: np.random.Generator, dim: int, proj: ProjectiveMap | None = None,
                 exact: bool = False, scale: float = 1.0):
    """Point in ``[-scale, scale]^dim``, kept off the horizon of ``proj``."""
    while True:
        if exact:
            p = tuple(Fraction(int(v), 8) for v in rng.integers(-8, 9, dim))
        else:
            p = tuple(float(v) for v in rng.uniform(-scale, scale, dim))
        if proj is None or abs(proj.denominator(p)) >= MIN_HORIZON_DISTANCE:
            return p
