"""Moments of point-mass images and their behaviour under affine maps.

An image is a finite measure: positions with masses.  Applying an affine
map moves the positions and multiplies every mass by the Jacobian, so
``M00`` of the result is exactly ``J * M00`` of the input and the
transformed moments are polynomial in the original ones with no
resampling error.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .transforms import AffineMap, SingularMap
from .translator import MOMENTS, InvariantExpr

MultiIndex = tuple[int, ...]


class ZeroMassError(ValueError):
    pass


class FormatError(ValueError):
    def __init__(self, message: str, path, line: int, column: int | None = None):
        where = f"{path}:{line}" + (f":{column}" if column is not None else "")
        super().__init__(f"{where}: {message}")
        self.line, self.column = line, column


@dataclass(frozen=True, eq=False)
class PointMassImage:
    positions: np.ndarray  # (n, d)
    masses: np.ndarray  # (n,)

    def __post_init__(self):
        pos = np.atleast_2d(np.asarray(self.positions, dtype=float))
        mass = np.asarray(self.masses, dtype=float).reshape(-1)
        if pos.shape[0] != mass.shape[0]:
            raise ValueError("one mass per position is required")
        if not (np.all(np.isfinite(pos)) and np.all(np.isfinite(mass))):
            raise ValueError("positions and masses must be finite")
        pos.setflags(write=False)
        mass.setflags(write=False)
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "masses", mass)

    @property
    def dim(self) -> int:
        return self.positions.shape[1]

    def __len__(self):
        return len(self.masses)


@dataclass(frozen=True, eq=False)
class DensityGrid:
    """Sampled density; ``origin`` is the lower corner of cell ``(0, ..., 0)``."""

    origin: tuple[float, ...]
    spacing: tuple[float, ...]
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if len(self.origin) != vals.ndim or len(self.spacing) != vals.ndim:
            raise ValueError("origin and spacing must have one entry per grid axis")
        if any(s <= 0 for s in self.spacing):
            raise ValueError("spacing must be positive")
        if np.any(vals < 0) or not np.all(np.isfinite(vals)):
            raise ValueError("grid values must be finite and non-negative")
        object.__setattr__(self, "values", vals)

    @property
    def dim(self) -> int:
        return self.values.ndim


def multi_indices(dim: int, order: int) -> list[MultiIndex]:
    """All multi-indices of the given total order, lexicographically descending."""
    if dim == 1:
        return [(order,)]
    return [(i,) + rest for i in range(order, -1, -1) for rest in multi_indices(dim - 1, order - i)]


def _moment(pos: np.ndarray, mass: np.ndarray, idx: Sequence[int]) -> float:
    w = mass.copy()
    for a, e in enumerate(idx):
        if e:
            w = w * pos[:, a] ** e
    return math.fsum(w)


def raw_moment(img: PointMassImage, idx: Sequence[int]) -> float:
    return _moment(img.positions, img.masses, idx)


def total_mass(img: PointMassImage) -> float:
    return math.fsum(img.masses)


def centroid(img: PointMassImage) -> np.ndarray:
    m00 = total_mass(img)
    if m00 == 0:
        raise ZeroMassError("centroid of an image with zero total mass")
    return np.array([_moment(img.positions, img.masses, e) / m00 for e in np.eye(img.dim, dtype=int)])


def central_moment(img: PointMassImage, idx: Sequence[int]) -> float:
    return _moment(img.positions - centroid(img), img.masses, idx)


def _dyadic_ints(values: Iterable[float]) -> tuple[list[int], int]:
    """Integers ``n_i`` and one power of two ``L`` with ``values[i] == n_i / L`` exactly."""
    ratios = [float(v).as_integer_ratio() for v in values]
    scale = max((d for _, d in ratios), default=1)
    return [n * (scale // d) for n, d in ratios], scale


class CentralMoments:
    """Memoised central moments of one image.

    With ``exact=True`` the float positions and masses are taken at face
    value and every moment is an exact :class:`Fraction`, so high-degree
    invariants with heavy cancellation lose nothing to rounding.
    """

    def __init__(self, img: PointMassImage, exact: bool = False):
        self.img = img
        self.exact = exact
        self._cache: dict[MultiIndex, object] = {}
        if exact:
            flat, self._pos_scale = _dyadic_ints(img.positions.ravel())
            d = img.dim
            pts = [flat[i:i + d] for i in range(0, len(flat), d)]
            self._mass_ints, self._mass_scale = _dyadic_ints(img.masses)
            s0 = sum(self._mass_ints)
            if s0 == 0:
                raise ZeroMassError("central moments of an image with zero total mass")
            s1 = [sum(m * p[a] for p, m in zip(pts, self._mass_ints)) for a in range(d)]
            # x - centroid == q / (s0 * L) with q integral
            self._q = [[s0 * p[a] - s1[a] for a in range(d)] for p in pts]
            self._s0 = s0
            self.mass = Fraction(s0, self._mass_scale)
        else:
            self.mass = total_mass(img)
            if self.mass == 0:
                raise ZeroMassError("central moments of an image with zero total mass")
            self._centered = img.positions - centroid(img)

    def __call__(self, idx: Sequence[int]):
        idx = tuple(idx)
        if idx not in self._cache:
            if self.exact:
                if sum(idx) == 1:
                    val = Fraction(0)
                else:
                    num = 0
                    for q, m in zip(self._q, self._mass_ints):
                        t = m
                        for a, e in enumerate(idx):
                            if e:
                                t *= q[a] ** e
                        num += t
                    val = Fraction(num, self._mass_scale * (self._s0 * self._pos_scale) ** sum(idx))
            elif sum(idx) == 1:
                val = 0.0
            else:
                val = _moment(self._centered, self.img.masses, idx)
            self._cache[idx] = val
        return self._cache[idx]

    def vector(self, order: int) -> np.ndarray:
        return np.array([self(i) for i in multi_indices(self.img.dim, order)],
                        dtype=object if self.exact else float)


def moment_vector(img: PointMassImage, order: int, central: bool = True) -> np.ndarray:
    if central:
        return CentralMoments(img).vector(order)
    return np.array([raw_moment(img, i) for i in multi_indices(img.dim, order)])


def apply_affine(img: PointMassImage, T: AffineMap, allow_reflection: bool = False) -> PointMassImage:
    """Push the image through ``T``; masses are multiplied by ``J = det(T)``.

    Orientation-reversing maps are rejected unless ``allow_reflection`` is
    set, in which case the signed ``J`` is used.
    """
    if T.dim != img.dim:
        raise ValueError("map and image dimensions differ")
    a = T.array()
    j = float(np.linalg.det(a))
    if abs(j) < 1e-12:
        raise SingularMap("affine map is singular")
    if j < 0 and not allow_reflection:
        raise SingularMap("orientation-reversing map (J < 0); pass allow_reflection=True to use it")
    pos = img.positions @ a.T + np.array(T.translation, dtype=float)
    return PointMassImage(pos, img.masses * j)


def moment_expr_terms(e: InvariantExpr, img: PointMassImage, exact: bool = False,
                      moments: CentralMoments | None = None):
    """``(value, scale)`` of a moment expression, both divided by ``mu00**power``.

    ``scale`` is the sum of absolute term values; ``|value| / scale`` says
    how much of the expression cancelled.
    """
    if e.form != MOMENTS:
        raise ValueError("expected a moment-form expression")
    if e.dim != img.dim:
        raise ValueError("expression and image dimensions differ")
    moments = moments or CentralMoments(img, exact=exact)
    value, scale = e.evaluate_with_scale(moments)
    if e.power:
        den = moments.mass ** e.power
        value, scale = value / den, scale / abs(den)
    return value, scale


def eval_moment_expr(e: InvariantExpr, img: PointMassImage, exact: bool = False,
                     moments: CentralMoments | None = None) -> float:
    """Value of a moment-form expression on central moments, divided by ``mu00**power``."""
    return float(moment_expr_terms(e, img, exact, moments)[0])


def grid_to_pointmass(grid: DensityGrid) -> PointMassImage:
    """One point per nonzero cell at the cell centre with mass ``value * cell volume``."""
    idx = np.argwhere(grid.values != 0)
    if len(idx) == 0:
        raise ZeroMassError("grid has no mass")
    centres = np.asarray(grid.origin) + (idx + 0.5) * np.asarray(grid.spacing)
    vol = float(np.prod(grid.spacing))
    return PointMassImage(centres, grid.values[tuple(idx.T)] * vol)


def _expand_linear_power(rows: Sequence[Sequence], alpha: Sequence[int], one) -> dict[MultiIndex, object]:
    """Coefficients of ``prod_i (rows[i] . x) ** alpha[i]`` keyed by exponent of ``x``."""
    d = len(rows)
    poly: dict[MultiIndex, object] = {(0,) * d: one}
    for i, e in enumerate(alpha):
        for _ in range(e):
            nxt: dict[MultiIndex, object] = {}
            for mono, c in poly.items():
                for j, a in enumerate(rows[i]):
                    if a == 0:
                        continue
                    m = mono[:j] + (mono[j] + 1,) + mono[j + 1:]
                    nxt[m] = nxt.get(m, 0) + c * a
            poly = nxt
    return poly


def order_transform_matrix(T: AffineMap, order: int) -> np.ndarray:
    """Matrix ``B`` with ``moments of order r in mapped coordinates = B @ moments in the original ones``.

    Row ``alpha`` holds the multinomial coefficients of
    ``prod_i (T.matrix[i] . x) ** alpha_i``; rows and columns follow
    :func:`multi_indices`.  Entries are exact when ``T`` is.  With
    :func:`apply_affine` (which also scales masses) the central moments
    satisfy ``mu(apply_affine(img, T)) = J * B @ mu(img)``.  Derivatives
    use ``order_transform_matrix(T.transposed(), r)`` the other way round:
    ``D(H o T)(x) = B_T @ DH(T x)``.
    """
    if order < 1:
        raise ValueError("order must be at least 1")
    idx = multi_indices(T.dim, order)
    pos = {m: i for i, m in enumerate(idx)}
    exact = T.exact
    one = Fraction(1) if exact else 1.0
    out = np.zeros((len(idx), len(idx)), dtype=object if exact else float)
    if exact:
        out[:] = Fraction(0)
    for r, alpha in enumerate(idx):
        for mono, c in _expand_linear_power(T.matrix, alpha, one).items():
            out[r, pos[mono]] += c
    return out


def random_image(rng: np.random.Generator, n: int, dim: int) -> PointMassImage:
    """``n`` points uniform in ``[-1, 1]^dim`` with masses uniform in ``[0.5, 1.5]``."""
    return PointMassImage(rng.uniform(-1, 1, (n, dim)), rng.uniform(0.5, 1.5, n))


# --------------------------------------------------------------------------
# File formats

def write_image_csv(img: PointMassImage, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(f"dim={img.dim}\n")
        w = csv.writer(fh, lineterminator="\n")
        for p, m in zip(img.positions, img.masses):
            w.writerow([repr(float(v)) for v in p] + [repr(float(m))])


def read_image_csv(path) -> PointMassImage:
    """Read ``dim=d`` then one ``x,y[,z],mass`` row per point."""
    with open(path, newline="") as fh:
        lines = fh.read().splitlines()
    if not lines or not lines[0].strip().startswith("dim="):
        raise FormatError("first line must be 'dim=<d>'", path, 1, 1)
    try:
        dim = int(lines[0].strip()[4:])
    except ValueError:
        raise FormatError("dimension is not an integer", path, 1, 5) from None
    if dim < 1:
        raise FormatError("dimension must be positive", path, 1, 5)
    pos, mass = [], []
    for lineno, row in enumerate(csv.reader(lines[1:]), start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != dim + 1:
            raise FormatError(f"expected {dim + 1} fields, found {len(row)}", path, lineno)
        vals = []
        col = 1
        for field in row:
            try:
                vals.append(float(Fraction(field.strip())))
            except ValueError:
                raise FormatError(f"not a number: {field.strip()!r}", path, lineno, col) from None
            col += len(field) + 1
        pos.append(vals[:dim])
        mass.append(vals[dim])
    if not pos:
        raise FormatError("no points", path, len(lines))
    return PointMassImage(np.array(pos), np.array(mass))


def grid_metadata_path(path) -> Path:
    p = Path(path)
    return p.with_name(p.name + ".json")


def write_grid(grid: DensityGrid, path) -> None:
    vals = grid.values.reshape(-1, grid.values.shape[-1])
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        for row in vals:
            w.writerow([repr(float(v)) for v in row])
    meta = {"origin": [float(v) for v in grid.origin], "spacing": [float(v) for v in grid.spacing],
            "shape": list(grid.values.shape)}
    grid_metadata_path(path).write_text(json.dumps(meta, sort_keys=True) + "\n")


def read_grid(path) -> DensityGrid:
    """Dense CSV plus a ``<file>.json`` sidecar with ``origin``, ``spacing`` and ``shape``."""
    meta_path = grid_metadata_path(path)
    try:
        meta = json.loads(meta_path.read_text())
    except FileNotFoundError:
        raise FormatError("missing sidecar metadata", meta_path, 1) from None
    except json.JSONDecodeError as exc:
        raise FormatError(exc.msg, meta_path, exc.lineno, exc.colno) from None
    shape = tuple(meta.get("shape") or ())
    rows: list[list[float]] = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            vals = []
            col = 1
            for field in row:
                try:
                    vals.append(float(field))
                except ValueError:
                    raise FormatError(f"not a number: {field.strip()!r}", path, lineno, col) from None
                col += len(field) + 1
            if rows and len(vals) != len(rows[0]):
                raise FormatError("ragged row", path, lineno)
            rows.append(vals)
    values = np.array(rows, dtype=float)
    if shape:
        if int(np.prod(shape)) != values.size:
            raise FormatError(f"shape {list(shape)} does not match {values.size} values", path, 1)
        values = values.reshape(shape)
    return DensityGrid(tuple(meta["origin"]), tuple(meta["spacing"]), values)


def images_from(paths: Iterable) -> list[PointMassImage]:
    return [read_image_csv(p) for p in paths]
