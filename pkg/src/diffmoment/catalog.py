"""Named invariants written out by hand.

These are independent of the generator/translator pipeline so the two can
be checked against each other.
"""

from __future__ import annotations

from .generators import GenForm, PISpec, parse
from .translator import DERIVATIVES, MOMENTS, InvariantExpr, SymbolPoly


def _mu(*idx):
    return SymbolPoly.symbol(*idx)


def hu_invariants() -> dict[str, InvariantExpr]:
    """Hu's seven rotation invariants on central moments (2-D, unnormalized)."""
    m20, m02, m11 = _mu(2, 0), _mu(0, 2), _mu(1, 1)
    m30, m03, m21, m12 = _mu(3, 0), _mu(0, 3), _mu(2, 1), _mu(1, 2)
    a, b = m30 + m12, m21 + m03
    c, e = m30 - 3 * m12, 3 * m21 - m03
    polys = {
        "hu1": m20 + m02,
        "hu2": (m20 - m02) ** 2 + 4 * m11 ** 2,
        "hu3": c ** 2 + e ** 2,
        "hu4": a ** 2 + b ** 2,
        "hu5": c * a * (a ** 2 - 3 * b ** 2) + e * b * (3 * a ** 2 - b ** 2),
        "hu6": (m20 - m02) * (a ** 2 - b ** 2) + 4 * m11 * a * b,
        "hu7": e * a * (a ** 2 - 3 * b ** 2) - c * b * (3 * a ** 2 - b ** 2),
    }
    return {k: InvariantExpr.from_poly(p, MOMENTS, name=k) for k, p in polys.items()}


def affine_moment_invariants() -> dict[str, InvariantExpr]:
    """The three low-order affine moment invariants, normalized by ``mu00``."""
    m20, m02, m11 = _mu(2, 0), _mu(0, 2), _mu(1, 1)
    m30, m03, m21, m12 = _mu(3, 0), _mu(0, 3), _mu(2, 1), _mu(1, 2)
    i1 = m20 * m02 - m11 ** 2
    i2 = (m30 ** 2 * m03 ** 2 - 6 * m30 * m21 * m12 * m03 + 4 * m30 * m12 ** 3
          + 4 * m21 ** 3 * m03 - 3 * m21 ** 2 * m12 ** 2)
    i3 = m20 * (m21 * m03 - m12 ** 2) - m11 * (m30 * m03 - m21 * m12) + m02 * (m30 * m12 - m21 ** 2)
    return {
        "ami1": InvariantExpr.from_poly(i1, MOMENTS, 4, name="ami1", m=2, k=2),
        "ami2": InvariantExpr.from_poly(i2, MOMENTS, 10, name="ami2", m=4, k=6),
        "ami3": InvariantExpr.from_poly(i3, MOMENTS, 7, name="ami3", m=3, k=4),
    }


def second_order_3d() -> dict[str, InvariantExpr]:
    """Trace, sum of principal 2x2 minors, and determinant of the 3-D covariance."""
    x, y, z = _mu(2, 0, 0), _mu(0, 2, 0), _mu(0, 0, 2)
    xy, xz, yz = _mu(1, 1, 0), _mu(1, 0, 1), _mu(0, 1, 1)
    polys = {
        "rot3d_1": x + y + z,
        "rot3d_2": x * y + x * z + y * z - xy ** 2 - xz ** 2 - yz ** 2,
        "rot3d_3": x * y * z + 2 * xy * xz * yz - z * xy ** 2 - y * xz ** 2 - x * yz ** 2,
    }
    return {k: InvariantExpr.from_poly(p, MOMENTS, name=k) for k, p in polys.items()}


def _d(*idx):
    return SymbolPoly.symbol(*idx)


def affine_curvature_2d() -> InvariantExpr:
    """``H_xx H_y^2 - 2 H_x H_y H_xy + H_yy H_x^2`` over ``J^2``."""
    hx, hy = _d(1, 0), _d(0, 1)
    p = _d(2, 0) * hy ** 2 - 2 * hx * hy * _d(1, 1) + _d(0, 2) * hx ** 2
    return InvariantExpr.from_poly(p, DERIVATIVES, 2, name="affine_curvature", m=3, k=2)


def affine_curvature_moments() -> InvariantExpr:
    """Moment-side twin of :func:`affine_curvature_2d`; vanishes on central moments."""
    p = _mu(2, 0) * _mu(0, 1) ** 2 - 2 * _mu(1, 1) * _mu(1, 0) * _mu(0, 1) + _mu(0, 2) * _mu(1, 0) ** 2
    return InvariantExpr.from_poly(p, MOMENTS, 5, name="affine_curvature_moments", m=3, k=2)


def bordered_hessian_3d() -> InvariantExpr:
    """Gradient contracted with the adjugate Hessian in 3-D, over ``J^2``."""
    ix, iy, iz = _d(1, 0, 0), _d(0, 1, 0), _d(0, 0, 1)
    ixx, iyy, izz = _d(2, 0, 0), _d(0, 2, 0), _d(0, 0, 2)
    ixy, ixz, iyz = _d(1, 1, 0), _d(1, 0, 1), _d(0, 1, 1)
    p = (ix ** 2 * (iyy * izz - iyz ** 2) + iy ** 2 * (ixx * izz - ixz ** 2)
         + iz ** 2 * (ixx * iyy - ixy ** 2) + 2 * ix * iy * (ixz * iyz - ixy * izz)
         + 2 * iy * iz * (ixy * ixz - iyz * ixx) + 2 * ix * iz * (ixy * iyz - ixz * iyy))
    return InvariantExpr.from_poly(p, DERIVATIVES, 2, name="bordered_hessian", m=4, k=2)


def laplacian_2d() -> InvariantExpr:
    return InvariantExpr.from_poly(_d(2, 0) + _d(0, 2), DERIVATIVES, 0, name="laplacian", m=1, k=0)


def hessian_det_2d() -> InvariantExpr:
    p = _d(2, 0) * _d(0, 2) - _d(1, 1) ** 2
    return InvariantExpr.from_poly(p, DERIVATIVES, 2, name="hessian_det", m=2, k=2)


# Hu's invariants written through f and g; ``I5``-``I7`` use four points.
HU_GENERATING_FORMS = {
    "hu1": "f(1,1)",
    "hu2": "f(1,2)^2 - 2*g(1,2)^2",
    "hu3": "f(1,2)^3 - 3*g(1,2)^2*f(1,2)",
    "hu4": "f(1,2)*f(1,1)*f(2,2)",
    "hu5": ("f(2,2)*f(3,3)*f(4,4)*f(2,1)*f(3,1)*f(4,1) - f(2,2)*f(3,3)*f(4,4)*f(2,1)*g(3,1)*g(4,1)"
            " - f(2,2)*f(3,3)*f(4,4)*g(2,1)*g(3,1)*f(4,1) - f(2,2)*f(3,3)*f(4,4)*g(2,1)*f(3,1)*g(4,1)"),
    "hu6": "f(2,2)*f(3,3)*f(1,2)*f(1,3) - f(2,2)*f(3,3)*g(1,2)*g(1,3)",
    "hu7": ("f(2,2)*f(3,3)*f(4,4)*g(2,1)*f(3,1)*f(4,1) - f(2,2)*f(3,3)*f(4,4)*g(2,1)*g(3,1)*g(4,1)"
            " + f(2,2)*f(3,3)*f(4,4)*f(2,1)*g(3,1)*f(4,1) + f(2,2)*f(3,3)*f(4,4)*f(2,1)*f(3,1)*g(4,1)"),
}


def hu_generating_forms() -> dict[str, PISpec | GenForm]:
    return {k: parse(v, 2) for k, v in HU_GENERATING_FORMS.items()}


def all_expressions() -> dict[str, InvariantExpr]:
    out: dict[str, InvariantExpr] = {}
    out.update(hu_invariants())
    out.update(affine_moment_invariants())
    out.update(second_order_3d())
    for e in (affine_curvature_2d(), affine_curvature_moments(), bordered_hessian_3d(),
              laplacian_2d(), hessian_det_2d()):
        out[e.meta["name"]] = e
    return out


def get(name: str) -> InvariantExpr:
    try:
        return all_expressions()[name]
    except KeyError:
        raise KeyError(f"unknown catalog entry {name!r}; known: {', '.join(sorted(all_expressions()))}") from None
