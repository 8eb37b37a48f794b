"""Invariance checks, projective screening and the linear-relation check.

Every check draws its transforms from one ``numpy`` generator seeded by
the caller, runs sequentially, and returns a :class:`VerificationReport`
whose JSON form is byte-stable for a given seed.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import transforms as tr
from .difflab import ScalarField, compose_affine, compose_projective, derivative_vector, jet, random_polynomial_field
from .generators import GenFactor, PISpec
from .momentlab import (CentralMoments, PointMassImage, apply_affine, moment_expr_terms, multi_indices,
                        order_transform_matrix, random_image)
from .translator import DERIVATIVES, MOMENTS, InvariantExpr

MAGNITUDE_FLOOR = 1e-12
EXPONENT_TOLERANCE = 0.01
MOMENT_TOLERANCE = 1e-9
DERIVATIVE_TOLERANCE = 1e-9
SCREEN_TOLERANCE = 1e-6
MAX_POLE_RESAMPLES = 1000

PASS, FAIL, DEGENERATE = "pass", "fail", "degenerate"
EXIT_CODES = {PASS: 0, FAIL: 1, DEGENERATE: 2}


def _num(v):
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    return float(v)


@dataclass
class VerificationReport:
    subject: str
    group: str
    trials: int
    seed: int
    tolerance: float
    declared_weight: Fraction | None
    samples: list[dict] = field(default_factory=list)
    fitted_exponent: float | None = None
    max_rel_dev: object = 0
    verdict: str = DEGENERATE
    extra: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.verdict == PASS

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.verdict]

    def to_json(self) -> dict:
        return {
            "subject": self.subject,
            "group": self.group,
            "trials": self.trials,
            "seed": self.seed,
            "tolerance": self.tolerance,
            "declared_weight": None if self.declared_weight is None else str(self.declared_weight),
            "fitted_exponent": self.fitted_exponent,
            "max_rel_dev": _num(self.max_rel_dev),
            "verdict": self.verdict,
            "samples": self.samples,
            **self.extra,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True) + "\n"

    def table(self) -> str:
        lines = [
            f"subject          {self.subject}",
            f"group            {self.group}",
            f"trials           {self.trials}  (seed {self.seed}, {len(self.samples)} samples)",
            f"declared weight  {self.declared_weight}",
            f"fitted exponent  {'n/a' if self.fitted_exponent is None else f'{self.fitted_exponent:.6f}'}",
            f"max rel dev      {float(self.max_rel_dev):.3e}  (tol {self.tolerance:g})",
            f"verdict          {self.verdict.upper()}",
        ]
        for key in sorted(self.extra):
            val = self.extra[key]
            lines.append(f"{key:<16} {json.dumps(val, sort_keys=True) if isinstance(val, (dict, list)) else val}")
        if self.samples:
            lines.append("")
            lines.append(f"{'transform':>9} {'point':>5} {'jacobian':>12} {'lhs':>14} {'rhs':>14} {'rel dev':>10}")
            for s in self.samples[:20]:
                def fmt(v):
                    return f"{float(Fraction(v)) if isinstance(v, str) else float(v):.6g}" if v is not None else "-"
                lines.append(f"{s['transform']:>9} {s['point']:>5} {fmt(s.get('jacobian')):>12} "
                             f"{fmt(s.get('lhs')):>14} {fmt(s.get('rhs')):>14} {fmt(s.get('rel_dev')):>10}")
            if len(self.samples) > 20:
                lines.append(f"... {len(self.samples) - 20} more samples")
        return "\n".join(lines) + "\n"


def subject_of(e: InvariantExpr) -> str:
    return e.meta.get("name") or e.meta.get("source") or e.render()


def _rel_dev(lhs, rhs):
    big = max(abs(lhs), abs(rhs))
    return 0 if big == 0 else abs(lhs - rhs) / big


def _finish(report: VerificationReport, raw: list[tuple], exact: bool) -> VerificationReport:
    """``raw`` rows: (transform id, point id, J, lhs, rhs, lhs_scale, rhs_scale, extra dict)."""
    w = report.declared_weight
    devs, logs = [], []
    for t_id, p_id, j, lhs, rhs, ls, rs, extra in sorted(raw, key=lambda r: (r[0], r[1])):
        target = rhs * (j ** w if w is not None and w.denominator == 1 else
                        (float(j) ** float(w) if w is not None else 1))
        if exact:
            degenerate = lhs == 0 and rhs == 0
        else:
            degenerate = abs(lhs) <= MAGNITUDE_FLOOR * ls and abs(rhs) <= MAGNITUDE_FLOOR * rs
        sample = {"transform": t_id, "point": p_id, "jacobian": _num(j), "lhs": _num(lhs), "rhs": _num(rhs)}
        sample.update(extra)
        if degenerate:
            sample["degenerate"] = True
        else:
            dev = _rel_dev(lhs, target)
            devs.append(dev)
            sample["rel_dev"] = _num(dev)
            sample["ratio"] = _num(lhs / rhs) if rhs != 0 else None
            if rhs != 0 and lhs != 0 and (lhs > 0) == (rhs > 0) and abs(math.log(float(abs(j)))) > 1e-9:
                logs.append((math.log(float(abs(j))), math.log(float(abs(lhs / rhs)))))
        report.samples.append(sample)
    if not devs:
        report.verdict = DEGENERATE
        report.max_rel_dev = 0
        return report
    report.max_rel_dev = max(devs)
    sxx = sum(x * x for x, _ in logs)
    if sxx > 1e-6:
        report.fitted_exponent = sum(x * y for x, y in logs) / sxx
    ok = report.max_rel_dev == 0 if exact else report.max_rel_dev <= report.tolerance
    if ok and report.fitted_exponent is not None and w is not None:
        ok = abs(report.fitted_exponent - float(w)) <= EXPONENT_TOLERANCE
    report.verdict = PASS if ok else FAIL
    return report


# --------------------------------------------------------------------------

def verify_moment_invariance(e: InvariantExpr, images: Sequence[PointMassImage], group: str = "affine",
                             trials: int = 100, seed: int = 0, tol: float = MOMENT_TOLERANCE,
                             exact: bool = True) -> VerificationReport:
    """Compare ``e`` on each image before and after ``trials`` random maps from ``group``.

    The relation checked is ``value(T img) = J**weight * value(img)``;
    normalized affine expressions have weight 0.
    """
    if e.form != MOMENTS:
        raise ValueError("expected a moment-form expression")
    if group not in ("rotation", "similarity", "affine"):
        raise ValueError("moment verification supports rotation, similarity and affine groups")
    if not images:
        raise ValueError("no images")
    rng = np.random.default_rng(seed)
    report = VerificationReport(subject_of(e), group, trials, seed, tol, e.weight(),
                                extra={"expression": e.render(), "form": MOMENTS, "exact": exact})
    before = [moment_expr_terms(e, img, exact, CentralMoments(img, exact)) for img in images]
    raw = []
    for t in range(trials):
        T = tr.sample_affine(rng, e.dim, group)
        j = float(np.linalg.det(T.array()))
        for i, img in enumerate(images):
            lhs, ls = moment_expr_terms(e, apply_affine(img, T), exact)
            rhs, rs = before[i]
            if exact:
                j_val = Fraction(j)
            else:
                j_val = j
            raw.append((t, i, j_val, lhs, rhs, ls, rs, {}))
    if exact:
        # Report exact comparisons in floating point; the transformed image itself is rounded.
        raw = [(t, i, float(j), float(l), float(r), float(ls), float(rs), x) for t, i, j, l, r, ls, rs, x in raw]
    return _finish(report, raw, exact=False)


def _sample_map(rng, dim, group, exact):
    return tr.sample_exact(rng, dim, group) if exact else tr.sample_affine(rng, dim, group)


def _numerator(e: InvariantExpr, fld: ScalarField, x):
    j = jet(fld, x, e.max_order())
    return e.evaluate_with_scale(j.__getitem__)


def verify_derivative_invariance(e: InvariantExpr, fields: Sequence[ScalarField], group: str = "affine",
                                 trials: int = 10, points: int = 5, seed: int = 0,
                                 tol: float = DERIVATIVE_TOLERANCE, exact: bool = False) -> VerificationReport:
    """Check ``N(H o T)(x) = J**k N(H)(T x)`` for the numerator ``N`` of ``e``.

    In exact mode maps and points are rational and equality must be exact.
    """
    if e.form != DERIVATIVES:
        raise ValueError("expected a derivative-form expression")
    if group not in ("rotation", "similarity", "affine"):
        raise ValueError("use screen_projective for the projective group")
    if not fields:
        raise ValueError("no fields")
    rng = np.random.default_rng(seed)
    report = VerificationReport(subject_of(e), group, trials, seed, tol, e.weight(),
                                extra={"expression": e.render(), "form": DERIVATIVES, "exact": exact,
                                       "fields": len(fields), "points_per_field": points})
    raw = []
    for t in range(trials):
        T = _sample_map(rng, e.dim, group, exact)
        j = T.jacobian()
        for fi, fld in enumerate(fields):
            composed = compose_affine(fld, T)
            for pi in range(points):
                x = tr.sample_point(rng, e.dim, exact=exact)
                lhs, ls = _numerator(e, composed, x)
                rhs, rs = _numerator(e, fld, T(x))
                raw.append((t, fi * points + pi, j, lhs, rhs, ls, rs, {}))
    return _finish(report, raw, exact)


def screen_projective(e: InvariantExpr, fields: Sequence[ScalarField], trials: int = 50, points: int = 10,
                      seed: int = 0, tol: float = SCREEN_TOLERANCE, exact: bool = False) -> VerificationReport:
    """Pointwise check ``N(H o P)(x) = J_P(x)**k N(H)(P x)`` with ``J_P(x)`` the
    local Jacobian determinant of the projective map ``P`` at ``x``."""
    if e.form != DERIVATIVES:
        raise ValueError("expected a derivative-form expression")
    if not fields:
        raise ValueError("no fields")
    rng = np.random.default_rng(seed)
    report = VerificationReport(subject_of(e), "projective", trials, seed, tol, e.weight(),
                                extra={"expression": e.render(), "form": DERIVATIVES, "exact": exact,
                                       "fields": len(fields), "points_per_field": points})
    raw, maps = [], []
    resamples = 0
    for t in range(trials):
        P = tr.sample_projective(rng, e.dim)
        if exact:
            P = tr.ProjectiveMap([[Fraction(v).limit_denominator(64) for v in r] for r in P.matrix])
        maps.append(P)
        for fi, fld in enumerate(fields):
            composed = compose_projective(fld, P)
            for pi in range(points):
                while True:
                    x = tr.sample_point(rng, e.dim, P, exact=exact)
                    try:
                        j = P.local_jacobian(x)
                        lhs, ls = _numerator(e, composed, x)
                        rhs, rs = _numerator(e, fld, P(x))
                        break
                    except tr.PoleError:
                        resamples += 1
                        if resamples > MAX_POLE_RESAMPLES:
                            raise
                raw.append((t, fi * points + pi, j, lhs, rhs, ls, rs, {}))
    report.extra["pole_resamples"] = resamples
    _finish(report, raw, exact)
    if report.verdict == FAIL:
        worst = max((s for s in report.samples if "rel_dev" in s),
                    key=lambda s: float(Fraction(s["rel_dev"])) if isinstance(s["rel_dev"], str) else s["rel_dev"])
        fld = fields[worst["point"] // points]
        report.extra["counterexample"] = {
            "transform": worst["transform"],
            "matrix": maps[worst["transform"]].to_json()["matrix"],
            "field": fld.render(),
            "lhs": worst["lhs"],
            "rhs": worst["rhs"],
            "jacobian": worst["jacobian"],
            "rel_dev": worst["rel_dev"],
        }
    return report


def conjecture_spec(m: int) -> PISpec:
    """``g(1..m) * g(2..m+1)`` in ``m`` dimensions."""
    if m < 2:
        raise ValueError("the conjectured family starts at m = 2")
    return PISpec(m, (GenFactor("g", tuple(range(1, m + 1))), GenFactor("g", tuple(range(2, m + 2)))))


def check_linear_relation(order: int, d: int, trials: int = 20, seed: int = 0, images: int = 20,
                          fields: int = 10, tol: float = MOMENT_TOLERANCE,
                          identity: bool = False) -> VerificationReport:
    """Both linear relations at one order with one matrix family.

    Moments (float, relative to ``tol``):
    ``mu(apply_affine(img, T)) = J * B_T @ mu(img)``.  Derivatives (exact):
    ``D(H o T)(x) = B_{T^t} @ DH(T x)``.
    """
    if order < 1:
        raise ValueError("order must be at least 1")
    rng = np.random.default_rng(seed)
    report = VerificationReport(f"linear relation order {order}, d={d}", "affine", trials, seed, tol, None,
                                extra={"order": order, "dim": d, "multi_indices": [list(m) for m in
                                                                                    multi_indices(d, order)]})
    imgs = [random_image(rng, 30, d) for _ in range(images)]
    flds = [random_polynomial_field(rng, d, max(3, order)) for _ in range(fields)]
    moment_devs, deriv_devs = [], []
    for t in range(trials):
        T = tr.AffineMap.identity(d) if identity else tr.sample_affine(rng, d)
        j = float(np.linalg.det(T.array()))
        b = order_transform_matrix(T, order)
        for i, img in enumerate(imgs):
            lhs = CentralMoments(apply_affine(img, T)).vector(order)
            rhs = j * (b @ CentralMoments(img).vector(order))
            dev = float(np.linalg.norm(lhs - rhs) / max(np.linalg.norm(lhs), np.linalg.norm(rhs)))
            moment_devs.append(dev)
            report.samples.append({"kind": "moment", "transform": t, "point": i, "jacobian": j, "rel_dev": dev})
        Te = tr.AffineMap.identity(d, exact=True) if identity else tr.sample_rational_affine(rng, d)
        bt = order_transform_matrix(Te.transposed(), order)
        for fi, fld in enumerate(flds):
            x = tr.sample_point(rng, d, exact=True)
            lhs = derivative_vector(compose_affine(fld, Te), x, order)
            rhs = [sum((bt[r, c] * v for c, v in enumerate(derivative_vector(fld, Te(x), order))), Fraction(0))
                   for r in range(len(lhs))]
            dev = sum(abs(a - b_) for a, b_ in zip(lhs, rhs))
            deriv_devs.append(dev)
            report.samples.append({"kind": "derivative", "transform": t, "point": fi,
                                   "jacobian": str(Te.jacobian()), "abs_dev": str(dev)})
    moment_dev = max(moment_devs, default=0.0)
    deriv_dev = max(deriv_devs, default=Fraction(0))
    report.max_rel_dev = moment_dev
    report.extra["moment_max_rel_dev"] = moment_dev
    report.extra["derivative_max_abs_dev"] = str(deriv_dev)
    ok = moment_dev <= tol and deriv_dev == 0
    report.verdict = PASS if ok else FAIL
    return report
