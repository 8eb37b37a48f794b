"""Moment and differential invariants from products of generating functions."""

from .algebra import CoordPolynomial
from .generators import GenForm, PISpec, SpecSyntaxError, enumerate_specs, expand, parse
from .translator import DERIVATIVES, MOMENTS, InvariantExpr, to_derivatives, to_moments
from .verifier import (VerificationReport, check_linear_relation, conjecture_spec, screen_projective,
                       verify_derivative_invariance, verify_moment_invariance)

__version__ = "0.1.0"

__all__ = [
    "CoordPolynomial", "GenForm", "PISpec", "SpecSyntaxError", "enumerate_specs", "expand", "parse",
    "DERIVATIVES", "MOMENTS", "InvariantExpr", "to_derivatives", "to_moments",
    "VerificationReport", "check_linear_relation", "conjecture_spec", "screen_projective",
    "verify_derivative_invariance", "verify_moment_invariance",
]
