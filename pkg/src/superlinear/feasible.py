"""Membership tests for the feasible correlation set.

A correlation vector is feasible for a given SD vector when it lies in the
open box, keeps the 3x3 correlation matrix positive definite, and does not
inflate the contrast SD above its value under independence. Comparisons are
exact; the box and determinant conditions are strict, the variance condition
is not.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .errors import ValidationError
from .model import RhoLike, _triple, as_rho_tuple, contrast_variance


@dataclass(frozen=True)
class FeasibilityVerdict:
    in_open_box: bool
    positive_definite: bool
    variance_reducing: bool

    @property
    def feasible(self):
        return self.in_open_box and self.positive_definite and self.variance_reducing


def _in_box(r1, r2, r3):
    return -1.0 < r1 < 1.0 and -1.0 < r2 < 1.0 and -1.0 < r3 < 1.0


def _det_ok(r1, r2, r3):
    # 1 - (r1^2 + r2^2 + r3^2 - 2 r1 r2 r3) > 0 in factored form, which keeps
    # its precision next to the singular corners of the box
    return (1.0 - r1) * (1.0 + r1) * (1.0 - r2) * (1.0 + r2) - (r3 - r1 * r2) ** 2 > 0.0


def is_positive_definite(rho: RhoLike) -> bool:
    r1, r2, r3 = as_rho_tuple(rho)
    return _in_box(r1, r2, r3) and _det_ok(r1, r2, r3)


def check_feasible(sds: Sequence[float], rho: RhoLike) -> FeasibilityVerdict:
    sds = _triple(sds, "sds")
    r1, r2, r3 = as_rho_tuple(rho)
    box = _in_box(r1, r2, r3)
    # the determinant test alone is meaningless outside the box
    pd = box and _det_ok(r1, r2, r3)
    var = contrast_variance(sds, (r1, r2, r3))
    var0 = contrast_variance(sds, (0.0, 0.0, 0.0))
    # a negative quadratic form can only come from an invalid rho
    reducing = 0.0 <= var and math.sqrt(var) <= math.sqrt(var0)
    return FeasibilityVerdict(in_open_box=box, positive_definite=pd, variance_reducing=reducing)


def relative_sd(sds: Sequence[float], rho: RhoLike) -> float:
    """Contrast SD under ``rho`` relative to its value under independence."""
    verdict = check_feasible(sds, rho)
    if not verdict.feasible:
        raise ValidationError(f"rho={as_rho_tuple(rho)} is not feasible for sds={tuple(sds)}: {verdict}")
    sds = _triple(sds, "sds")
    return math.sqrt(contrast_variance(sds, rho) / contrast_variance(sds, (0.0, 0.0, 0.0)))
