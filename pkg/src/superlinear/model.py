"""Summary-statistics model of a 3-condition one-way design.

The condition means of an experiment are treated as a trivariate normal draw
whose covariance carries the per-condition SDs and three between-condition
correlations. Everything downstream works with the linear contrast
``Z = x1 - 2 x2 + x3``, which has zero expectation when the true means are
equidistant.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .errors import DegenerateVarianceError, InfeasibleCorrelationError, ValidationError

def _triple(values, name, cast=float):
    try:
        items = tuple(cast(v) for v in values)
    except TypeError as exc:
        raise ValidationError(f"{name}: expected a sequence of 3 values") from exc
    if len(items) != 3:
        raise ValidationError(f"{name}: expected exactly 3 values, got {len(items)}")
    return items


@dataclass(frozen=True)
class ExperimentSummary:
    """Means, SDs and cell sizes of one 3-condition experiment."""

    id: str
    means: tuple[float, float, float]
    sds: tuple[float, float, float]
    cell_sizes: tuple[int, int, int]

    def __post_init__(self):
        object.__setattr__(self, "id", str(self.id))
        means = _triple(self.means, f"{self.id}.means")
        sds = _triple(self.sds, f"{self.id}.sds")
        cells = self.cell_sizes
        if isinstance(cells, (int, np.integer)):
            cells = (cells,) * 3
        cells = _triple(cells, f"{self.id}.cell_sizes", cast=_as_int)
        for i, m in enumerate(means):
            if not math.isfinite(m):
                raise ValidationError(f"{self.id}.means[{i}] is not finite")
        for i, s in enumerate(sds):
            if s == 0.0:
                raise DegenerateVarianceError(f"{self.id}.sds[{i}] is zero")
            if not (s > 0.0) or not math.isfinite(s):
                raise ValidationError(f"{self.id}.sds[{i}] must be positive and finite, got {s}")
        for i, n in enumerate(cells):
            if n < 2:
                raise ValidationError(f"{self.id}.cell_sizes[{i}] must be >= 2, got {n}")
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "sds", sds)
        object.__setattr__(self, "cell_sizes", cells)

    @property
    def balanced(self):
        return len(set(self.cell_sizes)) == 1

    @property
    def standard_errors(self):
        """Per-condition SD of the condition mean, ``s_i / sqrt(n_i)``."""
        return tuple(s / math.sqrt(n) for s, n in zip(self.sds, self.cell_sizes))


def _as_int(v):
    if isinstance(v, bool):
        raise ValidationError("cell size must be an integer")
    if isinstance(v, float):
        if not v.is_integer():
            raise ValidationError(f"cell size must be an integer, got {v}")
        return int(v)
    return int(v)


@dataclass(frozen=True)
class CorrelationVector:
    """Between-condition correlations (rho1: 1-2, rho2: 1-3, rho3: 2-3)."""

    rho1: float
    rho2: float
    rho3: float

    def __post_init__(self):
        for name in ("rho1", "rho2", "rho3"):
            r = float(getattr(self, name))
            if not (-1.0 < r < 1.0):
                raise ValidationError(f"{name} must lie strictly inside (-1, 1), got {r}")
            object.__setattr__(self, name, r)

    def as_tuple(self):
        return (self.rho1, self.rho2, self.rho3)

    @classmethod
    def zero(cls):
        return cls(0.0, 0.0, 0.0)


RhoLike = Union[CorrelationVector, Sequence[float]]


def as_rho_tuple(rho: RhoLike):
    if isinstance(rho, CorrelationVector):
        return rho.as_tuple()
    return _triple(rho, "rho")


@dataclass(frozen=True)
class NormalizedDeviation:
    z: float
    sigma0: float
    z_tilde: float


def linear_contrast(e: ExperimentSummary) -> float:
    """``x1 - 2 x2 + x3``."""
    x1, x2, x3 = e.means
    return x1 - 2.0 * x2 + x3


def contrast_variance(sds, rho) -> float:
    """Quadratic form ``w' Sigma w`` for the contrast w = (1, -2, 1).

    May be negative for correlation vectors outside any valid covariance
    structure; callers decide how to treat that.
    """
    s1, s2, s3 = sds
    r1, r2, r3 = as_rho_tuple(rho)
    return (s1 * s1 + 4.0 * s2 * s2 + s3 * s3
            - 4.0 * s1 * s2 * r1 - 4.0 * s2 * s3 * r3 + 2.0 * s1 * s3 * r2)


def sigma_z(sds: Sequence[float], rho: RhoLike) -> float:
    """SD of the contrast for condition SDs ``sds`` and correlations ``rho``."""
    sds = _triple(sds, "sds")
    if any(not (s > 0.0) for s in sds):
        raise ValidationError(f"sds must be positive, got {sds}")
    var = contrast_variance(sds, rho)
    if var < 0.0:
        raise InfeasibleCorrelationError(
            f"contrast variance {var:.6g} < 0 for sds={sds}, rho={as_rho_tuple(rho)}")
    return math.sqrt(var)


def null_contrast_variance(e: ExperimentSummary) -> float:
    """Variance of the observed contrast under independence.

    ``s1^2/n1 + 4 s2^2/n2 + s3^2/n3``; equals ``sigma0^2 / n`` for balanced
    cells.
    """
    return contrast_variance(e.standard_errors, (0.0, 0.0, 0.0))


def normalized_deviation(e: ExperimentSummary) -> NormalizedDeviation:
    z = linear_contrast(e)
    sigma0 = sigma_z(e.sds, (0.0, 0.0, 0.0))
    if e.balanced:
        z_tilde = math.sqrt(e.cell_sizes[0]) * z / sigma0
    else:
        z_tilde = z / math.sqrt(null_contrast_variance(e))
    return NormalizedDeviation(z=z, sigma0=sigma0, z_tilde=z_tilde)
