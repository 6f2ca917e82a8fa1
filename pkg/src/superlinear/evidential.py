"""Evidential values: likelihood ratios of correlated vs independent means.

For one experiment the value is the best likelihood ratio, over feasible
correlation vectors, of the observed contrast against the independence
model. Relaxing the attainable relative SDs to the whole interval (0, 1]
gives the closed-form worst case; the joint variant shares one correlation
structure (hence one relative SD) across all experiments of an article.

All values are carried in log space. ``EvidentialResult.value`` exponentiates
at the boundary; ``unbounded`` marks the z-tilde == 0 case explicitly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import _search
from .errors import ValidationError
from .feasible import check_feasible
from .model import ExperimentSummary, contrast_variance, normalized_deviation

METHODS = ("numeric-single", "closed-single", "product", "numeric-joint", "closed-joint")


@dataclass(frozen=True)
class SearchConfig:
    """Knobs of the numeric search over correlation vectors.

    ``lattice_step`` spaces the screening lattice over the open box,
    ``tolerance`` is the smallest pattern-search step, ``max_evaluations``
    caps the refinement objective calls (the lattice screen is not counted).
    """

    lattice_step: float = 0.05
    tolerance: float = 1e-4
    max_evaluations: int = 10_000
    n_starts: int = 8

    def __post_init__(self):
        if not 0.0 < self.lattice_step < 1.0:
            raise ValidationError("lattice_step must lie in (0, 1)")
        if not self.tolerance > 0.0:
            raise ValidationError("tolerance must be positive")
        if self.max_evaluations < 1 or self.n_starts < 1:
            raise ValidationError("max_evaluations and n_starts must be >= 1")


@dataclass(frozen=True)
class EvidentialResult:
    log_value: float
    a_star: Optional[float]
    method: str
    at_bound: bool
    unbounded: bool = False
    rho: Optional[tuple] = None

    @property
    def value(self):
        if self.unbounded:
            return math.inf
        return math.exp(self.log_value)


def _unbounded(method, rho=None):
    return EvidentialResult(log_value=math.inf, a_star=0.0, method=method,
                            at_bound=True, unbounded=True, rho=rho)


def _log_ratio(zt2_sum, n, b):
    # sum over n experiments of log[a^-1 exp(-zt2/(2a^2) + zt2/2)] with a^2 = b
    return -0.5 * n * math.log(b) - 0.5 * zt2_sum / b + 0.5 * zt2_sum


def v_hat_single(z_tilde: float) -> EvidentialResult:
    """Closed-form worst-case evidential value of one experiment."""
    z = float(z_tilde)
    if not math.isfinite(z):
        raise ValidationError(f"z_tilde must be finite, got {z}")
    if z == 0.0:
        return _unbounded("closed-single")
    az = abs(z)
    if az > 1.0:
        return EvidentialResult(0.0, 1.0, "closed-single", True)
    return EvidentialResult(-math.log(az) + 0.5 * (z * z - 1.0), az, "closed-single", True)


def _z_list(z_tildes):
    zs = [float(z) for z in z_tildes]
    if not zs:
        raise ValidationError("at least one z_tilde is required")
    if not all(math.isfinite(z) for z in zs):
        raise ValidationError("z_tilde values must be finite")
    return zs


def v_product(z_tildes: Sequence[float]) -> EvidentialResult:
    """Product of single-experiment worst-case values."""
    zs = _z_list(z_tildes)
    if any(z == 0.0 for z in zs):
        return _unbounded("product")
    log_v = math.fsum(v_hat_single(z).log_value for z in zs)
    return EvidentialResult(log_v, None, "product", True)


def v_hat_joint(z_tildes: Sequence[float]) -> EvidentialResult:
    """Closed-form worst-case evidential value with one shared relative SD.

    The maximizing squared relative SD is the mean of the squared
    normalized deviations, capped at 1.
    """
    zs = _z_list(z_tildes)
    n = len(zs)
    log_m = _log_mean_square(zs)
    if log_m == -math.inf:
        return _unbounded("closed-joint")
    if log_m >= 0.0:
        return EvidentialResult(0.0, 1.0, "closed-joint", True)
    total = math.fsum(z * z for z in zs)
    return EvidentialResult(-0.5 * n + 0.5 * total - 0.5 * n * log_m,
                            math.exp(0.5 * log_m), "closed-joint", True)


def _log_mean_square(zs):
    # scaled by the largest |z| so that tiny nonzero inputs do not underflow
    top = max(abs(z) for z in zs)
    if top == 0.0:
        return -math.inf
    return 2.0 * math.log(top) + math.log(math.fsum((z / top) ** 2 for z in zs) / len(zs))


def _stack(experiments: Sequence[ExperimentSummary]):
    se = np.array([e.standard_errors for e in experiments], dtype=np.float64)
    zt = np.array([normalized_deviation(e).z_tilde for e in experiments], dtype=np.float64)
    return se, zt


def _common_shape(se):
    unit = se / np.linalg.norm(se, axis=1, keepdims=True)
    return bool(np.allclose(unit, unit[0], rtol=1e-12, atol=0.0))


def _variance_ratio(se_row, rho):
    return contrast_variance(se_row, rho) / contrast_variance(se_row, (0.0, 0.0, 0.0))


def _numeric(se, zt, search: SearchConfig, method):
    n = len(zt)
    zt2 = zt * zt
    total = math.fsum(zt2)
    log_m = _log_mean_square(zt)
    if log_m == -math.inf:
        return _unbounded(method)
    m = math.exp(log_m)
    if m >= 1.0 and n == 1:
        # larger relative SDs are always better once |z~| >= 1
        return EvidentialResult(0.0, 1.0, method, True, rho=(0.0, 0.0, 0.0))

    if _common_shape(se):
        # Every experiment sees the same relative SD a(rho); the summed log
        # ratio is unimodal in a^2 with its peak at the mean squared deviation.
        # The feasible set is convex and contains 0, so every a^2 between the
        # smallest found value and 1 is attained on the segment [0, rho_min].
        rho_min, score, _ = _search.search(se[:1], zt2[:1], _search.MODE_MIN_VARIANCE,
                                           search.lattice_step, search.tolerance,
                                           search.max_evaluations, search.n_starts)
        b_min = -score
        target = min(max(m, b_min), 1.0)
        if b_min < 1.0 and target < 1.0:
            t = (1.0 - target) / (1.0 - b_min)
            rho = tuple(t * r for r in rho_min)
        else:
            rho = (0.0, 0.0, 0.0)
        b = _variance_ratio(se[0], rho)
        log_v = _log_ratio(total, n, b)
        if log_v <= 0.0:
            rho, b, log_v = (0.0, 0.0, 0.0), 1.0, 0.0
        at_bound = b_min <= m or m >= 1.0
        return EvidentialResult(log_v, math.sqrt(b), method, at_bound, rho=rho)

    rho, score, _ = _search.search(se, zt2, _search.MODE_JOINT_LOGLR, search.lattice_step,
                                   search.tolerance, search.max_evaluations, search.n_starts)
    b = np.array([_variance_ratio(row, rho) for row in se])
    log_v = max(score, 0.0)
    bound = v_hat_joint(zt).log_value
    return EvidentialResult(log_v, float(math.sqrt(b.mean())), method,
                            at_bound=abs(log_v - bound) <= 1e-9 * max(1.0, abs(bound)), rho=rho)


def v_single_numeric(e: ExperimentSummary, search: SearchConfig = SearchConfig()) -> EvidentialResult:
    """Evidential value maximized numerically over feasible correlations."""
    se, zt = _stack([e])
    res = _numeric(se, zt, search, "numeric-single")
    if res.rho is not None:
        assert check_feasible(e.standard_errors, res.rho).feasible
    return res


def v_joint_numeric(experiments: Sequence[ExperimentSummary],
                    search: SearchConfig = SearchConfig()) -> EvidentialResult:
    """Joint evidential value with one correlation vector shared by all experiments.

    ``experiments`` may be an ``ArticleDataset`` or any sequence of
    summaries. When the experiments' SD vectors are not proportional to each
    other the shared correlation vector induces different relative SDs per
    experiment; ``a_star`` then reports their root mean square.
    """
    exps = list(getattr(experiments, "experiments", experiments))
    if not exps:
        raise ValidationError("at least one experiment is required")
    se, zt = _stack(exps)
    return _numeric(se, zt, search, "numeric-joint")


def min_relative_sd(sds: Sequence[float], search: SearchConfig = SearchConfig()):
    """Smallest relative contrast SD found over the feasible set, with its rho."""
    se = np.array([sds], dtype=np.float64)
    rho, score, _ = _search.search(se, np.zeros(1), _search.MODE_MIN_VARIANCE, search.lattice_step,
                                   search.tolerance, search.max_evaluations, search.n_starts)
    return math.sqrt(-score), rho


def attain_relative_sd(sds: Sequence[float], target: float, search: SearchConfig = SearchConfig()):
    """A feasible correlation vector whose relative SD is ``target``.

    Raises ``ValidationError`` when the search cannot reach below ``target``.
    """
    if not 0.0 < target <= 1.0:
        raise ValidationError("target relative SD must lie in (0, 1]")
    a_min, rho_min = min_relative_sd(sds, search)
    if target < a_min:
        raise ValidationError(f"relative SD {target} is below the smallest attainable ({a_min:.3g})")
    b_min = a_min * a_min
    t = (1.0 - target * target) / (1.0 - b_min) if b_min < 1.0 else 0.0
    return tuple(t * r for r in rho_min)
