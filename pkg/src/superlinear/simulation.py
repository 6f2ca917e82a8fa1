"""Monte Carlo calibration and power engine.

Two regimes are available:

``finite``
    raw scores are drawn per condition from normal(mu_i, sigma_i) and
    summarized to means and sample SDs, exactly what an article reports;
``asymptotic``
    normalized deviations are drawn directly from the standard normal,
    the large-n limit in which sample SDs equal the true ones.

Random numbers come from numpy's counter-based Philox generator. Each
(replicate, experiment, condition) triple owns its own counter block under a
key derived from the seed, so results do not depend on chunking or on the
number of worker threads.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import brentq

from . import special
from ._accel import USE_NUMBA, jit, prange
from .errors import ValidationError
from .model import ExperimentSummary

STRATEGIES = ("middle-toward-linear", "variance-shrink")
REGIMES = ("finite", "asymptotic")
POWER_METHODS = ("chi2-article", "deltaF-fisher-article", "v-product", "v-hat-joint")
STATISTICS = ("v-hat", "abs-z-tilde")

_DOMAIN_RAW = 0
_DOMAIN_ASYMPTOTIC = 1
_BLOCK = 1 << 16
_Z99 = special.norm_ppf(0.995)


@dataclass(frozen=True)
class ManipulationSpec:
    """How reported summaries are pushed toward linearity.

    ``middle-toward-linear`` replaces the middle mean by
    ``(1 - strength) x2 + strength (x1 + x3) / 2``; ``variance-shrink``
    scales every within-cell deviation by ``1 - strength`` before
    summarizing (so ``strength`` must stay below 1).
    """

    strategy: str = "middle-toward-linear"
    strength: float = 0.0

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValidationError(f"unknown manipulation strategy {self.strategy!r}")
        lam = float(self.strength)
        if not 0.0 <= lam <= 1.0:
            raise ValidationError(f"manipulation strength must lie in [0, 1], got {lam}")
        if self.strategy == "variance-shrink" and lam >= 1.0:
            raise ValidationError("variance-shrink with strength 1 collapses every SD to zero")
        object.__setattr__(self, "strength", lam)

    @classmethod
    def parse(cls, text: str) -> "ManipulationSpec":
        """``strategy:strength``, e.g. ``middle-toward-linear:0.5``."""
        strategy, _, strength = text.partition(":")
        try:
            return cls(strategy.strip(), float(strength or 0.0))
        except ValueError as exc:
            raise ValidationError(f"cannot parse manipulation {text!r}") from exc


@dataclass(frozen=True)
class SimulationConfig:
    cells: object = 20
    true_means: tuple = (0.0, 1.0, 2.0)
    true_sds: tuple = (1.0, 1.0, 1.0)
    experiments_per_article: int = 8
    replicates: int = 1000
    seed: int = 0
    manipulation: Optional[ManipulationSpec] = None

    def __post_init__(self):
        cells = self.cells
        if isinstance(cells, (int, np.integer)):
            cells = (int(cells),) * 3
        cells = tuple(int(c) for c in cells)
        if len(cells) != 3 or min(cells) < 2:
            raise ValidationError(f"cells must be one or three integers >= 2, got {self.cells}")
        means = tuple(float(m) for m in self.true_means)
        sds = tuple(float(s) for s in self.true_sds)
        if len(means) != 3 or len(sds) != 3:
            raise ValidationError("true_means and true_sds need exactly 3 values")
        if min(sds) <= 0.0:
            raise ValidationError("true_sds must be positive")
        if self.experiments_per_article < 1 or self.replicates < 1:
            raise ValidationError("experiments_per_article and replicates must be >= 1")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ValidationError("seed must be a 64-bit non-negative integer")
        object.__setattr__(self, "cells", cells)
        object.__setattr__(self, "true_means", means)
        object.__setattr__(self, "true_sds", sds)
        object.__setattr__(self, "seed", int(self.seed))


class RandomStream:
    """Counter-based streams keyed by (seed, replicate, experiment, condition)."""

    def __init__(self, seed: int, domain: int = _DOMAIN_RAW):
        self.seed = int(seed)
        self.domain = domain
        self._key = np.random.SeedSequence([self.seed, domain]).generate_state(2, np.uint64)
        self._bitgen = np.random.Philox(key=self._key)
        self._gen = np.random.Generator(self._bitgen)
        self._state = self._bitgen.state

    def generator(self, replicate: int = 0, experiment: int = 0, condition: int = 0):
        counter = np.array([0, condition, experiment, replicate], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=self._key, counter=counter))

    def standard_normal(self, size, replicate: int = 0, experiment: int = 0, condition: int = 0):
        """Same values as ``generator(...).standard_normal(size)``.

        Reseats one internal generator instead of building a new one, which is
        about three times cheaper; not safe to share across threads.
        """
        st = self._state
        st["state"]["counter"] = np.array([0, condition, experiment, replicate], dtype=np.uint64)
        st["buffer_pos"] = 4
        st["has_uint32"] = 0
        st["uinteger"] = 0
        self._bitgen.state = st
        return self._gen.standard_normal(size)


def _summarize(raw, lam_shrink):
    means = raw.mean(axis=-1)
    dev = raw - means[..., None]
    if lam_shrink:
        dev = dev * (1.0 - lam_shrink)
    sds = np.sqrt(np.einsum("...i,...i->...", dev, dev) / (raw.shape[-1] - 1))
    return means, sds


def _shrink_of(manip):
    return manip.strength if manip is not None and manip.strategy == "variance-shrink" else 0.0


def _pull_middle(means, manip):
    if manip is None or manip.strategy != "middle-toward-linear" or manip.strength == 0.0:
        return means
    lam = manip.strength
    out = means.copy()
    out[..., 1] = (1.0 - lam) * means[..., 1] + lam * 0.5 * (means[..., 0] + means[..., 2])
    return out


def simulate_experiment(config: SimulationConfig, stream: RandomStream,
                        replicate: int = 0, experiment: int = 0) -> ExperimentSummary:
    """One simulated experiment summary (finite regime)."""
    means = np.empty(3)
    sds = np.empty(3)
    for c in range(3):
        x = stream.standard_normal(config.cells[c], replicate, experiment, c)
        raw = config.true_means[c] + config.true_sds[c] * x
        means[c], sds[c] = _summarize(raw, _shrink_of(config.manipulation))
    means = _pull_middle(means, config.manipulation)
    return ExperimentSummary(id=f"r{replicate}e{experiment}", means=tuple(means),
                             sds=tuple(sds), cell_sizes=config.cells)


def _simulate_rows(config, stream, replicates):
    n_exp = config.experiments_per_article
    means = np.empty((len(replicates), n_exp, 3))
    sds = np.empty((len(replicates), n_exp, 3))
    shrink = _shrink_of(config.manipulation)
    for c in range(3):
        n = config.cells[c]
        raw = np.empty((len(replicates), n_exp, n))
        for i, r in enumerate(replicates):
            for j in range(n_exp):
                raw[i, j] = stream.standard_normal(n, r, j, c)
        raw = config.true_means[c] + config.true_sds[c] * raw
        means[:, :, c], sds[:, :, c] = _summarize(raw, shrink)
    return means, sds


def simulate_summaries(config: SimulationConfig, jobs: int = 1):
    """Raw-score simulation of ``config.replicates`` articles.

    Returns ``(means, sds)`` with shape ``(replicates, experiments, 3)``,
    manipulation applied.
    """
    reps = np.arange(config.replicates)
    if jobs <= 1:
        means, sds = _simulate_rows(config, RandomStream(config.seed), reps)
    else:
        chunks = np.array_split(reps, jobs)
        # one stream object per worker: the counters, not the objects, carry identity
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(lambda ch: _simulate_rows(config, RandomStream(config.seed), ch),
                                  chunks))
        means = np.concatenate([p[0] for p in parts])
        sds = np.concatenate([p[1] for p in parts])
    return _pull_middle(means, config.manipulation), sds


def standard_normal_draws(seed: int, size: int) -> np.ndarray:
    """``size`` N(0, 1) draws in fixed blocks of 65536, one Philox counter per block."""
    stream = RandomStream(seed, _DOMAIN_ASYMPTOTIC)
    out = np.empty(size)
    for b, start in enumerate(range(0, size, _BLOCK)):
        stop = min(start + _BLOCK, size)
        out[start:stop] = stream.standard_normal(stop - start, replicate=b)
    return out


def simulate_asymptotic(config: SimulationConfig) -> np.ndarray:
    """Normalized deviations, shape ``(replicates, experiments)``, in the large-n limit."""
    zt = standard_normal_draws(config.seed, config.replicates * config.experiments_per_article)
    zt = zt.reshape(config.replicates, config.experiments_per_article)
    manip = config.manipulation
    if manip is not None:
        if manip.strategy == "middle-toward-linear":
            zt = (1.0 - manip.strength) * zt
        else:
            zt = zt / (1.0 - manip.strength)
    return zt


# -- per-article statistics ---------------------------------------------------

@jit
def log_v_hat(z):
    az = abs(z)
    if az == 0.0:
        return math.inf
    if az > 1.0:
        return 0.0
    return -math.log(az) + 0.5 * (z * z - 1.0)


@jit
def log_v_hat_joint(zt_row):
    n = zt_row.shape[0]
    top = 0.0
    for j in range(n):
        top = max(top, abs(zt_row[j]))
    if top == 0.0:
        return math.inf
    total = 0.0
    scaled = 0.0
    for j in range(n):
        total += zt_row[j] * zt_row[j]
        scaled += (zt_row[j] / top) ** 2
    log_m = 2.0 * math.log(top) + math.log(scaled / n)
    if log_m >= 0.0:
        return 0.0
    return -0.5 * n + 0.5 * total - 0.5 * n * log_m


@jit(parallel=True)
def _article_kernel(zt, pj, out):
    # out columns: chi2 p, fisher p, log V product, log V-hat joint
    n_rep = zt.shape[0]
    n_exp = zt.shape[1]
    for r in prange(n_rep):
        t = 0.0
        x = 0.0
        logv = 0.0
        singular = False
        for j in range(n_exp):
            t += zt[r, j] * zt[r, j]
            if pj[r, j] <= 0.0:
                singular = True
            else:
                x += -2.0 * math.log(pj[r, j])
            logv += log_v_hat(zt[r, j])
        out[r, 0] = special.chi2_cdf(t, n_exp)
        out[r, 1] = 0.0 if singular else special.chi2_sf(x, 2.0 * n_exp)
        out[r, 2] = logv
        out[r, 3] = log_v_hat_joint(zt[r])
    return out


def _article_numpy(zt, pj):
    n_exp = zt.shape[1]
    t = np.sum(zt * zt, axis=1)
    with np.errstate(divide="ignore"):
        x = -2.0 * np.sum(np.log(pj), axis=1)
        az = np.abs(zt)
        lv = np.where(az > 1.0, 0.0, -np.log(az) + 0.5 * (zt * zt - 1.0))
        top = np.max(np.abs(zt), axis=1)
        safe = np.where(top > 0.0, top, 1.0)
        log_m = 2.0 * np.log(top) + np.log(np.sum((zt / safe[:, None]) ** 2, axis=1) / n_exp)
        joint = np.where(log_m >= 0.0, 0.0, -0.5 * n_exp + 0.5 * t - 0.5 * n_exp * log_m)
    fisher = np.where(np.isinf(x), 0.0, special.chi2_sf_array(x, 2.0 * n_exp))
    out = np.column_stack([special.chi2_cdf_array(t, float(n_exp)), fisher, lv.sum(axis=1), joint])
    return out


@dataclass(frozen=True)
class ArticleStatistics:
    """Per-replicate statistics of simulated articles."""

    z_tilde: np.ndarray
    delta_f_p: np.ndarray
    chi2_p: np.ndarray
    fisher_p: np.ndarray
    log_v_product: np.ndarray
    log_v_hat_joint: np.ndarray


def summary_statistics(means, sds, cells):
    """Normalized deviations and left-tail deviation-F p-values for summary arrays."""
    n1, n2, n3 = (float(c) for c in cells)
    z = means[..., 0] - 2.0 * means[..., 1] + means[..., 2]
    var0 = sds[..., 0] ** 2 / n1 + 4.0 * sds[..., 1] ** 2 / n2 + sds[..., 2] ** 2 / n3
    zt = z / np.sqrt(var0)
    dof = np.array([n1 - 1.0, n2 - 1.0, n3 - 1.0])
    if n1 == n2 == n3:
        msw = np.mean(sds * sds, axis=-1)
    else:
        msw = np.sum(dof * sds * sds, axis=-1) / dof.sum()
    delta_f = z * z / (1.0 / n1 + 4.0 / n2 + 1.0 / n3) / msw
    pj = special.f_cdf_array(delta_f, 1.0, dof.sum())
    return zt, pj


def article_statistics(zt, pj) -> ArticleStatistics:
    zt = np.ascontiguousarray(zt, dtype=np.float64)
    pj = np.ascontiguousarray(pj, dtype=np.float64)
    if USE_NUMBA:
        out = _article_kernel(zt, pj, np.empty((zt.shape[0], 4)))
    else:
        out = _article_numpy(zt, pj)
    return ArticleStatistics(zt, pj, out[:, 0], out[:, 1], out[:, 2], out[:, 3])


def simulate_article_statistics(config: SimulationConfig, regime: str = "finite",
                                jobs: int = 1) -> ArticleStatistics:
    if regime == "finite":
        means, sds = simulate_summaries(config, jobs=jobs)
        zt, pj = summary_statistics(means, sds, config.cells)
    elif regime == "asymptotic":
        zt = simulate_asymptotic(config)
        # deviation F is z~^2 with infinite error df in this limit
        pj = special.chi2_cdf_array(zt * zt, 1.0)
    else:
        raise ValidationError(f"unknown regime {regime!r}; expected one of {REGIMES}")
    return article_statistics(zt, pj)


# -- calibration ----------------------------------------------------------------

@dataclass(frozen=True)
class TailEstimate:
    estimate: float
    half_width: float
    draws: int

    @property
    def interval(self):
        return (self.estimate - self.half_width, self.estimate + self.half_width)


def _proportion(hits) -> TailEstimate:
    hits = np.asarray(hits, dtype=bool)
    n = hits.size
    p = float(hits.mean())
    return TailEstimate(p, _Z99 * math.sqrt(p * (1.0 - p) / n), n)


def estimate_tail_probability(statistic: str, threshold: float, direction: str = ">=",
                              draws: int = 100_000, seed: int = 0, regime: str = "asymptotic",
                              config: Optional[SimulationConfig] = None) -> TailEstimate:
    """Monte Carlo P(statistic >= threshold) (or <=) for one experiment under H0.

    ``statistic`` is ``"v-hat"`` (worst-case evidential value) or
    ``"abs-z-tilde"``. The half-width is that of a 99% Wald interval.
    """
    if draws < 10_000:
        raise ValidationError("at least 10^4 draws are required")
    if statistic not in STATISTICS:
        raise ValidationError(f"unknown statistic {statistic!r}; expected one of {STATISTICS}")
    if direction not in (">=", "<="):
        raise ValidationError("direction must be '>=' or '<='")
    if regime == "asymptotic":
        zt = standard_normal_draws(seed, draws)
    elif regime == "finite":
        base = config or SimulationConfig()
        cfg = replace(base, experiments_per_article=1, replicates=draws, seed=seed)
        means, sds = simulate_summaries(cfg)
        zt, _ = summary_statistics(means, sds, cfg.cells)
        zt = zt[:, 0]
    else:
        raise ValidationError(f"unknown regime {regime!r}")
    if statistic == "v-hat":
        if threshold <= 0.0:
            values, limit = np.zeros_like(zt), -math.inf
        else:
            az = np.abs(zt)
            with np.errstate(divide="ignore"):
                values = np.where(az > 1.0, 0.0, -np.log(az) + 0.5 * (zt * zt - 1.0))
            limit = math.log(threshold)
    else:
        values, limit = np.abs(zt), threshold
    hits = values >= limit if direction == ">=" else values <= limit
    return _proportion(hits)


@dataclass(frozen=True)
class Threshold:
    z_tilde: float
    tail_probability: float


def v_hat_threshold(v_star: float) -> Threshold:
    """|z~| at which the worst-case value equals ``v_star`` and P(V-hat >= v_star).

    Solves ``t^-1 exp((t^2 - 1) / 2) = v_star`` on (0, 1); the asymptotic tail
    probability is ``P(|Z| <= t) = 2 Phi(t) - 1``.
    """
    v_star = float(v_star)
    if not v_star > 1.0:
        raise ValidationError("v_star must exceed 1")
    log_target = math.log(v_star)

    def gap(t):
        return -math.log(t) + 0.5 * (t * t - 1.0) - log_target

    lo = min(0.5, 1.0 / v_star)
    while gap(lo) <= 0.0:
        lo *= 0.5
    t = brentq(gap, lo, 1.0, xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=500)
    return Threshold(t, math.erf(t / math.sqrt(2.0)))


def min_p_over_series(alpha: float, n_experiments: int) -> float:
    """P(at least one of N independent level-alpha tests rejects) = 1 - (1 - alpha)^N."""
    if not 0.0 < alpha < 1.0:
        raise ValidationError("alpha must lie in (0, 1)")
    if n_experiments < 1:
        raise ValidationError("n_experiments must be >= 1")
    return -math.expm1(n_experiments * math.log1p(-alpha))


def estimate_min_p_over_series(alpha: float, n_experiments: int, replicates: int = 100_000,
                               seed: int = 0, regime: str = "asymptotic",
                               config: Optional[SimulationConfig] = None) -> TailEstimate:
    """Monte Carlo counterpart of ``min_p_over_series``.

    Each experiment is tested with the left-tail deviation-F test, which is
    exact in the finite regime and reduces to chi2(1) on z~^2 asymptotically.
    """
    base = config or SimulationConfig()
    cfg = replace(base, experiments_per_article=n_experiments, replicates=replicates,
                  seed=seed, manipulation=None)
    stats = simulate_article_statistics(cfg, regime)
    return _proportion((stats.delta_f_p <= alpha).any(axis=1))


@dataclass(frozen=True)
class PowerRow:
    method: str
    strength: float
    rate: float
    half_width: float
    replicates: int


def rejections(stats: ArticleStatistics, method: str, alpha: float, v_star: float) -> np.ndarray:
    if method == "chi2-article":
        return stats.chi2_p <= alpha
    if method == "deltaF-fisher-article":
        return stats.fisher_p <= alpha
    if method == "v-product":
        return stats.log_v_product >= math.log(v_star)
    if method == "v-hat-joint":
        return stats.log_v_hat_joint >= math.log(v_star)
    raise ValidationError(f"unknown method {method!r}; expected one of {POWER_METHODS}")


def power_curve(config: SimulationConfig, strengths: Sequence[float],
                methods: Sequence[str] = POWER_METHODS, alpha: float = 0.05,
                v_star: float = 6.0, strategy: str = "middle-toward-linear",
                regime: str = "finite", jobs: int = 1) -> list:
    """Rejection rates per (method, strength); strength 0 gives the size.

    Every strength reuses the same seed, so rows differ only through the
    manipulation (common random numbers).
    """
    for m in methods:
        if m not in POWER_METHODS:
            raise ValidationError(f"unknown method {m!r}; expected one of {POWER_METHODS}")
    rows = []
    for lam in strengths:
        cfg = replace(config, manipulation=ManipulationSpec(strategy, lam))
        stats = simulate_article_statistics(cfg, regime, jobs=jobs)
        for m in methods:
            est = _proportion(rejections(stats, m, alpha, v_star))
            rows.append(PowerRow(m, float(lam), est.estimate, est.half_width, est.draws))
    return rows
