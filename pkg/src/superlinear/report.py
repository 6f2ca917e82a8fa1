"""Analysis orchestration and report rendering.

``analyze`` runs the selected statistics over every article and returns an
``AnalysisReport``. The machine-readable form (``to_json``) is a pure function
of inputs, configuration and seed: there is no timestamp, keys keep a fixed
order, floats use Python's shortest round-trip representation and infinite
evidential values are written as the string ``"unbounded"``.
"""
from __future__ import annotations

import hashlib
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from ._accel import BACKEND
from .dataset import ArticleDataset, dumps_json
from .errors import ValidationError
from .evidential import SearchConfig, v_hat_joint, v_hat_single, v_joint_numeric, v_product, v_single_numeric
from .linearity_tests import OrderingPolicy, apply_ordering_article, chi2_linearity_test, delta_f_single, fisher_combine
from .model import normalized_deviation

TESTS = ("chi2", "deltaF", "vhat", "product", "joint", "numeric")
DEFAULT_TESTS = ("chi2", "deltaF", "vhat", "product", "joint")


@dataclass(frozen=True)
class AnalysisConfig:
    tests: tuple = DEFAULT_TESTS
    alpha: float = 0.05
    v_star: float = 6.0
    order: Optional[OrderingPolicy] = None  # overrides each article's own policy
    search: SearchConfig = field(default_factory=SearchConfig)
    seed: int = 0

    def __post_init__(self):
        tests = tuple(self.tests)
        unknown = [t for t in tests if t not in TESTS]
        if unknown or not tests:
            raise ValidationError(f"unknown or empty test selection {unknown or tests}; choose from {TESTS}")
        object.__setattr__(self, "tests", tuple(t for t in TESTS if t in tests))
        if not 0.0 < self.alpha < 1.0:
            raise ValidationError("alpha must lie in (0, 1)")
        if not self.v_star > 1.0:
            raise ValidationError("v_star must exceed 1")

    def as_dict(self):
        return {"tests": list(self.tests), "alpha": self.alpha, "v_star": self.v_star,
                "order": None if self.order is None else str(self.order),
                "search": asdict(self.search), "seed": self.seed}


@dataclass(frozen=True)
class ExperimentRow:
    id: str
    z: float
    sigma0: float
    z_tilde: float
    v_hat: Optional[float] = None
    delta_f: Optional[float] = None
    df_within: Optional[int] = None
    p_j: Optional[float] = None
    p_j_right: Optional[float] = None
    v_numeric: Optional[float] = None
    flags: tuple = ()


@dataclass(frozen=True)
class ArticleReport:
    id: str
    ordering: str
    experiment_ids: tuple
    rows: tuple
    results: dict
    flags: tuple = ()

    @property
    def z_tildes(self):
        return np.array([r.z_tilde for r in self.rows])


@dataclass(frozen=True)
class AnalysisReport:
    articles: tuple
    provenance: dict

    def to_dict(self):
        return {"provenance": self.provenance,
                "articles": [_article_dict(a) for a in self.articles]}

    def to_json(self) -> str:
        return json.dumps(_jsonable(self.to_dict()), indent=2, allow_nan=False) + "\n"

    def to_text(self) -> str:
        return render_text(self)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return None
        if math.isinf(x):
            return "unbounded" if x > 0 else "-unbounded"
        return x
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def _article_dict(a: ArticleReport):
    return {"id": a.id, "ordering": a.ordering, "experiments": list(a.experiment_ids),
            "flags": list(a.flags),
            "rows": [{k: v for k, v in asdict(r).items() if v is not None} for r in a.rows],
            "results": a.results}


def _evidential_entry(res, v_star):
    entry = {"log_value": res.log_value, "value": res.value,
             "exceeds_v_star": bool(res.unbounded or res.log_value >= math.log(v_star))}
    if res.a_star is not None:
        entry["a_star"] = res.a_star
    if res.rho is not None:
        entry["rho"] = list(res.rho)
        entry["at_bound"] = res.at_bound
    if res.unbounded:
        entry["flags"] = ["unbounded"]
    return entry


def _test_entry(res, alpha):
    entry = {"statistic": res.statistic, "df": list(res.df), "tail": res.tail,
             "p_value": res.p_value, "p_other_tail": res.p_other_tail,
             "significant": bool(res.p_value <= alpha)}
    if res.flags:
        entry["flags"] = list(res.flags)
    return entry


def analyze_article(article: ArticleDataset, config: AnalysisConfig) -> ArticleReport:
    policy = config.order or article.ordering_policy
    try:
        exps = apply_ordering_article(article.experiments, policy)
    except ValidationError as exc:
        raise ValidationError(f"article {article.id!r}: {exc}") from exc
    if not exps:
        raise ValidationError(f"article {article.id!r}: no experiments left after ordering policy {policy}")
    tests = set(config.tests)
    rows, zts, pjs = [], [], []
    for e in exps:
        nd = normalized_deviation(e)
        extra, flags = {}, []
        zts.append(nd.z_tilde)
        if nd.z_tilde == 0.0:
            flags.append("z-tilde-zero")
        if "vhat" in tests:
            extra["v_hat"] = v_hat_single(nd.z_tilde).value
        if "deltaF" in tests:
            t = delta_f_single(e)
            extra.update(delta_f=t.statistic, df_within=t.df[1], p_j=t.p_value, p_j_right=t.p_other_tail)
            pjs.append(t.p_value)
            if t.p_value == 0.0:
                flags.append("p-zero")
        if "numeric" in tests:
            extra["v_numeric"] = v_single_numeric(e, config.search).value
        rows.append(ExperimentRow(e.id, nd.z, nd.sigma0, nd.z_tilde, flags=tuple(flags), **extra))

    results, flags = {}, []
    if "chi2" in tests:
        results["chi2-article"] = _test_entry(chi2_linearity_test(zts), config.alpha)
    if "deltaF" in tests:
        fisher = fisher_combine(pjs)
        results["deltaF-fisher-article"] = _test_entry(fisher, config.alpha)
        flags.extend(fisher.flags)
    if "product" in tests:
        results["v-product"] = _evidential_entry(v_product(zts), config.v_star)
    if "joint" in tests:
        results["v-hat-joint"] = _evidential_entry(v_hat_joint(zts), config.v_star)
    if "numeric" in tests:
        results["v-joint-numeric"] = _evidential_entry(v_joint_numeric(exps, config.search), config.v_star)
    if any(z == 0.0 for z in zts):
        flags.append("unbounded-evidential-value")
    return ArticleReport(article.id, str(policy), tuple(e.id for e in exps), tuple(rows),
                         results, tuple(flags))


def input_digest(datasets: Sequence[ArticleDataset]) -> str:
    """SHA-256 of the canonical JSON form of the datasets."""
    return hashlib.sha256(dumps_json(datasets).encode("utf-8")).hexdigest()


def analyze(datasets: Sequence[ArticleDataset], config: AnalysisConfig = AnalysisConfig(),
            jobs: int = 1) -> AnalysisReport:
    """Run the configured statistics on every article, in input order."""
    datasets = list(datasets)
    if not datasets:
        raise ValidationError("no articles to analyze")
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            articles = tuple(pool.map(lambda a: analyze_article(a, config), datasets))
    else:
        articles = tuple(analyze_article(a, config) for a in datasets)
    provenance = {"toolkit": "superlinear", "version": __version__, "backend": BACKEND,
                  "input_sha256": input_digest(datasets), "seed": config.seed,
                  "config": config.as_dict()}
    return AnalysisReport(articles, provenance)


# -- human-readable output -----------------------------------------------------

def approx(x, digits: int = 4) -> str:
    """Four significant digits, prefixed by an explicit approximation sign."""
    if x is None:
        return "-"
    x = float(x)
    if math.isinf(x):
        return "unbounded (z̃ = 0)" if x > 0 else "-inf"
    if math.isnan(x):
        return "nan"
    text = f"{x:.{digits}g}"
    return text if float(text) == x else "≈" + text


def render_text(report: AnalysisReport) -> str:
    lines = []
    for a in report.articles:
        lines.append(f"article {a.id} ({len(a.rows)} experiments, ordering {a.ordering})")
        lines.append(f"  {'experiment':<14}{'z':>12}{'sigma0':>12}{'z~':>12}{'V-hat':>12}{'dF':>12}{'p_j':>12}")
        for r in a.rows:
            lines.append(f"  {r.id:<14}{approx(r.z):>12}{approx(r.sigma0):>12}{approx(r.z_tilde):>12}"
                         f"{approx(r.v_hat):>12}{approx(r.delta_f):>12}{approx(r.p_j):>12}")
        for name, res in a.results.items():
            if "p_value" in res:
                mark = "  significant" if res["significant"] else ""
                lines.append(f"  {name:<24} p = {approx(res['p_value'])}{mark}")
            else:
                mark = "  exceeds V*" if res["exceeds_v_star"] else ""
                lines.append(f"  {name:<24} V = {approx(res['value'])}{mark}")
        if a.flags:
            lines.append("  flags: " + ", ".join(a.flags))
        lines.append("")
    return "\n".join(lines)


# -- figure data -----------------------------------------------------------------

@dataclass(frozen=True)
class FigureData:
    """Rug of normalized deviations plus the null and fitted normal densities."""

    rug: np.ndarray
    x: np.ndarray
    null_density: np.ndarray
    fitted_density: Optional[np.ndarray]
    fitted_variance: float
    flags: tuple = ()


def _normal_pdf(x, var):
    return np.exp(-0.5 * x * x / var) / math.sqrt(2.0 * math.pi * var)


def figure_data(article: ArticleReport) -> FigureData:
    zt = article.z_tildes
    x = np.round(np.arange(-400, 401) * 0.01, 2)
    m = float(np.mean(zt * zt))
    if m > 0.0:
        fitted, flags = _normal_pdf(x, m), ()
    else:
        fitted, flags = None, ("fitted-variance-zero",)
    return FigureData(zt, x, _normal_pdf(x, 1.0), fitted, m, flags)


def emit_figure_data(article: ArticleReport, directory) -> Path:
    """Write ``<directory>/<article id>.tsv`` in long format (series, x, density).

    Rug rows carry the normalized deviations with density 0. When the fitted
    variance is zero the fitted series is left out.
    """
    fig = figure_data(article)
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / f"{article.id}.tsv"
    out = ["series\tx\tdensity"]
    out += [f"rug\t{z!r}\t0.0" for z in map(float, fig.rug)]
    out += [f"null\t{x!r}\t{y!r}" for x, y in zip(map(float, fig.x), map(float, fig.null_density))]
    if fig.fitted_density is not None:
        out += [f"fitted\t{x!r}\t{y!r}" for x, y in zip(map(float, fig.x), map(float, fig.fitted_density))]
    path.write_text("\n".join(out) + "\n", encoding="utf-8")
    return path
