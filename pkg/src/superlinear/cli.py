"""Command-line entry point: ``superlinear analyze | simulate | power``.

Exit status is 0 on success, 2 for invalid input or arguments and 3 when an
input file cannot be parsed.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .dataset import FORMATS, ArticleDataset, dumps_csv, dumps_json, ingest
from .errors import ParseError, SuperlinearError, ValidationError
from .evidential import SearchConfig
from .linearity_tests import OrderingPolicy
from .model import ExperimentSummary
from .report import TESTS, AnalysisConfig, analyze, emit_figure_data
from .simulation import (POWER_METHODS, REGIMES, STRATEGIES, ManipulationSpec, SimulationConfig,
                         power_curve, simulate_summaries)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_PARSE = 3


def _floats(text, count=None, name="value"):
    try:
        values = tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"{name}: expected comma-separated numbers, got {text!r}")
    if count is not None and len(values) != count:
        raise argparse.ArgumentTypeError(f"{name}: expected {count} values, got {len(values)}")
    return values


def _cells(text):
    try:
        values = tuple(int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"cells: expected integers, got {text!r}")
    if len(values) == 1:
        return values[0]
    if len(values) != 3:
        raise argparse.ArgumentTypeError("cells: give one size or three comma-separated sizes")
    return values


def _tests(text):
    items = tuple(t.strip() for t in text.split(",") if t.strip())
    unknown = [t for t in items if t not in TESTS]
    if unknown or not items:
        raise argparse.ArgumentTypeError(f"unknown test(s) {unknown}; choose from {','.join(TESTS)}")
    return items


def _methods(text):
    items = tuple(t.strip() for t in text.split(",") if t.strip())
    unknown = [t for t in items if t not in POWER_METHODS]
    if unknown or not items:
        raise argparse.ArgumentTypeError(f"unknown method(s) {unknown}; choose from {','.join(POWER_METHODS)}")
    return items


def _add_seed(p):
    p.add_argument("--seed", type=int, default=0, help="random seed (default: 0)")


def _add_design(p):
    p.add_argument("--cells", type=_cells, default=20, help="cell size, or n1,n2,n3 (default: 20)")
    p.add_argument("--means", type=lambda s: _floats(s, 3, "means"), default=(0.0, 1.0, 2.0),
                   help="true condition means (default: 0,1,2)")
    p.add_argument("--sds", type=lambda s: _floats(s, 3, "sds"), default=(1.0, 1.0, 1.0),
                   help="true condition SDs (default: 1,1,1)")
    p.add_argument("--experiments", type=int, default=8, help="experiments per article (default: 8)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="superlinear", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="run the linearity statistics on summary data")
    a.add_argument("--input", required=True, type=Path, help="JSON or CSV dataset")
    a.add_argument("--format", choices=FORMATS, help="input format (default: from the file suffix)")
    a.add_argument("--order", type=OrderingPolicy.parse, default=None,
                   help="as-reported | increasing | exclude:<id>,<id> (default: per-article setting)")
    a.add_argument("--tests", type=_tests, default=AnalysisConfig().tests,
                   help=f"comma-separated subset of {','.join(TESTS)} (default: all but numeric)")
    a.add_argument("--alpha", type=float, default=0.05, help="significance level (default: 0.05)")
    a.add_argument("--v-star", type=float, default=6.0, help="evidential-value threshold (default: 6)")
    a.add_argument("--output", type=Path, help="write the JSON report here")
    a.add_argument("--figure-data", type=Path, metavar="DIR", help="write per-article figure TSVs here")
    a.add_argument("--quiet", action="store_true", help="suppress the text summary on stdout")
    a.add_argument("--jobs", type=int, default=1, help="articles analyzed in parallel (default: 1)")
    s = SearchConfig()
    a.add_argument("--lattice-step", type=float, default=s.lattice_step,
                   help=f"screening lattice spacing for numeric V (default: {s.lattice_step})")
    a.add_argument("--tolerance", type=float, default=s.tolerance,
                   help=f"smallest pattern-search step (default: {s.tolerance})")
    a.add_argument("--max-evaluations", type=int, default=s.max_evaluations,
                   help=f"refinement evaluation cap (default: {s.max_evaluations})")
    a.add_argument("--n-starts", type=int, default=s.n_starts,
                   help=f"lattice points refined (default: {s.n_starts})")
    _add_seed(a)

    m = sub.add_parser("simulate", help="emit simulated articles as a dataset")
    _add_design(m)
    m.add_argument("--articles", type=int, default=10, help="number of articles (default: 10)")
    m.add_argument("--manipulation", type=ManipulationSpec.parse, default=None,
                   metavar="STRATEGY:STRENGTH", help=f"one of {', '.join(STRATEGIES)}, e.g. middle-toward-linear:0.5")
    m.add_argument("--output", type=Path, help="destination file (default: JSON on stdout)")
    m.add_argument("--format", choices=FORMATS, help="output format (default: from the suffix, else json)")
    m.add_argument("--jobs", type=int, default=1, help="worker threads (default: 1)")
    _add_seed(m)

    p = sub.add_parser("power", help="rejection rates over manipulation strengths (TSV)")
    _add_design(p)
    p.add_argument("--replicates", type=int, default=2000, help="articles per strength (default: 2000)")
    p.add_argument("--strengths", type=lambda s: _floats(s, None, "strengths"),
                   default=(0.0, 0.25, 0.5, 0.75, 1.0),
                   help="comma-separated strengths (default: 0,0.25,0.5,0.75,1)")
    p.add_argument("--strategy", choices=STRATEGIES, default="middle-toward-linear",
                   help="manipulation applied at each strength (default: middle-toward-linear)")
    p.add_argument("--methods", type=_methods, default=POWER_METHODS,
                   help=f"comma-separated subset of {','.join(POWER_METHODS)} (default: all)")
    p.add_argument("--alpha", type=float, default=0.05, help="significance level (default: 0.05)")
    p.add_argument("--v-star", type=float, default=6.0, help="evidential-value threshold (default: 6)")
    p.add_argument("--regime", choices=REGIMES, default="finite",
                   help="finite draws with sample SDs, or z-tilde drawn directly (default: finite)")
    p.add_argument("--output", type=Path, help="destination TSV (default: stdout)")
    p.add_argument("--jobs", type=int, default=1, help="worker threads (default: 1)")
    _add_seed(p)
    return parser


def _emit(text, path):
    if path is None:
        sys.stdout.write(text)
    else:
        path.write_text(text, encoding="utf-8")


def run_analyze(args):
    datasets = ingest(args.input, args.format)
    search = SearchConfig(args.lattice_step, args.tolerance, args.max_evaluations, args.n_starts)
    config = AnalysisConfig(tests=args.tests, alpha=args.alpha, v_star=args.v_star, order=args.order,
                            search=search, seed=args.seed)
    report = analyze(datasets, config, jobs=args.jobs)
    if args.output is not None:
        args.output.write_text(report.to_json(), encoding="utf-8")
    if args.figure_data is not None:
        for article in report.articles:
            emit_figure_data(article, args.figure_data)
    if not args.quiet:
        sys.stdout.write(report.to_text())


def run_simulate(args):
    config = SimulationConfig(cells=args.cells, true_means=args.means, true_sds=args.sds,
                              experiments_per_article=args.experiments, replicates=args.articles,
                              seed=args.seed, manipulation=args.manipulation)
    means, sds = simulate_summaries(config, jobs=args.jobs)
    datasets = [ArticleDataset(f"sim{r}", tuple(
        ExperimentSummary(f"e{j}", tuple(means[r, j]), tuple(sds[r, j]), config.cells)
        for j in range(config.experiments_per_article))) for r in range(config.replicates)]
    fmt = args.format or (args.output.suffix.lstrip(".").lower() if args.output else "json")
    if fmt not in FORMATS:
        raise ValidationError(f"cannot infer output format from {args.output}; pass --format")
    _emit(dumps_json(datasets) if fmt == "json" else dumps_csv(datasets), args.output)


def run_power(args):
    config = SimulationConfig(cells=args.cells, true_means=args.means, true_sds=args.sds,
                              experiments_per_article=args.experiments, replicates=args.replicates,
                              seed=args.seed)
    rows = power_curve(config, args.strengths, args.methods, alpha=args.alpha, v_star=args.v_star,
                       strategy=args.strategy, regime=args.regime, jobs=args.jobs)
    lines = ["method\tstrength\trate\thalf_width_99\treplicates"]
    lines += [f"{r.method}\t{r.strength!r}\t{r.rate!r}\t{r.half_width!r}\t{r.replicates}" for r in rows]
    _emit("\n".join(lines) + "\n", args.output)


COMMANDS = {"analyze": run_analyze, "simulate": run_simulate, "power": run_power}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        COMMANDS[args.command](args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (ValidationError, SuperlinearError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
