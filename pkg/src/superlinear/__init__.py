"""Screening 3-condition ANOVA summaries for implausibly linear condition means."""
__version__ = "0.1.0"

from ._accel import BACKEND
from .dataset import ArticleDataset, ingest, write_datasets
from .errors import (DegenerateVarianceError, InfeasibleCorrelationError, ParseError,
                     SuperlinearError, ValidationError)
from .evidential import (EvidentialResult, SearchConfig, attain_relative_sd, min_relative_sd,
                         v_hat_joint, v_hat_single, v_joint_numeric, v_product, v_single_numeric)
from .feasible import FeasibilityVerdict, check_feasible, is_positive_definite, relative_sd
from .linearity_tests import (OrderingPolicy, TestResult, apply_ordering, chi2_linearity_test,
                              delta_f_article, delta_f_single, fisher_combine)
from .model import (CorrelationVector, ExperimentSummary, NormalizedDeviation, linear_contrast,
                    normalized_deviation, sigma_z)
from .report import AnalysisConfig, AnalysisReport, analyze, emit_figure_data, figure_data
from .simulation import (ManipulationSpec, RandomStream, SimulationConfig, estimate_tail_probability,
                         min_p_over_series, power_curve, simulate_experiment, v_hat_threshold)

__all__ = [
    "BACKEND", "ArticleDataset", "ingest", "write_datasets",
    "SuperlinearError", "ValidationError", "ParseError", "InfeasibleCorrelationError",
    "DegenerateVarianceError",
    "EvidentialResult", "SearchConfig", "v_hat_single", "v_product", "v_hat_joint",
    "v_single_numeric", "v_joint_numeric", "min_relative_sd", "attain_relative_sd",
    "FeasibilityVerdict", "check_feasible", "is_positive_definite", "relative_sd",
    "OrderingPolicy", "TestResult", "apply_ordering", "chi2_linearity_test", "delta_f_single",
    "delta_f_article", "fisher_combine",
    "CorrelationVector", "ExperimentSummary", "NormalizedDeviation", "linear_contrast",
    "normalized_deviation", "sigma_z",
    "AnalysisConfig", "AnalysisReport", "analyze", "emit_figure_data", "figure_data",
    "ManipulationSpec", "RandomStream", "SimulationConfig", "simulate_experiment",
    "estimate_tail_probability", "v_hat_threshold", "min_p_over_series", "power_curve",
]
