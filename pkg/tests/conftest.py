import json

import numpy as np
import pytest

from superlinear import ArticleDataset, ExperimentSummary


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def equal_sd_experiment():
    return ExperimentSummary("eq", means=(1.0, 2.0, 3.6), sds=(1.0, 1.0, 1.0), cell_sizes=25)


@pytest.fixture
def article():
    exps = (
        ExperimentSummary("e1", (1.0, 2.0, 3.1), (1.0, 1.1, 0.9), 20),
        ExperimentSummary("e2", (0.5, 1.4, 2.2), (0.8, 0.9, 1.0), (18, 20, 22)),
        ExperimentSummary("e3", (2.0, 2.9, 4.05), (1.2, 1.0, 1.1), 25),
    )
    return ArticleDataset("A1", exps)


@pytest.fixture
def dataset_json(tmp_path, article):
    doc = {"articles": [{"id": article.id, "experiments": [
        {"id": e.id, "n": list(e.cell_sizes), "means": list(e.means), "sds": list(e.sds)}
        for e in article.experiments]}]}
    path = tmp_path / "articles.json"
    path.write_text(json.dumps(doc))
    return path


def pytest_terminal_summary(terminalreporter):
    import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for number in sorted(test_acceptance.RESULTS):
            terminalreporter.write_line(test_acceptance.RESULTS[number])
