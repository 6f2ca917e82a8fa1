"""The numba kernels and the pure-numpy fallback must agree."""
import json
import os
import subprocess
import sys

import numpy as np
import pytest

PROBE = r"""
import json
import numpy as np
from superlinear import BACKEND, ExperimentSummary, v_single_numeric, v_joint_numeric, special
from superlinear._search import MODE_JOINT_LOGLR, lattice_scores
from superlinear.simulation import SimulationConfig, simulate_article_statistics

x = np.linspace(0.01, 30, 50)
out = {"backend": BACKEND,
       "chi2": special.chi2_cdf_array(x, 4.0).tolist(),
       "fsf": special.f_sf_array(x, 1.0, 57.0).tolist()}
_, scores = lattice_scores(np.array([[0.2, 0.3, 0.25]]), np.array([0.16]), 0.1, MODE_JOINT_LOGLR)
out["lattice"] = np.where(np.isfinite(scores), scores, -1e300).tolist()
e1 = ExperimentSummary("a", (1.0, 2.0, 3.05), (1.0, 1.2, 0.9), 20)
e2 = ExperimentSummary("b", (0.0, 1.1, 2.1), (2.0, 1.0, 1.0), 20)
out["single"] = v_single_numeric(e1).log_value
out["joint"] = v_joint_numeric([e1, e2]).log_value
st = simulate_article_statistics(SimulationConfig(replicates=300, seed=2))
out["stats"] = np.column_stack([st.chi2_p, st.fisher_p, st.log_v_product, st.log_v_hat_joint]).tolist()
print(json.dumps(out))
"""


def run_probe(disable):
    env = dict(os.environ)
    env.pop("SUPERLINEAR_DISABLE_NUMBA", None)
    if disable:
        env["SUPERLINEAR_DISABLE_NUMBA"] = "1"
    res = subprocess.run([sys.executable, "-c", PROBE], env=env, capture_output=True, text=True, check=True)
    return json.loads(res.stdout)


@pytest.fixture(scope="module")
def both():
    return run_probe(False), run_probe(True)


class TestBackendParity:
    def test_backends_selected(self, both):
        fast, slow = both
        assert fast["backend"] == "numba" and slow["backend"] == "numpy"

    @pytest.mark.parametrize("key", ["chi2", "fsf", "lattice", "stats"])
    def test_arrays_agree(self, both, key):
        fast, slow = both
        np.testing.assert_allclose(fast[key], slow[key], rtol=1e-12, atol=1e-300)

    @pytest.mark.parametrize("key", ["single", "joint"])
    def test_search_agrees(self, both, key):
        fast, slow = both
        assert fast[key] == pytest.approx(slow[key], rel=1e-9, abs=1e-12)
