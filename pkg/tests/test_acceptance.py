"""Acceptance criteria, one test per criterion.

Each test records a single PASS/FAIL line with the measured quantities; the
lines are printed in the pytest terminal summary and when this file is run
directly (``python3 tests/test_acceptance.py``).
"""
import math
import os
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest
from scipy import stats

from superlinear import (ExperimentSummary, SearchConfig, chi2_linearity_test, delta_f_single,
                         estimate_tail_probability, min_p_over_series, normalized_deviation, special,
                         v_hat_joint, v_hat_single, v_joint_numeric, v_single_numeric, v_hat_threshold)
from superlinear.simulation import (SimulationConfig, estimate_min_p_over_series,
                                    simulate_article_statistics, standard_normal_draws)

sys.path.insert(0, str(Path(__file__).parent))
from oracles import (grid_max_log_ratio, log_grid, mp_chi2_cdf, mp_f_cdf,  # noqa: E402
                     mp_norm_cdf)

RESULTS = {}


def record(number, ok, detail):
    RESULTS[number] = f"{'PASS' if ok else 'FAIL'}  criterion {number:>2}: {detail}"
    print(RESULTS[number])
    assert ok, detail


def experiment_with(z_tilde, sds, n, eid="e"):
    sigma0 = math.sqrt(sds[0] ** 2 + 4 * sds[1] ** 2 + sds[2] ** 2)
    return ExperimentSummary(eid, (0.0, 1.0, 2.0 + z_tilde * sigma0 / math.sqrt(n)), tuple(sds), n)


def test_01_worst_case_tail_constants():
    start = time.perf_counter()
    checks, parts = [], []
    for v_star, target, seed in ((6.0, 0.0806, 101), (2.0, 0.2497, 102)):
        tail = v_hat_threshold(v_star).tail_probability
        mc = estimate_tail_probability("v-hat", v_star, ">=", draws=10 ** 6, seed=seed).estimate
        checks += [abs(tail - target) <= 0.002, abs(mc - tail) <= 0.003]
        parts.append(f"V*={v_star:g}: tail={tail:.5f} (target {target}±0.002), MC={mc:.5f}")
    elapsed = time.perf_counter() - start
    record(1, all(checks) and elapsed < 10, "; ".join(parts) + f"; {elapsed:.1f}s")


def test_02_series_rejection_constants():
    start = time.perf_counter()
    checks, parts = [], []
    for alpha, target, seed in ((0.05, 0.4013, 201), (0.01, 0.0956, 202)):
        exact = min_p_over_series(alpha, 10)
        mc = estimate_min_p_over_series(alpha, 10, replicates=10 ** 5, seed=seed).estimate
        checks += [round(exact, 4) == target, abs(mc - exact) <= 0.01]
        parts.append(f"alpha={alpha}: closed={exact:.4f}, MC={mc:.4f}")
    elapsed = time.perf_counter() - start
    record(2, all(checks) and elapsed < 30, "; ".join(parts) + f"; {elapsed:.1f}s")


def test_03_closed_form_optimality():
    start = time.perf_counter()
    rng = np.random.default_rng(303)
    log_a, inv_a2 = log_grid(10 ** 6)
    z = rng.uniform(-3, 3, 10 ** 4)
    grid = grid_max_log_ratio(z * z, np.ones_like(z), log_a, inv_a2)
    closed = np.array([v_hat_single(x).log_value for x in z])
    err_single = float(np.max(np.abs(np.expm1(grid - closed))))

    sizes = rng.integers(1, 13, 10 ** 3)
    articles = [rng.uniform(-3, 3, k) for k in sizes]
    sums = np.array([np.sum(a * a) for a in articles])
    grid = grid_max_log_ratio(sums, sizes.astype(float), log_a, inv_a2)
    closed = np.array([v_hat_joint(a).log_value for a in articles])
    err_joint = float(np.max(np.abs(np.expm1(grid - closed))))
    elapsed = time.perf_counter() - start
    ok = err_single <= 1e-6 and err_joint <= 1e-6 and elapsed < 60
    record(3, ok, f"max rel err single={err_single:.2e}, joint={err_joint:.2e} (limit 1e-6); {elapsed:.1f}s")


def test_04_dominance_and_saturation():
    start = time.perf_counter()
    rng = np.random.default_rng(404)
    search = SearchConfig()
    worst_single = -math.inf
    for i in range(10 ** 3):
        sds = rng.uniform(0.2, 5.0, 3)
        e = experiment_with(rng.uniform(-2, 2), sds, int(rng.integers(5, 101)))
        zt = normalized_deviation(e).z_tilde
        worst_single = max(worst_single, v_single_numeric(e, search).value - v_hat_single(zt).value)

    # shared-rho articles whose experiments have proportional SD vectors
    worst_joint = -math.inf
    for i in range(10 ** 3):
        shape = rng.uniform(0.2, 5.0, 3)
        n = int(rng.integers(5, 101))
        k = int(rng.integers(2, 7))
        exps = [experiment_with(rng.uniform(-1.5, 1.5), shape * rng.uniform(0.5, 2.0), n, f"e{j}")
                for j in range(k)]
        zs = [normalized_deviation(e).z_tilde for e in exps]
        worst_joint = max(worst_joint, v_joint_numeric(exps, search).value - v_hat_joint(zs).value)

    worst_gap = -math.inf
    for i in range(200):
        s = rng.uniform(0.2, 5.0)
        e = experiment_with(rng.uniform(-1, 1), (s, s, s), int(rng.integers(5, 101)))
        zt = normalized_deviation(e).z_tilde
        if 0 < abs(zt) < 1:
            worst_gap = max(worst_gap, v_hat_single(zt).value - v_single_numeric(e, search).value)
    elapsed = time.perf_counter() - start
    ok = worst_single <= 1e-9 and worst_joint <= 1e-9 and worst_gap <= 1e-3 and elapsed < 300
    record(4, ok, f"max V-V_hat single={worst_single:.2e}, joint={worst_joint:.2e} (limit 1e-9); "
                  f"max saturation gap={worst_gap:.2e} (limit 1e-3); {elapsed:.1f}s")


def test_05_null_uniformity():
    start = time.perf_counter()
    cfg = SimulationConfig(cells=20, experiments_per_article=8, replicates=10 ** 4, seed=505)
    st = simulate_article_statistics(cfg, "finite")
    crit = stats.kstwo.ppf(0.99, cfg.replicates)
    ks_chi2 = stats.kstest(st.chi2_p, "uniform").statistic
    ks_fisher = stats.kstest(st.fisher_p, "uniform").statistic
    rho = stats.spearmanr(st.chi2_p, st.fisher_p).correlation
    elapsed = time.perf_counter() - start
    ok = ks_chi2 < crit and ks_fisher < crit and rho > 0.9 and elapsed < 300
    record(5, ok, f"KS chi2={ks_chi2:.4f}, KS deltaF-Fisher={ks_fisher:.4f} (1% critical {crit:.4f}); "
                  f"Spearman={rho:.3f} (needs > 0.9); {elapsed:.1f}s")


def test_06_equal_sds_identity():
    start = time.perf_counter()
    rng = np.random.default_rng(606)
    worst = 0.0
    for _ in range(10 ** 4):
        s = rng.uniform(0.1, 10.0)
        e = ExperimentSummary("i", rng.normal(0, 5, 3), (s, s, s), int(rng.integers(2, 300)))
        zt2 = normalized_deviation(e).z_tilde ** 2
        worst = max(worst, abs(delta_f_single(e).statistic - zt2) / max(zt2, 1e-300))
    elapsed = time.perf_counter() - start
    record(6, worst <= 1e-12 and elapsed < 5, f"max rel |dF - z~^2| = {worst:.2e} (limit 1e-12); {elapsed:.2f}s")


def test_07_product_growth():
    start = time.perf_counter()
    z = standard_normal_draws(707, 10 ** 6)
    az = np.abs(z)
    log_v = np.where(az > 1.0, 0.0, -np.log(az) + 0.5 * (z * z - 1.0))
    mean = float(log_v.mean())
    half = float(special.norm_ppf(0.995) * log_v.std(ddof=1) / math.sqrt(log_v.size))
    medians = np.median(np.cumsum(log_v[: 20 * 50_000].reshape(50_000, 20), axis=1), axis=0)
    monotone = bool(np.all(np.diff(medians) >= 0.0))
    elapsed = time.perf_counter() - start
    ok = mean - half > 0.0 and monotone and elapsed < 30
    record(7, ok, f"E[log V_hat]={mean:.4f} ± {half:.4f} (99%); median log product N=1..20 "
                  f"{'nondecreasing' if monotone else 'NOT monotone'} ({medians[0]:.3f} -> {medians[-1]:.3f}); "
                  f"{elapsed:.1f}s")


def test_08_two_df_closed_form():
    start = time.perf_counter()
    rng = np.random.default_rng(808)
    worst = 0.0
    for t in rng.exponential(2.0, 10 ** 3):
        p = chi2_linearity_test([math.sqrt(t), 0.0]).p_value
        exact = -math.expm1(-t / 2)
        worst = max(worst, abs(p - exact) / exact)
    elapsed = time.perf_counter() - start
    record(8, worst <= 1e-12 and elapsed < 1, f"max rel err={worst:.2e} (limit 1e-12); {elapsed:.3f}s")


# (x, tabulated level) from standard normal / chi-squared / F tables
NORMAL_TABLE = [(1.0, 0.8413), (1.645, 0.95), (1.96, 0.975), (2.326, 0.99), (2.576, 0.995),
                (3.090, 0.999), (-1.96, 0.025)]
CHI2_TABLE = [(0.0158, 1, 0.10), (3.841, 1, 0.95), (6.635, 1, 0.99), (5.991, 2, 0.95), (9.210, 2, 0.99),
              (7.815, 3, 0.95), (11.070, 5, 0.95), (18.307, 10, 0.95)]
F_TABLE = [(4.21, 1, 27, 0.95), (4.17, 1, 30, 0.95), (3.49, 2, 20, 0.95), (8.10, 1, 20, 0.99),
           (3.71, 3, 10, 0.95)]


def test_09_special_function_tables():
    worst, level_ok = 0.0, True
    points = ([(special.norm_cdf(x), mp_norm_cdf(x), lvl) for x, lvl in NORMAL_TABLE]
              + [(special.chi2_cdf(x, k), mp_chi2_cdf(x, k), lvl) for x, k, lvl in CHI2_TABLE]
              + [(special.f_cdf(x, a, b), mp_f_cdf(x, a, b), lvl) for x, a, b, lvl in F_TABLE])
    for ours, reference, level in points:
        worst = max(worst, abs(ours - reference) / reference)
        # table quantiles carry 3-4 significant digits
        level_ok &= abs(ours - level) < 1e-3
    record(9, len(points) == 20 and worst <= 1e-10 and level_ok,
           f"{len(points)} points, max rel err vs 50-digit reference={worst:.2e} (limit 1e-10); "
           f"tabulated levels {'reproduced' if level_ok else 'MISSED'}")


def _cli(*args, cwd):
    env = dict(os.environ, PYTHONWARNINGS="ignore")
    subprocess.run([sys.executable, "-m", "superlinear", *args], cwd=cwd, env=env, check=True,
                   capture_output=True)


def test_10_determinism(tmp_path):
    for run in ("a", "b"):
        _cli("simulate", "--articles", "4", "--experiments", "5", "--seed", "1010",
             "--manipulation", "middle-toward-linear:0.3", "--output", f"sim_{run}.json", cwd=tmp_path)
        _cli("analyze", "--input", "sim_a.json", "--tests", "chi2,deltaF,vhat,product,joint,numeric",
             "--seed", "1010", "--output", f"report_{run}.json", "--quiet", cwd=tmp_path)
    same_sim = (tmp_path / "sim_a.json").read_bytes() == (tmp_path / "sim_b.json").read_bytes()
    same_report = (tmp_path / "report_a.json").read_bytes() == (tmp_path / "report_b.json").read_bytes()
    record(10, same_sim and same_report,
           f"simulate outputs identical: {same_sim}; analyze reports identical: {same_report}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
