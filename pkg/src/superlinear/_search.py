"""Kernels for the search over feasible correlation vectors.

Candidates are scored for a stack of experiments given as per-condition
standard errors ``se`` (shape ``(N, 3)``) and squared normalized deviations
``zt2`` (shape ``(N,)``). Two objectives are supported:

``MODE_MIN_VARIANCE``
    minimize the contrast-variance ratio of the first experiment (used when
    all experiments share one SD shape, see ``evidential``);
``MODE_JOINT_LOGLR``
    maximize the summed log likelihood ratio against independence.

The local refinement is a Hooke-Jeeves pattern search in angle coordinates:
``rho`` is the Gram matrix of three unit vectors, so positive definiteness
holds by construction and the only constraints left are the open box edges
and the variance condition, both enforced by rejection.
"""
import math

import numpy as np

from ._accel import USE_NUMBA, jit

MODE_MIN_VARIANCE = 0
MODE_JOINT_LOGLR = 1


@jit
def angles_to_rho(t1, t2, phi):
    c1 = math.cos(t1)
    c2 = math.cos(t2)
    return c1, c2, c1 * c2 + math.sin(t1) * math.sin(t2) * math.cos(phi)


@jit
def rho_to_angles(r1, r2, r3):
    t1 = math.acos(r1)
    t2 = math.acos(r2)
    denom = math.sin(t1) * math.sin(t2)
    if denom <= 0.0:
        return t1, t2, 0.0
    c = (r3 - r1 * r2) / denom
    if c > 1.0:
        c = 1.0
    elif c < -1.0:
        c = -1.0
    return t1, t2, math.acos(c)


@jit
def score_rho(se, zt2, r1, r2, r3, mode):
    """Objective at ``rho`` (to be maximized); ``-inf`` when infeasible."""
    if not (-1.0 < r1 < 1.0 and -1.0 < r2 < 1.0 and -1.0 < r3 < 1.0):
        return -math.inf
    d = r3 - r1 * r2
    if not ((1.0 - r1) * (1.0 + r1) * (1.0 - r2) * (1.0 + r2) - d * d > 0.0):
        return -math.inf
    total = 0.0
    for j in range(se.shape[0]):
        s1 = se[j, 0]
        s2 = se[j, 1]
        s3 = se[j, 2]
        var0 = s1 * s1 + 4.0 * s2 * s2 + s3 * s3
        var = var0 - 4.0 * s1 * s2 * r1 - 4.0 * s2 * s3 * r3 + 2.0 * s1 * s3 * r2
        if not (var > 0.0) or math.sqrt(var) > math.sqrt(var0):
            return -math.inf
        b = var / var0
        if mode == MODE_MIN_VARIANCE:
            if j == 0:
                total = -b
        else:
            total += -0.5 * math.log(b) - 0.5 * zt2[j] / b + 0.5 * zt2[j]
    return total


@jit
def _score_angles(se, zt2, x, mode):
    r1, r2, r3 = angles_to_rho(x[0], x[1], x[2])
    return score_rho(se, zt2, r1, r2, r3, mode)


@jit
def _explore(se, zt2, mode, base, f_base, h, out):
    # coordinate probes around ``base``; result written to ``out``
    evals = 0
    for i in range(3):
        out[i] = base[i]
    f = f_base
    for i in range(3):
        keep = out[i]
        out[i] = keep + h
        f_try = _score_angles(se, zt2, out, mode)
        evals += 1
        if f_try > f:
            f = f_try
            continue
        out[i] = keep - h
        f_try = _score_angles(se, zt2, out, mode)
        evals += 1
        if f_try > f:
            f = f_try
            continue
        out[i] = keep
    return f, evals


@jit
def hooke_jeeves(se, zt2, mode, x0, h0, tol, budget):
    """Pattern search from angles ``x0``; returns (angles, score, evaluations)."""
    x = x0.copy()
    fx = _score_angles(se, zt2, x, mode)
    evals = 1
    y = np.empty(3)
    p = np.empty(3)
    z = np.empty(3)
    h = h0
    while h >= tol and evals < budget:
        fy, k = _explore(se, zt2, mode, x, fx, h, y)
        evals += k
        if fy > fx:
            # accelerate along the improving direction while it keeps paying
            while evals < budget:
                for i in range(3):
                    p[i] = 2.0 * y[i] - x[i]
                    x[i] = y[i]
                fx = fy
                fp = _score_angles(se, zt2, p, mode)
                evals += 1
                fz, k = _explore(se, zt2, mode, p, fp, h, z)
                evals += k
                if fz > fx:
                    for i in range(3):
                        y[i] = z[i]
                    fy = fz
                else:
                    break
        else:
            h *= 0.5
    return x, fx, evals


@jit
def multistart(se, zt2, mode, starts, h0, tol, budget):
    """Refine every start (angles, one per row); keep the best."""
    n_starts = starts.shape[0]
    per_start = max(budget // max(n_starts, 1), 1)
    best = np.zeros(3)
    best_f = -math.inf
    used = 0
    for s in range(n_starts):
        x, fx, k = hooke_jeeves(se, zt2, mode, starts[s], h0, tol, per_start)
        used += k
        if fx > best_f:
            best_f = fx
            for i in range(3):
                best[i] = x[i]
    return best, best_f, used


def _lattice_axis(step):
    k = int(math.floor((1.0 - 1e-12) / step))
    return np.arange(-k, k + 1, dtype=np.float64) * step


@jit
def _lattice_scores_loop(se, zt2, axis, mode):
    m = axis.shape[0]
    rhos = np.empty((m * m * m, 3))
    scores = np.empty(m * m * m)
    idx = 0
    for a in range(m):
        for b in range(m):
            for c in range(m):
                rhos[idx, 0] = axis[a]
                rhos[idx, 1] = axis[b]
                rhos[idx, 2] = axis[c]
                scores[idx] = score_rho(se, zt2, axis[a], axis[b], axis[c], mode)
                idx += 1
    return rhos, scores


def _lattice_scores_numpy(se, zt2, axis, mode):
    r1, r2, r3 = (g.ravel() for g in np.meshgrid(axis, axis, axis, indexing="ij"))
    ok = (1.0 - r1) * (1.0 + r1) * (1.0 - r2) * (1.0 + r2) - (r3 - r1 * r2) ** 2 > 0.0
    total = np.zeros_like(r1)
    for j in range(se.shape[0]):
        s1, s2, s3 = se[j]
        var0 = s1 * s1 + 4.0 * s2 * s2 + s3 * s3
        var = var0 - 4.0 * s1 * s2 * r1 - 4.0 * s2 * s3 * r3 + 2.0 * s1 * s3 * r2
        ok &= (var > 0.0) & (np.sqrt(np.maximum(var, 0.0)) <= math.sqrt(var0))
        b = np.where(ok, var / var0, 1.0)
        if mode == MODE_MIN_VARIANCE:
            if j == 0:
                total = -b
        else:
            total += -0.5 * np.log(b) - 0.5 * zt2[j] / b + 0.5 * zt2[j]
    scores = np.where(ok, total, -np.inf)
    return np.column_stack([r1, r2, r3]), scores


def lattice_scores(se, zt2, step, mode):
    """Score every point of the regular lattice inside the open box."""
    axis = _lattice_axis(step)
    se = np.ascontiguousarray(se, dtype=np.float64)
    zt2 = np.ascontiguousarray(zt2, dtype=np.float64)
    if USE_NUMBA:
        return _lattice_scores_loop(se, zt2, axis, mode)
    return _lattice_scores_numpy(se, zt2, axis, mode)


def search(se, zt2, mode, lattice_step, tol, budget, n_starts):
    """Lattice screen followed by multi-start refinement.

    Returns ``(rho, score, evaluations)`` where ``rho`` is a 3-tuple. The
    independence point ``rho = 0`` is always among the candidates.
    """
    se = np.ascontiguousarray(se, dtype=np.float64)
    zt2 = np.ascontiguousarray(zt2, dtype=np.float64)
    rhos, scores = lattice_scores(se, zt2, lattice_step, mode)
    feasible = np.flatnonzero(np.isfinite(scores))
    order = feasible[np.argsort(-scores[feasible], kind="stable")][:n_starts]
    starts = np.array([rho_to_angles(*rhos[i]) for i in order] or [rho_to_angles(0.0, 0.0, 0.0)],
                      dtype=np.float64)
    x, fx, used = multistart(se, zt2, mode, starts, lattice_step, tol, budget)
    best_rho = tuple(float(v) for v in angles_to_rho(x[0], x[1], x[2]))
    best_f = float(fx)
    f0 = float(score_rho(se, zt2, 0.0, 0.0, 0.0, mode))
    if not best_f > f0:
        best_rho, best_f = (0.0, 0.0, 0.0), f0
    return best_rho, best_f, int(used) + len(scores)
