"""Shared fixtures and independent oracles for the test suite.

The oracles here deliberately avoid the closed-form interval formulas:
the constrained extremum is found by Lagrangian bisection on the residual
norm, nullspace questions go through scipy's null_space, and feasibility
through a dense pseudoinverse.
"""

import numpy as np
import pytest
import scipy.linalg


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def dense_pinv(a):
    return np.linalg.pinv(a)


def kkt_extremum(a, b, eps, w, sign, iters=200):
    """Extremum of w^T x over {||Ax - b|| <= eps} by bisection on the
    Lagrangian stationarity path x(nu) = A^+ b + sign * nu * (A^T A)^+ w.

    sign=+1 maximizes, sign=-1 minimizes.  Returns None when infeasible.
    Assumes w is orthogonal to the nullspace (caller checks separately).
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float).reshape(-1)
    w = np.asarray(w, dtype=float).reshape(-1)
    z = np.linalg.pinv(a) @ b
    res0 = np.linalg.norm(a @ z - b)
    if res0 > eps * (1 + 1e-12):
        return None
    d = np.linalg.pinv(a.T @ a) @ w
    ad_norm = np.linalg.norm(a @ d)
    if ad_norm < 1e-14:
        # w^T x constant over the feasible set
        return float(w @ z)

    def resid(nu):
        return np.linalg.norm(a @ (z + sign * nu * d) - b)

    hi = 1.0
    while resid(hi) < eps and hi < 1e16:
        hi *= 2.0
    lo = 0.0
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if resid(mid) < eps:
            lo = mid
        else:
            hi = mid
    nu = 0.5 * (lo + hi)
    return float(w @ (z + sign * nu * d))


def kkt_interval(a, b, eps, w):
    """(L, U) from the bisection oracle, or None when infeasible."""
    lo = kkt_extremum(a, b, eps, w, -1)
    if lo is None:
        return None
    hi = kkt_extremum(a, b, eps, w, +1)
    return lo, hi


def nullspace_overlap(a, w):
    """||projection of w onto N(A)|| via scipy's null_space (independent
    of the package's own SVD truncation)."""
    ns = scipy.linalg.null_space(np.asarray(a, dtype=float))
    if ns.shape[1] == 0:
        return 0.0
    return float(np.linalg.norm(ns.T @ np.asarray(w, dtype=float).reshape(-1)))


def random_system(rng, m_range=(2, 8), n_range=(1, 6), allow_rank_deficient=True):
    """Random (A, b, eps) with mixed ranks for oracle comparisons."""
    m = int(rng.integers(*m_range, endpoint=True))
    n = int(rng.integers(*n_range, endpoint=True))
    a = rng.standard_normal((m, n))
    if allow_rank_deficient and n > 1 and rng.random() < 0.4:
        r = int(rng.integers(1, n))
        a = (rng.standard_normal((m, r))) @ (rng.standard_normal((r, n)))
    b = rng.standard_normal(m)
    eps = float(rng.uniform(0.05, 2.0))
    return a, b, eps
