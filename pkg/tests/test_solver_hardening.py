"""Deeper validation of the exact distance solver.

The solver eliminates the correspondence infimum analytically and enumerates
assignment patterns.  Here the same quantity is recomputed along a second,
fully independent exact route: enumerate every correspondence outright and
solve, for each, a minimax LP assembled from scratch with scipy.  The two
routes must agree to solver tolerance.
"""

import numpy as np
import pytest
from scipy.optimize import linprog

import riskspace as rs
from gen import enumerate_correspondences, random_problem


def _minimax_lp_from_scratch(cost_vectors, mu, nu):
    """min over couplings of the max selected linear cost, built directly."""
    m, n = len(mu), len(nu)
    n_gamma = m * n
    k = len(cost_vectors)
    a_ub = np.zeros((k, n_gamma + 1))
    for i, c in enumerate(cost_vectors):
        a_ub[i, :n_gamma] = c
        a_ub[i, n_gamma] = -1.0
    a_eq = np.zeros((m + n, n_gamma + 1))
    for i in range(m):
        a_eq[i, i * n : (i + 1) * n] = 1.0
    for j in range(n):
        a_eq[m + j, j:n_gamma:n] = 1.0
    b_eq = np.concatenate([mu, nu])
    objective = np.zeros(n_gamma + 1)
    objective[-1] = 1.0
    res = linprog(objective, A_ub=a_ub, b_ub=np.zeros(k), A_eq=a_eq,
                  b_eq=b_eq, bounds=(0, None), method="highs")
    assert res.status == 0, res.message
    gamma = res.x[:n_gamma]
    return max(float(c @ gamma) for c in cost_vectors)


def _distance_by_correspondence_enumeration(p, q):
    """Exact distance as the minimum over ALL correspondences of the per-
    correspondence minimax transport value."""
    la = p.predictor_loss_stack().reshape(p.n_predictors, -1)
    lb = q.predictor_loss_stack().reshape(q.n_predictors, -1)
    mu, nu = p.eta.ravel(), q.eta.ravel()
    best = np.inf
    for r in enumerate_correspondences(p.n_predictors, q.n_predictors):
        vectors = [
            np.abs(la[h][:, None] - lb[hp][None, :]).ravel()
            for h, hp in np.argwhere(r)
        ]
        best = min(best, _minimax_lp_from_scratch(vectors, mu, nu))
    return best


def test_exact_matches_full_correspondence_enumeration():
    rng = np.random.default_rng(200)
    for _ in range(12):
        p = random_problem(rng, n_h=int(rng.integers(1, 4)))
        q = random_problem(rng, n_h=int(rng.integers(1, 3)))
        solver = rs.risk_distance_exact(p, q).value
        oracle = _distance_by_correspondence_enumeration(p, q)
        assert solver == pytest.approx(oracle, abs=1e-9)


def test_exact_with_zero_mass_atoms():
    rng = np.random.default_rng(201)
    for _ in range(8):
        p = random_problem(rng, nx=3, ny=3, eta_support=3)
        q = random_problem(rng, nx=2, ny=3, eta_support=2)
        solver = rs.risk_distance_exact(p, q).value
        oracle = _distance_by_correspondence_enumeration(p, q)
        assert solver == pytest.approx(oracle, abs=1e-9)
        # witnesses stay valid despite the degenerate marginals
        result = rs.risk_distance_exact(p, q)
        replay = rs.risk_distortion(p, q, result.witness_correspondence,
                                    result.witness_coupling)
        assert replay == pytest.approx(result.value, abs=1e-9)


def test_exact_repeat_runs_bit_identical():
    rng = np.random.default_rng(202)
    p, q = random_problem(rng), random_problem(rng)
    first = rs.risk_distance_exact(p, q)
    second = rs.risk_distance_exact(p, q)
    assert first.value == second.value
    assert np.array_equal(first.witness_coupling, second.witness_coupling)
    assert np.array_equal(first.witness_correspondence,
                          second.witness_correspondence)


def test_exact_at_cap_boundary():
    # |H| * |H'| = 12 and support product 16 * 16 = 256: the largest
    # instance the default caps admit
    rng = np.random.default_rng(203)
    p = random_problem(rng, nx=4, ny=4, n_h=3)
    q = random_problem(rng, nx=4, ny=4, n_h=4)
    result = rs.risk_distance_exact(p, q)
    assert result.status == "exact"
    heuristic = rs.risk_distance_exact(p, q, cap_pairs=1)
    assert heuristic.status == "upper_bound"
    assert heuristic.value >= result.value - 1e-9


def test_lp_distance_never_below_plain_distance_at_pinf_proxy():
    # the supremum variant dominates every finite-p weighted value on the
    # same problems with any weights
    rng = np.random.default_rng(204)
    for _ in range(6):
        p = random_problem(rng, n_h=2)
        q = random_problem(rng, n_h=2)
        lam_p = rng.dirichlet(np.ones(2))
        lam_q = rng.dirichlet(np.ones(2))
        wp = rs.WeightedProblem(problem=p, lam=lam_p)
        wq = rs.WeightedProblem(problem=q, lam=lam_q)
        weighted = rs.lp_risk_distance(wp, wq, p=1.0).value
        # evaluate the supremum distortion at the weighted witnesses: it can
        # only be larger than their L1 distortion
        result = rs.lp_risk_distance(wp, wq, p=1.0)
        sup_at_witnesses = rs.lp_risk_distortion(
            wp, wq, result.witness_predictor_coupling,
            result.witness_coupling, np.inf,
        )
        assert weighted <= sup_at_witnesses + 1e-9
