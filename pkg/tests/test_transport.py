"""Exact transport, 1-D Wasserstein, total variation, Hausdorff, kernels."""

import numpy as np
import pytest

import riskspace as rs
from riskspace.problems import LossProfile
from riskspace.transport import check_coupling
from gen import (
    enumerate_correspondences,
    identity_support_problem,
    ot_value_by_vertices,
    random_problem,
    random_weighted,
    transport_vertices,
)


def _random_distribution(rng, n):
    v = rng.random(n) + 0.01
    return v / v.sum()


def _profile(values, masses) -> LossProfile:
    order = np.argsort(values)
    return LossProfile(values=np.asarray(values, float)[order],
                       masses=np.asarray(masses, float)[order])


# --------------------------------------------------------------------------
# solve_ot_exact
# --------------------------------------------------------------------------

def test_ot_point_masses():
    cost = np.array([[3.7]])
    plan, value = rs.solve_ot_exact(cost, np.array([1.0]), np.array([1.0]))
    assert value == 3.7
    assert plan.tolist() == [[1.0]]


def test_ot_point_to_uniform():
    cost = np.array([[0.0, 1.0]])
    plan, value = rs.solve_ot_exact(cost, np.array([1.0]), np.array([0.5, 0.5]))
    assert value == pytest.approx(0.5, abs=1e-12)
    assert plan.tolist() == [[0.5, 0.5]]


def test_ot_matches_vertex_enumeration_random_4x4():
    rng = np.random.default_rng(10)
    for _ in range(8):
        m, n = rng.integers(2, 5, size=2)
        mu = _random_distribution(rng, m)
        nu = _random_distribution(rng, n)
        cost = rng.random((m, n)) * 3
        plan, value = rs.solve_ot_exact(cost, mu, nu)
        oracle = ot_value_by_vertices(cost, mu, nu)
        assert value == pytest.approx(oracle, abs=1e-9)
        check_coupling(plan, mu, nu)


def test_ot_coupling_marginals_tight():
    rng = np.random.default_rng(11)
    mu = _random_distribution(rng, 4)
    nu = _random_distribution(rng, 3)
    plan, _ = rs.solve_ot_exact(rng.random((4, 3)), mu, nu)
    assert np.max(np.abs(plan.sum(axis=1) - mu)) < 1e-9
    assert np.max(np.abs(plan.sum(axis=0) - nu)) < 1e-9


def test_ot_degenerate_marginals_handled():
    mu = np.array([0.5, 0.0, 0.5])
    nu = np.array([0.0, 1.0])
    cost = np.arange(6.0).reshape(3, 2)
    plan, value = rs.solve_ot_exact(cost, mu, nu)
    assert plan[1].tolist() == [0.0, 0.0]
    assert plan[:, 0].tolist() == [0.0, 0.0, 0.0]
    assert value == pytest.approx(0.5 * 1 + 0.5 * 5, abs=1e-12)


def test_ot_permutation_invariance():
    rng = np.random.default_rng(12)
    mu = _random_distribution(rng, 4)
    nu = _random_distribution(rng, 4)
    cost = rng.random((4, 4))
    _, value = rs.solve_ot_exact(cost, mu, nu)
    perm_r = rng.permutation(4)
    perm_c = rng.permutation(4)
    _, value_p = rs.solve_ot_exact(cost[np.ix_(perm_r, perm_c)],
                                   mu[perm_r], nu[perm_c])
    # identical value up to summation order
    assert value_p == pytest.approx(value, abs=1e-12)


def test_ot_marginal_mismatch_rejected():
    with pytest.raises(rs.ValidationError):
        rs.solve_ot_exact(np.zeros((2, 2)), np.array([0.7, 0.7]),
                          np.array([0.5, 0.5]))


def test_random_vertex_is_feasible_and_sparse():
    from riskspace.transport import random_coupling_vertex

    rng = np.random.default_rng(25)
    for _ in range(20):
        m, n = rng.integers(2, 6, size=2)
        mu = _random_distribution(rng, m)
        nu = _random_distribution(rng, n)
        vertex = random_coupling_vertex(mu, nu, rng)
        check_coupling(vertex, mu, nu)
        # basic feasible solutions have at most m + n - 1 nonzero cells
        assert np.count_nonzero(vertex) <= m + n - 1


def test_library_vertices_agree_with_oracle():
    rng = np.random.default_rng(13)
    mu = _random_distribution(rng, 3)
    nu = _random_distribution(rng, 3)
    lib = {np.round(v, 9).tobytes() for v in rs.coupling_vertices(mu, nu)}
    oracle = {np.round(v, 9).tobytes() for v in transport_vertices(mu, nu)}
    assert lib == oracle


# --------------------------------------------------------------------------
# w1_real_line
# --------------------------------------------------------------------------

def test_w1_point_masses():
    assert rs.w1_real_line(_profile([0.0], [1.0]), _profile([1.0], [1.0])) == 1.0


def test_w1_point_vs_uniform():
    assert rs.w1_real_line(
        _profile([0.0], [1.0]), _profile([0.0, 1.0], [0.5, 0.5])
    ) == pytest.approx(0.5, abs=1e-12)


def test_w1_matches_lp_on_random_pairs():
    rng = np.random.default_rng(14)
    for _ in range(200):
        na, nb = rng.integers(1, 5, size=2)
        a = _profile(np.sort(rng.choice(20, size=na, replace=False) * 0.37),
                     _random_distribution(rng, na))
        b = _profile(np.sort(rng.choice(20, size=nb, replace=False) * 0.53),
                     _random_distribution(rng, nb))
        cost = np.abs(a.values[:, None] - b.values[None, :])
        _, lp_value = rs.solve_ot_exact(cost, a.masses, b.masses)
        assert rs.w1_real_line(a, b) == pytest.approx(lp_value, abs=1e-9)


# --------------------------------------------------------------------------
# total_variation
# --------------------------------------------------------------------------

def test_tv_identical_zero():
    mu = np.array([0.2, 0.8])
    assert rs.total_variation(mu, mu) == 0.0


def test_tv_uniform_vs_point_mass():
    assert rs.total_variation(np.array([0.5, 0.5]), np.array([1.0, 0.0])) == 0.5


def test_tv_disjoint_supports_one():
    assert rs.total_variation(np.array([1.0, 0.0]), np.array([0.0, 1.0])) == 1.0


def test_tv_equals_ot_under_discrete_metric():
    rng = np.random.default_rng(15)
    for _ in range(20):
        n = int(rng.integers(2, 6))
        mu = _random_distribution(rng, n)
        nu = _random_distribution(rng, n)
        cost = 1.0 - np.eye(n)
        _, value = rs.solve_ot_exact(cost, mu, nu)
        assert rs.total_variation(mu, nu) == pytest.approx(value, abs=1e-9)


def test_tv_length_mismatch():
    with pytest.raises(rs.ValidationError):
        rs.total_variation(np.array([1.0]), np.array([0.5, 0.5]))


# --------------------------------------------------------------------------
# hausdorff
# --------------------------------------------------------------------------

def test_hausdorff_identical_sets_zero():
    d = np.array([[0.0, 1.0], [1.0, 0.0]])
    assert rs.hausdorff(d) == 0.0


def test_hausdorff_point_vs_pair():
    assert rs.hausdorff(np.array([[0.0, 1.0]])) == 1.0


def test_hausdorff_matches_correspondence_enumeration():
    rng = np.random.default_rng(16)
    for _ in range(20):
        k, kp = rng.integers(1, 4, size=2)
        cross = rng.random((k, kp)) * 2
        oracle = min(
            float(cross[r].max()) for r in enumerate_correspondences(k, kp)
        )
        assert rs.hausdorff(cross) == pytest.approx(oracle, abs=1e-12)


def test_hausdorff_triangle_inequality_in_common_space():
    rng = np.random.default_rng(17)
    for _ in range(20):
        points = rng.random((9, 2)) * 3
        dist = np.abs(points[:, None, :] - points[None, :, :]).sum(axis=2)
        a, b, c = np.split(rng.permutation(9), 3)
        d_ab = rs.hausdorff(dist[np.ix_(a, b)])
        d_bc = rs.hausdorff(dist[np.ix_(b, c)])
        d_ac = rs.hausdorff(dist[np.ix_(a, c)])
        assert d_ac <= d_ab + d_bc + 1e-12


def test_hausdorff_empty_rejected():
    with pytest.raises(rs.ValidationError):
        rs.hausdorff(np.zeros((0, 2)))


# --------------------------------------------------------------------------
# Profile-set and profile-distribution distances
# --------------------------------------------------------------------------

def test_hausdorff_loss_profiles_self_zero():
    p = identity_support_problem()
    assert rs.hausdorff_loss_profiles(p, p) == 0.0


def test_hausdorff_loss_profiles_vs_one_point():
    rng = np.random.default_rng(18)
    p = random_problem(rng)
    bullet = rs.one_point_problem(0.0)
    value = rs.hausdorff_loss_profiles(p, bullet)
    cross = np.array([[rs.w1_real_line(prof, rs.loss_profile(bullet, 0))]
                      for prof in rs.loss_profile_set(p)])
    assert value == pytest.approx(rs.hausdorff(cross), abs=1e-12)


def test_hausdorff_loss_profiles_dominates_bayes_gap():
    rng = np.random.default_rng(19)
    for _ in range(20):
        a, b = random_problem(rng), random_problem(rng)
        gap = abs(rs.constrained_bayes_risk(a) - rs.constrained_bayes_risk(b))
        assert rs.hausdorff_loss_profiles(a, b) >= gap - 1e-9


def test_profile_distribution_distance_identical_zero():
    rng = np.random.default_rng(20)
    wp = random_weighted(rng)
    assert rs.wasserstein_profile_distributions(wp, wp, p=1) == pytest.approx(
        0.0, abs=1e-12
    )


def test_profile_distribution_distance_below_weighted_distance():
    import riskspace.distance as distance

    rng = np.random.default_rng(24)
    for _ in range(8):
        wa, wb = random_weighted(rng), random_weighted(rng)
        for p in (1.0, 2.0):
            profile_d = rs.wasserstein_profile_distributions(wa, wb, p=p)
            upper = distance.lp_risk_distance(wa, wb, p=p).value
            assert profile_d <= upper + 1e-9


def test_profile_distribution_point_masses_reduce_to_w1():
    rng = np.random.default_rng(21)
    a, b = random_problem(rng), random_problem(rng)
    lam_a = np.zeros(a.n_predictors)
    lam_a[0] = 1.0
    lam_b = np.zeros(b.n_predictors)
    lam_b[0] = 1.0
    wa = rs.WeightedProblem(problem=a, lam=lam_a)
    wb = rs.WeightedProblem(problem=b, lam=lam_b)
    expected = rs.w1_real_line(rs.loss_profile(a, 0), rs.loss_profile(b, 0))
    for p in (1.0, 2.0):
        assert rs.wasserstein_profile_distributions(wa, wb, p=p) == pytest.approx(
            expected, abs=1e-9
        )


# --------------------------------------------------------------------------
# kernel_w1
# --------------------------------------------------------------------------

def test_kernel_w1_identical_zero():
    kernel = np.array([[0.5, 0.5], [0.1, 0.9]])
    base = np.array([0.3, 0.7])
    ground = 1.0 - np.eye(2)
    assert rs.kernel_w1(kernel, kernel, base, ground) == 0.0


def test_kernel_w1_epsilon_mixing_binary():
    # rows: observed label y; mixing re-draws the label uniformly with prob eps
    ground = 1.0 - np.eye(2)
    delta = np.eye(2)
    for eps in (0.05, 0.2, 0.5):
        mixed = eps * np.full((2, 2), 0.5) + (1 - eps) * delta
        for base in (np.array([0.3, 0.7]), np.array([0.5, 0.5])):
            assert rs.kernel_w1(mixed, delta, base, ground) == pytest.approx(
                eps / 2, abs=1e-12
            )


def test_kernel_w1_single_state_reduces_to_w1():
    rng = np.random.default_rng(22)
    values = np.array([0.0, 1.0, 2.5])
    ground = np.abs(values[:, None] - values[None, :])
    mu = _random_distribution(rng, 3)
    nu = _random_distribution(rng, 3)
    got = rs.kernel_w1(mu[None, :], nu[None, :], np.array([1.0]), ground)
    _, expected = rs.solve_ot_exact(ground, mu, nu)
    assert got == pytest.approx(expected, abs=1e-12)


def test_kernel_w1_bounded_by_worst_row():
    rng = np.random.default_rng(23)
    m = rng.dirichlet(np.ones(3), size=4)
    n = rng.dirichlet(np.ones(3), size=4)
    base = _random_distribution(rng, 4)
    values = np.array([0.0, 0.7, 1.9])
    ground = np.abs(values[:, None] - values[None, :])
    avg = rs.kernel_w1(m, n, base, ground)
    worst = max(rs.solve_ot_exact(ground, m[i], n[i])[1] for i in range(4))
    assert avg <= worst + 1e-12


def test_kernel_w1_shape_mismatch():
    with pytest.raises(rs.ValidationError):
        rs.kernel_w1(np.eye(2), np.eye(3), np.array([0.5, 0.5]), np.eye(2))
