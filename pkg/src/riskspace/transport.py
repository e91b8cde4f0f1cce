"""Exact discrete optimal transport and the auxiliary metrics built on it.

All solvers here are exact (LP-grade): the downstream distance bounds are
sandwiches with equalities at corner cases, and entropic smoothing would
break them.  Problem sizes are desk scale, so exactness is cheap.

Conventions: a discrete distribution is a nonnegative vector summing to 1; a
coupling of (mu, nu) is a nonnegative matrix with row sums mu and column sums
nu; a finite Markov kernel is a row-stochastic matrix.
"""

from __future__ import annotations

import itertools

import numpy as np
from scipy.optimize import linprog

from .errors import ValidationError
from .problems import (
    METRIC_TOL,
    PROB_TOL,
    FiniteProblem,
    LossProfile,
    WeightedProblem,
    loss_profile_distribution,
    loss_profile_set,
)

# Tightened HiGHS tolerances (1e-10 is the solver's floor): vertex solutions
# on these tiny instances are then accurate well inside the 1e-9 contracts.
_LP_OPTIONS = {
    "presolve": True,
    "primal_feasibility_tolerance": 1e-10,
    "dual_feasibility_tolerance": 1e-10,
}


def check_distribution(vec: np.ndarray, name: str = "distribution") -> np.ndarray:
    vec = np.asarray(vec, dtype=float)
    if vec.ndim != 1:
        raise ValidationError(f"{name} must be a vector", field=name)
    if np.any(vec < 0) or not np.all(np.isfinite(vec)):
        (i,) = np.argwhere((vec < 0) | ~np.isfinite(vec))[0]
        raise ValidationError(f"{name}[{i}] is not a valid mass", field=f"{name}[{i}]")
    if abs(float(vec.sum()) - 1.0) > PROB_TOL:
        raise ValidationError(
            f"{name} sums to {float(vec.sum())!r}, expected 1 within {PROB_TOL}",
            field=name,
        )
    return vec


def check_coupling(
    gamma: np.ndarray, mu: np.ndarray, nu: np.ndarray, name: str = "coupling"
) -> np.ndarray:
    gamma = np.asarray(gamma, dtype=float)
    if gamma.shape != (len(mu), len(nu)):
        raise ValidationError(
            f"{name} has shape {gamma.shape}, expected {(len(mu), len(nu))}",
            field=name,
        )
    if np.any(gamma < -METRIC_TOL):
        raise ValidationError(f"{name} has negative entries", field=name)
    if np.max(np.abs(gamma.sum(axis=1) - mu)) > METRIC_TOL:
        raise ValidationError(f"{name} row sums do not match the first marginal",
                              field=name)
    if np.max(np.abs(gamma.sum(axis=0) - nu)) > METRIC_TOL:
        raise ValidationError(f"{name} column sums do not match the second marginal",
                              field=name)
    return gamma


def check_markov_kernel(kernel: np.ndarray, name: str = "kernel") -> np.ndarray:
    kernel = np.asarray(kernel, dtype=float)
    if kernel.ndim != 2:
        raise ValidationError(f"{name} must be a matrix", field=name)
    if np.any(kernel < 0) or not np.all(np.isfinite(kernel)):
        i, j = np.argwhere((kernel < 0) | ~np.isfinite(kernel))[0]
        raise ValidationError(
            f"{name}[{i}][{j}] is not a valid mass", field=f"{name}[{i}][{j}]"
        )
    rows = kernel.sum(axis=1)
    if np.max(np.abs(rows - 1.0)) > PROB_TOL:
        (i,) = np.argwhere(np.abs(rows - 1.0) > PROB_TOL)[0]
        raise ValidationError(
            f"{name} row {i} sums to {rows[i]!r}, expected 1 within {PROB_TOL}",
            field=f"{name}[{i}]",
        )
    return kernel


# --------------------------------------------------------------------------
# Exact optimal transport
# --------------------------------------------------------------------------

def solve_ot_exact(
    cost: np.ndarray, mu: np.ndarray, nu: np.ndarray
) -> tuple[np.ndarray, float]:
    """Minimize <cost, gamma> over couplings of (mu, nu), exactly.

    Solves the transportation LP with a simplex-grade method; no entropic
    approximation.  Zero-mass rows and columns are dropped before the solve
    and reinserted as zero rows/columns of the returned coupling.  Any
    optimal basic solution may be returned; callers must depend only on the
    value or treat the coupling as one witness among many.
    """
    mu = check_distribution(mu, "mu")
    nu = check_distribution(nu, "nu")
    cost = np.asarray(cost, dtype=float)
    if cost.shape != (len(mu), len(nu)):
        raise ValidationError(
            f"cost has shape {cost.shape}, expected {(len(mu), len(nu))}", field="cost"
        )
    if not np.all(np.isfinite(cost)):
        raise ValidationError("cost must be finite", field="cost")

    rows = np.flatnonzero(mu > 0)
    cols = np.flatnonzero(nu > 0)
    sub_mu, sub_nu = mu[rows], nu[cols]
    sub_cost = cost[np.ix_(rows, cols)]
    m, n = len(rows), len(cols)

    if m == 1:
        sub_plan = sub_nu[None, :].copy()
    elif n == 1:
        sub_plan = sub_mu[:, None].copy()
    else:
        a_eq = np.zeros((m + n, m * n))
        for i in range(m):
            a_eq[i, i * n : (i + 1) * n] = 1.0
        for j in range(n):
            a_eq[m + j, j::n] = 1.0
        b_eq = np.concatenate([sub_mu, sub_nu])
        res = linprog(
            sub_cost.ravel(),
            A_eq=a_eq,
            b_eq=b_eq,
            bounds=(0, None),
            method="highs",
            options=_LP_OPTIONS,
        )
        if res.status != 0:
            raise RuntimeError(f"transport LP failed: {res.message}")
        sub_plan = res.x.reshape(m, n)

    plan = np.zeros_like(cost)
    plan[np.ix_(rows, cols)] = sub_plan
    value = float(np.sum(plan * cost))
    return plan, value


def coupling_vertices(mu: np.ndarray, nu: np.ndarray) -> np.ndarray:
    """All vertices of the transportation polytope of (mu, nu).

    Every vertex is the unique coupling supported on some spanning forest of
    the bipartite support graph, so enumerating supports of size
    (m + n - 1) and solving the marginal equations finds them all.  Intended
    for small supports only (the count grows super-exponentially).

    Returns an array of shape (n_vertices, len(mu), len(nu)).
    """
    mu = check_distribution(mu, "mu")
    nu = check_distribution(nu, "nu")
    rows = np.flatnonzero(mu > 0)
    cols = np.flatnonzero(nu > 0)
    m, n = len(rows), len(cols)
    sub_mu, sub_nu = mu[rows], nu[cols]

    cells = list(itertools.product(range(m), range(n)))
    k = m + n - 1
    seen: dict[bytes, np.ndarray] = {}
    b_eq = np.concatenate([sub_mu, sub_nu])
    for support in itertools.combinations(cells, k):
        a = np.zeros((m + n, k))
        for col, (i, j) in enumerate(support):
            a[i, col] = 1.0
            a[m + j, col] = 1.0
        # Marginal equations have rank m+n-1; lstsq picks the tree solution
        # when the support is a spanning tree and a residual betrays cycles.
        sol, residual, rank, _ = np.linalg.lstsq(a, b_eq, rcond=None)
        if rank < k:
            continue
        if np.max(np.abs(a @ sol - b_eq)) > 1e-10:
            continue
        if np.any(sol < -1e-12):
            continue
        plan = np.zeros((m, n))
        for col, (i, j) in enumerate(support):
            plan[i, j] = max(sol[col], 0.0)
        key = np.round(plan, 10).tobytes()
        if key not in seen:
            seen[key] = plan
    out = np.zeros((len(seen), len(mu), len(nu)))
    for idx, plan in enumerate(seen.values()):
        out[idx][np.ix_(rows, cols)] = plan
    return out


def random_coupling_vertex(
    mu: np.ndarray, nu: np.ndarray, rng: np.random.Generator
) -> np.ndarray:
    """A random basic feasible coupling: northwest-corner rule applied after
    independently permuting rows and columns."""
    mu = check_distribution(mu, "mu")
    nu = check_distribution(nu, "nu")
    rows = np.flatnonzero(mu > 0)
    cols = np.flatnonzero(nu > 0)
    rperm = rng.permutation(len(rows))
    cperm = rng.permutation(len(cols))
    remaining_mu = mu[rows][rperm].copy()
    remaining_nu = nu[cols][cperm].copy()
    plan = np.zeros((len(mu), len(nu)))
    i = j = 0
    while i < len(rows) and j < len(cols):
        move = min(remaining_mu[i], remaining_nu[j])
        plan[rows[rperm[i]], cols[cperm[j]]] = move
        remaining_mu[i] -= move
        remaining_nu[j] -= move
        if remaining_mu[i] <= remaining_nu[j]:
            i += 1
        else:
            j += 1
    return plan


# --------------------------------------------------------------------------
# One-dimensional and set-valued metrics
# --------------------------------------------------------------------------

def w1_real_line(a: LossProfile, b: LossProfile) -> float:
    """1-Wasserstein distance between real discrete distributions via the CDF
    formula: the area between the two cumulative distribution functions."""
    grid = np.union1d(a.values, b.values)
    cdf_a = _cdf_on_grid(a, grid)
    cdf_b = _cdf_on_grid(b, grid)
    return float(np.sum(np.abs(cdf_a[:-1] - cdf_b[:-1]) * np.diff(grid)))


def _cdf_on_grid(profile: LossProfile, grid: np.ndarray) -> np.ndarray:
    idx = np.searchsorted(profile.values, grid, side="right")
    cum = np.concatenate([[0.0], np.cumsum(profile.masses)])
    return cum[idx]


def total_variation(mu: np.ndarray, nu: np.ndarray) -> float:
    """Total variation distance: half the L1 gap, on a shared ground set."""
    mu = check_distribution(mu, "mu")
    nu = check_distribution(nu, "nu")
    if mu.shape != nu.shape:
        raise ValidationError("mu and nu must share a ground set", field="nu")
    return 0.5 * float(np.sum(np.abs(mu - nu)))


def hausdorff(dist: np.ndarray) -> float:
    """Hausdorff distance from a rectangular cross-distance matrix: each side
    must reach the other within the returned radius."""
    dist = np.asarray(dist, dtype=float)
    if dist.ndim != 2 or dist.size == 0:
        raise ValidationError("cross-distance matrix must be nonempty", field="dist")
    return float(max(dist.min(axis=1).max(), dist.min(axis=0).max()))


def hausdorff_loss_profiles(p: FiniteProblem, p_prime: FiniteProblem) -> float:
    """Hausdorff distance between the two loss-profile sets, with profiles
    compared by 1-Wasserstein distance on the line."""
    profiles_a = loss_profile_set(p)
    profiles_b = loss_profile_set(p_prime)
    cross = np.array(
        [[w1_real_line(pa, pb) for pb in profiles_b] for pa in profiles_a]
    )
    return hausdorff(cross)


def wasserstein_profile_distributions(
    wp: WeightedProblem, wp_prime: WeightedProblem, p: float
) -> float:
    """Outer p-Wasserstein distance between the two weighted profile
    distributions, with ground distance 1-Wasserstein between profiles."""
    if p < 1:
        raise ValidationError("p must be at least 1", field="p")
    atoms_a = loss_profile_distribution(wp)
    atoms_b = loss_profile_distribution(wp_prime)
    cost = np.array(
        [[w1_real_line(pa, pb) ** p for pb, _ in atoms_b] for pa, _ in atoms_a]
    )
    mass_a = np.array([w for _, w in atoms_a])
    mass_b = np.array([w for _, w in atoms_b])
    _, value = solve_ot_exact(cost, mass_a / mass_a.sum(), mass_b / mass_b.sum())
    return float(max(value, 0.0) ** (1.0 / p))


def kernel_w1(
    m_kernel: np.ndarray,
    n_kernel: np.ndarray,
    base_mu: np.ndarray,
    ground_metric: np.ndarray,
) -> float:
    """Wasserstein distance between two Markov kernels with a common source:
    the base-measure average of the per-state 1-Wasserstein distances."""
    m_kernel = check_markov_kernel(m_kernel, "M")
    n_kernel = check_markov_kernel(n_kernel, "N")
    base_mu = check_distribution(base_mu, "base_mu")
    ground = np.asarray(ground_metric, dtype=float)
    if m_kernel.shape != n_kernel.shape:
        raise ValidationError("M and N must have the same shape", field="N")
    if m_kernel.shape[0] != len(base_mu):
        raise ValidationError(
            "base_mu must weight the kernels' source states", field="base_mu"
        )
    t = m_kernel.shape[1]
    if ground.shape != (t, t):
        raise ValidationError(
            f"ground_metric has shape {ground.shape}, expected {(t, t)}",
            field="ground_metric",
        )
    total = 0.0
    for i in np.flatnonzero(base_mu > 0):
        _, value = solve_ot_exact(ground, m_kernel[i], n_kernel[i])
        total += float(base_mu[i]) * value
    return total
