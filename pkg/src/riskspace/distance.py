"""Risk distortion, the exact Risk distance, its bounds, weighted variants,
geodesics, and the bilinear relaxation for metric measure spaces.

The distance between two problems is the smallest worst-case gap in expected
loss achievable by jointly aligning the observation spaces (a coupling of the
joint laws) and the predictor sets (a correspondence).  On finite problems
the optimum is computed exactly; see ``docs/algorithms.md`` for the argument
that the assignment-enumeration scheme used here is exact.

Size caps keep the exact solver at desk scale: ``cap_pairs`` bounds
``|H| * |H'|`` (default 12) and ``cap_support`` bounds the product of the
flattened observation supports (default 256).  Beyond the caps the solver
either falls back to a labeled upper bound from alternating minimization or
raises, depending on ``fallback``; it never silently approximates.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .errors import CapacityError, ValidationError
from .problems import (
    FiniteProblem,
    WeightedProblem,
    _check_metric_matrix,
    constrained_bayes_risk,
)
from .transport import (
    _LP_OPTIONS,
    check_coupling,
    check_distribution,
    coupling_vertices,
    hausdorff,
    hausdorff_loss_profiles,
    random_coupling_vertex,
    solve_ot_exact,
)

DEFAULT_CAP_PAIRS = 12
DEFAULT_CAP_SUPPORT = 256

# Predictor-coupling polytopes with support product at most this are searched
# from every vertex; for a bilinear objective that makes the alternating
# scheme provably optimal, not just a heuristic.
_EXHAUSTIVE_VERTEX_LIMIT = 9


@dataclass(frozen=True)
class DistanceResult:
    """Outcome of a distance computation.

    ``value`` is the computed distance (``exact``) or a certified upper bound
    (``upper_bound``).  ``witness_coupling`` has shape (nx, ny, nx', ny');
    ``witness_correspondence`` is a boolean (|H|, |H'|) matrix for supremum
    variants, ``witness_predictor_coupling`` a (|H|, |H'|) coupling for
    weighted variants.
    """

    value: float
    status: str
    witness_coupling: np.ndarray | None = None
    witness_correspondence: np.ndarray | None = None
    witness_predictor_coupling: np.ndarray | None = None

    def __post_init__(self):
        if self.status not in ("exact", "upper_bound"):
            raise ValidationError(f"unknown status {self.status!r}",
                                  field="status")
        if self.value < 0:
            raise ValidationError("distance values are nonnegative",
                                  field="value")
        for name in ("witness_coupling", "witness_correspondence",
                     "witness_predictor_coupling"):
            arr = getattr(self, name)
            if arr is not None:
                arr = np.ascontiguousarray(arr)
                arr.flags.writeable = False
                object.__setattr__(self, name, arr)


def check_correspondence(r: np.ndarray, name: str = "correspondence") -> np.ndarray:
    r = np.asarray(r, dtype=bool)
    if r.ndim != 2:
        raise ValidationError(f"{name} must be a boolean matrix", field=name)
    if not np.all(r.any(axis=1)):
        (h,) = np.argwhere(~r.any(axis=1))[0]
        raise ValidationError(f"{name} row {h} covers nothing", field=f"{name}[{h}]")
    if not np.all(r.any(axis=0)):
        (hp,) = np.argwhere(~r.any(axis=0))[0]
        raise ValidationError(
            f"{name} column {hp} is not covered", field=f"{name}[:,{hp}]"
        )
    return r


# --------------------------------------------------------------------------
# Flattened views and pair costs
# --------------------------------------------------------------------------

def _flat_losses(p: FiniteProblem) -> np.ndarray:
    """Predictor loss vectors over the flattened observation grid, (nH, nx*ny)."""
    return p.predictor_loss_stack().reshape(p.n_predictors, -1)


def _flat_eta(p: FiniteProblem) -> np.ndarray:
    return p.eta.ravel()


def _coupling_to_product(gamma_flat: np.ndarray, p: FiniteProblem,
                         q: FiniteProblem) -> np.ndarray:
    return gamma_flat.reshape(p.nx, p.ny, q.nx, q.ny)


def _coupling_from_product(gamma: np.ndarray, p: FiniteProblem,
                           q: FiniteProblem) -> np.ndarray:
    gamma = np.asarray(gamma, dtype=float)
    expected = (p.nx, p.ny, q.nx, q.ny)
    if gamma.shape != expected:
        raise ValidationError(
            f"coupling has shape {gamma.shape}, expected {expected}", field="gamma"
        )
    return gamma.reshape(p.nx * p.ny, q.nx * q.ny)


class _PairCosts:
    """Lazy |loss - loss'| cost vectors for predictor pairs, flattened over
    the product of the two observation grids."""

    def __init__(self, p: FiniteProblem, q: FiniteProblem):
        self.la = _flat_losses(p)
        self.lb = _flat_losses(q)
        self._cache: dict[tuple[int, int], np.ndarray] = {}

    def vector(self, h: int, hp: int) -> np.ndarray:
        key = (h, hp)
        if key not in self._cache:
            self._cache[key] = np.abs(
                self.la[h][:, None] - self.lb[hp][None, :]
            ).ravel()
        return self._cache[key]

    def matrix_against(self, gamma_flat: np.ndarray) -> np.ndarray:
        g = gamma_flat.ravel()
        out = np.empty((self.la.shape[0], self.lb.shape[0]))
        for h in range(self.la.shape[0]):
            for hp in range(self.lb.shape[0]):
                out[h, hp] = self.vector(h, hp) @ g
        return out


def pair_cost_matrix(
    p: FiniteProblem, p_prime: FiniteProblem, gamma: np.ndarray
) -> np.ndarray:
    """Expected loss gaps for every predictor pair under a fixed coupling."""
    gamma_flat = _coupling_from_product(gamma, p, p_prime)
    check_coupling(gamma_flat, _flat_eta(p), _flat_eta(p_prime), name="gamma")
    return _PairCosts(p, p_prime).matrix_against(gamma_flat)


def risk_distortion(
    p: FiniteProblem,
    p_prime: FiniteProblem,
    r: np.ndarray,
    gamma: np.ndarray,
) -> float:
    """Worst expected loss gap over the correspondence, under the coupling."""
    r = check_correspondence(r)
    if r.shape != (p.n_predictors, p_prime.n_predictors):
        raise ValidationError(
            f"correspondence has shape {r.shape}, expected"
            f" {(p.n_predictors, p_prime.n_predictors)}",
            field="correspondence",
        )
    costs = pair_cost_matrix(p, p_prime, gamma)
    return float(costs[r].max())


def hausdorff_reduction(costs: np.ndarray) -> tuple[float, np.ndarray]:
    """Best correspondence for a fixed pair-cost matrix, in closed form.

    For fixed costs, the optimal correspondence problem collapses to the
    Hausdorff value of the matrix; the maximal witness keeps every pair whose
    cost does not exceed that value.
    """
    costs = np.asarray(costs, dtype=float)
    value = hausdorff(costs)
    witness = costs <= value + 1e-12
    return value, check_correspondence(witness, name="witness")


# --------------------------------------------------------------------------
# Epigraph LP: minimize the max of linear functionals over a coupling polytope
# --------------------------------------------------------------------------

def _minimax_coupling_lp(
    cost_vectors: list[np.ndarray], mu: np.ndarray, nu: np.ndarray
) -> tuple[float, np.ndarray]:
    """min over couplings gamma of max_k <cost_vectors[k], gamma>.

    Each cost vector is flat over the (len(mu), len(nu)) grid.  Zero-mass
    rows/columns are dropped before the solve and reinserted as zeros.
    """
    m_full, n_full = len(mu), len(nu)
    rows = np.flatnonzero(mu > 0)
    cols = np.flatnonzero(nu > 0)
    m, n = len(rows), len(cols)
    sub_mu, sub_nu = mu[rows], nu[cols]
    grid = np.ix_(rows, cols)

    if m == 1 or n == 1:
        # Unique coupling: the product measure.
        plan = np.outer(sub_mu, sub_nu)
        value = max(
            float(np.sum(c.reshape(m_full, n_full)[grid] * plan))
            for c in cost_vectors
        )
        full = np.zeros((m_full, n_full))
        full[grid] = plan
        return value, full.ravel()

    n_gamma = m * n
    k = len(cost_vectors)
    a_ub = np.zeros((k, n_gamma + 1))
    for idx, c in enumerate(cost_vectors):
        a_ub[idx, :n_gamma] = c.reshape(m_full, n_full)[grid].ravel()
        a_ub[idx, n_gamma] = -1.0
    a_eq = np.zeros((m + n, n_gamma + 1))
    for i in range(m):
        a_eq[i, i * n : (i + 1) * n] = 1.0
    for j in range(n):
        a_eq[m + j, j:n_gamma:n] = 1.0
    b_eq = np.concatenate([sub_mu, sub_nu])
    objective = np.zeros(n_gamma + 1)
    objective[n_gamma] = 1.0
    res = linprog(
        objective,
        A_ub=a_ub,
        b_ub=np.zeros(k),
        A_eq=a_eq,
        b_eq=b_eq,
        bounds=(0, None),
        method="highs",
        options=_LP_OPTIONS,
    )
    if res.status != 0:
        raise RuntimeError(f"minimax transport LP failed: {res.message}")
    plan = res.x[:n_gamma].reshape(m, n)
    full = np.zeros((m_full, n_full))
    full[grid] = plan
    value = max(float(c @ full.ravel()) for c in cost_vectors)
    return value, full.ravel()


def coupling_minimax(
    p: FiniteProblem, p_prime: FiniteProblem, pairs: list[tuple[int, int]]
) -> tuple[float, np.ndarray]:
    """Minimize, over couplings of the two joint laws, the worst expected loss
    gap among the given predictor pairs.  Returns (value, coupling) with the
    coupling shaped (nx, ny, nx', ny')."""
    costs = _PairCosts(p, p_prime)
    vectors = [costs.vector(h, hp) for (h, hp) in pairs]
    value, gamma_flat = _minimax_coupling_lp(
        vectors, _flat_eta(p), _flat_eta(p_prime)
    )
    return value, _coupling_to_product(gamma_flat, p, p_prime)


# --------------------------------------------------------------------------
# Exact Risk distance
# --------------------------------------------------------------------------

def _canonical_key(p: FiniteProblem) -> tuple:
    return (
        p.nx,
        p.ny,
        p.n_predictors,
        p.x_labels,
        p.y_labels,
        p.eta.tobytes(),
        p.loss.tobytes(),
        p.predictors.tobytes(),
    )


def _pattern_union_sets(
    n_h: int, n_hp: int, lower_bounds: np.ndarray
) -> list[tuple[float, tuple[tuple[int, int], ...]]]:
    """Distinct unions of a row assignment H -> H' and a column assignment
    H' -> H, each scored by the max of the per-pair lower bounds."""
    row_graphs = [
        tuple((h, a[h]) for h in range(n_h))
        for a in itertools.product(range(n_hp), repeat=n_h)
    ]
    col_graphs = [
        tuple((b[hp], hp) for hp in range(n_hp))
        for b in itertools.product(range(n_h), repeat=n_hp)
    ]
    seen: dict[tuple[tuple[int, int], ...], float] = {}
    for ga in row_graphs:
        for gb in col_graphs:
            union = tuple(sorted(set(ga) | set(gb)))
            if union not in seen:
                seen[union] = max(lower_bounds[h, hp] for (h, hp) in union)
    return sorted(((score, union) for union, score in seen.items()),
                  key=lambda item: (item[0], item[1]))


def risk_distance_exact(
    p: FiniteProblem,
    p_prime: FiniteProblem,
    cap_pairs: int = DEFAULT_CAP_PAIRS,
    cap_support: int = DEFAULT_CAP_SUPPORT,
    fallback: bool = True,
    restarts: int = 4,
    seed: int = 0,
) -> DistanceResult:
    """The Risk distance between two finite problems.

    Within the size caps the returned value is the exact infimum over
    couplings and correspondences.  The search enumerates every way of
    assigning each predictor a partner (in both directions): for a fixed
    assignment pattern the inner problem is a linear program in the coupling,
    and the pattern minima exhaust the correspondence infimum (the reduction
    is spelled out in docs/algorithms.md).  Patterns are processed in
    increasing order of a per-pair transport lower bound, so most are pruned
    without solving their LP.

    Beyond the caps: with ``fallback`` the best alternating-minimization
    result is returned with status ``upper_bound``; otherwise a capacity
    error is raised.

    Argument order is canonicalized internally, making the function exactly
    symmetric.
    """
    if _canonical_key(p_prime) < _canonical_key(p):
        result = risk_distance_exact(
            p_prime, p, cap_pairs=cap_pairs, cap_support=cap_support,
            fallback=fallback, restarts=restarts, seed=seed,
        )
        return DistanceResult(
            value=result.value,
            status=result.status,
            witness_coupling=None
            if result.witness_coupling is None
            else np.transpose(result.witness_coupling, (2, 3, 0, 1)),
            witness_correspondence=None
            if result.witness_correspondence is None
            else result.witness_correspondence.T,
        )

    n_pairs = p.n_predictors * p_prime.n_predictors
    support = (p.nx * p.ny) * (p_prime.nx * p_prime.ny)
    if n_pairs > cap_pairs or support > cap_support:
        if not fallback:
            raise CapacityError(
                f"exact solver caps exceeded: |H||H'| = {n_pairs} (cap"
                f" {cap_pairs}), support product = {support} (cap"
                f" {cap_support})",
                cap="cap_pairs" if n_pairs > cap_pairs else "cap_support",
                actual=n_pairs if n_pairs > cap_pairs else support,
            )
        return _alternating_upper_bound(p, p_prime, restarts=restarts, seed=seed)

    costs = _PairCosts(p, p_prime)
    mu, nu = _flat_eta(p), _flat_eta(p_prime)

    lower = np.empty((p.n_predictors, p_prime.n_predictors))
    for h in range(p.n_predictors):
        for hp in range(p_prime.n_predictors):
            _, lower[h, hp] = solve_ot_exact(
                costs.vector(h, hp).reshape(len(mu), len(nu)), mu, nu
            )

    best_value = np.inf
    best_gamma: np.ndarray | None = None
    for score, union in _pattern_union_sets(
        p.n_predictors, p_prime.n_predictors, lower
    ):
        if score >= best_value - 1e-12:
            break
        vectors = [costs.vector(h, hp) for (h, hp) in union]
        value, gamma_flat = _minimax_coupling_lp(vectors, mu, nu)
        if value < best_value:
            best_value = value
            best_gamma = gamma_flat

    assert best_gamma is not None
    value, witness_r = hausdorff_reduction(
        costs.matrix_against(best_gamma)
    )
    return DistanceResult(
        value=max(float(value), 0.0),
        status="exact",
        witness_coupling=_coupling_to_product(best_gamma, p, p_prime),
        witness_correspondence=witness_r,
    )


def _alternating_upper_bound(
    p: FiniteProblem,
    p_prime: FiniteProblem,
    restarts: int,
    seed: int,
    max_iter: int = 100,
    tol: float = 1e-10,
) -> DistanceResult:
    """Alternate between the closed-form correspondence step and the minimax
    coupling LP; a descent heuristic whose result is a certified upper bound."""
    costs = _PairCosts(p, p_prime)
    mu, nu = _flat_eta(p), _flat_eta(p_prime)
    rng = np.random.default_rng(seed)
    inits = [np.outer(mu, nu)]
    inits += [random_coupling_vertex(mu, nu, rng) for _ in range(restarts)]

    best = (np.inf, None, None)
    for gamma in inits:
        gamma_flat = gamma.ravel()
        value = np.inf
        for _ in range(max_iter):
            cost_matrix = costs.matrix_against(gamma_flat)
            current = hausdorff(cost_matrix)
            if value - current < tol:
                value = min(value, current)
                break
            value = current
            # re-solve the coupling for the argmin assignment pattern; its
            # optimum can only sit at or below the current objective
            a_rows = np.argmin(cost_matrix, axis=1)
            b_cols = np.argmin(cost_matrix, axis=0)
            union = sorted(
                {(h, int(a_rows[h])) for h in range(p.n_predictors)}
                | {(int(b_cols[hp]), hp) for hp in range(p_prime.n_predictors)}
            )
            vectors = [costs.vector(h, hp) for (h, hp) in union]
            _, gamma_flat = _minimax_coupling_lp(vectors, mu, nu)
        final_value, witness = hausdorff_reduction(costs.matrix_against(gamma_flat))
        if final_value < best[0]:
            best = (final_value, gamma_flat, witness)

    value, gamma_flat, witness = best
    return DistanceResult(
        value=max(float(value), 0.0),
        status="upper_bound",
        witness_coupling=_coupling_to_product(gamma_flat, p, p_prime),
        witness_correspondence=witness,
    )


# --------------------------------------------------------------------------
# Shared-structure upper bounds and the profile lower bound
# --------------------------------------------------------------------------

def risk_distance_upper_shared(
    p: FiniteProblem, p_prime: FiniteProblem, mode: str
) -> float:
    """Closed-form upper bounds for problems differing in one component.

    ``shared_eta_H``: same joint law and predictors, losses may differ;
    the bound is the worst per-predictor expected loss gap.
    ``shared_all_but_eta``: only the joint law differs; exact transport under
    the predictor-uniform loss-gap pseudometric on observations.
    ``shared_all_but_H``: only the predictor set differs; Hausdorff distance
    between the predictor sets in L1(eta).
    """
    if p.x_labels != p_prime.x_labels or p.y_labels != p_prime.y_labels:
        raise ValidationError("problems must share label sets", field="mode")
    if mode == "shared_eta_H":
        if not np.array_equal(p.eta, p_prime.eta) or not np.array_equal(
            p.predictors, p_prime.predictors
        ):
            raise ValidationError(
                "mode shared_eta_H requires identical eta and predictors",
                field="mode",
            )
        gaps = np.abs(p.predictor_loss_stack() - p_prime.predictor_loss_stack())
        return float(np.max(np.einsum("xy,hxy->h", p.eta, gaps)))
    if mode == "shared_all_but_eta":
        if not np.array_equal(p.loss, p_prime.loss) or not np.array_equal(
            p.predictors, p_prime.predictors
        ):
            raise ValidationError(
                "mode shared_all_but_eta requires identical loss and predictors",
                field="mode",
            )
        from .corruption import w1_eta_bound

        return w1_eta_bound(p, p_prime)
    if mode == "shared_all_but_H":
        if not np.array_equal(p.eta, p_prime.eta) or not np.array_equal(
            p.loss, p_prime.loss
        ):
            raise ValidationError(
                "mode shared_all_but_H requires identical eta and loss",
                field="mode",
            )
        from .corruption import predictor_set_bound

        _, bound = predictor_set_bound(p, p_prime.predictors)
        return bound
    raise ValidationError(f"unknown mode {mode!r}", field="mode")


def risk_distance_lower(p: FiniteProblem, p_prime: FiniteProblem) -> float:
    """Certified lower bound: the larger of the optimal-risk gap and the
    Hausdorff distance between loss profile sets."""
    bayes_gap = abs(constrained_bayes_risk(p) - constrained_bayes_risk(p_prime))
    return max(bayes_gap, hausdorff_loss_profiles(p, p_prime))


# --------------------------------------------------------------------------
# Weighted (L^p) variant
# --------------------------------------------------------------------------

def lp_risk_distortion(
    wp: WeightedProblem,
    wp_prime: WeightedProblem,
    rho: np.ndarray,
    gamma: np.ndarray,
    p: float,
) -> float:
    """L^p average (or supported supremum, for p = inf) of the pair costs
    under a predictor coupling and an observation coupling."""
    if p != np.inf and p < 1:
        raise ValidationError("p must be at least 1", field="p")
    rho = check_coupling(rho, wp.lam, wp_prime.lam, name="rho")
    pair_costs = pair_cost_matrix(wp.problem, wp_prime.problem, gamma)
    if p == np.inf:
        return float(pair_costs[rho > 0].max())
    return float(np.sum(rho * pair_costs**p) ** (1.0 / p))


def _rho_inits(
    lam: np.ndarray, lam_prime: np.ndarray, restarts: int, rng: np.random.Generator
) -> list[np.ndarray]:
    inits = [np.outer(lam, lam_prime)]
    if lam.shape == lam_prime.shape and np.array_equal(lam, lam_prime):
        # the diagonal coupling is a vertex; it is the natural start for
        # self-comparisons and is rarely hit by random sampling
        inits.append(np.diag(lam))
    support = int(np.count_nonzero(lam)) * int(np.count_nonzero(lam_prime))
    if support <= _EXHAUSTIVE_VERTEX_LIMIT:
        inits.extend(coupling_vertices(lam, lam_prime))
    else:
        inits.extend(
            random_coupling_vertex(lam, lam_prime, rng) for _ in range(restarts)
        )
    return inits


def lp_risk_distance(
    wp: WeightedProblem,
    wp_prime: WeightedProblem,
    p: float = 1.0,
    restarts: int = 8,
    seed: int = 0,
    max_iter: int = 100,
    tol: float = 1e-10,
    trace: list | None = None,
) -> DistanceResult:
    """The L^p Risk distance between weighted problems, by alternating exact
    transport steps.

    With the predictor coupling fixed, the observation coupling is re-solved
    by exact transport (for p = 1 this is the exact half-step; for p > 1 the
    transported cost is a surrogate and the true objective is re-evaluated);
    with the observation coupling fixed, the predictor coupling step is exact
    for every p.  Restarts cover the independent coupling, the diagonal
    coupling when the two weightings coincide, and polytope vertices: all of
    them when the predictor supports are small (which makes the p = 1 result
    provably optimal), a seeded random sample otherwise.

    The result is labeled ``exact`` only in the trivially tight case of
    singleton predictor sets, else ``upper_bound``.  For p = 1 the objective
    is nonincreasing along iterations.
    """
    if p == np.inf or p < 1:
        raise ValidationError("p must lie in [1, inf)", field="p")
    pa, pb = wp.problem, wp_prime.problem
    costs = _PairCosts(pa, pb)
    mu, nu = _flat_eta(pa), _flat_eta(pb)
    rng = np.random.default_rng(seed)

    n_h, n_hp = pa.n_predictors, pb.n_predictors
    flat_pairwise = np.empty((n_h, n_hp, len(mu) * len(nu)))
    for h in range(n_h):
        for hp in range(n_hp):
            flat_pairwise[h, hp] = costs.vector(h, hp)
    pow_pairwise = flat_pairwise if p == 1.0 else flat_pairwise**p

    def objective(rho: np.ndarray, gamma_flat: np.ndarray) -> float:
        pair = flat_pairwise @ gamma_flat
        return float(np.sum(rho * pair**p) ** (1.0 / p))

    best = (np.inf, None, None)
    for rho in _rho_inits(wp.lam, wp_prime.lam, restarts, rng):
        gamma_flat = np.outer(mu, nu).ravel()
        current = np.inf
        for _ in range(max_iter):
            gamma_cost = np.tensordot(rho, pow_pairwise, axes=2)
            gamma, _ = solve_ot_exact(
                gamma_cost.reshape(len(mu), len(nu)), mu, nu
            )
            gamma_flat = gamma.ravel()
            pair = flat_pairwise @ gamma_flat
            rho, _ = solve_ot_exact(pair**p, wp.lam, wp_prime.lam)
            value = objective(rho, gamma_flat)
            if trace is not None:
                trace.append(value)
            if current - value < tol:
                current = min(current, value)
                break
            current = value
        value = objective(rho, gamma_flat)
        if value < best[0]:
            best = (value, gamma_flat, rho)

    value, gamma_flat, rho = best
    status = "exact" if n_h == 1 and n_hp == 1 else "upper_bound"
    return DistanceResult(
        value=max(float(value), 0.0),
        status=status,
        witness_coupling=_coupling_to_product(gamma_flat, pa, pb),
        witness_predictor_coupling=rho,
    )


def linf_risk_distance_point_mass(
    wp: WeightedProblem, wp_prime: WeightedProblem
) -> DistanceResult:
    """Experimental: the L^inf weighted distance when both weightings are
    point masses.

    The support constraint makes the general L^inf optimization combinatorial;
    with point-mass weights the predictor coupling is forced and the distance
    reduces to one exact transport solve.
    """
    for lam, name in ((wp.lam, "lambda"), (wp_prime.lam, "lambda'")):
        if np.count_nonzero(lam) != 1:
            raise ValidationError(
                f"{name} must be a point mass for the L^inf variant", field=name
            )
    h = int(np.flatnonzero(wp.lam)[0])
    hp = int(np.flatnonzero(wp_prime.lam)[0])
    pa, pb = wp.problem, wp_prime.problem
    costs = _PairCosts(pa, pb)
    mu, nu = _flat_eta(pa), _flat_eta(pb)
    gamma, value = solve_ot_exact(
        costs.vector(h, hp).reshape(len(mu), len(nu)), mu, nu
    )
    rho = np.zeros((pa.n_predictors, pb.n_predictors))
    rho[h, hp] = 1.0
    return DistanceResult(
        value=max(float(value), 0.0),
        status="exact",
        witness_coupling=_coupling_to_product(gamma.ravel(), pa, pb),
        witness_predictor_coupling=rho,
    )


# --------------------------------------------------------------------------
# Bilinear relaxation for metric measure spaces
# --------------------------------------------------------------------------

def bilinear_gw(
    dist_a: np.ndarray,
    mu_a: np.ndarray,
    dist_b: np.ndarray,
    mu_b: np.ndarray,
    restarts: int = 8,
    seed: int = 0,
    max_iter: int = 100,
    tol: float = 1e-12,
    exact_max_support: int = 3,
) -> float:
    """Minimize the metric-gap integral over two independent couplings.

    The objective int int |d_A(a2,a1) - d_B(b2,b1)| dgamma(a1,b1) drho(a2,b2)
    is bilinear, so its minimum over the product of the two transportation
    polytopes is attained at a vertex pair.  When both supports have at most
    ``exact_max_support`` points the vertex pairs are enumerated outright
    (exact); otherwise alternating exact transport steps from several starts
    give an upper bound.
    """
    dist_a = np.asarray(dist_a, dtype=float)
    dist_b = np.asarray(dist_b, dtype=float)
    _check_metric_matrix(dist_a, field="dist_a")
    _check_metric_matrix(dist_b, field="dist_b")
    mu_a = check_distribution(mu_a, "mu_a")
    mu_b = check_distribution(mu_b, "mu_b")
    if dist_a.shape != (len(mu_a),) * 2:
        raise ValidationError("dist_a and mu_a sizes disagree", field="dist_a")
    if dist_b.shape != (len(mu_b),) * 2:
        raise ValidationError("dist_b and mu_b sizes disagree", field="dist_b")

    keep_a = np.flatnonzero(mu_a > 0)
    keep_b = np.flatnonzero(mu_b > 0)
    dist_a = dist_a[np.ix_(keep_a, keep_a)]
    dist_b = dist_b[np.ix_(keep_b, keep_b)]
    mu_a, mu_b = mu_a[keep_a], mu_b[keep_b]
    na, nb = len(mu_a), len(mu_b)

    # cost[(a2, b2), (a1, b1)] = |d_A(a2, a1) - d_B(b2, b1)|
    cost = np.abs(
        dist_a[:, None, :, None] - dist_b[None, :, None, :]
    ).reshape(na * nb, na * nb)

    if na <= exact_max_support and nb <= exact_max_support:
        vertices = coupling_vertices(mu_a, mu_b).reshape(-1, na * nb)
        values = vertices @ cost @ vertices.T
        return float(max(values.min(), 0.0))

    rng = np.random.default_rng(seed)
    best = np.inf
    for rho in _rho_inits(mu_a, mu_b, restarts, rng):
        rho_flat = rho.ravel()
        current = np.inf
        for _ in range(max_iter):
            gamma, _ = solve_ot_exact(
                (cost.T @ rho_flat).reshape(na, nb), mu_a, mu_b
            )
            rho, _ = solve_ot_exact(
                (cost @ gamma.ravel()).reshape(na, nb), mu_a, mu_b
            )
            rho_flat = rho.ravel()
            value = float(rho_flat @ cost @ gamma.ravel())
            if current - value < tol:
                current = min(current, value)
                break
            current = value
        best = min(best, current)
    return float(max(best, 0.0))


# --------------------------------------------------------------------------
# Geodesics and weak isomorphism
# --------------------------------------------------------------------------

def geodesic_problem(
    p0: FiniteProblem,
    p1: FiniteProblem,
    witness: DistanceResult,
    t: float,
) -> FiniteProblem:
    """The point at parameter ``t`` on the straight line between two problems.

    Requires exact optimal witnesses (a DistanceResult, not raw couplings):
    the interpolant lives on the product spaces, carries the witness coupling
    as its joint law, blends the losses linearly, and uses the witness
    correspondence pairs as product predictors.  Endpoints are at distance
    zero from the originals, and the family is a geodesic.
    """
    if not (0.0 <= t <= 1.0):
        raise ValidationError(f"t = {t} outside [0, 1]", field="t")
    if witness.status != "exact":
        raise ValidationError(
            "geodesic construction needs exact optimal witnesses", field="witness"
        )
    if witness.witness_coupling is None or witness.witness_correspondence is None:
        raise ValidationError("witnesses are missing", field="witness")
    gamma = witness.witness_coupling
    r = check_correspondence(witness.witness_correspondence)
    gamma_flat = _coupling_from_product(gamma, p0, p1)
    check_coupling(gamma_flat, _flat_eta(p0), _flat_eta(p1), name="witness coupling")
    if r.shape != (p0.n_predictors, p1.n_predictors):
        raise ValidationError(
            "witness correspondence shape does not match the predictor sets",
            field="witness",
        )

    x_labels = tuple(
        f"{a}|{b}" for a in p0.x_labels for b in p1.x_labels
    )
    y_labels = tuple(
        f"{a}|{b}" for a in p0.y_labels for b in p1.y_labels
    )
    eta_t = np.transpose(gamma, (0, 2, 1, 3)).reshape(
        p0.nx * p1.nx, p0.ny * p1.ny
    )
    ones0 = np.ones((p1.ny, p1.ny))
    loss_t = (1.0 - t) * np.kron(p0.loss, ones0) + t * np.kron(
        np.ones((p0.ny, p0.ny)), p1.loss
    )
    rows = []
    for h0, h1 in np.argwhere(r):
        pred0 = p0.predictors[h0]
        pred1 = p1.predictors[h1]
        product = (pred0[:, None] * p1.ny + pred1[None, :]).ravel()
        rows.append(product)
    predictors = np.unique(np.array(rows, dtype=np.int64), axis=0)
    return FiniteProblem(
        x_labels=x_labels,
        y_labels=y_labels,
        eta=eta_t,
        loss=loss_t,
        predictors=predictors,
    )


def weak_isomorphism_witness(
    p: FiniteProblem,
    p_prime: FiniteProblem,
    cap_pairs: int = DEFAULT_CAP_PAIRS,
    cap_support: int = DEFAULT_CAP_SUPPORT,
) -> tuple[np.ndarray, np.ndarray] | None:
    """A zero-distortion (correspondence, coupling) pair if one exists.

    Distance zero with attained witnesses characterizes interchangeable
    problems; capacity errors from the exact solver propagate.
    """
    result = risk_distance_exact(
        p, p_prime, cap_pairs=cap_pairs, cap_support=cap_support, fallback=False
    )
    if result.value <= 1e-9:
        return result.witness_correspondence, result.witness_coupling
    return None
