"""Empirical problems, convergence experiments, and Rademacher complexity.

Randomness is deterministic end to end: every sampler takes an integer seed,
derives sub-streams with ``numpy.random.SeedSequence``, and draws from PCG64.
The generator identity ("numpy-PCG64") is recorded in every report so frozen
regression values survive toolchain changes.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import CapacityError, ValidationError
from . import distance as _distance
from .corruption import tv_bound
from .problems import FiniteProblem

PRNG_ID = "numpy-PCG64"

RADEMACHER_CAPACITY = 10**6


@dataclass(frozen=True)
class ExperimentRow:
    n: int
    trial: int
    seed: int
    tv_bound: float
    exact_distance: float | None
    bound_used: str


@dataclass(frozen=True)
class ExperimentReport:
    rows: tuple[ExperimentRow, ...]
    seed: int
    prng: str = PRNG_ID


def _sub_seed(seed: int, n: int, trial: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, n, trial]))


def sample_empirical(problem: FiniteProblem, n: int, seed: int) -> FiniteProblem:
    """The empirical problem after n seeded i.i.d. draws from the joint law.

    Only the joint law changes: it becomes the average of the n observed
    point masses.  Identical seeds give bit-identical samples.
    """
    if n < 1:
        raise ValidationError("sample size must be at least 1", field="n")
    rng = np.random.default_rng(np.random.SeedSequence([seed]))
    flat = problem.eta.ravel()
    draws = rng.choice(len(flat), size=n, p=flat)
    counts = np.bincount(draws, minlength=len(flat)).astype(float)
    return FiniteProblem(
        x_labels=problem.x_labels,
        y_labels=problem.y_labels,
        eta=(counts / n).reshape(problem.eta.shape),
        loss=problem.loss,
        predictors=problem.predictors,
    )


def convergence_experiment(
    problem: FiniteProblem,
    ns: list[int],
    trials: int,
    seed: int,
    cap_pairs: int = _distance.DEFAULT_CAP_PAIRS,
    cap_support: int = _distance.DEFAULT_CAP_SUPPORT,
) -> ExperimentReport:
    """Resample the problem at several sample sizes and record, per trial,
    the total-variation certificate and (when the exact solver fits in its
    caps) the exact distance to the original problem.

    Trials are independent; each derives its own sub-seed from
    (seed, n, trial).
    """
    ell_max = float(problem.loss.max())
    support_product = (problem.nx * problem.ny) ** 2
    pairs = problem.n_predictors**2
    exact_feasible = pairs <= cap_pairs and support_product <= cap_support
    rows = []
    for n in ns:
        for trial in range(trials):
            rng = _sub_seed(seed, n, trial)
            draws = rng.choice(problem.eta.size, size=n, p=problem.eta.ravel())
            counts = np.bincount(draws, minlength=problem.eta.size).astype(float)
            empirical = FiniteProblem(
                x_labels=problem.x_labels,
                y_labels=problem.y_labels,
                eta=(counts / n).reshape(problem.eta.shape),
                loss=problem.loss,
                predictors=problem.predictors,
            )
            bound = tv_bound(problem, empirical, ell_max)
            exact = None
            if exact_feasible:
                exact = _distance.risk_distance_exact(
                    problem,
                    empirical,
                    cap_pairs=cap_pairs,
                    cap_support=cap_support,
                    fallback=False,
                ).value
            rows.append(
                ExperimentRow(
                    n=n,
                    trial=trial,
                    seed=seed,
                    tv_bound=bound,
                    exact_distance=exact,
                    bound_used="tv",
                )
            )
    return ExperimentReport(rows=tuple(rows), seed=seed)


# --------------------------------------------------------------------------
# Rademacher complexity
# --------------------------------------------------------------------------

def rademacher_mc(
    problem: FiniteProblem, m: int, num_samples: int, seed: int
) -> tuple[float, float]:
    """Monte-Carlo estimate of the order-m Rademacher complexity.

    Each sample draws m observations from the joint law and m signs, and
    takes the best sign-weighted average loss over the predictor list.
    Returns (mean, standard error).
    """
    if m < 1:
        raise ValidationError("m must be at least 1", field="m")
    if num_samples < 1:
        raise ValidationError("num_samples must be at least 1", field="num_samples")
    rng = np.random.default_rng(np.random.SeedSequence([seed]))
    flat_losses = problem.predictor_loss_stack().reshape(problem.n_predictors, -1)
    flat_eta = problem.eta.ravel()
    draws = rng.choice(len(flat_eta), size=(num_samples, m), p=flat_eta)
    signs = rng.integers(0, 2, size=(num_samples, m)) * 2 - 1
    # sup_h (1/m) sum_i sigma_i * loss_h(obs_i), vectorized over samples
    per_h = np.einsum("sm,hsm->sh", signs, flat_losses[:, draws]) / m
    values = per_h.max(axis=1)
    mean = float(values.mean())
    se = float(values.std(ddof=1) / np.sqrt(num_samples)) if num_samples > 1 else 0.0
    return mean, se


def rademacher_exact_small(problem: FiniteProblem, m: int) -> float:
    """Exact order-m Rademacher complexity by exhaustive expectation.

    Sums over every observation m-tuple (weighted by the product law) and
    every sign vector (weight 2^-m).  Feasible only while
    (nx*ny)^m * 2^m stays at desk scale.
    """
    if m < 1:
        raise ValidationError("m must be at least 1", field="m")
    atoms = problem.nx * problem.ny
    work = (atoms**m) * (2**m)
    if work > RADEMACHER_CAPACITY:
        raise CapacityError(
            f"exhaustive expectation needs (nx*ny)^m * 2^m <= "
            f"{RADEMACHER_CAPACITY}, got {work}",
            cap="rademacher",
            actual=work,
        )
    flat_losses = problem.predictor_loss_stack().reshape(problem.n_predictors, -1)
    flat_eta = problem.eta.ravel()
    sign_vectors = np.array(list(itertools.product((-1.0, 1.0), repeat=m)))
    total = 0.0
    for obs in itertools.product(range(atoms), repeat=m):
        weight = float(np.prod(flat_eta[list(obs)]))
        if weight == 0.0:
            continue
        table = flat_losses[:, list(obs)]  # (nH, m)
        sups = (sign_vectors @ table.T / m).max(axis=1)  # (2^m,)
        total += weight * float(sups.mean())
    return total


def _coupled_gap_rademacher(
    p: FiniteProblem, p_prime: FiniteProblem, gamma_flat: np.ndarray, m: int
) -> float:
    """Exact Rademacher complexity of the loss-gap class {|l_h - l'_{h'}|}
    over the coupled observation space."""
    la = p.predictor_loss_stack().reshape(p.n_predictors, -1)
    lb = p_prime.predictor_loss_stack().reshape(p_prime.n_predictors, -1)
    gaps = np.abs(la[:, None, :, None] - lb[None, :, None, :])
    gaps = gaps.reshape(p.n_predictors * p_prime.n_predictors, -1)
    weights = gamma_flat.ravel()
    atoms = len(weights)
    work = (atoms**m) * (2**m)
    if work > RADEMACHER_CAPACITY:
        raise CapacityError(
            f"coupled-gap expectation needs atoms^m * 2^m <= "
            f"{RADEMACHER_CAPACITY}, got {work}",
            cap="rademacher",
            actual=work,
        )
    sign_vectors = np.array(list(itertools.product((-1.0, 1.0), repeat=m)))
    total = 0.0
    for obs in itertools.product(range(atoms), repeat=m):
        weight = float(np.prod(weights[list(obs)]))
        if weight == 0.0:
            continue
        table = gaps[:, list(obs)]
        sups = (sign_vectors @ table.T / m).max(axis=1)
        total += weight * float(sups.mean())
    return total


def rademacher_gap_bound(
    p: FiniteProblem,
    p_prime: FiniteProblem,
    r: np.ndarray,
    gamma: np.ndarray,
    m: int,
) -> float:
    """Certified cap on the Rademacher complexity gap between two problems.

    Evaluates the witnesses' risk distortion plus twice the exact Rademacher
    complexity of the coupled loss-gap class, checks that the actual gap
    |R_m(P) - R_m(P')| respects it, and returns the cap.
    """
    distortion = _distance.risk_distortion(p, p_prime, r, gamma)
    gamma_flat = _distance._coupling_from_product(gamma, p, p_prime)
    gap_complexity = _coupled_gap_rademacher(p, p_prime, gamma_flat, m)
    bound = distortion + 2.0 * gap_complexity
    actual = abs(rademacher_exact_small(p, m) - rademacher_exact_small(p_prime, m))
    if actual > bound + 1e-9:
        raise AssertionError(
            f"Rademacher gap {actual!r} exceeds its certificate {bound!r}"
        )
    return float(bound)
