"""Corruption models and their distance certificates.

Each operation here transforms a problem the way a real data pipeline might
(biased collection, dropped regions, label noise, joint-space noise, loss
substitution, predictor-set swaps) and returns the transformed problem
together with an upper bound on how far the transformation can have moved it.
Bounds compose along a pipeline by the triangle inequality, so a sequence of
stages yields a ledger of per-stage and cumulative certificates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .problems import (
    METRIC_TOL,
    FiniteProblem,
    WeightedProblem,
    cross_predictor_pseudometric,
)
from .transport import (
    check_markov_kernel,
    hausdorff,
    kernel_w1,
    solve_ot_exact,
    total_variation,
)


@dataclass(frozen=True)
class Disintegration:
    """An input marginal plus the conditional label law at each input.

    Rows of ``beta`` at zero-mass inputs are uniform by convention: the
    conditional law is arbitrary there, and uniform avoids NaNs.
    """

    alpha: np.ndarray  # (nx,)
    beta: np.ndarray  # (nx, ny), row-stochastic


def disintegrate(problem: FiniteProblem) -> Disintegration:
    alpha = problem.eta.sum(axis=1)
    beta = np.full_like(problem.eta, 1.0 / problem.ny)
    supported = alpha > 0
    beta[supported] = problem.eta[supported] / alpha[supported, None]
    return Disintegration(alpha=alpha, beta=beta)


def recompose(d: Disintegration) -> np.ndarray:
    """Inverse of :func:`disintegrate`: rebuild the joint law."""
    return d.alpha[:, None] * d.beta


# --------------------------------------------------------------------------
# Sampling bias
# --------------------------------------------------------------------------

def apply_bias_density(
    problem: FiniteProblem, f: np.ndarray
) -> tuple[FiniteProblem, float]:
    """Reweight the joint law by a density ``f`` and certify the move.

    The certificate is half the eta-expected |1 - f|, i.e. the total
    variation between the original and reweighted laws.
    """
    f = np.asarray(f, dtype=float)
    if f.shape != problem.eta.shape:
        raise ValidationError(
            f"f has shape {f.shape}, expected {problem.eta.shape}", field="f"
        )
    if np.any(f < 0) or not np.all(np.isfinite(f)):
        i, j = np.argwhere((f < 0) | ~np.isfinite(f))[0]
        raise ValidationError(f"f[{i}][{j}] is not a valid density value",
                              field=f"f[{i}][{j}]")
    total = float(np.sum(f * problem.eta))
    if abs(total - 1.0) > METRIC_TOL:
        raise ValidationError(
            f"f integrates to {total!r} against eta, expected 1", field="f"
        )
    new_eta = f * problem.eta
    new_eta = new_eta / new_eta.sum()
    biased = FiniteProblem(
        x_labels=problem.x_labels,
        y_labels=problem.y_labels,
        eta=new_eta,
        loss=problem.loss,
        predictors=problem.predictors,
    )
    bound = 0.5 * float(np.sum(np.abs(1.0 - f) * problem.eta))
    return biased, bound


def restrict(
    problem: FiniteProblem, a_mask: np.ndarray
) -> tuple[FiniteProblem, float]:
    """Condition the joint law on a region of the observation space.

    The certificate is the mass of the discarded region.
    """
    a_mask = np.asarray(a_mask, dtype=bool)
    if a_mask.shape != problem.eta.shape:
        raise ValidationError(
            f"A has shape {a_mask.shape}, expected {problem.eta.shape}", field="A"
        )
    mass = float(problem.eta[a_mask].sum())
    if mass <= 0:
        raise ValidationError("the restriction region has zero mass", field="A")
    new_eta = np.where(a_mask, problem.eta, 0.0) / mass
    restricted = FiniteProblem(
        x_labels=problem.x_labels,
        y_labels=problem.y_labels,
        eta=new_eta,
        loss=problem.loss,
        predictors=problem.predictors,
    )
    return restricted, max(1.0 - mass, 0.0)


# --------------------------------------------------------------------------
# Joint-law substitution bounds
# --------------------------------------------------------------------------

def _require_shared_but_eta(p: FiniteProblem, p_prime: FiniteProblem):
    if (
        p.x_labels != p_prime.x_labels
        or p.y_labels != p_prime.y_labels
        or not np.array_equal(p.loss, p_prime.loss)
        or not np.array_equal(p.predictors, p_prime.predictors)
    ):
        raise ValidationError(
            "problems must agree in everything except the joint law",
            field="p_prime",
        )


def tv_bound(p: FiniteProblem, p_prime: FiniteProblem, ell_max: float) -> float:
    """Bound a joint-law substitution by loss range times total variation."""
    _require_shared_but_eta(p, p_prime)
    if ell_max < float(p.loss.max()):
        raise ValidationError(
            f"ell_max = {ell_max} is below the largest loss entry"
            f" {float(p.loss.max())}",
            field="ell_max",
        )
    return float(ell_max) * total_variation(p.eta.ravel(), p_prime.eta.ravel())


def s_metric(problem: FiniteProblem) -> np.ndarray:
    """Worst-case (over predictors) loss gap between observation pairs.

    A pseudometric on the flattened observation grid; the natural ground cost
    for transporting one joint law onto another without disturbing any
    predictor's risk more than necessary.
    """
    flat = problem.predictor_loss_stack().reshape(problem.n_predictors, -1)
    return np.abs(flat[:, :, None] - flat[:, None, :]).max(axis=0)


def s_metric_weighted(wp: WeightedProblem, p: float) -> np.ndarray:
    """Weighted analog of :func:`s_metric`: the lambda-L^p norm of the
    per-predictor loss gaps."""
    if p < 1:
        raise ValidationError("p must be at least 1", field="p")
    flat = wp.problem.predictor_loss_stack().reshape(wp.problem.n_predictors, -1)
    gaps = np.abs(flat[:, :, None] - flat[:, None, :])
    return np.einsum("h,hij->ij", wp.lam, gaps**p) ** (1.0 / p)


def w1_eta_bound(p: FiniteProblem, p_prime: FiniteProblem) -> float:
    """Bound a joint-law substitution by exact transport under the
    observation pseudometric of :func:`s_metric`."""
    _require_shared_but_eta(p, p_prime)
    _, value = solve_ot_exact(s_metric(p), p.eta.ravel(), p_prime.eta.ravel())
    return float(value)


# --------------------------------------------------------------------------
# Label noise
# --------------------------------------------------------------------------

def no_noise_kernel(problem: FiniteProblem) -> np.ndarray:
    """The label-noise kernel that reproduces each observed label exactly."""
    n = problem.nx * problem.ny
    kernel = np.zeros((n, problem.ny))
    for x in range(problem.nx):
        for y in range(problem.ny):
            kernel[x * problem.ny + y, y] = 1.0
    return kernel


def apply_label_noise(problem: FiniteProblem, n_kernel: np.ndarray) -> FiniteProblem:
    """Push each observation's label through an input-dependent noise kernel.

    ``n_kernel`` rows are indexed by flattened (x, y) pairs and give the law
    of the corrupted label.  The input marginal is preserved.
    """
    n_kernel = check_markov_kernel(n_kernel, "N")
    expected = (problem.nx * problem.ny, problem.ny)
    if n_kernel.shape != expected:
        raise ValidationError(
            f"N has shape {n_kernel.shape}, expected {expected}", field="N"
        )
    flat = problem.eta.reshape(problem.nx, problem.ny)
    new_eta = np.zeros_like(flat)
    for x in range(problem.nx):
        rows = n_kernel[x * problem.ny : (x + 1) * problem.ny]
        new_eta[x] = flat[x] @ rows
    return FiniteProblem(
        x_labels=problem.x_labels,
        y_labels=problem.y_labels,
        eta=new_eta,
        loss=problem.loss,
        predictors=problem.predictors,
    )


def noise_bound_metric(
    problem: FiniteProblem,
    n_kernel: np.ndarray,
    d_y: np.ndarray,
    lipschitz_c: float,
) -> float:
    """Certificate for label noise when the loss respects a label metric.

    Verifies that |loss(z, y) - loss(z, y')| <= C * d_y(y, y') on every
    triple (the bound is vacuous otherwise, so the check refuses rather than
    returning a meaningless number), then charges C times the average
    transport cost from the no-noise kernel to ``n_kernel``.
    """
    d_y = np.asarray(d_y, dtype=float)
    if d_y.shape != (problem.ny, problem.ny):
        raise ValidationError(
            f"d_y has shape {d_y.shape}, expected {(problem.ny, problem.ny)}",
            field="d_y",
        )
    gaps = np.abs(problem.loss[:, :, None] - problem.loss[:, None, :])
    allowed = lipschitz_c * d_y[None, :, :]
    slack = gaps - allowed
    if np.max(slack) > METRIC_TOL:
        z, y, yp = np.unravel_index(np.argmax(slack), slack.shape)
        raise ValidationError(
            f"loss is not {lipschitz_c}-Lipschitz in its second argument:"
            f" |loss[{z}][{y}] - loss[{z}][{yp}]| = {gaps[z, y, yp]!r} exceeds"
            f" C*d_y = {allowed[0, y, yp]!r}",
            field="lipschitz_c",
        )
    n_kernel = check_markov_kernel(n_kernel, "N")
    return float(lipschitz_c) * kernel_w1(
        n_kernel, no_noise_kernel(problem), problem.eta.ravel(), d_y
    )


# --------------------------------------------------------------------------
# General joint-space noise (weighted problems)
# --------------------------------------------------------------------------

def apply_general_noise(
    wp: WeightedProblem, n_kernel: np.ndarray, p: float = 1.0
) -> tuple[WeightedProblem, float]:
    """Apply a noise kernel on the whole observation space and certify it.

    The new joint law is the kernel image of the old one; the certificate is
    the average transport cost from the identity kernel under the weighted
    observation pseudometric.
    """
    problem = wp.problem
    n = problem.nx * problem.ny
    n_kernel = check_markov_kernel(n_kernel, "N")
    if n_kernel.shape != (n, n):
        raise ValidationError(
            f"N has shape {n_kernel.shape}, expected {(n, n)}", field="N"
        )
    new_eta = (problem.eta.ravel() @ n_kernel).reshape(problem.nx, problem.ny)
    noised = WeightedProblem(
        problem=FiniteProblem(
            x_labels=problem.x_labels,
            y_labels=problem.y_labels,
            eta=new_eta,
            loss=problem.loss,
            predictors=problem.predictors,
        ),
        lam=wp.lam,
    )
    ground = s_metric_weighted(wp, p)
    bound = kernel_w1(np.eye(n), n_kernel, problem.eta.ravel(), ground)
    return noised, bound


# --------------------------------------------------------------------------
# Predictor-set substitution
# --------------------------------------------------------------------------

def predictor_set_bound(
    problem: FiniteProblem, new_predictors: np.ndarray
) -> tuple[FiniteProblem, float]:
    """Swap the predictor set and certify by the Hausdorff distance between
    the two sets in L1(eta)."""
    new_predictors = np.asarray(new_predictors, dtype=np.int64)
    if new_predictors.ndim != 2 or new_predictors.shape[0] < 1:
        raise ValidationError(
            "new_predictors must be a nonempty list of index vectors",
            field="new_predictors",
        )
    swapped = FiniteProblem(
        x_labels=problem.x_labels,
        y_labels=problem.y_labels,
        eta=problem.eta,
        loss=problem.loss,
        predictors=new_predictors,
    )
    cross = cross_predictor_pseudometric(problem, new_predictors)
    return swapped, hausdorff(cross)


# --------------------------------------------------------------------------
# Pipelines
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class StageRecord:
    kind: str
    bound: float


def run_pipeline(
    problem: FiniteProblem,
    stages: list[dict],
    lam: np.ndarray | None = None,
) -> tuple[FiniteProblem, list[StageRecord]]:
    """Run corruption stages in order, collecting per-stage certificates.

    Each stage is a dict with a ``kind`` key naming the transform plus its
    parameters (see the individual operations).  The certificates compose by
    the triangle inequality: their sum bounds the distance between the
    pipeline's endpoints.
    """
    records: list[StageRecord] = []
    current = problem
    for idx, stage in enumerate(stages):
        if "kind" not in stage:
            raise ValidationError(f"stages[{idx}] lacks a kind", field=f"stages[{idx}]")
        kind = stage["kind"]
        params = {k: v for k, v in stage.items() if k != "kind"}
        try:
            if kind == "bias_density":
                current, bound = apply_bias_density(
                    current, np.asarray(params["f"], dtype=float)
                )
            elif kind == "restrict":
                current, bound = restrict(
                    current, np.asarray(params["A"], dtype=bool)
                )
            elif kind == "label_noise":
                n_kernel = np.asarray(params["kernel"], dtype=float)
                noised = apply_label_noise(current, n_kernel)
                d_y = np.asarray(
                    params.get("d_y", (current.loss > 0).astype(float)), dtype=float
                )
                lipschitz_c = float(params.get("lipschitz_c", 1.0))
                bound = noise_bound_metric(current, n_kernel, d_y, lipschitz_c)
                current = noised
            elif kind == "general_noise":
                if lam is None:
                    raise ValidationError(
                        "general_noise stages need predictor weights (lambda)",
                        field=f"stages[{idx}]",
                    )
                wp, bound = apply_general_noise(
                    WeightedProblem(problem=current, lam=lam),
                    np.asarray(params["kernel"], dtype=float),
                    p=float(params.get("p", 1.0)),
                )
                current = wp.problem
            elif kind == "loss_swap":
                new_loss = np.asarray(params["loss"], dtype=float)
                swapped = FiniteProblem(
                    x_labels=current.x_labels,
                    y_labels=current.y_labels,
                    eta=current.eta,
                    loss=new_loss,
                    predictors=current.predictors,
                )
                gaps = np.abs(
                    current.predictor_loss_stack() - swapped.predictor_loss_stack()
                )
                bound = float(np.max(np.einsum("xy,hxy->h", current.eta, gaps)))
                current = swapped
            elif kind == "predictor_swap":
                current, bound = predictor_set_bound(
                    current, np.asarray(params["predictors"], dtype=np.int64)
                )
            else:
                raise ValidationError(
                    f"stages[{idx}] has unknown kind {kind!r}",
                    field=f"stages[{idx}].kind",
                )
        except KeyError as missing:
            raise ValidationError(
                f"stages[{idx}] ({kind}) lacks parameter {missing.args[0]!r}",
                field=f"stages[{idx}].{missing.args[0]}",
            ) from None
        records.append(StageRecord(kind=kind, bound=float(bound)))
    return current, records
