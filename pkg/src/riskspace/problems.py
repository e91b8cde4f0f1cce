"""Finite supervised learning problems and their basic functionals.

A problem is the 5-tuple (X, Y, eta, loss, H): finite input and response
label sets, a joint probability mass ``eta`` on X x Y, a loss matrix on
Y x Y, and an explicitly enumerated predictor list H.  Everything downstream
(risk functionals, distances, stability bounds) is built on this container.

Index convention, fixed once and relied on everywhere: ``loss[i, j]`` is the
penalty for *predicting* label ``i`` when the *true* label is ``j``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .errors import ValidationError

# Probability-mass sums are validated at 1e-12; metric structure (symmetry,
# triangle inequality) at 1e-9.  The first is data validation, the second
# absorbs solver round-off.
PROB_TOL = 1e-12
METRIC_TOL = 1e-9


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class FiniteProblem:
    """A finite supervised learning problem.

    Fields
    ------
    x_labels, y_labels : opaque, duplicate-free label strings.
    eta : (nx, ny) nonnegative array summing to 1 (the joint law).
    loss : (ny, ny) finite nonnegative array; ``loss[predicted, true]``.
    predictors : (nH, nx) integer array; ``predictors[k, x]`` is the label
        index produced by predictor k on input x.

    Instances are immutable after construction and safe to share across
    threads.
    """

    x_labels: tuple[str, ...]
    y_labels: tuple[str, ...]
    eta: np.ndarray
    loss: np.ndarray
    predictors: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x_labels", tuple(str(s) for s in self.x_labels))
        object.__setattr__(self, "y_labels", tuple(str(s) for s in self.y_labels))
        object.__setattr__(self, "eta", _freeze(np.asarray(self.eta, dtype=float)))
        object.__setattr__(self, "loss", _freeze(np.asarray(self.loss, dtype=float)))
        object.__setattr__(
            self, "predictors", _freeze(np.asarray(self.predictors, dtype=np.int64))
        )
        self._validate()

    def _validate(self):
        nx, ny = len(self.x_labels), len(self.y_labels)
        if nx < 1:
            raise ValidationError("x_labels must be nonempty", field="x_labels")
        if ny < 1:
            raise ValidationError("y_labels must be nonempty", field="y_labels")
        if len(set(self.x_labels)) != nx:
            raise ValidationError("x_labels contain duplicates", field="x_labels")
        if len(set(self.y_labels)) != ny:
            raise ValidationError("y_labels contain duplicates", field="y_labels")
        if self.eta.shape != (nx, ny):
            raise ValidationError(
                f"eta has shape {self.eta.shape}, expected {(nx, ny)}", field="eta"
            )
        if not np.all(np.isfinite(self.eta)):
            i, j = np.argwhere(~np.isfinite(self.eta))[0]
            raise ValidationError(f"eta[{i}][{j}] is not finite", field=f"eta[{i}][{j}]")
        if np.any(self.eta < 0):
            i, j = np.argwhere(self.eta < 0)[0]
            raise ValidationError(f"eta[{i}][{j}] is negative", field=f"eta[{i}][{j}]")
        total = float(self.eta.sum())
        if abs(total - 1.0) > PROB_TOL:
            raise ValidationError(
                f"eta sums to {total!r}, expected 1 within {PROB_TOL}", field="eta"
            )
        if self.loss.shape != (ny, ny):
            raise ValidationError(
                f"loss has shape {self.loss.shape}, expected {(ny, ny)}", field="loss"
            )
        if not np.all(np.isfinite(self.loss)):
            i, j = np.argwhere(~np.isfinite(self.loss))[0]
            raise ValidationError(
                f"loss[{i}][{j}] is not finite", field=f"loss[{i}][{j}]"
            )
        if np.any(self.loss < 0):
            i, j = np.argwhere(self.loss < 0)[0]
            raise ValidationError(
                f"loss[{i}][{j}] is negative", field=f"loss[{i}][{j}]"
            )
        if self.predictors.ndim != 2 or self.predictors.shape[0] < 1:
            raise ValidationError(
                "predictors must be a nonempty list of index vectors",
                field="predictors",
            )
        if self.predictors.shape[1] != nx:
            raise ValidationError(
                f"predictors have length {self.predictors.shape[1]}, expected {nx}",
                field="predictors",
            )
        bad = (self.predictors < 0) | (self.predictors >= ny)
        if np.any(bad):
            k, x = np.argwhere(bad)[0]
            raise ValidationError(
                f"predictors[{k}][{x}] = {self.predictors[k, x]} is outside [0, {ny})",
                field=f"predictors[{k}][{x}]",
            )
        # Finite risk is automatic for finite matrices; assert anyway.
        assert np.all(np.isfinite(self.loss[self.predictors]))

    # -- basic views -------------------------------------------------------

    @property
    def nx(self) -> int:
        return len(self.x_labels)

    @property
    def ny(self) -> int:
        return len(self.y_labels)

    @property
    def n_predictors(self) -> int:
        return self.predictors.shape[0]

    def predictor_loss(self, h_index: int) -> np.ndarray:
        """The (nx, ny) table of losses incurred by predictor ``h_index``."""
        self._check_h(h_index)
        return self.loss[self.predictors[h_index], :]

    def predictor_loss_stack(self) -> np.ndarray:
        """All predictor loss tables, shape (nH, nx, ny)."""
        return self.loss[self.predictors, :]

    def _check_h(self, h_index: int):
        if not (0 <= int(h_index) < self.n_predictors):
            raise ValidationError(
                f"predictor index {h_index} outside [0, {self.n_predictors})",
                field="h_index",
            )

    def __eq__(self, other):
        if not isinstance(other, FiniteProblem):
            return NotImplemented
        return (
            self.x_labels == other.x_labels
            and self.y_labels == other.y_labels
            and np.array_equal(self.eta, other.eta)
            and np.array_equal(self.loss, other.loss)
            and np.array_equal(self.predictors, other.predictors)
        )


@dataclass(frozen=True, eq=False)
class WeightedProblem:
    """A problem together with a probability weighting ``lam`` on its predictors."""

    problem: FiniteProblem
    lam: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "lam", _freeze(np.asarray(self.lam, dtype=float)))
        if self.lam.shape != (self.problem.n_predictors,):
            raise ValidationError(
                f"lambda has length {self.lam.shape}, expected"
                f" ({self.problem.n_predictors},)",
                field="lambda",
            )
        if np.any(self.lam < 0):
            (k,) = np.argwhere(self.lam < 0)[0]
            raise ValidationError(f"lambda[{k}] is negative", field=f"lambda[{k}]")
        if abs(float(self.lam.sum()) - 1.0) > PROB_TOL:
            raise ValidationError(
                f"lambda sums to {float(self.lam.sum())!r}, expected 1 within"
                f" {PROB_TOL}",
                field="lambda",
            )

    def __eq__(self, other):
        if not isinstance(other, WeightedProblem):
            return NotImplemented
        return self.problem == other.problem and np.array_equal(self.lam, other.lam)


@dataclass(frozen=True, eq=False)
class LossProfile:
    """A discrete distribution of loss values: sorted atoms with merged masses."""

    values: np.ndarray
    masses: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _freeze(np.asarray(self.values, dtype=float)))
        object.__setattr__(self, "masses", _freeze(np.asarray(self.masses, dtype=float)))
        if self.values.ndim != 1 or self.values.shape != self.masses.shape:
            raise ValidationError("profile values/masses must be equal-length vectors")
        if np.any(np.diff(self.values) <= 0):
            raise ValidationError("profile values must be strictly increasing")
        if np.any(self.masses < 0):
            raise ValidationError("profile masses must be nonnegative")
        if abs(float(self.masses.sum()) - 1.0) > PROB_TOL:
            raise ValidationError("profile masses must sum to 1")

    def mean(self) -> float:
        return float(self.values @ self.masses)

    def __eq__(self, other):
        if not isinstance(other, LossProfile):
            return NotImplemented
        return np.array_equal(self.values, other.values) and np.array_equal(
            self.masses, other.masses
        )

    def __hash__(self):
        return hash((self.values.tobytes(), self.masses.tobytes()))


@dataclass(frozen=True)
class Partition:
    """A partition of the response-label indices [0, ny) into disjoint blocks."""

    blocks: tuple[tuple[int, ...], ...]
    ny: int

    def __post_init__(self):
        blocks = tuple(tuple(int(i) for i in b) for b in self.blocks)
        object.__setattr__(self, "blocks", blocks)
        seen: set[int] = set()
        for bi, block in enumerate(blocks):
            if len(block) == 0:
                raise ValidationError(f"blocks[{bi}] is empty", field=f"blocks[{bi}]")
            for i in block:
                if not (0 <= i < self.ny):
                    raise ValidationError(
                        f"blocks[{bi}] contains {i}, outside [0, {self.ny})",
                        field=f"blocks[{bi}]",
                    )
                if i in seen:
                    raise ValidationError(
                        f"index {i} appears in more than one block",
                        field=f"blocks[{bi}]",
                    )
                seen.add(i)
        if len(seen) != self.ny:
            missing = sorted(set(range(self.ny)) - seen)
            raise ValidationError(
                f"blocks do not cover indices {missing}", field="blocks"
            )

    def block_of(self) -> np.ndarray:
        """Map y-index -> block index, as an integer vector of length ny."""
        out = np.empty(self.ny, dtype=np.int64)
        for bi, block in enumerate(self.blocks):
            for i in block:
                out[i] = bi
        return out


class SimulationCheck(NamedTuple):
    ok: bool
    violation: str | None


# --------------------------------------------------------------------------
# Risk functionals
# --------------------------------------------------------------------------

def risk(problem: FiniteProblem, h_index: int) -> float:
    """Expected loss of predictor ``h_index`` under the joint law."""
    table = problem.predictor_loss(h_index)
    return float(np.sum(problem.eta * table))


def all_risks(problem: FiniteProblem) -> np.ndarray:
    """Vector of risks over the whole predictor list."""
    return np.einsum("xy,hxy->h", problem.eta, problem.predictor_loss_stack())


def constrained_bayes_risk(problem: FiniteProblem) -> float:
    """Minimum risk over the predictor list."""
    return float(np.min(all_risks(problem)))


def loss_profile(problem: FiniteProblem, h_index: int) -> LossProfile:
    """Push the joint law through (x, y) -> loss[h(x), y].

    Equal values merge and zero-mass values are dropped: the profile carries
    only the support of the pushforward distribution.
    """
    table = problem.predictor_loss(h_index)
    values, inverse = np.unique(table.ravel(), return_inverse=True)
    masses = np.bincount(inverse, weights=problem.eta.ravel(), minlength=len(values))
    keep = masses > 0
    return LossProfile(values=values[keep], masses=masses[keep] / masses.sum())


def loss_profile_set(problem: FiniteProblem) -> list[LossProfile]:
    """One profile per predictor, in predictor order; duplicates retained."""
    return [loss_profile(problem, k) for k in range(problem.n_predictors)]


def loss_profile_distribution(
    wp: WeightedProblem,
) -> list[tuple[LossProfile, float]]:
    """Distribution over distinct loss profiles induced by the predictor weights.

    Predictors with identical profiles are merged, summing their weights.
    Profiles with zero total weight are dropped.
    """
    atoms: dict[LossProfile, float] = {}
    order: list[LossProfile] = []
    for k, profile in enumerate(loss_profile_set(wp.problem)):
        if profile not in atoms:
            atoms[profile] = 0.0
            order.append(profile)
        atoms[profile] += float(wp.lam[k])
    return [(p, atoms[p]) for p in order if atoms[p] > 0.0]


def predictor_pseudometric(problem: FiniteProblem) -> np.ndarray:
    """Pairwise L1(eta) distances between predictor loss tables.

    Symmetric, zero-diagonal, and triangle-inequality compliant; compares
    predictors purely by the losses they incur.
    """
    stack = problem.predictor_loss_stack().reshape(problem.n_predictors, -1)
    weights = problem.eta.ravel()
    diff = np.abs(stack[:, None, :] - stack[None, :, :])
    return diff @ weights


def cross_predictor_pseudometric(
    problem: FiniteProblem, other_predictors: np.ndarray
) -> np.ndarray:
    """L1(eta) distances between ``problem``'s predictors and another list.

    Both predictor lists are evaluated against ``problem``'s loss and joint
    law, so the two problems must share (X, Y, eta, loss).
    """
    other_predictors = np.asarray(other_predictors, dtype=np.int64)
    stack_a = problem.predictor_loss_stack().reshape(problem.n_predictors, -1)
    stack_b = problem.loss[other_predictors, :].reshape(other_predictors.shape[0], -1)
    weights = problem.eta.ravel()
    return np.abs(stack_a[:, None, :] - stack_b[None, :, :]) @ weights


# --------------------------------------------------------------------------
# Canonical constructions
# --------------------------------------------------------------------------

def one_point_problem(c: float) -> FiniteProblem:
    """The problem with a single point, constant loss ``c``, and one predictor."""
    if c < 0:
        raise ValidationError("constant loss must be nonnegative", field="c")
    return FiniteProblem(
        x_labels=("*",),
        y_labels=("*",),
        eta=np.array([[1.0]]),
        loss=np.array([[float(c)]]),
        predictors=np.array([[0]]),
    )


def encode_mm_space(
    points: Sequence[str], dist: np.ndarray, mu: np.ndarray
) -> FiniteProblem:
    """Encode a finite metric measure space as a problem.

    The input and response spaces are both the point set, the joint law sits
    on the diagonal with the point masses, the loss is the metric, and the
    predictors are the constant maps.  Isometric relabelings encode to
    problems at distance zero.
    """
    dist = np.asarray(dist, dtype=float)
    mu = np.asarray(mu, dtype=float)
    n = len(points)
    if dist.shape != (n, n):
        raise ValidationError(
            f"dist has shape {dist.shape}, expected {(n, n)}", field="dist"
        )
    _check_metric_matrix(dist, field="dist")
    if mu.shape != (n,) or np.any(mu < 0) or abs(float(mu.sum()) - 1.0) > PROB_TOL:
        raise ValidationError("mu must be a probability vector over points", field="mu")
    eta = np.diag(mu)
    predictors = np.repeat(np.arange(n)[:, None], n, axis=1)
    return FiniteProblem(
        x_labels=tuple(points),
        y_labels=tuple(points),
        eta=eta,
        loss=dist,
        predictors=predictors,
    )


def encode_mm_space_weighted(
    points: Sequence[str], dist: np.ndarray, mu: np.ndarray
) -> WeightedProblem:
    """Weighted variant of :func:`encode_mm_space`: the constant predictor at
    each point carries that point's mass."""
    problem = encode_mm_space(points, dist, mu)
    return WeightedProblem(problem=problem, lam=np.asarray(mu, dtype=float))


def _check_metric_matrix(d: np.ndarray, field: str = "dist"):
    if np.any(d < 0) or not np.all(np.isfinite(d)):
        raise ValidationError(f"{field} must be finite and nonnegative", field=field)
    if np.any(np.abs(np.diag(d)) > 0):
        raise ValidationError(f"{field} must have a zero diagonal", field=field)
    if np.max(np.abs(d - d.T)) > METRIC_TOL:
        raise ValidationError(f"{field} must be symmetric", field=field)
    # triangle inequality: d[i,k] <= d[i,j] + d[j,k] for all triples
    slack = d[:, None, :] - (d[:, :, None] + d[None, :, :])
    if np.max(slack) > METRIC_TOL:
        i, j, k = np.unravel_index(np.argmax(slack), slack.shape)
        raise ValidationError(
            f"{field} violates the triangle inequality on ({i},{j},{k})", field=field
        )


# --------------------------------------------------------------------------
# Coarsening
# --------------------------------------------------------------------------

def coarsen(problem: FiniteProblem, q: Partition) -> FiniteProblem:
    """Collapse the response space to the blocks of ``q``.

    Block masses add, the block loss is the worst case over constituent
    labels, and predictors are composed with the quotient map (duplicates
    removed: a predictor set carries no multiplicity).
    """
    if q.ny != problem.ny:
        raise ValidationError(
            f"partition covers [0, {q.ny}) but the problem has {problem.ny} labels",
            field="blocks",
        )
    block_of = q.block_of()
    nb = len(q.blocks)
    eta_q = np.zeros((problem.nx, nb))
    for bi, block in enumerate(q.blocks):
        eta_q[:, bi] = problem.eta[:, list(block)].sum(axis=1)
    loss_q = np.empty((nb, nb))
    for bi, block_i in enumerate(q.blocks):
        for bj, block_j in enumerate(q.blocks):
            loss_q[bi, bj] = problem.loss[np.ix_(list(block_i), list(block_j))].max()
    coarse = block_of[problem.predictors]
    _, keep = np.unique(coarse, axis=0, return_index=True)
    coarse = coarse[np.sort(keep)]
    labels = tuple(
        "{" + ",".join(problem.y_labels[i] for i in block) + "}" for block in q.blocks
    )
    return FiniteProblem(
        x_labels=problem.x_labels,
        y_labels=labels,
        eta=eta_q,
        loss=loss_q,
        predictors=coarse,
    )


def coarsen_weighted(wp: WeightedProblem, q: Partition) -> WeightedProblem:
    """Coarsen a weighted problem; weights of predictors that collapse to the
    same coarse predictor are summed."""
    block_of = q.block_of()
    coarse = block_of[wp.problem.predictors]
    _, keep, inverse = np.unique(coarse, axis=0, return_index=True, return_inverse=True)
    order = np.argsort(keep)
    rank = np.empty_like(order)
    rank[order] = np.arange(len(order))
    lam_q = np.bincount(rank[inverse], weights=wp.lam, minlength=len(order))
    return WeightedProblem(problem=coarsen(wp.problem, q), lam=lam_q)


def coarsening_bound(problem: FiniteProblem, q: Partition) -> float:
    """Worst block-pair oscillation of the loss: an a-priori cap on how far
    coarsening by ``q`` can move the problem.

    For every ordered block pair the loss is scanned over the product of the
    two blocks; the bound is the largest (max - min) gap found.
    """
    if q.ny != problem.ny:
        raise ValidationError(
            f"partition covers [0, {q.ny}) but the problem has {problem.ny} labels",
            field="blocks",
        )
    worst = 0.0
    for block_i in q.blocks:
        for block_j in q.blocks:
            sub = problem.loss[np.ix_(list(block_i), list(block_j))]
            worst = max(worst, float(sub.max() - sub.min()))
    return worst


def singleton_partition(ny: int) -> Partition:
    return Partition(blocks=tuple((i,) for i in range(ny)), ny=ny)


# --------------------------------------------------------------------------
# Simulation checking
# --------------------------------------------------------------------------

def verify_simulation(
    p_rich: FiniteProblem,
    p: FiniteProblem,
    f1: Sequence[int],
    f2: Sequence[int],
    fwd: Sequence[int],
    bwd: Sequence[int],
    tol: float = PROB_TOL,
) -> SimulationCheck:
    """Check that ``p_rich`` simulates ``p`` via the given component maps.

    ``f1`` maps rich inputs onto base inputs, ``f2`` rich labels onto base
    labels; ``fwd[h]`` names, for each base predictor, a rich predictor that
    matches its losses, and ``bwd[h']`` conversely.  The pushforward of the
    rich joint law must equal the base law, and matched predictors must incur
    identical losses at every rich observation of positive mass.
    """
    f1 = np.asarray(f1, dtype=np.int64)
    f2 = np.asarray(f2, dtype=np.int64)
    fwd = np.asarray(fwd, dtype=np.int64)
    bwd = np.asarray(bwd, dtype=np.int64)
    if f1.shape != (p_rich.nx,):
        raise ValidationError(f"f1 must have length {p_rich.nx}", field="f1")
    if f2.shape != (p_rich.ny,):
        raise ValidationError(f"f2 must have length {p_rich.ny}", field="f2")
    if np.any((f1 < 0) | (f1 >= p.nx)):
        raise ValidationError(f"f1 values must lie in [0, {p.nx})", field="f1")
    if np.any((f2 < 0) | (f2 >= p.ny)):
        raise ValidationError(f"f2 values must lie in [0, {p.ny})", field="f2")
    if fwd.shape != (p.n_predictors,) or np.any(
        (fwd < 0) | (fwd >= p_rich.n_predictors)
    ):
        raise ValidationError(
            f"fwd must map [0, {p.n_predictors}) into [0, {p_rich.n_predictors})",
            field="fwd",
        )
    if bwd.shape != (p_rich.n_predictors,) or np.any(
        (bwd < 0) | (bwd >= p.n_predictors)
    ):
        raise ValidationError(
            f"bwd must map [0, {p_rich.n_predictors}) into [0, {p.n_predictors})",
            field="bwd",
        )

    pushed = np.zeros((p.nx, p.ny))
    np.add.at(pushed, (f1[:, None], f2[None, :]), p_rich.eta)
    gap = np.abs(pushed - p.eta)
    if np.max(gap) > tol:
        i, j = np.unravel_index(np.argmax(gap), gap.shape)
        return SimulationCheck(
            False,
            f"pushforward of the rich joint law differs from eta at [{i}][{j}]:"
            f" {pushed[i, j]!r} vs {p.eta[i, j]!r}",
        )

    support = p_rich.eta > 0
    base_tables = p.predictor_loss_stack()  # (nH, nx, ny)
    pulled = base_tables[:, f1[:, None], f2[None, :]]  # (nH, nx', ny')
    rich_tables = p_rich.predictor_loss_stack()
    for h in range(p.n_predictors):
        diff = np.abs(rich_tables[fwd[h]] - pulled[h])
        bad = diff > tol
        if np.any(bad & support):
            i, j = np.argwhere(bad & support)[0]
            return SimulationCheck(
                False,
                f"predictor {h} (matched to rich predictor {fwd[h]}) incurs"
                f" loss {pulled[h][i, j]!r} but the rich problem pays"
                f" {rich_tables[fwd[h]][i, j]!r} at supported point [{i}][{j}]",
            )
    for hp in range(p_rich.n_predictors):
        diff = np.abs(rich_tables[hp] - pulled[bwd[hp]])
        bad = diff > tol
        if np.any(bad & support):
            i, j = np.argwhere(bad & support)[0]
            return SimulationCheck(
                False,
                f"rich predictor {hp} (matched to predictor {bwd[hp]}) pays"
                f" {rich_tables[hp][i, j]!r} but the base problem pays"
                f" {pulled[bwd[hp]][i, j]!r} at supported point [{i}][{j}]",
            )
    return SimulationCheck(True, None)
