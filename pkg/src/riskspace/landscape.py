"""Risk landscapes over graph-structured predictor sets.

A predictor graph equips a problem's (finite) predictor list with an
adjacency structure, standing in for a topology on the predictor space.  The
risk function over that graph is the landscape; its Reeb graph contracts
each connected piece of each level set to a node.  Restricting alignments to
inverse-connected correspondences strengthens the plain distance into one
that also controls the landscape's shape.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import CapacityError, ValidationError
from .distance import (
    DistanceResult,
    _PairCosts,
    _coupling_to_product,
    _flat_eta,
    _minimax_coupling_lp,
    check_correspondence,
)
from .problems import FiniteProblem, all_risks, constrained_bayes_risk

CONNECTED_CAP_PAIRS = 9


@dataclass(frozen=True)
class PredictorGraph:
    """A problem plus an undirected adjacency structure on its predictors."""

    problem: FiniteProblem
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        n = self.problem.n_predictors
        norm = []
        for ei, (a, b) in enumerate(self.edges):
            a, b = int(a), int(b)
            if not (0 <= a < n and 0 <= b < n):
                raise ValidationError(
                    f"edges[{ei}] = ({a}, {b}) has an endpoint outside [0, {n})",
                    field=f"edges[{ei}]",
                )
            if a == b:
                raise ValidationError(
                    f"edges[{ei}] is a self-loop", field=f"edges[{ei}]"
                )
            norm.append((min(a, b), max(a, b)))
        object.__setattr__(self, "edges", tuple(sorted(set(norm))))

    def adjacency(self) -> np.ndarray:
        n = self.problem.n_predictors
        adj = np.zeros((n, n), dtype=bool)
        for a, b in self.edges:
            adj[a, b] = adj[b, a] = True
        return adj


@dataclass(frozen=True)
class ReebGraph:
    """Quotient of a predictor graph by connected components of risk levels.

    ``nodes`` holds (height, member predictor indices); ``edges`` connect
    nodes whose member sets are joined by an original edge.
    """

    nodes: tuple[tuple[float, tuple[int, ...]], ...]
    edges: tuple[tuple[int, int], ...]

    def heights(self) -> np.ndarray:
        return np.array([h for h, _ in self.nodes])

    def degrees(self) -> np.ndarray:
        deg = np.zeros(len(self.nodes), dtype=int)
        for a, b in self.edges:
            deg[a] += 1
            deg[b] += 1
        return deg

    def local_minima(self) -> list[int]:
        """Nodes all of whose neighbors sit strictly higher.

        On a circle-shaped landscape the unique minimum is such a node of
        degree two; on an interval it is a degree-one leaf.
        """
        heights = self.heights()
        neighbor_min = np.full(len(self.nodes), np.inf)
        for a, b in self.edges:
            neighbor_min[a] = min(neighbor_min[a], heights[b])
            neighbor_min[b] = min(neighbor_min[b], heights[a])
        return [i for i in range(len(self.nodes)) if heights[i] < neighbor_min[i]]


class _UnionFind:
    def __init__(self, size: int):
        self.parent = list(range(size))

    def find(self, i: int) -> int:
        root = i
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[i] != root:
            self.parent[i], i = root, self.parent[i]
        return root

    def union(self, a: int, b: int):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def risk_landscape(pg: PredictorGraph) -> np.ndarray:
    """Risk of every predictor, indexed like the graph's vertices."""
    return all_risks(pg.problem)


def reeb_graph(pg: PredictorGraph, height_tol: float = 0.0) -> ReebGraph:
    """Contract each same-height connected group of predictors to one node.

    Heights are grouped exactly by default; ``height_tol`` merges levels
    whose gap is at most the tolerance (discretized landscapes rarely collide
    exactly).  The minimum node height equals the problem's optimal risk.
    """
    heights = risk_landscape(pg)
    n = len(heights)
    order = np.argsort(heights, kind="stable")
    level_of = np.empty(n, dtype=int)
    level = 0
    prev = None
    for idx in order:
        if prev is not None and heights[idx] - prev > height_tol:
            level += 1
        level_of[idx] = level
        prev = heights[idx]

    uf = _UnionFind(n)
    for a, b in pg.edges:
        if level_of[a] == level_of[b]:
            uf.union(a, b)
    roots = sorted({uf.find(i) for i in range(n)})
    node_of_root = {root: k for k, root in enumerate(roots)}
    members: list[list[int]] = [[] for _ in roots]
    for i in range(n):
        members[node_of_root[uf.find(i)]].append(i)
    # Members share one height when height_tol is 0; min keeps the lowest
    # node's height bit-equal to the optimal risk even when levels merge.
    nodes = tuple(
        (float(heights[m].min()), tuple(sorted(m))) for m in members
    )
    edges = set()
    node_of = {i: node_of_root[uf.find(i)] for i in range(n)}
    for a, b in pg.edges:
        na, nb = node_of[a], node_of[b]
        if na != nb:
            edges.add((min(na, nb), max(na, nb)))
    return ReebGraph(nodes=nodes, edges=tuple(sorted(edges)))


# --------------------------------------------------------------------------
# Inverse-connected correspondences
# --------------------------------------------------------------------------

def _connected(indices: list[int], adjacency: np.ndarray) -> bool:
    if not indices:
        return False
    seen = {indices[0]}
    stack = [indices[0]]
    index_set = set(indices)
    while stack:
        v = stack.pop()
        for w in indices:
            if w not in seen and adjacency[v, w]:
                seen.add(w)
                stack.append(w)
    return seen == index_set


def is_inverse_connected(
    r: np.ndarray, left: PredictorGraph, right: PredictorGraph
) -> bool:
    """Whether both projections of the correspondence pull connected sets
    back to connected sets.

    The correspondence carries the product-graph structure restricted to its
    pairs: two pairs are adjacent when both coordinates are equal or
    adjacent.  Checking vertex fibers and edge fibers suffices for all
    connected sets (induction along a spanning tree; see
    docs/algorithms.md).
    """
    r = check_correspondence(r)
    adj_left = left.adjacency()
    adj_right = right.adjacency()
    pairs = [tuple(idx) for idx in np.argwhere(r)]
    index_of = {pair: k for k, pair in enumerate(pairs)}
    k = len(pairs)
    adj = np.zeros((k, k), dtype=bool)
    for i, (h1, g1) in enumerate(pairs):
        for j in range(i + 1, k):
            h2, g2 = pairs[j]
            left_ok = h1 == h2 or adj_left[h1, h2]
            right_ok = g1 == g2 or adj_right[g1, g2]
            if left_ok and right_ok:
                adj[i, j] = adj[j, i] = True

    def fiber_left(vertices: set[int]) -> list[int]:
        return [index_of[pr] for pr in pairs if pr[0] in vertices]

    def fiber_right(vertices: set[int]) -> list[int]:
        return [index_of[pr] for pr in pairs if pr[1] in vertices]

    for h in range(left.problem.n_predictors):
        if not _connected(fiber_left({h}), adj):
            return False
    for a, b in left.edges:
        if not _connected(fiber_left({a, b}), adj):
            return False
    for g in range(right.problem.n_predictors):
        if not _connected(fiber_right({g}), adj):
            return False
    for a, b in right.edges:
        if not _connected(fiber_right({a, b}), adj):
            return False
    return True


def connected_risk_distance_exact(
    pg: PredictorGraph,
    pg_prime: PredictorGraph,
    cap_pairs: int = CONNECTED_CAP_PAIRS,
) -> DistanceResult:
    """Risk distance restricted to inverse-connected correspondences.

    All relations on H x H' are enumerated, filtered to inverse-connected
    correspondences, and scored by the exact minimax coupling LP; the best
    survivor wins.  Dominates the unrestricted distance.  If no
    correspondence survives the filter the distance is infinite.
    """
    p, q = pg.problem, pg_prime.problem
    n_pairs = p.n_predictors * q.n_predictors
    if n_pairs > cap_pairs:
        raise CapacityError(
            f"relation enumeration needs |H||H'| <= {cap_pairs}, got {n_pairs}",
            cap="cap_pairs",
            actual=n_pairs,
        )
    costs = _PairCosts(p, q)
    mu, nu = _flat_eta(p), _flat_eta(q)
    cells = list(itertools.product(range(p.n_predictors), range(q.n_predictors)))

    best: tuple[float, np.ndarray | None, np.ndarray | None] = (np.inf, None, None)
    for mask in range(1, 1 << n_pairs):
        r = np.zeros((p.n_predictors, q.n_predictors), dtype=bool)
        for bit, (h, hp) in enumerate(cells):
            if mask >> bit & 1:
                r[h, hp] = True
        if not (r.any(axis=1).all() and r.any(axis=0).all()):
            continue
        if not is_inverse_connected(r, pg, pg_prime):
            continue
        vectors = [costs.vector(h, hp) for (h, hp) in np.argwhere(r)]
        value, gamma_flat = _minimax_coupling_lp(vectors, mu, nu)
        if value < best[0]:
            best = (value, gamma_flat, r)

    value, gamma_flat, r = best
    if gamma_flat is None:
        return DistanceResult(value=np.inf, status="exact")
    return DistanceResult(
        value=max(float(value), 0.0),
        status="exact",
        witness_coupling=_coupling_to_product(gamma_flat, p, q),
        witness_correspondence=r,
    )


def reeb_sandwich(
    pg: PredictorGraph, pg_prime: PredictorGraph
) -> tuple[float, float]:
    """The two computable ends of the landscape-stability sandwich.

    The gap between optimal risks bounds the universal Reeb-graph distance
    from below; the connected distance bounds it from above.  The universal
    distance itself is not computed.
    """
    lower = abs(
        constrained_bayes_risk(pg.problem)
        - constrained_bayes_risk(pg_prime.problem)
    )
    upper = connected_risk_distance_exact(pg, pg_prime).value
    return lower, upper
