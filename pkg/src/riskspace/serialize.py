"""JSON and CSV interchange.

Problem schema: an object with keys ``x_labels``, ``y_labels``, ``eta``
(row-major nested arrays), ``loss``, ``predictors`` (array of integer
arrays), and optional ``lambda``.  Reals are serialized with ``repr``
precision (17 significant digits), so a dump/load round trip reproduces the
in-memory problem bit for bit.
"""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from typing import Any

import numpy as np

from .distance import DistanceResult
from .empirical import ExperimentReport
from .errors import ValidationError
from .landscape import ReebGraph
from .problems import FiniteProblem, WeightedProblem


def problem_to_dict(
    problem: FiniteProblem, lam: np.ndarray | None = None
) -> dict[str, Any]:
    out: dict[str, Any] = {
        "x_labels": list(problem.x_labels),
        "y_labels": list(problem.y_labels),
        "eta": problem.eta.tolist(),
        "loss": problem.loss.tolist(),
        "predictors": problem.predictors.tolist(),
    }
    if lam is not None:
        out["lambda"] = np.asarray(lam, dtype=float).tolist()
    return out


def weighted_problem_to_dict(wp: WeightedProblem) -> dict[str, Any]:
    return problem_to_dict(wp.problem, lam=wp.lam)


def _require(data: dict, key: str) -> Any:
    if key not in data:
        raise ValidationError(f"problem JSON lacks key {key!r}", field=key)
    return data[key]


def _as_array(data: dict, key: str, dtype) -> np.ndarray:
    try:
        return np.asarray(_require(data, key), dtype=dtype)
    except (ValueError, TypeError) as exc:
        raise ValidationError(
            f"{key} is not a rectangular numeric array: {exc}", field=key
        ) from None


def problem_from_dict(data: dict[str, Any]) -> tuple[FiniteProblem, np.ndarray | None]:
    """Parse the problem schema; returns (problem, lambda-or-None)."""
    if not isinstance(data, dict):
        raise ValidationError("problem JSON must be an object", field="")
    problem = FiniteProblem(
        x_labels=tuple(_require(data, "x_labels")),
        y_labels=tuple(_require(data, "y_labels")),
        eta=_as_array(data, "eta", float),
        loss=_as_array(data, "loss", float),
        predictors=_as_array(data, "predictors", np.int64),
    )
    lam = None
    if data.get("lambda") is not None:
        lam = _as_array(data, "lambda", float)
        WeightedProblem(problem=problem, lam=lam)  # runs the invariants
    return problem, lam


def load_problem(path: str) -> tuple[FiniteProblem, np.ndarray | None]:
    with open(path, encoding="utf-8") as fh:
        return problem_from_dict(json.load(fh))


def distance_result_to_dict(
    result: DistanceResult, include_witnesses: bool = True
) -> dict[str, Any]:
    out: dict[str, Any] = {"value": result.value, "status": result.status}
    if include_witnesses:
        if result.witness_coupling is not None:
            out["witness_coupling"] = result.witness_coupling.tolist()
        if result.witness_correspondence is not None:
            out["witness_correspondence"] = [
                [int(h), int(hp)]
                for h, hp in np.argwhere(result.witness_correspondence)
            ]
        if result.witness_predictor_coupling is not None:
            out["witness_predictor_coupling"] = (
                result.witness_predictor_coupling.tolist()
            )
    return out


def reeb_to_dict(reeb: ReebGraph) -> dict[str, Any]:
    return {
        "nodes": [
            {"id": i, "height": h, "members": list(members)}
            for i, (h, members) in enumerate(reeb.nodes)
        ],
        "edges": [list(e) for e in reeb.edges],
    }


def reeb_to_csv(reeb: ReebGraph) -> str:
    """Plot-ready CSV of (node_id, height, degree)."""
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["node_id", "height", "degree"])
    for i, ((height, _), degree) in enumerate(zip(reeb.nodes, reeb.degrees())):
        writer.writerow([i, repr(height), int(degree)])
    return buf.getvalue()


def report_to_dict(report: ExperimentReport) -> dict[str, Any]:
    return {
        "seed": report.seed,
        "prng": report.prng,
        "rows": [
            {
                "n": row.n,
                "trial": row.trial,
                "seed": row.seed,
                "tv_bound": row.tv_bound,
                "exact_distance": row.exact_distance,
                "bound_used": row.bound_used,
            }
            for row in report.rows
        ],
    }


def report_to_csv(report: ExperimentReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["n", "trial", "seed", "prng", "tv_bound", "exact_distance",
                     "bound_used"])
    for row in report.rows:
        writer.writerow([
            row.n,
            row.trial,
            row.seed,
            report.prng,
            repr(row.tv_bound),
            "" if row.exact_distance is None else repr(row.exact_distance),
            row.bound_used,
        ])
    return buf.getvalue()


def dump_json(data: Any) -> str:
    return json.dumps(data, indent=2, sort_keys=False) + "\n"


def atomic_write(path: str, text: str):
    """Write via a temp file in the target directory, then rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
