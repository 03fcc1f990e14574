"""Finite counting measures and the augmented assignment metric D1."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

from .assignment import solve_assignment
from .ground_space import BOX, INTERVAL, GroundSpace, UnsupportedSpaceError


@dataclass(frozen=True)
class CountingMeasure:
    """A finite multiset of points; ``CountingMeasure(())`` is the zero measure."""

    points: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(_freeze(p) for p in self.points))

    @property
    def cardinality(self) -> int:
        return len(self.points)

    def __len__(self) -> int:
        return len(self.points)

    def sorted(self) -> CountingMeasure:
        return CountingMeasure(tuple(sorted(self.points)))

    def to_json(self) -> list:
        return [list(p) if isinstance(p, tuple) else p for p in self.points]


def _freeze(p):
    if isinstance(p, (list, tuple, np.ndarray)):
        return tuple(float(c) for c in p)
    if isinstance(p, (int, np.integer)) and not isinstance(p, bool):
        return int(p)
    return float(p)


ZERO = CountingMeasure(())


def _canonical(space: GroundSpace, mu: CountingMeasure) -> np.ndarray:
    pts = space.as_points(mu.points)
    if space.kind == BOX:
        if len(pts) == 0:
            return pts
        order = np.lexsort(pts.T[::-1])
        return pts[order]
    return np.sort(pts)


def _ordered_pair(space: GroundSpace, mu1: CountingMeasure, mu2: CountingMeasure):
    xs, ys = _canonical(space, mu1), _canonical(space, mu2)
    # fixed orientation so that d1(a, b) and d1(b, a) solve the same problem
    if len(xs) > len(ys) or (len(xs) == len(ys) and xs.tolist() > ys.tolist()):
        xs, ys = ys, xs
    return xs, ys


def d1(space: GroundSpace, mu1: CountingMeasure, mu2: CountingMeasure) -> float:
    """D1 distance by exact assignment after padding with copies of s_alpha."""
    xs, ys = _ordered_pair(space, mu1, mu2)
    n, m = len(xs), len(ys)
    if m == 0:
        return 0.0
    if n == 0:
        if space.kind == INTERVAL:
            return _exact_interval_cost(space, xs, xs, ys)
        return math.fsum(space.aug_distances(ys).tolist())
    if n == m and np.array_equal(xs, ys):
        return 0.0
    cost = np.empty((m, m))
    cost[:n] = space.cost_matrix(xs, ys)
    cost[n:] = space.aug_distances(ys)[None, :]
    value, perm = solve_assignment(cost)
    if space.kind == INTERVAL:
        return _exact_interval_cost(space, xs, ys[perm[:n]], ys[perm[n:]])
    return value


def _exact_interval_cost(space: GroundSpace, xs, ys, padded) -> float:
    """Correctly rounded real value of sum |x_i - y_i| + sum (alpha + T - y) over the padded ys.

    Each term is split into its exact float parts before a single fsum, so
    the result does not depend on how the terms are ordered.
    """
    parts = []
    for x, y in zip(xs.tolist(), ys.tolist()):
        parts += (x, -y) if x >= y else (y, -x)
    for y in padded.tolist():
        parts += (space.alpha, space.T, -y)
    return math.fsum(parts)


def _padded_sorted(space: GroundSpace, mu1, mu2):
    if space.kind != INTERVAL:
        raise UnsupportedSpaceError(f"1-D fast path needs an interval space, got {space.kind}")
    xs, ys = np.sort(space.as_points(mu1.points)), np.sort(space.as_points(mu2.points))
    m = max(len(xs), len(ys))
    # s_alpha = T + alpha lies to the right of S, so padding goes at the end
    xs = np.concatenate([xs, np.full(m - len(xs), space.s_alpha)])
    ys = np.concatenate([ys, np.full(m - len(ys), space.s_alpha)])
    return xs, ys


def d1_sorted_1d(space: GroundSpace, mu1: CountingMeasure, mu2: CountingMeasure) -> float:
    """D1 on an interval: sum of gaps between sorted padded point lists."""
    if space.kind != INTERVAL:
        raise UnsupportedSpaceError(f"1-D fast path needs an interval space, got {space.kind}")
    xs, ys = np.sort(space.as_points(mu1.points)), np.sort(space.as_points(mu2.points))
    if len(xs) > len(ys):
        xs, ys = ys, xs
    # s_alpha lies to the right of S, so the padding pairs with the largest points
    return _exact_interval_cost(space, xs, ys[: len(xs)], ys[len(xs):])


def cdf_gap_area(space: GroundSpace, mu1: CountingMeasure, mu2: CountingMeasure) -> float:
    """Area between the step CDFs F(t) = mu([0, t]) / m of the padded measures."""
    xs, ys = _padded_sorted(space, mu1, mu2)
    m = len(xs)
    if m == 0:
        return 0.0
    knots = np.unique(np.concatenate([[0.0], xs, ys, [space.s_alpha]]))
    left = knots[:-1]
    widths = np.diff(knots)
    gap = np.abs(np.searchsorted(xs, left, side="right") - np.searchsorted(ys, left, side="right"))
    return float(np.sum(gap * widths)) / m


def d1_cdf_area(space: GroundSpace, mu1: CountingMeasure, mu2: CountingMeasure) -> float:
    """D1 on an interval as m times the area between the padded CDFs."""
    m = max(len(mu1), len(mu2))
    return m * cdf_gap_area(space, mu1, mu2)


def d1_upper_bound(space: GroundSpace, mu1: CountingMeasure, mu2: CountingMeasure) -> float:
    return max(len(mu1), len(mu2)) * (space.diameter() + space.alpha)


# -- JSONL persistence ------------------------------------------------------

def parse_measure(obj) -> tuple[CountingMeasure, float | None]:
    """Decode one JSONL record: a bare point array or ``{"points": [...], "weight": w}``."""
    if isinstance(obj, dict):
        weight = obj.get("weight")
        return CountingMeasure(obj.get("points", ())), None if weight is None else float(weight)
    return CountingMeasure(obj), None


def read_measures(path) -> list[CountingMeasure]:
    return [m for m, _ in read_weighted_measures(path)]


def read_weighted_measures(path) -> list[tuple[CountingMeasure, float | None]]:
    records = []
    with open(Path(path)) as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(parse_measure(json.loads(line)))
    return records


def write_measures(path, measures: Iterable[CountingMeasure], weights=None) -> None:
    with open(Path(path), "w") as fh:
        for i, mu in enumerate(measures):
            if weights is None:
                fh.write(json.dumps(mu.to_json()) + "\n")
            else:
                fh.write(json.dumps({"points": mu.to_json(), "weight": float(weights[i])}) + "\n")


__all__ = [
    "CountingMeasure",
    "ZERO",
    "d1",
    "d1_sorted_1d",
    "d1_cdf_area",
    "cdf_gap_area",
    "d1_upper_bound",
    "read_measures",
    "read_weighted_measures",
    "write_measures",
]
