"""Compact ground spaces (S, rho) augmented with a far-away point s_alpha."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class DomainError(ValueError):
    """A point or parameter lies outside the admissible domain."""


class UnsupportedSpaceError(ValueError):
    """Operation is only defined for a different kind of ground space."""


class _Augmentation:
    __slots__ = ()

    def __repr__(self) -> str:
        return "AUG"

    def __reduce__(self):
        return "AUG"


#: Token standing for the augmentation point s_alpha.
AUG = _Augmentation()

INTERVAL = "interval"
BOX = "box"
FINITE = "finite"


@dataclass(frozen=True, eq=False)
class GroundSpace:
    """A compact metric space with an augmentation point.

    The augmentation distance is ``rho(s_alpha, x) = alpha + rho(x, anchor)``,
    so that ``inf_x rho(s_alpha, x) = alpha`` is attained at the anchor and
    the triangle inequality carries over to ``S + {s_alpha}``.

    Use the :meth:`interval`, :meth:`box` and :meth:`finite` constructors.
    """

    kind: str
    T: float = 1.0
    d: int = 1
    alpha: float = 1.0
    anchor: object = None
    table: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if not self.alpha > 0:
            raise DomainError(f"alpha must be positive, got {self.alpha}")
        if self.kind in (INTERVAL, BOX):
            if not self.T > 0:
                raise DomainError(f"side length must be positive, got {self.T}")
            if self.d < 1:
                raise DomainError(f"dimension must be >= 1, got {self.d}")
        elif self.kind == FINITE:
            if self.table is None:
                raise DomainError("finite metric space needs a cost table")
        else:
            raise DomainError(f"unknown ground space kind {self.kind!r}")

    # -- constructors ---------------------------------------------------

    @classmethod
    def interval(cls, T: float = 1.0, alpha: float = 1.0) -> GroundSpace:
        # anchor T gives s_alpha = T + alpha on the real line
        return cls(INTERVAL, T=float(T), d=1, alpha=float(alpha), anchor=float(T))

    @classmethod
    def box(cls, d: int, T: float = 1.0, alpha: float = 1.0, anchor=None) -> GroundSpace:
        if anchor is None:
            anchor = (float(T),) * int(d)
        space = cls(BOX, T=float(T), d=int(d), alpha=float(alpha), anchor=tuple(float(a) for a in anchor))
        space._check_point(space.anchor)
        return space

    @classmethod
    def finite(cls, table, alpha: float = 1.0, anchor: int = 0) -> GroundSpace:
        table = np.array(table, dtype=float)
        if table.ndim != 2 or table.shape[0] != table.shape[1] or table.shape[0] == 0:
            raise DomainError("cost table must be a non-empty square matrix")
        if not np.all(np.isfinite(table)) or np.any(table < 0):
            raise DomainError("cost table entries must be finite and non-negative")
        if not np.array_equal(table, table.T):
            raise DomainError("cost table must be symmetric")
        if np.any(np.diag(table) != 0):
            raise DomainError("cost table must have a zero diagonal")
        # rho(i,k) <= rho(i,j) + rho(j,k) for all triples
        excess = table[:, None, :] - (table[:, :, None] + table[None, :, :])
        if np.max(excess) > 1e-12:
            raise DomainError("cost table violates the triangle inequality")
        n = table.shape[0]
        if not 0 <= int(anchor) < n:
            raise DomainError(f"anchor index {anchor} outside 0..{n - 1}")
        table.setflags(write=False)
        return cls(FINITE, T=0.0 if n == 1 else float(table.max()), d=0, alpha=float(alpha),
                   anchor=int(anchor), table=table)

    @classmethod
    def finite_from_csv(cls, path, alpha: float = 1.0, anchor: int = 0) -> GroundSpace:
        table = np.loadtxt(Path(path), delimiter=",", ndmin=2)
        return cls.finite(table, alpha=alpha, anchor=anchor)

    # -- geometry ---------------------------------------------------------

    @property
    def s_alpha(self) -> float:
        """Coordinate of the augmentation point on the real line (intervals only)."""
        if self.kind != INTERVAL:
            raise UnsupportedSpaceError("s_alpha has a coordinate only for interval spaces")
        return self.T + self.alpha

    @property
    def size(self) -> int:
        if self.kind != FINITE:
            raise UnsupportedSpaceError("only finite spaces have a size")
        return self.table.shape[0]

    @property
    def dim_m(self) -> float:
        """Minkowski dimension of S."""
        return {INTERVAL: 1.0, BOX: float(self.d), FINITE: 0.0}[self.kind]

    def volume(self) -> float:
        """Lebesgue measure of S."""
        if self.kind == FINITE:
            raise UnsupportedSpaceError("finite spaces carry no Lebesgue measure")
        return self.T ** self.d

    def _check_point(self, x):
        if self.kind == INTERVAL:
            x = float(x)
            if not 0.0 <= x <= self.T:
                raise DomainError(f"point {x} outside [0, {self.T}]")
            return x
        if self.kind == BOX:
            x = np.asarray(x, dtype=float)
            if x.shape != (self.d,):
                raise DomainError(f"expected a point of dimension {self.d}, got shape {x.shape}")
            if np.any(x < 0) or np.any(x > self.T) or not np.all(np.isfinite(x)):
                raise DomainError(f"point {x.tolist()} outside [0, {self.T}]^{self.d}")
            return x
        i = int(x)
        if i != x or not 0 <= i < self.size:
            raise DomainError(f"point index {x} outside 0..{self.size - 1}")
        return i

    def contains(self, x) -> bool:
        try:
            self._check_point(x)
        except (DomainError, TypeError, ValueError):
            return False
        return True

    def distance(self, x, y) -> float:
        """rho(x, y) on S extended by the augmentation token ``AUG``."""
        if x is AUG and y is AUG:
            return 0.0
        if x is AUG or y is AUG:
            z = self._check_point(y if x is AUG else x)
            return self.alpha + self._rho(z, self._check_point(self.anchor))
        return self._rho(self._check_point(x), self._check_point(y))

    def _rho(self, x, y) -> float:
        if self.kind == INTERVAL:
            return abs(x - y)
        if self.kind == BOX:
            return float(np.sqrt(np.sum((x - y) ** 2)))
        return float(self.table[x, y])

    def diameter(self) -> float:
        if self.kind == INTERVAL:
            return self.T
        if self.kind == BOX:
            return self.T * math.sqrt(self.d)
        return float(self.table.max())

    # -- vectorised helpers used by the D1 evaluators ---------------------

    def as_points(self, points) -> np.ndarray:
        """Validate a sequence of points and return it as an array.

        Intervals give shape ``(k,)`` floats, boxes ``(k, d)`` floats and
        finite spaces ``(k,)`` integer indices.
        """
        if self.kind == INTERVAL:
            arr = np.asarray(points, dtype=float).reshape(-1)
            if arr.size and (np.any(~(arr >= 0)) or np.any(~(arr <= self.T))):
                bad = arr[~((arr >= 0) & (arr <= self.T))][0]
                raise DomainError(f"point {bad} outside [0, {self.T}]")
            return arr
        if self.kind == BOX:
            arr = np.asarray(points, dtype=float)
            if arr.size == 0:
                return arr.reshape(0, self.d)
            if arr.ndim != 2 or arr.shape[1] != self.d:
                raise DomainError(f"expected points of dimension {self.d}, got shape {arr.shape}")
            if np.any(~((arr >= 0) & (arr <= self.T))):
                raise DomainError(f"point outside [0, {self.T}]^{self.d}")
            return arr
        arr = np.asarray(points)
        if arr.size == 0:
            return np.zeros(0, dtype=np.int64)
        if arr.ndim != 1 or not np.all(np.equal(np.mod(arr, 1), 0)):
            raise DomainError("finite-space points must be integer indices")
        arr = arr.astype(np.int64)
        if np.any((arr < 0) | (arr >= self.size)):
            raise DomainError(f"point index outside 0..{self.size - 1}")
        return arr

    def cost_matrix(self, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
        """Pairwise rho between validated point arrays."""
        if self.kind == INTERVAL:
            return np.abs(xs[:, None] - ys[None, :])
        if self.kind == BOX:
            diff = xs[:, None, :] - ys[None, :, :]
            return np.sqrt(np.sum(diff * diff, axis=-1))
        return self.table[np.ix_(xs, ys)]

    def aug_distances(self, ys: np.ndarray) -> np.ndarray:
        """rho(s_alpha, y) for each validated point y."""
        if self.kind == INTERVAL:
            return self.alpha + (self.T - ys)
        if self.kind == BOX:
            anchor = np.asarray(self.anchor, dtype=float)
            return self.alpha + np.sqrt(np.sum((ys - anchor) ** 2, axis=-1))
        return self.alpha + self.table[self.anchor, ys]

    # -- covering numbers --------------------------------------------------

    def covering_number(self, eps: float) -> int:
        """Number of closed balls of diameter ``eps`` used to cover S.

        Exact for intervals; an axis-aligned grid (upper bound) for boxes and
        a greedy cover (upper bound) for finite spaces.
        """
        if not eps > 0:
            raise DomainError(f"eps must be positive, got {eps}")
        if self.kind == INTERVAL:
            return max(1, math.ceil(self.T / eps))
        if self.kind == BOX:
            return max(1, math.ceil(self.T * math.sqrt(self.d) / eps)) ** self.d
        return len(self._greedy_centers(eps))

    def covering_centers(self, eps: float) -> np.ndarray:
        """Centres of the balls counted by :meth:`covering_number`."""
        if not eps > 0:
            raise DomainError(f"eps must be positive, got {eps}")
        if self.kind == INTERVAL:
            k = self.covering_number(eps)
            return (np.arange(k) + 0.5) * (self.T / k)
        if self.kind == BOX:
            k = max(1, math.ceil(self.T * math.sqrt(self.d) / eps))
            axis = (np.arange(k) + 0.5) * (self.T / k)
            grid = np.meshgrid(*([axis] * self.d), indexing="ij")
            return np.stack([g.reshape(-1) for g in grid], axis=1)
        return np.asarray(self._greedy_centers(eps), dtype=np.int64)

    def _greedy_centers(self, eps: float) -> list[int]:
        within = self.table <= eps / 2
        uncovered = np.ones(self.size, dtype=bool)
        centers = []
        while uncovered.any():
            gain = (within & uncovered[None, :]).sum(axis=1)
            c = int(np.argmax(gain))
            centers.append(c)
            uncovered &= ~within[c]
        return centers
