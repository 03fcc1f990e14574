"""Exact linear assignment by shortest augmenting paths with dual potentials.

O(n^3) Jonker-Volgenant style solver on a dense square cost matrix. Only the
optimal value and one optimal permutation are returned; ties are broken
arbitrarily but deterministically.
"""
import math

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def _lap(cost):
    n = cost.shape[0]
    inf = np.inf
    # 1-based arrays, index 0 is the virtual root column
    u = np.zeros(n + 1)
    v = np.zeros(n + 1)
    row_of = np.zeros(n + 1, dtype=np.int64)
    way = np.zeros(n + 1, dtype=np.int64)
    minv = np.empty(n + 1)
    used = np.empty(n + 1, dtype=np.bool_)
    for i in range(1, n + 1):
        row_of[0] = i
        j0 = 0
        minv[:] = inf
        used[:] = False
        while True:
            used[j0] = True
            i0 = row_of[j0]
            delta = inf
            j1 = -1
            for j in range(1, n + 1):
                if not used[j]:
                    cur = cost[i0 - 1, j - 1] - u[i0] - v[j]
                    if cur < minv[j]:
                        minv[j] = cur
                        way[j] = j0
                    if minv[j] < delta:
                        delta = minv[j]
                        j1 = j
            for j in range(n + 1):
                if used[j]:
                    u[row_of[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if row_of[j0] == 0:
                break
        while True:
            j1 = way[j0]
            row_of[j0] = row_of[j1]
            j0 = j1
            if j0 == 0:
                break
    col_of_row = np.empty(n, dtype=np.int64)
    for j in range(1, n + 1):
        col_of_row[row_of[j] - 1] = j - 1
    total = 0.0
    for i in range(n):
        total += cost[i, col_of_row[i]]
    return total, col_of_row


def solve_assignment(cost) -> tuple[float, np.ndarray]:
    """Minimise ``sum_i cost[i, perm[i]]`` over permutations.

    Returns ``(value, perm)``. The value is the correctly rounded sum of the
    selected entries, so it depends only on which entries are chosen and not
    on the order of rows.
    """
    cost = np.ascontiguousarray(cost, dtype=np.float64)
    if cost.ndim != 2 or cost.shape[0] != cost.shape[1]:
        raise ValueError(f"cost matrix must be square, got shape {cost.shape}")
    if cost.shape[0] == 0:
        return 0.0, np.zeros(0, dtype=np.int64)
    if not np.all(np.isfinite(cost)):
        raise ValueError("cost matrix entries must be finite")
    _, perm = _lap(cost)
    return math.fsum(cost[np.arange(len(perm)), perm].tolist()), perm
