"""Transportation problem with integer masses by successive shortest paths.

Sources are the atoms of the first law with integer supplies, sinks the atoms
of the second with integer demands; every source-sink arc is uncapacitated.
Dijkstra runs on reduced costs (Johnson potentials), so each augmentation is
a true shortest path and the final flow is optimal.
"""
import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def _transport(supply, demand, cost):
    n, N = cost.shape
    inf = np.inf
    flow = np.zeros((n, N), dtype=np.int64)
    rs = supply.copy()
    rd = demand.copy()
    pr = np.zeros(n)
    pc = np.zeros(N)
    pt = 0.0
    V = n + N + 1
    sink = n + N
    dist = np.empty(V)
    pred = np.empty(V, dtype=np.int64)
    done = np.empty(V, dtype=np.bool_)
    remaining = rs.sum()
    while remaining > 0:
        dist[:] = inf
        done[:] = False
        pred[:] = -1
        for i in range(n):
            if rs[i] > 0:
                dist[i] = -pr[i]
        while True:
            u = -1
            best = inf
            for k in range(V):
                if not done[k] and dist[k] < best:
                    best = dist[k]
                    u = k
            if u == -1 or u == sink:
                break
            done[u] = True
            if u < n:
                for j in range(N):
                    if done[n + j]:
                        continue
                    nd = best + cost[u, j] + pr[u] - pc[j]
                    if nd < dist[n + j]:
                        dist[n + j] = nd
                        pred[n + j] = u
            else:
                j = u - n
                for i in range(n):
                    # finalised nodes stay put: rounding on zero reduced costs must not form cycles
                    if flow[i, j] > 0 and not done[i]:
                        nd = best - cost[i, j] + pc[j] - pr[i]
                        if nd < dist[i]:
                            dist[i] = nd
                            pred[i] = u
                if rd[j] > 0:
                    nd = best + pc[j] - pt
                    if nd < dist[sink]:
                        dist[sink] = nd
                        pred[sink] = u
        dt = dist[sink]
        if dt == inf:
            break
        # bottleneck along sink <- col <- row <- ... <- row(source)
        v = pred[sink]
        amount = rd[v - n]
        while True:
            i = pred[v]
            if pred[i] == -1:
                if rs[i] < amount:
                    amount = rs[i]
                break
            w = pred[i]
            if flow[i, w - n] < amount:
                amount = flow[i, w - n]
            v = w
        v = pred[sink]
        rd[v - n] -= amount
        while True:
            i = pred[v]
            flow[i, v - n] += amount
            if pred[i] == -1:
                rs[i] -= amount
                break
            w = pred[i]
            flow[i, w - n] -= amount
            v = w
        remaining -= amount
        for k in range(n):
            pr[k] += min(dist[k], dt)
        for k in range(N):
            pc[k] += min(dist[n + k], dt)
        pt += dt
    return flow


def solve_transport(supply, demand, cost) -> tuple[float, np.ndarray]:
    """Minimise ``sum flow[i, j] * cost[i, j]`` subject to the integer marginals.

    Returns ``(objective, flow)``; supplies and demands must have equal totals.
    """
    supply = np.asarray(supply, dtype=np.int64)
    demand = np.asarray(demand, dtype=np.int64)
    cost = np.ascontiguousarray(cost, dtype=np.float64)
    if cost.shape != (len(supply), len(demand)):
        raise ValueError(f"cost shape {cost.shape} does not match {len(supply)} x {len(demand)}")
    if np.any(supply < 0) or np.any(demand < 0):
        raise ValueError("masses must be non-negative")
    if supply.sum() != demand.sum():
        raise ValueError("total supply and demand differ")
    if not np.all(np.isfinite(cost)):
        raise ValueError("cost entries must be finite")
    flow = _transport(supply, demand, cost)
    if np.any(flow.sum(axis=1) != supply) or np.any(flow.sum(axis=0) != demand):
        raise RuntimeError("transport solver failed to route all mass")
    return float(np.sum(flow * cost)), flow
