import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy.optimize import linear_sum_assignment, linprog

from ppwass.assignment import solve_assignment
from ppwass.flow import solve_transport


def brute_assignment(cost):
    n = cost.shape[0]
    return min(sum(cost[i, p[i]] for i in range(n)) for p in itertools.permutations(range(n)))


@given(arrays(np.float64, st.tuples(st.integers(1, 6), st.just(1)).map(lambda s: (s[0], s[0])),
              elements=st.floats(0, 100, allow_nan=False)))
def test_assignment_matches_permutation_search(cost):
    value, perm = solve_assignment(cost)
    assert sorted(perm.tolist()) == list(range(cost.shape[0]))
    assert value == pytest.approx(brute_assignment(cost), abs=1e-9)
    assert value == pytest.approx(cost[np.arange(len(perm)), perm].sum(), abs=1e-12)


@pytest.mark.parametrize("n", [1, 7, 30, 120])
def test_assignment_matches_scipy(n):
    rng = np.random.default_rng(n)
    for _ in range(5):
        cost = rng.random((n, n)) * rng.choice([1.0, 1e3])
        rows, cols = linear_sum_assignment(cost)
        assert solve_assignment(cost)[0] == pytest.approx(cost[rows, cols].sum(), rel=1e-12, abs=1e-12)


def test_assignment_degenerate_inputs():
    assert solve_assignment(np.zeros((0, 0)))[0] == 0.0
    assert solve_assignment(np.zeros((4, 4)))[0] == 0.0
    with pytest.raises(ValueError):
        solve_assignment(np.zeros((2, 3)))
    with pytest.raises(ValueError):
        solve_assignment(np.array([[0.0, np.inf], [1.0, 0.0]]))


def lp_transport(supply, demand, cost):
    n, m = cost.shape
    a_eq = np.zeros((n + m, n * m))
    for i in range(n):
        a_eq[i, i * m:(i + 1) * m] = 1
    for j in range(m):
        a_eq[n + j, j::m] = 1
    res = linprog(cost.ravel(), A_eq=a_eq, b_eq=np.concatenate([supply, demand]), method="highs")
    return res.fun


@pytest.mark.parametrize("ties", [False, True])
@pytest.mark.parametrize("seed", range(25))
def test_transport_matches_linear_program(seed, ties):
    rng = np.random.default_rng(seed)
    n, m = rng.integers(1, 9, size=2)
    total = int(rng.integers(1, 40))
    supply = rng.multinomial(total, np.ones(n) / n)
    demand = rng.multinomial(total, np.ones(m) / m)
    cost = rng.random((n, m)) * 10
    if ties:
        cost = np.round(cost / 3)
    value, flow = solve_transport(supply, demand, cost)
    assert np.array_equal(flow.sum(axis=1), supply)
    assert np.array_equal(flow.sum(axis=0), demand)
    assert np.all(flow >= 0)
    assert value == pytest.approx(lp_transport(supply, demand, cost), abs=1e-8)


def test_transport_unit_masses_is_assignment():
    rng = np.random.default_rng(3)
    cost = rng.random((12, 12))
    ones = np.ones(12, dtype=np.int64)
    assert solve_transport(ones, ones, cost)[0] == pytest.approx(solve_assignment(cost)[0], abs=1e-12)


def test_transport_input_checks():
    with pytest.raises(ValueError):
        solve_transport([1, 1], [1], np.zeros((2, 1)))
    with pytest.raises(ValueError):
        solve_transport([1], [1], np.zeros((2, 1)))
    with pytest.raises(ValueError):
        solve_transport([-1, 2], [1], np.zeros((2, 1)))
