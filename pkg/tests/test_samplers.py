import math

import numpy as np
import pytest
from scipy import stats
from scipy.integrate import solve_ivp

from ppwass import samplers
from ppwass.counting_measure import CountingMeasure
from ppwass.ground_space import DomainError, GroundSpace, UnsupportedSpaceError
from ppwass.rng import RngStream, as_generator
from ppwass.samplers import (
    DegenerateFitError,
    Deterministic,
    HawkesExp,
    HomogeneousPoisson,
    InhomogeneousPoisson,
    RunawayCascadeError,
    borel_pmf,
    draw,
    fit_tail,
    hawkes_expected_count,
    poisson_count_pmf,
    sample_borel,
    sample_hawkes_cluster,
    sample_hawkes_thinning,
    sample_law,
)


def test_streams_replay_and_separate():
    a = RngStream(7, 3).generator().random(5)
    assert np.array_equal(a, RngStream(7, 3).generator().random(5))
    assert not np.array_equal(a, RngStream(7, 4).generator().random(5))
    assert not np.array_equal(a, RngStream(8, 3).generator().random(5))
    assert RngStream.for_replication(1, 2, 5).stream_index == 2 * 2 ** 20 + 5
    g = np.random.default_rng(0)
    assert as_generator(g) is g
    with pytest.raises(ValueError):
        RngStream(-1)


def test_poisson_counts_and_locations():
    space = GroundSpace.interval(2.0, 1.0)
    spec = HomogeneousPoisson(space, 3.0)
    draws = sample_law(spec, RngStream(11), 20000)
    counts = np.array([len(m) for m in draws])
    assert abs(counts.mean() - 3.0) < 4 * math.sqrt(3.0 / 20000)
    pts = np.concatenate([np.asarray(m.points) for m in draws])
    assert pts.min() >= 0 and pts.max() <= 2.0
    assert stats.kstest(pts, stats.uniform(0, 2).cdf).pvalue > 0.01
    assert all(list(m.points) == sorted(m.points) for m in draws[:50])


def test_box_poisson():
    space = GroundSpace.box(3, 0.5, 1.0)
    m = draw(HomogeneousPoisson(space, 40.0), RngStream(2))
    arr = np.asarray(m.points)
    assert arr.shape[1] == 3 and arr.min() >= 0 and arr.max() <= 0.5


def test_inhomogeneous_thinning():
    space = GroundSpace.interval(1.0, 1.0)
    spec = InhomogeneousPoisson(space, 4.0, lambda x: 4.0 * x)
    draws = sample_law(spec, RngStream(5), 20000)
    counts = np.array([len(m) for m in draws])
    assert abs(counts.mean() - 2.0) < 4 * math.sqrt(2.0 / 20000)
    pts = np.concatenate([np.asarray(m.points) for m in draws])
    assert stats.kstest(pts, lambda x: x ** 2).pvalue > 0.01
    bad = InhomogeneousPoisson(space, 1.0, lambda x: 2.0 * np.ones_like(x))
    with pytest.raises(DomainError):
        draw(bad, RngStream(0, 1))


def test_spec_validation():
    space = GroundSpace.interval()
    with pytest.raises(DomainError):
        HomogeneousPoisson(space, 0.0)
    with pytest.raises(DomainError):
        HawkesExp(space, 1.0, 1.0, 1.0)
    with pytest.raises(UnsupportedSpaceError):
        HawkesExp(GroundSpace.box(2), 1.0, 0.5, 1.0)
    with pytest.raises(UnsupportedSpaceError):
        HomogeneousPoisson(GroundSpace.finite([[0.0]]), 1.0)


def test_deterministic_cycles():
    ms = [CountingMeasure([0.1]), CountingMeasure([])]
    out = sample_law(Deterministic(ms), RngStream(0), 5)
    assert out == [ms[0], ms[1], ms[0], ms[1], ms[0]]


def ode_mean_count(nu, a, b, T):
    # cluster size m(t) = 1 + g(t) with g' = a b - b (1 - a) g, g(0) = 0; E N(T) = nu int_0^T m
    def rhs(t, y):
        g, acc = y
        return [a * b - b * (1 - a) * g, nu * (1 + g)]

    return solve_ivp(rhs, (0, T), [0.0, 0.0], rtol=1e-11, atol=1e-12).y[1, -1]


@pytest.mark.parametrize("nu,a,b,T", [(1.0, 0.5, 2.0, 10.0), (0.5, 0.8, 0.3, 4.0), (2.0, 0.0, 1.0, 3.0)])
def test_hawkes_expected_count_closed_form(nu, a, b, T):
    assert hawkes_expected_count(nu, a, b, T) == pytest.approx(ode_mean_count(nu, a, b, T), rel=1e-8)


def test_hawkes_long_horizon_limit():
    T = 1e6
    assert hawkes_expected_count(1.0, 0.5, 2.0, T) / T == pytest.approx(2.0, rel=1e-5)


def test_hawkes_cluster_and_thinning_agree():
    spec = HawkesExp(GroundSpace.interval(10.0, 1.0), 1.0, 0.5, 2.0)
    rng_a, rng_b = RngStream(21, 0).generator(), RngStream(21, 1).generator()
    a = np.array([len(sample_hawkes_cluster(spec, rng_a)) for _ in range(3000)])
    b = np.array([len(sample_hawkes_thinning(spec, rng_b)) for _ in range(3000)])
    expected = hawkes_expected_count(1.0, 0.5, 2.0, 10.0)
    for counts in (a, b):
        assert abs(counts.mean() - expected) < 4 * counts.std() / math.sqrt(len(counts))
    assert stats.ks_2samp(a, b).pvalue > 0.01
    pts = np.concatenate([np.asarray(sample_hawkes_cluster(spec, rng_a).points) for _ in range(50)])
    assert pts.min() >= 0 and pts.max() <= 10.0


def test_runaway_cascade(monkeypatch):
    monkeypatch.setattr(samplers, "MAX_POINTS", 50)
    spec = HawkesExp(GroundSpace.interval(100.0, 1.0), 5.0, 0.9, 1.0)
    with pytest.raises(RunawayCascadeError):
        sample_hawkes_cluster(spec, RngStream(0))
    with pytest.raises(RunawayCascadeError):
        sample_hawkes_thinning(spec, RngStream(0))


def test_borel_pmf():
    m = np.arange(1, 4000)
    assert borel_pmf(0.5, m).sum() == pytest.approx(1.0, abs=1e-12)
    assert borel_pmf(0.5, 1) == pytest.approx(math.exp(-0.5))
    assert borel_pmf(0.5, 2) == pytest.approx(math.exp(-1.0) * 1.0 / 2)
    assert np.sum(m * borel_pmf(0.3, m)) == pytest.approx(1 / 0.7, rel=1e-10)
    with pytest.raises(DomainError):
        borel_pmf(1.0, 3)
    with pytest.raises(DomainError):
        borel_pmf(0.5, 0)


def test_borel_sampler():
    x = sample_borel(0.5, RngStream(3), size=100000)
    assert abs(x.mean() - 2.0) < 3 * x.std() / math.sqrt(len(x))
    freq = np.bincount(x, minlength=21)[1:21] / len(x)
    assert 0.5 * np.abs(freq - borel_pmf(0.5, np.arange(1, 21))).sum() < 0.01
    assert isinstance(sample_borel(0.5, RngStream(3)), int)


def test_poisson_count_pmf():
    pmf = poisson_count_pmf(2.0)
    assert sum(pmf(m) for m in range(60)) == pytest.approx(1.0)
    assert pmf(0) == pytest.approx(math.exp(-2))


def quantised_sample(k1, lam, size):
    """Counts whose empirical pmf is floor(size * k1 e^{-lam m}) / size for m >= 2, rest at 0."""
    counts = []
    m = 2
    while True:
        k = int(size * k1 * math.exp(-lam * m))
        if k == 0:
            break
        counts += [m] * k
        m += 1
    counts += [0] * (size - len(counts))
    return [CountingMeasure([0.0] * c) for c in counts]


def test_fit_tail_recovers_envelope():
    k1, lam = fit_tail(quantised_sample(2.0, 1.0, 10 ** 6))
    assert lam == pytest.approx(1.0, abs=0.01)
    assert k1 == pytest.approx(2.0, abs=0.01)


def test_fit_tail_envelope_dominates():
    draws = sample_law(HomogeneousPoisson(GroundSpace.interval(), 1.5), RngStream(4), 5000)
    k1, lam = fit_tail(draws)
    counts = np.array([len(m) for m in draws])
    values, freq = np.unique(counts, return_counts=True)
    assert np.all(freq / len(counts) <= k1 * np.exp(-lam * values) + 1e-12)


def test_fit_tail_degenerate():
    with pytest.raises(DegenerateFitError):
        fit_tail([CountingMeasure([0.1, 0.2])] * 200)
    with pytest.raises(DegenerateFitError):
        fit_tail([CountingMeasure([])] * 150 + [CountingMeasure([0.1])] * 50)
    with pytest.raises(ValueError):
        fit_tail([CountingMeasure([])] * 10)
