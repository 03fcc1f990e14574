"""Seeded samplers for Poisson and exponential-kernel Hawkes processes.

Every sampler is a pure function of ``(spec, stream)`` where ``stream`` is an
:class:`~ppwass.rng.RngStream` (or a ``numpy.random.Generator`` when several
draws share one stream).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import gammaln

from .counting_measure import CountingMeasure
from .ground_space import BOX, INTERVAL, DomainError, GroundSpace, UnsupportedSpaceError
from .rng import as_generator

MAX_POINTS = 10 ** 7


class RunawayCascadeError(RuntimeError):
    """A branching simulation exceeded :data:`MAX_POINTS` points."""


class DegenerateFitError(ValueError):
    """The count sample carries no information about the tail decay."""


@dataclass(frozen=True)
class HomogeneousPoisson:
    """Poisson process with total expected mass ``rate = E[eta(S)]``.

    The per-unit intensity is ``rate / |S|``.
    """

    space: GroundSpace
    rate: float

    def __post_init__(self):
        if not self.rate > 0:
            raise DomainError(f"Poisson rate must be positive, got {self.rate}")
        if self.space.kind not in (INTERVAL, BOX):
            raise UnsupportedSpaceError("Poisson sampling needs an interval or box space")


@dataclass(frozen=True)
class InhomogeneousPoisson:
    """Poisson process with density ``intensity(x)`` (per unit volume), bounded by ``lambda_max``.

    ``intensity`` must be vectorised: it receives an array of points
    (shape ``(k,)`` on an interval, ``(k, d)`` on a box).
    """

    space: GroundSpace
    lambda_max: float
    intensity: Callable[[np.ndarray], np.ndarray]

    def __post_init__(self):
        if not self.lambda_max > 0:
            raise DomainError(f"lambda_max must be positive, got {self.lambda_max}")
        if self.space.kind not in (INTERVAL, BOX):
            raise UnsupportedSpaceError("Poisson sampling needs an interval or box space")


@dataclass(frozen=True)
class HawkesExp:
    """Linear Hawkes process on [0, T] with kernel h(t) = a * b * exp(-b t)."""

    space: GroundSpace
    nu: float
    branching: float
    decay: float

    def __post_init__(self):
        if self.space.kind != INTERVAL:
            raise UnsupportedSpaceError("Hawkes sampling needs an interval space")
        if not self.nu > 0:
            raise DomainError(f"baseline nu must be positive, got {self.nu}")
        if not 0 <= self.branching < 1:
            raise DomainError(f"branching ratio must lie in [0, 1), got {self.branching}")
        if not self.decay > 0:
            raise DomainError(f"decay must be positive, got {self.decay}")


@dataclass(frozen=True)
class Deterministic:
    """Cycles through a fixed list of measures: draw ``i`` is ``measures[i % k]``."""

    measures: tuple

    def __post_init__(self):
        object.__setattr__(self, "measures", tuple(self.measures))
        if not self.measures:
            raise ValueError("deterministic sampler needs at least one measure")


SamplerSpec = HomogeneousPoisson | InhomogeneousPoisson | HawkesExp | Deterministic


def _measure(points: np.ndarray, space: GroundSpace) -> CountingMeasure:
    if space.kind == INTERVAL:
        return CountingMeasure(np.sort(points).tolist())
    return CountingMeasure([tuple(p) for p in points.tolist()])


def _uniform(space: GroundSpace, k: int, rng: np.random.Generator) -> np.ndarray:
    if space.kind == INTERVAL:
        return space.T * rng.random(k)
    return space.T * rng.random((k, space.d))


def sample_poisson(spec, stream) -> CountingMeasure:
    rng = as_generator(stream)
    space = spec.space
    if isinstance(spec, HomogeneousPoisson):
        return _measure(_uniform(space, rng.poisson(spec.rate), rng), space)
    if isinstance(spec, InhomogeneousPoisson):
        cand = _uniform(space, rng.poisson(spec.lambda_max * space.volume()), rng)
        dens = np.asarray(spec.intensity(cand), dtype=float).reshape(-1)
        if np.any(dens > spec.lambda_max) or np.any(dens < 0):
            raise DomainError("intensity outside [0, lambda_max] at a candidate point")
        keep = rng.random(len(dens)) * spec.lambda_max < dens
        return _measure(cand[keep], space)
    raise TypeError(f"not a Poisson spec: {type(spec).__name__}")


def sample_hawkes_cluster(spec: HawkesExp, stream) -> CountingMeasure:
    """Immigrants ~ Poisson(nu) on [0, T]; each point spawns Poisson offspring generations."""
    rng = as_generator(stream)
    T, a, b = spec.space.T, spec.branching, spec.decay
    generation = T * rng.random(rng.poisson(spec.nu * T))
    points = [generation]
    total = len(generation)
    while len(generation) and a > 0:
        room = T - generation
        tail = -np.expm1(-b * room)
        counts = rng.poisson(a * tail)
        n_children = int(counts.sum())
        total += n_children
        if total > MAX_POINTS:
            raise RunawayCascadeError(f"cascade exceeded {MAX_POINTS} points")
        # offsets from Exp(b) truncated to [0, T - parent] by inversion
        u = rng.random(n_children)
        offsets = -np.log1p(-u * np.repeat(tail, counts)) / b
        generation = np.minimum(np.repeat(generation, counts) + offsets, T)
        points.append(generation)
    return CountingMeasure(np.sort(np.concatenate(points)).tolist())


def sample_hawkes_thinning(spec: HawkesExp, stream) -> CountingMeasure:
    """Ogata thinning against the current (decaying) conditional intensity."""
    rng = as_generator(stream)
    T, nu, a, b = spec.space.T, spec.nu, spec.branching, spec.decay
    t, excite = 0.0, 0.0
    events = []
    while True:
        bound = nu + excite
        w = rng.exponential(1.0 / bound)
        t += w
        if t > T:
            break
        excite *= math.exp(-b * w)
        if rng.random() * bound <= nu + excite:
            events.append(t)
            excite += a * b
            if len(events) > MAX_POINTS:
                raise RunawayCascadeError(f"cascade exceeded {MAX_POINTS} points")
    return CountingMeasure(events)


def draw(spec, stream) -> CountingMeasure:
    """One realisation from any non-deterministic spec."""
    if isinstance(spec, HawkesExp):
        return sample_hawkes_cluster(spec, stream)
    return sample_poisson(spec, stream)


def sample_law(spec, stream, n: int) -> list[CountingMeasure]:
    """``n`` i.i.d. realisations drawn sequentially from one stream."""
    if isinstance(spec, Deterministic):
        k = len(spec.measures)
        return [spec.measures[i % k] for i in range(n)]
    rng = as_generator(stream)
    return [draw(spec, rng) for _ in range(n)]


# -- count distributions -----------------------------------------------------

def poisson_count_pmf(rate: float) -> Callable[[int], float]:
    def pmf(m: int) -> float:
        return math.exp(-rate + m * math.log(rate) - math.lgamma(m + 1))

    return pmf


def hawkes_expected_count(nu: float, branching: float, decay: float, T: float) -> float:
    """E[N(T)] for the exponential kernel, from the closed-form cluster mean.

    An immigrant at time 0 has on average ``1 + a/(1-a) (1 - exp(-b(1-a)t))``
    descendants (itself included) by time t.
    """
    a, b = branching, decay
    if a == 0:
        return nu * T
    r = b * (1 - a)
    return nu * (T / (1 - a) - a / ((1 - a) * r) * (-math.expm1(-r * T)))


def _check_mu(mu):
    if not 0 < mu < 1:
        raise DomainError(f"Borel parameter must lie in (0, 1), got {mu}")


def borel_pmf(mu: float, m) -> float | np.ndarray:
    """P(X = m) = exp(-mu m) (mu m)^(m-1) / m! for the total progeny X."""
    _check_mu(mu)
    m_arr = np.asarray(m)
    if np.any(m_arr < 1) or np.any(m_arr != np.floor(m_arr)):
        raise DomainError("Borel support is the positive integers")
    m_f = m_arr.astype(float)
    out = np.exp(-mu * m_f + (m_f - 1) * np.log(mu * m_f) - gammaln(m_f + 1))
    return float(out) if out.ndim == 0 else out


def sample_borel(mu: float, stream, size: int | None = None):
    """Total progeny of a Galton-Watson tree with Poisson(mu) offspring."""
    _check_mu(mu)
    rng = as_generator(stream)
    k = 1 if size is None else int(size)
    alive = np.ones(k, dtype=np.int64)
    total = np.ones(k, dtype=np.int64)
    while alive.any():
        # offspring of all current members pooled: Poisson(mu * alive)
        alive = rng.poisson(mu * alive)
        total += alive
        if total.max() > MAX_POINTS:
            raise RunawayCascadeError(f"tree exceeded {MAX_POINTS} nodes")
    return int(total[0]) if size is None else total


def fit_tail(samples) -> tuple[float, float]:
    """Envelope ``K1 exp(-lam m)`` over the empirical count pmf.

    ``lam`` is the count-weighted least-squares slope of log pmf against m
    over the observed counts m >= 1; ``K1`` is then the smallest constant for
    which the envelope dominates the empirical pmf at every observed count.
    """
    counts = np.asarray([len(s) for s in samples])
    if len(counts) < 100:
        raise ValueError(f"need at least 100 samples, got {len(counts)}")
    values, freq = np.unique(counts, return_counts=True)
    if len(values) == 1:
        raise DegenerateFitError(f"all samples have {values[0]} points")
    pmf = freq / len(counts)
    tail = values >= 1
    if tail.sum() < 2:
        raise DegenerateFitError("need at least two distinct positive counts")
    x, y, w = values[tail].astype(float), np.log(pmf[tail]), freq[tail].astype(float)
    xm, ym = np.average(x, weights=w), np.average(y, weights=w)
    slope = np.sum(w * (x - xm) * (y - ym)) / np.sum(w * (x - xm) ** 2)
    lam = -float(slope)
    if not lam > 0:
        raise DegenerateFitError(f"count pmf does not decay (fitted slope {slope:.3g})")
    k1 = float(np.max(pmf * np.exp(lam * values)))
    return k1, lam
