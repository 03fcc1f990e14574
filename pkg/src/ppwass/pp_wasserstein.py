"""Order-p Wasserstein distances between finitely supported laws on (N(S), D1)."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from numba import njit

from .assignment import solve_assignment
from .counting_measure import d1, read_weighted_measures
from .flow import solve_transport
from .ground_space import INTERVAL, GroundSpace
from .rng import RngStream
from .samplers import sample_law

MAX_DENOMINATOR = 10 ** 6
MAX_REFERENCE = 16384

INDEPENDENT_PAIR = "independent_pair"
PROXY_REFERENCE = "proxy_reference"

#: Known bias of each estimator of E W_p(empirical_n, true law).
ESTIMATOR_BIAS = {
    INDEPENDENT_PAIR: "E W_p(L_n, L'_n) <= 2 E W_p(L_n, L) (triangle inequality); upward proxy",
    PROXY_REFERENCE: "E W_p(L_n, L_N) <= E W_p(L_n, L) + E W_p(L_N, L)",
}


class UnsupportedWeightsError(ValueError):
    """Weights are not rationals with a common denominator <= 10**6."""


@dataclass(frozen=True, eq=False)
class EmpiricalLaw:
    """A finitely supported law: counting-measure atoms with positive weights."""

    atoms: tuple
    weights: tuple

    def __post_init__(self):
        object.__setattr__(self, "atoms", tuple(self.atoms))
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        if not self.atoms:
            raise ValueError("an empirical law needs at least one atom")
        if len(self.atoms) != len(self.weights):
            raise ValueError("atoms and weights differ in length")
        if any(not w > 0 for w in self.weights):
            raise ValueError("weights must be strictly positive")
        if abs(math.fsum(self.weights) - 1.0) > 1e-12:
            raise ValueError(f"weights sum to {math.fsum(self.weights)!r}, not 1")

    @classmethod
    def uniform(cls, atoms) -> EmpiricalLaw:
        atoms = tuple(atoms)
        return cls(atoms, (1.0 / len(atoms),) * len(atoms))

    @classmethod
    def from_jsonl(cls, path) -> EmpiricalLaw:
        records = read_weighted_measures(path)
        atoms = [m for m, _ in records]
        if all(w is None for _, w in records):
            return cls.uniform(atoms)
        if any(w is None for _, w in records):
            raise ValueError("either every line or no line may carry a weight")
        return cls(atoms, [w for _, w in records])

    def __len__(self) -> int:
        return len(self.atoms)

    @property
    def is_uniform(self) -> bool:
        return all(w == self.weights[0] for w in self.weights)


# -- cost matrices -------------------------------------------------------------

@njit(cache=True, nogil=True)
def _sorted_pairwise(A, la, B, lb, p):
    out = np.empty((A.shape[0], B.shape[0]))
    for i in range(A.shape[0]):
        for j in range(B.shape[0]):
            w = max(la[i], lb[j])
            s = 0.0
            for k in range(w):
                s += abs(A[i, k] - B[j, k])
            out[i, j] = s if p == 1.0 else s ** p
    return out


def _pack_interval(space: GroundSpace, measures, width: int) -> tuple[np.ndarray, np.ndarray]:
    packed = np.full((len(measures), max(width, 1)), space.s_alpha)
    lengths = np.empty(len(measures), dtype=np.int64)
    for i, mu in enumerate(measures):
        pts = np.sort(space.as_points(mu.points))
        packed[i, : len(pts)] = pts
        lengths[i] = len(pts)
    return packed, lengths


def pairwise_costs(space: GroundSpace, A, B, p: float = 1.0) -> np.ndarray:
    """``C[i, j] = d1(A_i, B_j) ** p``; accepts laws or plain measure lists.

    Interval spaces use the sorted-padding evaluation of D1 in compiled code;
    every entry is computed independently of the others.
    """
    if p < 1:
        raise ValueError(f"order p must be >= 1, got {p}")
    a_atoms = A.atoms if isinstance(A, EmpiricalLaw) else tuple(A)
    b_atoms = B.atoms if isinstance(B, EmpiricalLaw) else tuple(B)
    if space.kind == INTERVAL:
        width = max([len(m) for m in a_atoms] + [len(m) for m in b_atoms] + [0])
        pa, la = _pack_interval(space, a_atoms, width)
        pb, lb = _pack_interval(space, b_atoms, width)
        return _sorted_pairwise(pa, la, pb, lb, float(p))
    out = np.empty((len(a_atoms), len(b_atoms)))
    for i, mu in enumerate(a_atoms):
        for j, nu in enumerate(b_atoms):
            out[i, j] = d1(space, mu, nu) ** p
    return out


# -- distances -----------------------------------------------------------------

def wp_from_costs_equal(costs: np.ndarray, p: float) -> float:
    """W_p between two uniform n-atom laws given their D1^p matrix."""
    n = costs.shape[0]
    value, _ = solve_assignment(costs)
    return max(value / n, 0.0) ** (1.0 / p)


def wp_equal(space: GroundSpace, A: EmpiricalLaw, B: EmpiricalLaw, p: float = 1.0) -> float:
    """W_p for uniform laws with equally many atoms, by exact assignment."""
    if len(A) != len(B):
        raise ValueError(f"wp_equal needs equal atom counts, got {len(A)} and {len(B)}")
    if not (A.is_uniform and B.is_uniform):
        raise ValueError("wp_equal needs uniformly weighted laws")
    return wp_from_costs_equal(pairwise_costs(space, A, B, p), p)


def integer_masses(*weight_lists, cap: int = MAX_DENOMINATOR) -> tuple[int, list[np.ndarray]]:
    """Scale weight vectors to integers over their least common denominator."""
    fractions = []
    for weights in weight_lists:
        fr = [Fraction(w).limit_denominator(cap) for w in weights]
        for f, w in zip(fr, weights):
            if abs(float(f) - w) > 1e-12:
                raise UnsupportedWeightsError(f"weight {w!r} is not a fraction with denominator <= {cap}")
        fractions.append(fr)
    denom = 1
    for fr in fractions:
        for f in fr:
            denom = math.lcm(denom, f.denominator)
            if denom > cap:
                raise UnsupportedWeightsError(f"common denominator exceeds {cap}")
    masses = []
    for fr in fractions:
        ints = np.array([int(f * denom) for f in fr], dtype=np.int64)
        if ints.sum() != denom:
            raise UnsupportedWeightsError("rational weights do not sum exactly to 1")
        masses.append(ints)
    return denom, masses


def wp_general(space: GroundSpace, A: EmpiricalLaw, B: EmpiricalLaw, p: float = 1.0) -> float:
    """W_p between arbitrary finitely supported laws by exact min-cost flow."""
    denom, (supply, demand) = integer_masses(A.weights, B.weights)
    costs = pairwise_costs(space, A, B, p)
    value, _ = solve_transport(supply, demand, costs)
    return max(value / denom, 0.0) ** (1.0 / p)


def wp_two_sample(space: GroundSpace, sampler, n: int, mode: str = INDEPENDENT_PAIR,
                  p: float = 1.0, seed: int = 0, reference_size: int | None = None,
                  streams: tuple[RngStream, RngStream] | None = None) -> float:
    """Monte Carlo proxy for E W_p(empirical law of size n, true law).

    ``independent_pair`` compares two independent size-``n`` samples;
    ``proxy_reference`` compares a size-``n`` sample with a size-``N`` one.
    Samples come from ``streams`` (default: streams 0 and 1 of ``seed``).
    """
    if n < 1:
        raise ValueError(f"sample size must be >= 1, got {n}")
    first, second = streams if streams is not None else (RngStream(seed, 0), RngStream(seed, 1))
    sample = sample_law(sampler, first, n)
    if mode == INDEPENDENT_PAIR:
        other = sample_law(sampler, second, n)
        return wp_from_costs_equal(pairwise_costs(space, sample, other, p), p)
    if mode == PROXY_REFERENCE:
        if reference_size is None or reference_size < n:
            raise ValueError("proxy_reference needs a reference size N >= n")
        if reference_size > MAX_REFERENCE:
            raise ValueError(f"reference size capped at {MAX_REFERENCE}")
        if n * reference_size > 10 ** 8:
            warnings.warn(f"transport problem has {n * reference_size} cost entries", RuntimeWarning)
        ref = sample_law(sampler, second, reference_size)
        return wp_general(space, EmpiricalLaw.uniform(sample), EmpiricalLaw.uniform(ref), p)
    raise ValueError(f"unknown estimator mode {mode!r}")


def wp_record(value: float, p: float, mode: str, n: int, seed: int, reference_size: int | None = None) -> dict:
    return {"p": p, "mode": mode, "n": n, "N": reference_size, "seed": seed, "value": value,
            "bias": ESTIMATOR_BIAS.get(mode)}


__all__ = [
    "EmpiricalLaw",
    "UnsupportedWeightsError",
    "pairwise_costs",
    "wp_equal",
    "wp_general",
    "wp_two_sample",
    "integer_masses",
    "ESTIMATOR_BIAS",
]
