"""Closed-form rate shapes, covering bounds and concentration tails.

Every unknown multiplicative constant is set to 1, so the values are rate
*shapes*: only exponents and slopes are comparable with experiments.
Logs are natural throughout; factorials go through log-gamma.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from .ground_space import DomainError

RATE_SHAPE_NOTE = "rate shape: unknown multiplicative constant C set to 1"


class EmptySupportError(ValueError):
    """No admissible count m has positive probability."""


class WindowViolationError(ValueError):
    """epsilon lies above the window where the covering lower bound holds."""


class OutOfRegimeError(ValueError):
    """The requested bound does not apply for this Wasserstein order."""


@dataclass(frozen=True)
class RateParams:
    """Constants entering the rate formulas.

    ``lambda_tail`` and ``k1`` describe the count tail P(|eta| = m) <= k1 exp(-lambda m);
    ``sigma`` and ``k2`` the local mass bound theta(B(x, eps)) <= k2 eps^sigma;
    ``k3`` an optional matching lower tail constant.
    """

    p: float = 1.0
    kappa: float = 0.1
    dim_m: float = 1.0
    lambda_tail: float = 1.0
    k1: float = 1.0
    sigma: float = 1.0
    k2: float = 2.0
    k3: float | None = None
    alpha: float = 1.0
    diam: float = 1.0

    def __post_init__(self):
        if not self.p >= 1:
            raise DomainError(f"order p must be >= 1, got {self.p}")
        if not self.kappa > 0:
            raise DomainError(f"kappa must be positive, got {self.kappa}")
        if not self.dim_m > 0:
            raise DomainError(f"Minkowski dimension must be positive, got {self.dim_m}")
        if not self.lambda_tail > 0:
            raise DomainError(f"tail rate must be positive, got {self.lambda_tail}")

    def require_lower_regime(self):
        if not 0 < self.kappa < self.sigma:
            raise DomainError(f"need 0 < kappa < sigma, got kappa={self.kappa}, sigma={self.sigma}")
        if not self.k2 > 0 or not self.alpha > 0:
            raise DomainError("k2 and alpha must be positive")


def log_covering_bound_nm(m: int, covering_s: int) -> float:
    if m < 1 or covering_s < 1:
        raise DomainError("m and the covering number of S must be >= 1")
    return m + m * math.log1p(covering_s / m)


def covering_bound_nm(m: int, covering_s: int) -> float:
    """Upper bound e^m (1 + M/m)^m on the covering number of m-point measures (inf past float range)."""
    log_value = log_covering_bound_nm(m, covering_s)
    return math.exp(log_value) if log_value < 709.0 else math.inf


def _loglog(n: float) -> tuple[float, float]:
    if n < 3:
        raise DomainError(f"rate needs n >= 3, got {n}")
    log_n = math.log(n)
    return log_n, max(math.log(log_n), 0.0)


def upper_rate(n: float, params: RateParams) -> float:
    log_n, loglog = _loglog(n)
    p = params.p
    coef = 2 * math.sqrt(params.lambda_tail / (p * (params.dim_m + params.kappa)))
    return math.exp((1 + 1 / (2 * p)) * loglog - coef * math.sqrt(log_n))


def upper_rate_interval(n: float, params: RateParams) -> float:
    """Refined shape on a one-dimensional interval (no dimension dependence)."""
    log_n, loglog = _loglog(n)
    p = params.p
    coef = 2 * math.sqrt(params.lambda_tail / p)
    return math.exp((0.5 + 1 / (2 * p)) * loglog - coef * math.sqrt(log_n))


def upper_rate_poisson(n: float, dim_m: float, kappa: float, p: float, chi: float) -> float:
    """Poisson shape exp(-(1 - chi) sqrt(2 / (p (dim + kappa))) sqrt(log n log log n)).

    ``chi = 0`` is accepted as the limiting (constant-free) case.
    """
    if not 0 <= chi < 1:
        raise DomainError(f"chi must lie in [0, 1), got {chi}")
    log_n, loglog = _loglog(n)
    coef = (1 - chi) * math.sqrt(2 / (p * (dim_m + kappa)))
    return math.exp(-coef * math.sqrt(log_n * loglog))


def upper_exponent(n: float, params: RateParams) -> float:
    """The decaying part -2 sqrt(lambda log n / (p (dim + kappa)))."""
    return -2 * math.sqrt(params.lambda_tail * math.log(n) / (params.p * (params.dim_m + params.kappa)))


def lower_exponent(n: float, params: RateParams) -> float:
    """The decaying part -2 sqrt(lambda log n / (p (dim - kappa))) of the matching lower shape."""
    gap = params.dim_m - params.kappa
    if not gap > 0:
        raise DomainError("lower exponent needs kappa < dim")
    return -2 * math.sqrt(params.lambda_tail * math.log(n) / (params.p * gap))


def max_count(n: float) -> int:
    """floor((log n)^(2/3)), the largest count entering the lower bound."""
    if n <= 1:
        return 0
    return math.floor(math.log(n) ** (2.0 / 3.0))


def lower_terms(n: float, params: RateParams, count_pmf: Callable[[int], float]) -> dict[int, float]:
    """``{m: P(m)^(1/p) n^(-1/(m (sigma - kappa)))}`` over admissible m with P(m) > 0."""
    params.require_lower_regime()
    gap = params.sigma - params.kappa
    log_n = math.log(n) if n > 0 else -math.inf
    terms = {}
    for m in range(1, max_count(n) + 1):
        prob = float(count_pmf(m))
        if prob > 0:
            terms[m] = math.exp(math.log(prob) / params.p - log_n / (m * gap))
    return terms


def lower_rate(n: float, params: RateParams, count_pmf: Callable[[int], float], form: str = "wp") -> float:
    """2^(-2-1/p) sup_m P(m)^(1/p) n^(-1/(m (sigma - kappa))).

    ``form="wp"`` returns the bound on W_p, ``form="wpp"`` its p-th power.
    """
    terms = lower_terms(n, params, count_pmf)
    if not terms:
        raise EmptySupportError(f"no m <= {max_count(n)} has positive probability at n={n}")
    value = 2.0 ** (-2 - 1 / params.p) * max(terms.values())
    if form == "wp":
        return value
    if form == "wpp":
        return value ** params.p
    raise ValueError(f"unknown form {form!r}")


def lower_rate_poisson(n: float, params: RateParams, rate: float, form: str = "wp") -> float:
    """lower_rate for a Poisson(rate) count, enumerating the pmf in closed form."""
    if not rate > 0:
        raise DomainError(f"Poisson rate must be positive, got {rate}")
    log_rate = math.log(rate)

    def pmf(m: int) -> float:
        return math.exp(-rate + m * log_rate - math.lgamma(m + 1))

    return lower_rate(n, params, pmf, form)


def lower_rate_tail(n: float, params: RateParams) -> float:
    """Lower shape under a two-sided tail K3 e^{-lambda m} <= P(m), with sigma = dim."""
    if params.k3 is None or not params.k3 > 0:
        raise DomainError("lower_rate_tail needs a positive k3")
    p = params.p
    return (2.0 ** (-2 - 1 / p) * params.k3 ** (1 / p) * math.exp(-params.lambda_tail / p)
            * math.exp(lower_exponent(n, params)))


def window_edge(m: int, params: RateParams) -> float:
    """Largest epsilon for which the m-point covering lower bound holds."""
    params.require_lower_regime()
    s, k = params.sigma, params.kappa
    log_edge = (s / k) * math.log(2) - math.log(params.k2) / k - (math.log(2) + math.lgamma(m + 1)) / (m * k)
    return min(math.exp(log_edge), params.alpha) if log_edge < 700 else params.alpha


def validity_threshold(params: RateParams, n: float) -> bool:
    """True when n exceeds edge_m^(-m (sigma - kappa)) for every admissible m.

    With no admissible m (n < e) the check fails rather than passing vacuously.
    """
    params.require_lower_regime()
    top = max_count(n)
    if top < 1:
        return False
    gap = params.sigma - params.kappa
    log_n = math.log(n)
    return all(log_n > -m * gap * math.log(window_edge(m, params)) for m in range(1, top + 1))


def covering_lower(eps: float, m: int, params: RateParams) -> float:
    """eps^(-m (sigma - kappa)), valid for eps up to and including the window edge."""
    edge = window_edge(m, params)
    if not 0 < eps <= edge:
        raise WindowViolationError(f"epsilon {eps} outside (0, {edge!r}]")
    return math.exp(-m * (params.sigma - params.kappa) * math.log(eps))


def concentration_bound(eps: float, n: int, params: RateParams, two_sided: bool = False) -> float:
    """Tail bound on P(W_p - E W_p > eps) for bounded S and 1 <= p < 2."""
    p = params.p
    if not 1 <= p < 2:
        raise OutOfRegimeError(f"concentration bound needs 1 <= p < 2, got {p}")
    if not eps > 0:
        raise DomainError(f"epsilon must be positive, got {eps}")
    lam, width = params.lambda_tail, params.diam + params.alpha
    denom = (16 * params.k1 * math.exp(lam) * width ** 2 * n ** (1 - 2 / p)
             + 4 * lam ** 2 * eps * width * n ** (-1 / p))
    value = math.exp(-eps ** 2 * lam ** 3 / denom)
    return min(2 * value, 1.0) if two_sided else value


def min_sample_size(target_eps: float, params: RateParams) -> int:
    """Smallest n with exp(-2 sqrt(lambda log n / (p (dim + 2 kappa)))) <= target_eps."""
    if not 0 < target_eps < 1:
        raise DomainError(f"target epsilon must lie in (0, 1), got {target_eps}")
    spread = params.dim_m + 2 * params.kappa
    log_n = params.p * spread * math.log(1 / target_eps) ** 2 / (4 * params.lambda_tail)
    return max(1, math.ceil(math.exp(log_n)))


def evaluate_all(n: float, params: RateParams, eps: float | None = None,
                 poisson_rate: float | None = None, chi: float = 0.0) -> list[dict]:
    """One record per formula, as emitted by ``ppwass bounds eval``."""
    records = [
        {"name": "upper_rate", "n": n, "value": upper_rate(n, params)},
        {"name": "upper_rate_interval", "n": n, "value": upper_rate_interval(n, params)},
        {"name": "upper_rate_poisson", "n": n, "chi": chi,
         "value": upper_rate_poisson(n, params.dim_m, params.kappa, params.p, chi)},
    ]
    if poisson_rate is not None and params.kappa < params.sigma:
        records.append({"name": "lower_rate", "n": n, "poisson_rate": poisson_rate,
                        "value": lower_rate_poisson(n, params, poisson_rate),
                        "valid": validity_threshold(params, n)})
    if eps is not None:
        if params.p < 2:
            records.append({"name": "concentration_bound", "n": n, "eps": eps,
                            "value": concentration_bound(eps, int(n), params)})
        if 0 < eps < 1:
            records.append({"name": "min_sample_size", "eps": eps, "value": min_sample_size(eps, params)})
    for r in records:
        r["note"] = RATE_SHAPE_NOTE
    return records
