"""Experiment harness: convergence, concentration and Campbell studies.

All randomness flows from ``master_seed`` through :class:`RngStream`. Grid
point ``g`` of experiment ``e`` owns stream block ``1024 * e + g``;
replication ``r`` inside it draws its two samples from streams ``2r`` and
``2r + 1``. Results are therefore identical at any thread count.
"""
from __future__ import annotations

import csv
import dataclasses
import json
import math
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .bounds import (
    RATE_SHAPE_NOTE,
    EmptySupportError,
    OutOfRegimeError,
    RateParams,
    concentration_bound,
    evaluate_all,
    lower_rate,
    upper_rate,
    upper_rate_poisson,
    validity_threshold,
)
from .counting_measure import read_measures, write_measures
from .ground_space import BOX, FINITE, INTERVAL, DomainError, GroundSpace
from .pp_wasserstein import ESTIMATOR_BIAS, INDEPENDENT_PAIR, wp_two_sample
from .rng import STREAM_BLOCK, RngStream
from .samplers import (
    DegenerateFitError,
    Deterministic,
    HawkesExp,
    HomogeneousPoisson,
    fit_tail,
    hawkes_expected_count,
    poisson_count_pmf,
    sample_law,
)

SCHEMA_VERSION = 1
GRID_BLOCK = 1024
AUX_GRID = GRID_BLOCK - 1
EXPERIMENTS = ("convergence", "concentration", "campbell", "bounds-table")
CAMPBELL_F = ("zero", "one", "s", "damped")
ABSCISSAE = ("sqrt_log_n", "sqrt_logn_loglogn")

RAW_COLUMNS = ["n", "replication", "value", "stream_a", "stream_b"]
AGGREGATE_COLUMNS = ["n", "replications", "mean_w", "stderr", "upper_rate",
                     "upper_rate_poisson", "lower_rate", "lower_valid"]
PLOT_COLUMNS = ["n", "sqrt_log_n", "log_mean_w", "log_upper_rate", "log_lower_rate"]


class ConfigError(ValueError):
    pass


class FitError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    """Flat experiment description, read from and written to JSON."""

    experiment: str = "convergence"
    schema_version: int = SCHEMA_VERSION
    # ground space
    space_kind: str = INTERVAL
    T: float = 1.0
    d: int = 1
    alpha: float = 1.0
    cost_csv: str | None = None
    anchor: int = 0
    # sampler
    sampler: str = "poisson"
    rate: float = 1.0
    nu: float = 1.0
    branching: float = 0.5
    decay: float = 2.0
    measures_path: str | None = None
    # estimator
    p: float = 1.0
    n_grid: list = field(default_factory=lambda: [16, 32, 64, 128, 256, 512, 1024])
    replications: int = 20
    mode: str = INDEPENDENT_PAIR
    reference_size: int | None = None
    master_seed: int = 0
    experiment_index: int = 0
    # concentration / campbell
    n: int = 256
    eps_grid: list = field(default_factory=lambda: [0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0, 1.5, 2.0])
    tail_samples: int = 10000
    campbell_f: str = "one"
    campbell_c: float = 1.0
    # rate parameter overrides; None means derived from the sampler
    kappa: float = 0.1
    sigma: float | None = None
    k2: float | None = None
    chi: float = 0.0
    lambda_tail: float | None = None
    k1: float | None = None
    # execution
    out_dir: str = "results"
    threads: int = 1

    def __post_init__(self):
        if self.schema_version != SCHEMA_VERSION:
            raise ConfigError(f"unsupported schema_version {self.schema_version}")
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"experiment must be one of {EXPERIMENTS}, got {self.experiment!r}")
        self.n_grid = [int(v) for v in self.n_grid]
        if any(b <= a for a, b in zip(self.n_grid, self.n_grid[1:])):
            raise ConfigError("n_grid must be strictly increasing")
        if self.n_grid and self.n_grid[0] < 1:
            raise ConfigError("sample sizes must be >= 1")
        if len(self.n_grid) >= AUX_GRID:
            raise ConfigError(f"n_grid is limited to {AUX_GRID - 1} points")
        if self.replications < 1:
            raise ConfigError("replications must be >= 1")
        if 2 * self.replications > STREAM_BLOCK:
            raise ConfigError(f"replications must be <= {STREAM_BLOCK // 2}")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")
        if self.campbell_f not in CAMPBELL_F:
            raise ConfigError(f"campbell_f must be one of {CAMPBELL_F}")

    @classmethod
    def from_dict(cls, data: dict) -> ExperimentConfig:
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {unknown}")
        return cls(**data)

    @classmethod
    def from_json(cls, path) -> ExperimentConfig:
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def replace(self, **changes) -> ExperimentConfig:
        return dataclasses.replace(self, **changes)


# -- building blocks ----------------------------------------------------------

def build_space(cfg: ExperimentConfig) -> GroundSpace:
    if cfg.space_kind == INTERVAL:
        return GroundSpace.interval(cfg.T, cfg.alpha)
    if cfg.space_kind == BOX:
        return GroundSpace.box(cfg.d, cfg.T, cfg.alpha)
    if cfg.space_kind == FINITE:
        if cfg.cost_csv is None:
            raise ConfigError("finite space needs cost_csv")
        return GroundSpace.finite_from_csv(cfg.cost_csv, cfg.alpha, cfg.anchor)
    raise ConfigError(f"unknown space_kind {cfg.space_kind!r}")


def build_sampler(cfg: ExperimentConfig, space: GroundSpace):
    if cfg.sampler == "poisson":
        return HomogeneousPoisson(space, cfg.rate)
    if cfg.sampler == "hawkes":
        return HawkesExp(space, cfg.nu, cfg.branching, cfg.decay)
    if cfg.sampler == "deterministic":
        if cfg.measures_path is None:
            raise ConfigError("deterministic sampler needs measures_path")
        return Deterministic(read_measures(cfg.measures_path))
    raise ConfigError(f"unknown sampler {cfg.sampler!r}")


def grid_streams(cfg: ExperimentConfig, grid_index: int, replication: int) -> tuple[RngStream, RngStream]:
    block = (cfg.experiment_index * GRID_BLOCK + grid_index) * STREAM_BLOCK
    return (RngStream(cfg.master_seed, block + 2 * replication),
            RngStream(cfg.master_seed, block + 2 * replication + 1))


def _empirical_pmf(counts) -> callable:
    values, freq = np.unique(np.asarray(counts), return_counts=True)
    table = dict(zip(values.tolist(), (freq / freq.sum()).tolist()))
    return lambda m: table.get(m, 0.0)


def tail_constants(cfg: ExperimentConfig, space: GroundSpace, sampler) -> dict:
    """(K1, lambda) for the count tail plus the count pmf used by the lower bound.

    Configured values win; otherwise they are fitted on ``tail_samples`` draws
    from a dedicated stream and flagged as empirical.
    """
    info = {"source": "configured", "k1": cfg.k1, "lambda_tail": cfg.lambda_tail, "error": None}
    aux = None
    if cfg.k1 is None or cfg.lambda_tail is None:
        if isinstance(sampler, Deterministic):
            aux = list(sampler.measures)
        else:
            aux = sample_law(sampler, grid_streams(cfg, AUX_GRID, 0)[0], cfg.tail_samples)
        info["source"] = "empirical tail constants (fit_tail)"
        try:
            k1, lam = fit_tail(aux)
            info["k1"] = cfg.k1 if cfg.k1 is not None else k1
            info["lambda_tail"] = cfg.lambda_tail if cfg.lambda_tail is not None else lam
        except (DegenerateFitError, ValueError) as exc:
            info["error"] = str(exc)
    if isinstance(sampler, HomogeneousPoisson):
        info["count_pmf"] = poisson_count_pmf(sampler.rate)
    elif aux is not None:
        info["count_pmf"] = _empirical_pmf([len(m) for m in aux])
    else:
        info["count_pmf"] = None
    return info


def rate_params(cfg: ExperimentConfig, space: GroundSpace, tail: dict) -> RateParams | None:
    if tail["k1"] is None or tail["lambda_tail"] is None:
        return None
    dim = space.dim_m if space.dim_m > 0 else 1.0
    sigma = cfg.sigma if cfg.sigma is not None else dim
    k2 = cfg.k2
    if k2 is None:
        # uniform locations, theta = Lebesgue / |S|: a radius-eps ball fits in a cube of side 2 eps
        k2 = 2.0 ** dim / space.volume() if space.kind != FINITE else 1.0
    return RateParams(p=cfg.p, kappa=cfg.kappa, dim_m=dim, lambda_tail=tail["lambda_tail"],
                      k1=tail["k1"], sigma=sigma, k2=k2, alpha=space.alpha, diam=space.diameter())


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if v is None:
        return ""
    return format(float(v), ".17g")


def write_csv(path, columns: list[str], rows: list[dict]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\r\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(row[c]) for c in columns])


def read_csv(path) -> list[dict]:
    def parse(text):
        if text in ("true", "false"):
            return text == "true"
        if text == "":
            return None
        try:
            return int(text)
        except ValueError:
            return float(text)

    with open(path, newline="") as fh:
        return [{k: parse(v) for k, v in row.items()} for row in csv.DictReader(fh)]


def _write_json(path, obj) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")


# -- convergence --------------------------------------------------------------

def _replicate(cfg, space, sampler, grid_index, n, r):
    sa, sb = grid_streams(cfg, grid_index, r)
    start = time.perf_counter()
    value = wp_two_sample(space, sampler, n, cfg.mode, cfg.p, cfg.master_seed,
                          cfg.reference_size, streams=(sa, sb))
    elapsed = 1000 * (time.perf_counter() - start)
    return ({"n": n, "replication": r, "value": value,
             "stream_a": sa.stream_index, "stream_b": sb.stream_index},
            {"n": n, "replication": r, "runtime_ms": elapsed})


def aggregate(raw: list[dict]) -> list[dict]:
    """Mean and standard error (sample stdev / sqrt(R)) per sample size."""
    groups: dict[int, list[float]] = {}
    for row in raw:
        groups.setdefault(row["n"], []).append(row["value"])
    out = []
    for n, vals in groups.items():
        arr = np.asarray(vals)
        se = float(np.std(arr, ddof=1) / math.sqrt(len(arr))) if len(arr) > 1 else math.nan
        out.append({"n": n, "replications": len(arr), "mean_w": float(np.mean(arr)), "stderr": se})
    return out


def _annotate(row: dict, cfg: ExperimentConfig, params: RateParams | None, pmf) -> None:
    n = row["n"]
    row.update(upper_rate=math.nan, upper_rate_poisson=math.nan, lower_rate=math.nan, lower_valid=False)
    if params is None:
        return
    if n >= 3:
        row["upper_rate"] = upper_rate(n, params)
        row["upper_rate_poisson"] = upper_rate_poisson(n, params.dim_m, params.kappa, params.p, cfg.chi)
    if pmf is not None and 0 < params.kappa < params.sigma:
        try:
            row["lower_rate"] = lower_rate(n, params, pmf)
            row["lower_valid"] = validity_threshold(params, n)
        except EmptySupportError:
            pass


def run_convergence(cfg: ExperimentConfig, out_dir=None) -> dict:
    """Two-sample W_p over the n grid; writes raw, aggregate, timing and plot files."""
    out = Path(out_dir or cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    space = build_space(cfg)
    sampler = build_sampler(cfg, space)
    jobs = [(g, n, r) for g, n in enumerate(cfg.n_grid) for r in range(cfg.replications)]
    raw, timings = [], []
    with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
        futures = [pool.submit(_replicate, cfg, space, sampler, g, n, r) for g, n, r in jobs]
        try:
            for fut in futures:
                row, timing = fut.result()
                raw.append(row)
                timings.append(timing)
        except Exception:
            for fut in futures:
                fut.cancel()
            write_csv(out / "raw.partial.csv", RAW_COLUMNS, raw)
            raise
    write_csv(out / "raw.csv", RAW_COLUMNS, raw)
    write_csv(out / "timings.csv", ["n", "replication", "runtime_ms"], timings)

    tail = tail_constants(cfg, space, sampler)
    params = rate_params(cfg, space, tail)
    agg = aggregate(raw)
    for row in agg:
        _annotate(row, cfg, params, tail["count_pmf"])
    write_csv(out / "aggregate.csv", AGGREGATE_COLUMNS, agg)
    emit_plot_data(agg, out / "plot.dat")
    meta = {
        "config": cfg.to_dict(),
        "estimator_bias": ESTIMATOR_BIAS.get(cfg.mode),
        "bounds": RATE_SHAPE_NOTE,
        "tail_constants": {k: v for k, v in tail.items() if k != "count_pmf"},
        "rate_params": dataclasses.asdict(params) if params else None,
        "rows": len(raw),
    }
    _write_json(out / "metadata.json", meta)
    return {"raw": raw, "aggregate": agg, "params": params, "tail": tail, "out_dir": str(out)}


# -- rate fitting and plot data -------------------------------------------------

def _abscissa(n: float, kind: str) -> float:
    if kind == "sqrt_log_n":
        return math.sqrt(math.log(n))
    if kind == "sqrt_logn_loglogn":
        return math.sqrt(math.log(n) * math.log(math.log(n)))
    raise ValueError(f"abscissa must be one of {ABSCISSAE}, got {kind!r}")


def fit_rate(table, abscissa: str = "sqrt_log_n") -> tuple[float, float, float]:
    """OLS of log(mean_w) against the abscissa; returns (slope, intercept, r_squared)."""
    if isinstance(table, (str, Path)):
        table = read_csv(table)
    if abscissa not in ABSCISSAE:
        raise ValueError(f"abscissa must be one of {ABSCISSAE}, got {abscissa!r}")
    min_n = math.e if abscissa == "sqrt_logn_loglogn" else 1.0
    keep = [r for r in table if r["mean_w"] is not None and r["mean_w"] > 0 and r["n"] > min_n]
    if len(keep) < len(table):
        warnings.warn(f"dropped {len(table) - len(keep)} rows with nonpositive mean or n <= {min_n:.3g}",
                      RuntimeWarning)
    if len(keep) < 4:
        raise FitError(f"need at least 4 usable rows, got {len(keep)}")
    x = np.array([_abscissa(r["n"], abscissa) for r in keep])
    y = np.log([r["mean_w"] for r in keep])
    slope, intercept = np.polyfit(x, y, 1)
    ss_res = float(np.sum((y - (slope * x + intercept)) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), r2


def _log(v) -> float:
    return math.log(v) if v is not None and v > 0 else math.nan


def emit_plot_data(table: list[dict], path) -> None:
    """Whitespace-separated columns with a '#' header describing the schema."""
    with open(path, "w") as fh:
        fh.write("# ppwass convergence plot data\n")
        fh.write("# x = sqrt(log n); y = natural logs of mean W_p and of the rate shapes (C = 1)\n")
        fh.write("# " + " ".join(PLOT_COLUMNS) + "\n")
        for r in table:
            n = r["n"]
            vals = [n, math.sqrt(math.log(n)), _log(r.get("mean_w")),
                    _log(r.get("upper_rate")), _log(r.get("lower_rate"))]
            fh.write(" ".join(_fmt(v) for v in vals) + "\n")


def read_plot_data(path) -> list[dict]:
    rows = []
    with open(path) as fh:
        for line in fh:
            if line.startswith("#") or not line.strip():
                continue
            parts = line.split()
            rows.append({c: (int(v) if c == "n" else float(v)) for c, v in zip(PLOT_COLUMNS, parts)})
    return rows


# -- concentration ------------------------------------------------------------

def run_concentration(cfg: ExperimentConfig, out_dir=None) -> dict:
    """Empirical P(|W - mean W| > eps) against twice the concentration tail bound."""
    if not 1 <= cfg.p < 2:
        raise OutOfRegimeError(f"concentration needs 1 <= p < 2, got {cfg.p}")
    out = Path(out_dir or cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    space = build_space(cfg)
    sampler = build_sampler(cfg, space)
    with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
        futures = [pool.submit(_replicate, cfg, space, sampler, 0, cfg.n, r) for r in range(cfg.replications)]
        raw = [f.result()[0] for f in futures]
    write_csv(out / "raw.csv", RAW_COLUMNS, raw)
    tail = tail_constants(cfg, space, sampler)
    params = rate_params(cfg, space, tail)
    if params is None:
        raise DegenerateFitError(f"no tail constants available: {tail['error']}")
    values = np.array([r["value"] for r in raw])
    dev = np.abs(values - values.mean())
    rows = []
    for eps in cfg.eps_grid:
        rows.append({"eps": float(eps), "empirical_freq": float(np.mean(dev > eps)),
                     "bound": concentration_bound(float(eps), cfg.n, params, two_sided=True)})
    write_csv(out / "concentration.csv", ["eps", "empirical_freq", "bound"], rows)
    _write_json(out / "metadata.json", {
        "config": cfg.to_dict(),
        "tail_constants": {k: v for k, v in tail.items() if k != "count_pmf"},
        "rate_params": dataclasses.asdict(params),
        "mean_w": float(values.mean()),
    })
    return {"raw": raw, "table": rows, "params": params, "tail": tail, "out_dir": str(out)}


# -- Campbell measure ------------------------------------------------------------

def campbell_integrand(kind: str, space: GroundSpace, c: float = 1.0):
    """f(points, count) evaluated on all points of one realisation."""
    if kind == "zero":
        return lambda pts, k: np.zeros(len(pts))
    if kind == "one":
        return lambda pts, k: np.ones(len(pts))
    if kind == "s":
        return lambda pts, k: pts / space.T
    if kind == "damped":
        return lambda pts, k: pts / space.T * math.exp(-k / c)
    raise ValueError(f"unknown Campbell integrand {kind!r}")


def campbell_reference(cfg: ExperimentConfig, sampler) -> float | None:
    """Closed-form C(f) where available (Poisson, and the Hawkes mean count)."""
    f, c = cfg.campbell_f, cfg.campbell_c
    if f == "zero":
        return 0.0
    if isinstance(sampler, HomogeneousPoisson):
        lam = sampler.rate
        if f == "one":
            return lam
        if f == "s":
            return lam / 2
        # Mecke: E sum_x h(x) g(|eta|) = lam E[h] E[g(|eta| + 1)]
        q = math.exp(-1 / c)
        return lam * 0.5 * q * math.exp(lam * (q - 1))
    if isinstance(sampler, HawkesExp) and f == "one":
        return hawkes_expected_count(sampler.nu, sampler.branching, sampler.decay, sampler.space.T)
    return None


def run_campbell(cfg: ExperimentConfig, out_dir=None) -> dict:
    """Monte Carlo estimate (1/n) sum_i sum_{x in eta_i} f(x, eta_i) with its standard error."""
    space = build_space(cfg)
    if space.kind != INTERVAL:
        raise DomainError("Campbell integrands are defined on an interval")
    sampler = build_sampler(cfg, space)
    f = campbell_integrand(cfg.campbell_f, space, cfg.campbell_c)
    stream = grid_streams(cfg, 0, 0)[0]
    draws = sample_law(sampler, stream, cfg.n)
    sums = np.array([float(np.sum(f(np.asarray(m.points, dtype=float), len(m)))) for m in draws])
    se = float(np.std(sums, ddof=1) / math.sqrt(len(sums))) if len(sums) > 1 else math.nan
    row = {"f": cfg.campbell_f, "n": cfg.n, "estimate": float(np.mean(sums)), "stderr": se,
           "reference": campbell_reference(cfg, sampler)}
    out = Path(out_dir or cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / "campbell.csv", ["f", "n", "estimate", "stderr", "reference"], [row])
    return row


# -- bounds table and dataset dumps ------------------------------------------------

def run_bounds_table(cfg: ExperimentConfig, out_dir=None) -> list[dict]:
    space = build_space(cfg)
    sampler = build_sampler(cfg, space)
    tail = tail_constants(cfg, space, sampler)
    params = rate_params(cfg, space, tail)
    if params is None:
        raise DegenerateFitError(f"no tail constants available: {tail['error']}")
    rate = sampler.rate if isinstance(sampler, HomogeneousPoisson) else None
    rows = []
    for n in cfg.n_grid:
        if n < 3:
            continue
        for rec in evaluate_all(n, params, poisson_rate=rate, chi=cfg.chi):
            rows.append({"n": n, "name": rec["name"], "value": rec["value"]})
    out = Path(out_dir or cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "bounds.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\r\n")
        writer.writerow(["n", "name", "value"])
        for r in rows:
            writer.writerow([r["n"], r["name"], _fmt(r["value"])])
    return rows


def dump_samples(cfg: ExperimentConfig, count: int, path) -> None:
    """Write ``count`` draws as JSONL plus a ``.meta.json`` sidecar."""
    space = build_space(cfg)
    sampler = build_sampler(cfg, space)
    measures = sample_law(sampler, grid_streams(cfg, 0, 0)[0], count)
    write_measures(path, measures)
    _write_json(str(path) + ".meta.json", {"spec": cfg.to_dict(), "master_seed": cfg.master_seed, "count": count})


RUNNERS = {
    "convergence": run_convergence,
    "concentration": run_concentration,
    "campbell": run_campbell,
    "bounds-table": run_bounds_table,
}


def run(cfg: ExperimentConfig, out_dir=None):
    return RUNNERS[cfg.experiment](cfg, out_dir)
