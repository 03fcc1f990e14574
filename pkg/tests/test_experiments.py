import json
import math

import numpy as np
import pytest

from ppwass.counting_measure import CountingMeasure, d1, write_measures
from ppwass.experiments import (
    ConfigError,
    ExperimentConfig,
    FitError,
    aggregate,
    build_space,
    dump_samples,
    emit_plot_data,
    fit_rate,
    grid_streams,
    read_csv,
    read_plot_data,
    run,
    run_campbell,
    run_concentration,
    run_convergence,
)
from ppwass.bounds import OutOfRegimeError
from ppwass.samplers import sample_law, HomogeneousPoisson


def small(**kw):
    base = dict(n_grid=[4, 8, 16], replications=3, master_seed=5, tail_samples=500)
    base.update(kw)
    return ExperimentConfig(**base)


def test_config_validation_and_json(tmp_path):
    with pytest.raises(ConfigError):
        ExperimentConfig(n_grid=[8, 8])
    with pytest.raises(ConfigError):
        ExperimentConfig(replications=0)
    with pytest.raises(ConfigError):
        ExperimentConfig(experiment="nope")
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"bogus": 1})
    with pytest.raises(ConfigError):
        ExperimentConfig(schema_version=2)
    cfg = small()
    path = tmp_path / "c.json"
    path.write_text(json.dumps(cfg.to_dict()))
    assert ExperimentConfig.from_json(path) == cfg


def test_stream_layout_is_disjoint():
    cfg = small()
    seen = set()
    for g in range(3):
        for r in range(4):
            seen.update(s.stream_index for s in grid_streams(cfg, g, r))
    assert len(seen) == 24
    other = small(experiment_index=1)
    assert grid_streams(other, 0, 0)[0].stream_index not in seen


def test_deterministic_sampler_gives_zero(tmp_path):
    mpath = tmp_path / "m.jsonl"
    write_measures(mpath, [CountingMeasure([0.2, 0.7])])
    res = run_convergence(small(sampler="deterministic", measures_path=str(mpath)), tmp_path / "out")
    assert all(row["mean_w"] == 0 for row in res["aggregate"])
    meta = json.loads((tmp_path / "out" / "metadata.json").read_text())
    assert meta["tail_constants"]["error"]


def test_single_draw_run_equals_d1(tmp_path):
    cfg = small(n_grid=[1], replications=1, rate=3.0)
    res = run_convergence(cfg, tmp_path)
    space = build_space(cfg)
    sa, sb = grid_streams(cfg, 0, 0)
    spec = HomogeneousPoisson(space, 3.0)
    a, b = sample_law(spec, sa, 1)[0], sample_law(spec, sb, 1)[0]
    assert len(res["raw"]) == 1
    assert res["raw"][0]["value"] == pytest.approx(d1(space, a, b), abs=1e-12)


def test_outputs_and_aggregate_consistency(tmp_path):
    res = run_convergence(small(), tmp_path)
    raw = read_csv(tmp_path / "raw.csv")
    agg = read_csv(tmp_path / "aggregate.csv")
    assert [r["value"] for r in raw] == [r["value"] for r in res["raw"]]
    for row in agg:
        vals = np.array([r["value"] for r in raw if r["n"] == row["n"]])
        assert row["mean_w"] == pytest.approx(vals.mean(), abs=1e-12)
        assert row["stderr"] == pytest.approx(vals.std(ddof=1) / math.sqrt(len(vals)), abs=1e-12)
        assert row["upper_rate"] > 0 and row["lower_rate"] > 0
    assert (tmp_path / "timings.csv").exists()
    meta = json.loads((tmp_path / "metadata.json").read_text())
    assert "C set to 1" in meta["bounds"]
    assert meta["tail_constants"]["source"].startswith("empirical")
    header = (tmp_path / "raw.csv").read_text().splitlines()[0]
    assert header == "n,replication,value,stream_a,stream_b"


def test_thread_count_does_not_change_results(tmp_path):
    run_convergence(small(threads=1), tmp_path / "a")
    run_convergence(small(threads=3), tmp_path / "b")
    assert (tmp_path / "a" / "raw.csv").read_bytes() == (tmp_path / "b" / "raw.csv").read_bytes()


def test_partial_results_on_failure(tmp_path, monkeypatch):
    from ppwass import experiments

    real = experiments.wp_two_sample

    def flaky(space, sampler, n, *args, **kw):
        if n == 16:
            raise RuntimeError("solver blew up")
        return real(space, sampler, n, *args, **kw)

    monkeypatch.setattr(experiments, "wp_two_sample", flaky)
    with pytest.raises(RuntimeError):
        run_convergence(small(), tmp_path)
    partial = read_csv(tmp_path / "raw.partial.csv")
    assert len(partial) == 6 and not (tmp_path / "raw.csv").exists()


def synthetic(values):
    return [{"n": n, "mean_w": v} for n, v in values]


def test_fit_rate_exact_synthetic():
    ns = [2 ** k for k in range(4, 20)]
    slope, intercept, r2 = fit_rate(synthetic([(n, math.exp(-2 * math.sqrt(math.log(n)))) for n in ns]))
    assert slope == pytest.approx(-2, abs=1e-6) and intercept == pytest.approx(0, abs=1e-6)
    assert r2 == pytest.approx(1.0)
    t = [(n, math.exp(-0.7 * math.sqrt(math.log(n) * math.log(math.log(n))) + 1)) for n in ns]
    slope, intercept, _ = fit_rate(synthetic(t), "sqrt_logn_loglogn")
    assert slope == pytest.approx(-0.7, abs=1e-9) and intercept == pytest.approx(1.0, abs=1e-9)
    slope, _, _ = fit_rate(synthetic([(n, 0.3) for n in ns]))
    assert slope == pytest.approx(0.0, abs=1e-12)


def test_fit_rate_drops_and_fails():
    rows = synthetic([(16, 0.5), (32, 0.0), (64, 0.3), (128, 0.2), (256, 0.15)])
    with pytest.warns(RuntimeWarning):
        fit_rate(rows)
    with pytest.warns(RuntimeWarning), pytest.raises(FitError):
        fit_rate(rows[:4])
    with pytest.raises(ValueError):
        fit_rate(rows, "log_n")


def test_plot_data_round_trip(tmp_path):
    res = run_convergence(small(), tmp_path)
    rows = read_plot_data(tmp_path / "plot.dat")
    assert [r["n"] for r in rows] == [4, 8, 16]
    for r, a in zip(rows, res["aggregate"]):
        assert r["log_mean_w"] == math.log(a["mean_w"])
        assert r["sqrt_log_n"] == math.sqrt(math.log(a["n"]))
        assert r["log_upper_rate"] == math.log(a["upper_rate"])
    header = [l for l in (tmp_path / "plot.dat").read_text().splitlines() if l.startswith("#")]
    assert header[-1] == "# n sqrt_log_n log_mean_w log_upper_rate log_lower_rate"
    emit_plot_data([], tmp_path / "empty.dat")
    assert read_plot_data(tmp_path / "empty.dat") == []
    with pytest.raises(OSError):
        emit_plot_data([], tmp_path / "missing" / "x.dat")


def test_concentration_run(tmp_path):
    cfg = small(experiment="concentration", n=32, replications=60, eps_grid=[1e-6, 0.1, 5.0])
    res = run_concentration(cfg, tmp_path)
    freq = [r["empirical_freq"] for r in res["table"]]
    assert freq[0] == 1.0 and freq[-1] == 0.0
    assert all(r["empirical_freq"] <= r["bound"] for r in res["table"])
    with pytest.raises(OutOfRegimeError):
        run_concentration(small(experiment="concentration", p=2.0), tmp_path)


@pytest.mark.parametrize("f", ["zero", "one", "s", "damped"])
def test_campbell_matches_reference(tmp_path, f):
    cfg = small(experiment="campbell", rate=2.0, n=4000, campbell_f=f, campbell_c=2.0)
    row = run_campbell(cfg, tmp_path)
    if f == "zero":
        assert row["estimate"] == 0.0
    else:
        assert abs(row["estimate"] - row["reference"]) <= 4 * row["stderr"]


def test_campbell_hawkes_mean(tmp_path):
    cfg = small(experiment="campbell", sampler="hawkes", T=5.0, nu=1.0, branching=0.4, decay=1.5,
                n=3000, campbell_f="one")
    row = run_campbell(cfg, tmp_path)
    assert abs(row["estimate"] - row["reference"]) <= 4 * row["stderr"]


def test_bounds_table_and_dump(tmp_path):
    rows = run(small(experiment="bounds-table", n_grid=[2, 100, 1000]), tmp_path)
    assert {r["n"] for r in rows} == {100, 1000}
    dump_samples(small(), 5, tmp_path / "d.jsonl")
    assert len((tmp_path / "d.jsonl").read_text().splitlines()) == 5
    meta = json.loads((tmp_path / "d.jsonl.meta.json").read_text())
    assert meta["count"] == 5 and meta["master_seed"] == 5


def test_aggregate_single_replication():
    agg = aggregate([{"n": 4, "value": 0.3}])
    assert agg[0]["mean_w"] == 0.3 and math.isnan(agg[0]["stderr"])
