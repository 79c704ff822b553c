"""Harness-level contracts: scenario grids, deterministic and parallel runs,
CSV/manifest formatting, custom configs, and the CLI surface."""

import json
import subprocess
import sys

import numpy as np
import pytest

import bitmean
from bitmean.cli import main
from bitmean.harness import (
    CSV_HEADER,
    ESTIMATOR_IDS,
    SCENARIOS,
    XI_GRID,
    CorruptionPlan,
    ExperimentConfig,
    ResultRow,
    Series,
    SweepPoint,
    loglog_slope,
    rows_to_csv_text,
    run,
    scenario_config,
    write_outputs,
)
from bitmean.samplers import CovarianceSpec

TINY = {
    "name": "tiny",
    "estimators": ["partial-1d", "sample-mean"],
    "points": [
        {"n": 64, "d": 1, "mean": 5.0, "n0": 8, "epsilon": 0.1},
        {"n": 128, "d": 1, "mean": 5.0, "n0": 11, "epsilon": 0.1},
    ],
}


# --- scenario catalog -------------------------------------------------------


def test_registries():
    assert tuple(SCENARIOS) == ("fig1", "fig2", "fig3", "fig4", "fig5")
    assert len(ESTIMATOR_IDS) == 10
    assert XI_GRID == (0.1, 0.2, 0.3, 0.4, 0.5)


@pytest.mark.parametrize(
    "name,n_points,n_series",
    [("fig1", 6, 2), ("fig2", 5, 2), ("fig3", 5, 2), ("fig4", 40, 2), ("fig5", 10, 3)],
)
def test_scenario_shapes(name, n_points, n_series):
    cfg = scenario_config(name, trials=3, seed=1)
    assert len(cfg.points) == n_points
    assert len(cfg.series) == n_series
    assert cfg.scenario == name


def test_fig1_grid_parameters():
    cfg = scenario_config("fig1")
    ns = [p.n for p in cfg.points]
    assert ns == [50, 100, 200, 300, 400, 500]
    p = cfg.points[0]
    assert p.n0 == 8 and p.epsilon == pytest.approx(np.sqrt(2 / 50))
    assert cfg.corruption is None


def test_fig3_dimension_tracks_n():
    cfg = scenario_config("fig3")
    assert [(p.n, p.d) for p in cfg.points] == [(200, 20), (400, 40), (600, 60), (800, 80), (1000, 100)]


def test_fig4_eta_grid_and_epsilon():
    cfg = scenario_config("fig4")
    etas = [p.eta for p in cfg.points]
    assert etas[0] == 0.005 and etas[-1] == 0.2 and len(etas) == 40
    assert cfg.points[0].epsilon == pytest.approx(0.005 + 1 / np.sqrt(1000))
    assert cfg.corruption == CorruptionPlan("pre", "reflect-largest")


def test_fig5_series_pin_corruption_levels():
    cfg = scenario_config("fig5")
    assert [s.eta_override for s in cfg.series] == [0.0, 0.05, 0.1]
    assert [s.name for s in cfg.series] == [
        "full-multi(eta=0)", "full-multi(eta=0.05)", "full-multi(eta=0.1)",
    ]
    assert all(p.n == 100 * p.d and p.lam == 2.0 for p in cfg.points)


def test_unknown_scenario():
    with pytest.raises(ValueError, match="unknown scenario"):
        scenario_config("fig9")


# --- config validation ------------------------------------------------------


def _point(**kw):
    base = dict(sweep=1.0, n=10, d=1, mean=np.zeros(1), cov=CovarianceSpec.identity(1))
    base.update(kw)
    return SweepPoint(**base)


def test_sweep_point_validation():
    with pytest.raises(ValueError, match="mean dimension"):
        _point(mean=np.zeros(3))
    with pytest.raises(ValueError, match="covariance dimension"):
        _point(cov=CovarianceSpec.identity(2))
    with pytest.raises(ValueError, match="eta"):
        _point(eta=0.5)


def test_corruption_plan_validation():
    with pytest.raises(ValueError):
        CorruptionPlan("mid", "reflect-largest")
    with pytest.raises(ValueError):
        CorruptionPlan("pre", "flip-random")  # post-only pattern


def test_config_rejects_duplicate_series():
    with pytest.raises(ValueError, match="duplicate series"):
        ExperimentConfig(
            scenario="s", trials=1, seed=0, points=(_point(),),
            series=(Series("a", "sample-mean"), Series("a", "sample-mean")),
        )


def test_config_cross_checks_estimators_against_points():
    with pytest.raises(ValueError, match="univariate"):
        ExperimentConfig(
            scenario="s", trials=1, seed=0,
            points=(_point(d=2, mean=np.zeros(2), cov=CovarianceSpec.identity(2)),),
            series=(Series("a", "full-1d"),),
        )
    with pytest.raises(ValueError, match="n0 and epsilon"):
        ExperimentConfig(
            scenario="s", trials=1, seed=0, points=(_point(),),
            series=(Series("a", "partial-1d"),),
        )
    with pytest.raises(ValueError, match="dither level"):
        ExperimentConfig(
            scenario="s", trials=1, seed=0, points=(_point(),),
            series=(Series("a", "full-1d"),),
        )
    with pytest.raises(ValueError, match="unknown estimator"):
        ExperimentConfig(
            scenario="s", trials=1, seed=0, points=(_point(),),
            series=(Series("a", "median-of-means"),),
        )


def test_config_scalar_validation():
    with pytest.raises(ValueError):
        ExperimentConfig(scenario="s", trials=0, seed=0, points=(_point(),), series=(Series("a", "sample-mean"),))
    with pytest.raises(ValueError):
        ExperimentConfig(scenario="s", trials=1, seed=-1, points=(_point(),), series=(Series("a", "sample-mean"),))
    with pytest.raises(ValueError):
        ExperimentConfig(scenario="s", trials=1, seed=0, points=(), series=(Series("a", "sample-mean"),))


# --- running ----------------------------------------------------------------


def test_run_row_order_and_determinism():
    cfg = scenario_config("custom", trials=3, seed=5, custom=TINY)
    rows = run(cfg)
    assert [(r.sweep, r.estimator) for r in rows] == [
        (64.0, "partial-1d"), (64.0, "sample-mean"), (128.0, "partial-1d"), (128.0, "sample-mean"),
    ]
    assert all(r.scenario == "tiny" and r.trials == 3 and r.seed == 5 for r in rows)
    assert rows == run(cfg)


def test_run_seed_changes_output():
    a = run(scenario_config("custom", trials=3, seed=5, custom=TINY))
    b = run(scenario_config("custom", trials=3, seed=6, custom=TINY))
    assert [r.mean_error for r in a] != [r.mean_error for r in b]


def test_parallel_run_is_byte_identical():
    serial = run(scenario_config("custom", trials=4, seed=2, custom=TINY))
    parallel = run(scenario_config("custom", trials=4, seed=2, custom=TINY, threads=2))
    assert rows_to_csv_text(parallel) == rows_to_csv_text(serial)


def test_single_trial_has_zero_std():
    rows = run(scenario_config("custom", trials=1, seed=0, custom=TINY))
    assert all(r.std_error == 0.0 for r in rows)


def test_std_uses_sample_variance():
    # reconstruct one cell by hand: sample-mean errors are |xbar - mean|
    payload = {"estimators": ["sample-mean"], "points": [{"n": 16, "d": 1, "mean": 2.0}]}
    cfg = scenario_config("custom", trials=5, seed=11, custom=payload)
    (row,) = run(cfg)
    from bitmean.core import make_rng
    from bitmean.samplers import DistributionSpec, sample

    dist = DistributionSpec.gaussian(np.array([2.0]), np.eye(1))
    errs = [
        abs(float(np.mean(sample(dist, 16, make_rng(11, 0, 1, t, 0)))) - 2.0) for t in range(5)
    ]
    assert row.mean_error == pytest.approx(np.mean(errs), rel=1e-12)
    assert row.std_error == pytest.approx(np.std(errs, ddof=1), rel=1e-12)


def test_trimmed_mean_series_takes_best_trim_fraction():
    # with the per-trial min over XI_GRID the trimmed baseline can never
    # average worse than the same data's worst single fraction
    payload = {
        "estimators": ["trimmed-mean", "sample-mean"],
        "points": [{"n": 100, "d": 1, "mean": 0.0, "epsilon": 0.1}],
    }
    rows = run(scenario_config("custom", trials=10, seed=3, custom=payload))
    by_name = {r.estimator: r for r in rows}
    assert by_name["trimmed-mean"].mean_error <= 3 * by_name["sample-mean"].mean_error


def test_post_corruption_on_raw_estimator_fails():
    payload = {
        "estimators": ["sample-mean"],
        "points": [{"n": 20, "d": 1, "mean": 0.0, "eta": 0.1}],
        "corruption": {"stage": "post", "pattern": "flip-random"},
    }
    cfg = scenario_config("custom", trials=1, seed=0, custom=payload)
    with pytest.raises(ValueError, match="produces no bits"):
        run(cfg)


def test_pre_corruption_hurts_plain_mean():
    payload = {
        "estimators": ["sample-mean"],
        "points": [{"n": 200, "d": 1, "mean": 0.0, "eta": 0.2}],
        "corruption": {"stage": "pre", "pattern": "shift-all-ones"},
    }
    corrupted = run(scenario_config("custom", trials=20, seed=4, custom=payload))[0]
    clean_payload = {**payload, "points": [{**payload["points"][0], "eta": 0.0}], "corruption": None}
    clean = run(scenario_config("custom", trials=20, seed=4, custom=clean_payload))[0]
    assert corrupted.mean_error > clean.mean_error
    assert corrupted.mean_error == pytest.approx(0.2, abs=0.05)  # shifts add eta * 1


# --- custom scenario parsing ------------------------------------------------


def test_custom_payload_defaults():
    payload = {"estimators": ["partial-1d"], "points": [{"n": 100}]}
    cfg = scenario_config("custom", custom=payload)
    p = cfg.points[0]
    assert cfg.scenario == "custom"
    assert p.d == 1 and p.n0 == 10 and p.epsilon == pytest.approx(np.sqrt(0.02))
    assert p.cov.kind == "identity"
    assert float(p.mean[0]) == 0.0


def test_custom_payload_covariances():
    payload = {
        "estimators": ["sample-mean"],
        "points": [
            {"n": 10, "d": 3, "cov": {"kind": "toeplitz", "rho": 0.4}},
            {"n": 10, "d": 3, "cov": "low-trace"},
        ],
    }
    cfg = scenario_config("custom", custom=payload)
    assert cfg.points[0].cov.rho == 0.4
    assert cfg.points[1].cov.kind == "haar-diagonal"


def test_custom_payload_errors():
    with pytest.raises(ValueError, match="custom"):
        scenario_config("custom")
    with pytest.raises(ValueError, match="estimators"):
        scenario_config("custom", custom={"points": [{"n": 5}]})
    with pytest.raises(ValueError, match="points"):
        scenario_config("custom", custom={"estimators": ["sample-mean"]})
    with pytest.raises(ValueError, match="missing 'n'"):
        scenario_config("custom", custom={"estimators": ["sample-mean"], "points": [{"d": 2}]})
    with pytest.raises(ValueError, match="rho"):
        scenario_config(
            "custom",
            custom={"estimators": ["sample-mean"], "points": [{"n": 5, "cov": {"kind": "toeplitz"}}]},
        )
    with pytest.raises(ValueError, match="stage"):
        scenario_config(
            "custom",
            custom={"estimators": ["sample-mean"], "points": [{"n": 5}], "corruption": {"pattern": "flip-random"}},
        )


# --- output files -----------------------------------------------------------


def test_csv_text_format():
    rows = [
        ResultRow("s", 50.0, "est-a", 0.125, 0.25, 3, 7),
        ResultRow("s", 0.005, "est-b", 1e-07, 0.0, 3, 7),
    ]
    text = rows_to_csv_text(rows)
    lines = text.splitlines()
    assert lines[0] == CSV_HEADER
    assert lines[1] == "s,50,est-a,0.125,0.25,3,7"  # integral sweep prints as int
    assert lines[2] == "s,0.005,est-b,1e-07,0.0,3,7"
    assert text.endswith("\n")


def test_write_outputs_creates_dirs_and_manifest(tmp_path):
    cfg = scenario_config("custom", trials=2, seed=9, custom=TINY)
    rows = run(cfg)
    out = tmp_path / "deep" / "nested" / "res.csv"
    csv_path, manifest_path = write_outputs(cfg, rows, out, wall_clock=1.5)
    assert csv_path == out and out.exists()
    assert manifest_path == out.with_suffix(".manifest.json")
    m = json.loads(manifest_path.read_text())
    assert m["scenario"] == "tiny" and m["seed"] == 9 and m["trials"] == 2
    assert m["version"] == bitmean.__version__
    assert m["wall_clock_seconds"] == 1.5
    assert "created_utc" in m
    assert [p["n"] for p in m["points"]] == [64, 128]
    assert [p["n0"] for p in m["points"]] == [8, 11]
    assert all(p["eta"] == 0.0 for p in m["points"])
    assert [s["estimator"] for s in m["series"]] == ["partial-1d", "sample-mean"]
    # CSV on disk round-trips the in-memory text
    assert csv_path.read_text() == rows_to_csv_text(rows)


def test_loglog_slope_oracle():
    x = np.array([10.0, 100.0, 1000.0, 10000.0])
    assert loglog_slope(x, 3.0 * x**-0.5) == pytest.approx(-0.5, abs=1e-12)
    assert loglog_slope(x, 2.0 * x**1.25) == pytest.approx(1.25, abs=1e-12)


# --- CLI --------------------------------------------------------------------


def test_cli_runs_custom_scenario(tmp_path, capsys):
    cfg_file = tmp_path / "cfg.json"
    cfg_file.write_text(json.dumps(TINY))
    out = tmp_path / "res.csv"
    rc = main(["run", "--scenario", "custom", "--config", str(cfg_file), "--trials", "2", "--seed", "3", "--out", str(out)])
    assert rc == 0
    captured = capsys.readouterr()
    assert "wrote 4 rows" in captured.out
    assert out.exists() and out.with_suffix(".manifest.json").exists()
    assert out.read_text().splitlines()[0] == CSV_HEADER


def test_cli_bad_scenario_exits_2(tmp_path, capsys):
    rc = main(["run", "--scenario", "fig99", "--out", str(tmp_path / "x.csv")])
    assert rc == 2
    assert capsys.readouterr().err.startswith("error:")
    assert not (tmp_path / "x.csv").exists()


def test_cli_bad_config_json_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{nope")
    rc = main(["run", "--scenario", "custom", "--config", str(bad), "--out", str(tmp_path / "x.csv")])
    assert rc == 2
    assert "not valid JSON" in capsys.readouterr().err


def test_cli_missing_required_args():
    with pytest.raises(SystemExit) as exc:
        main(["run", "--scenario", "fig1"])
    assert exc.value.code == 2


def test_cli_module_entrypoint(tmp_path):
    cfg_file = tmp_path / "cfg.json"
    cfg_file.write_text(json.dumps(TINY))
    out = tmp_path / "res.csv"
    proc = subprocess.run(
        [sys.executable, "-m", "bitmean", "run", "--scenario", "custom",
         "--config", str(cfg_file), "--trials", "2", "--seed", "3", "--out", str(out)],
        capture_output=True, text=True, timeout=120,
    )
    assert proc.returncode == 0, proc.stderr
    assert "wrote 4 rows" in proc.stdout
    # same streams as the in-process run: files must match
    rows = run(scenario_config("custom", trials=2, seed=3, custom=TINY))
    assert out.read_text() == rows_to_csv_text(rows)
