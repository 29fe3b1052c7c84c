import logging
import math

import numpy as np
import pandas as pd
import pytest

from obcs import harness
from obcs.config import ExperimentConfig, Sweep, desk_config
from obcs.errors import ConfigError, SolverNumericError
from obcs.harness import (
    ROW_COLUMNS,
    aggregate,
    aggregate_path,
    build_tasks,
    canonical_rows,
    execute,
    first_index_trend,
    load_results,
    run_accuracy_sweep,
    run_algorithm,
    run_first_index_study,
    run_speed_sweep,
)
from obcs.model import derive_trial_seed, generate_instance


def small_config(tmp_path, **overrides):
    cfg = ExperimentConfig(n=40, sweep_values=(1.0, 2.0), s=2, trials=2, base_seed=99,
                           algorithms=("strmp", "biht"), output_path=str(tmp_path / "rows.csv"))
    return cfg.with_overrides(**overrides)


def test_build_tasks(tmp_path):
    cfg = small_config(tmp_path, trials=3)
    tasks = build_tasks(cfg)
    assert len(tasks) == 6
    assert [(t.point, t.trial) for t in tasks[:3]] == [(0, 0), (0, 1), (0, 2)]
    assert tasks[4].m == 80 and tasks[4].s == 2
    assert tasks[4].seed(99) == derive_trial_seed(99, 1, 1)


def test_run_algorithm_dispatch(tmp_path):
    signal, ensemble = generate_instance(80, 40, 2, seed=1)
    cfg = small_config(tmp_path)
    assert run_algorithm("strmp-l1", ensemble.A, ensemble.y, 2, cfg).algorithm == "strmp-l1"
    with pytest.raises(ConfigError):
        run_algorithm("omp", ensemble.A, ensemble.y, 2, cfg)


def test_execute_rows(tmp_path):
    rows = execute(small_config(tmp_path))
    assert list(rows.columns) == ROW_COLUMNS
    assert len(rows) == 8
    assert (rows["status"] == "ok").all()
    assert list(rows["algorithm"][:2]) == ["biht", "strmp"]
    assert rows["sweep_value"].is_monotonic_increasing
    assert (rows["wall_time"] > 0).all() and np.isfinite(rows["wall_time"]).all()
    first = rows.iloc[0]
    assert first["trial_seed"] == derive_trial_seed(99, 0, 0)


def test_rows_replay_their_trial(tmp_path):
    rows = execute(small_config(tmp_path), timing=False)
    row = rows[rows["algorithm"] == "strmp"].iloc[-1]
    signal, ensemble = generate_instance(int(row["m"]), int(row["n"]), int(row["s"]), int(row["trial_seed"]))
    result = run_algorithm("strmp", ensemble.A, ensemble.y, int(row["s"]), small_config(tmp_path))
    truth = signal.values / np.linalg.norm(signal.values)
    assert np.linalg.norm(result.x_unit - truth) == pytest.approx(row["l2_error_unit"])


def test_worker_count_does_not_change_rows(tmp_path):
    serial = execute(small_config(tmp_path), timing=False)
    parallel = execute(small_config(tmp_path, workers=2), timing=False)
    assert canonical_rows(serial) == canonical_rows(parallel)
    pd.testing.assert_frame_equal(serial, parallel)


def test_sweep_writes_identical_files(tmp_path):
    cfg = small_config(tmp_path)
    run_accuracy_sweep(cfg, timing=False)
    first = (tmp_path / "rows.csv").read_bytes()
    run_accuracy_sweep(cfg, timing=False)
    assert (tmp_path / "rows.csv").read_bytes() == first
    assert aggregate_path(cfg.output_path).exists()
    meta = (tmp_path / "rows.meta.txt").read_text()
    assert "PCG64" in meta and "base_seed = 99" in meta


def test_sweep_writes_workbook(tmp_path):
    _, summary = run_accuracy_sweep(small_config(tmp_path), xlsx=True)
    book = pd.read_excel(tmp_path / "rows.xlsx", sheet_name=None, engine="openpyxl")
    assert set(book) == {"aggregate", "rows"}
    assert len(book["aggregate"]) == len(summary)


def test_loaded_rows_match_written_rows(tmp_path):
    rows, _ = run_accuracy_sweep(small_config(tmp_path), timing=False)
    loaded = load_results(tmp_path / "rows.csv")
    assert canonical_rows(loaded) == canonical_rows(rows)


def test_trial_errors_are_recorded(tmp_path, monkeypatch, caplog):
    def broken(A, y, s, cfg):
        raise SolverNumericError("overflow", 3)

    monkeypatch.setitem(harness.ALGORITHMS, "strmp", broken)
    with caplog.at_level(logging.WARNING, logger="obcs.harness"):
        rows = execute(small_config(tmp_path))
    failed = rows[rows["algorithm"] == "strmp"]
    assert (failed["status"] == "error:SolverNumericError").all()
    assert failed["snr_db"].isna().all()
    assert (rows[rows["algorithm"] == "biht"]["status"] == "ok").all()
    assert "overflow" in caplog.text
    summary = aggregate(rows)
    assert summary.loc[summary["algorithm"] == "strmp", "n_failed"].tolist() == [2, 2]


def test_aggregate_handles_infinite_snr():
    rows = pd.DataFrame({
        "algorithm": ["strmp"] * 4,
        "m": [10] * 4, "n": [5] * 4, "s": [1] * 4,
        "trial_seed": [1, 2, 3, 4],
        "snr_db": [math.inf, 10.0, 20.0, 30.0],
        "missed": [0, 1, 0, 0],
        "misidentified": [0, 1, 1, 0],
        "hamming_error": [0.0, 0.1, 0.0, 0.2],
        "l2_error_unit": [0.0, 0.3, 0.1, 0.2],
        "wall_time": [1.0, 2.0, 3.0, 4.0],
        "sweep_value": [2.0] * 4,
        "trial": [0, 1, 2, 3],
        "converged": [True, False, True, True],
        "status": ["ok"] * 4,
    })
    accuracy = aggregate(rows, "accuracy").iloc[0]
    assert accuracy["n_exact"] == 1
    assert accuracy["snr_mean"] == pytest.approx(20.0)
    assert accuracy["snr_mean_converged"] == pytest.approx(25.0)
    assert accuracy["missed_mean"] == pytest.approx(0.25)
    assert accuracy["l2_error_median"] == pytest.approx(0.15)
    consistency = aggregate(rows, "consistency").iloc[0]
    assert consistency["n_consistent"] == 2 and consistency["hamming_max"] == pytest.approx(0.2)
    speed = aggregate(rows, "speed").iloc[0]
    assert speed["time_mean"] == pytest.approx(2.5)
    assert speed["time_std"] == pytest.approx(np.std([1, 2, 3, 4], ddof=1))
    with pytest.raises(ConfigError):
        aggregate(rows, "latency")


def test_speed_sweep_runs_serially(tmp_path, caplog):
    cfg = ExperimentConfig(n=30, m=30, sweep=Sweep.SPARSITY, s=None, sweep_values=(2, 3), trials=2,
                           algorithms=("strmp",), workers=4, output_path=str(tmp_path / "speed.csv"))
    with caplog.at_level(logging.WARNING, logger="obcs.harness"):
        rows, summary = run_speed_sweep(cfg)
    assert "workers=1" in caplog.text
    assert len(rows) == 4 and (summary["time_std"] >= 0).all()


def test_load_results_rejects_other_csv(tmp_path):
    path = tmp_path / "other.csv"
    path.write_text("a,b\n1,2\n")
    with pytest.raises(ConfigError):
        load_results(path)


def test_first_index_study_small():
    study = run_first_index_study(100, 3, [5, 200], trials=20, base_seed=1)
    assert list(study.columns) == ["m", "trials", "successes", "success_rate", "bound"]
    assert study["success_rate"].iloc[1] >= 0.9
    assert study["success_rate"].iloc[0] < study["success_rate"].iloc[1]
    with pytest.raises(ConfigError):
        run_first_index_study(100, 3, [], trials=20, base_seed=1)


def test_first_index_trend():
    assert first_index_trend(pd.DataFrame({"m": [1, 2, 3], "success_rate": [0.1, 0.5, 0.9]})) == pytest.approx(1.0)
    assert math.isnan(first_index_trend(pd.DataFrame({"m": [1, 2], "success_rate": [1.0, 1.0]})))


def test_first_index_trend_ignores_points_after_saturation():
    study = pd.DataFrame({"m": [30, 50, 70, 90, 110, 130, 150, 170, 200],
                          "success_rate": [0.36, 0.65, 0.81, 0.86, 1.00, 0.99, 0.99, 1.00, 1.00]})
    assert first_index_trend(study) == pytest.approx(1.0)
    assert first_index_trend(study.iloc[::-1]) == pytest.approx(1.0)
    assert first_index_trend(study, saturation=1.1) < 0.9


@pytest.mark.slow
def test_first_index_success_rate():
    study = run_first_index_study(1000, 15, [30, 50, 70, 90, 110, 130, 150, 170, 200], trials=100, base_seed=2015)
    rates = dict(zip(study["m"], study["success_rate"]))
    assert rates[30] < rates[200]
    assert first_index_trend(study) > 0.9
    at_150 = run_first_index_study(1000, 15, [150], trials=100, base_seed=2015)
    assert at_150["success_rate"].iloc[0] >= 0.98


@pytest.mark.slow
def test_desk_scale_trends(tmp_path):
    cfg = desk_config("accuracy").with_overrides(output_path=str(tmp_path / "accuracy.csv"), workers=4)
    _, accuracy = run_accuracy_sweep(cfg, timing=False)
    consistency = aggregate(load_results(cfg.output_path), "consistency")

    strmp = accuracy[accuracy["algorithm"] == "strmp"].set_index("sweep_value")
    l1 = accuracy[accuracy["algorithm"] == "strmp-l1"].set_index("sweep_value")
    assert strmp["snr_mean"].is_monotonic_increasing and strmp["snr_mean"].is_unique
    assert (l1["snr_mean"] >= strmp["snr_mean"] - 3.0).all()
    hamming = consistency[consistency["algorithm"] == "strmp"]["hamming_mean"]
    assert hamming.is_monotonic_decreasing


@pytest.mark.slow
def test_determinism_across_workers(tmp_path):
    base = desk_config("accuracy").with_overrides(trials=5)
    one = execute(base.with_overrides(workers=1))
    eight = execute(base.with_overrides(workers=8))
    assert canonical_rows(one) == canonical_rows(eight)


@pytest.mark.slow
def test_speed_grows_slowly_with_sparsity(tmp_path):
    cfg = desk_config("speed").with_overrides(algorithms=("strmp",), output_path=str(tmp_path / "speed.csv"))
    _, summary = run_speed_sweep(cfg)
    times = summary.set_index("sweep_value")["time_mean"]
    assert times[14.0] < 10 * times[2.0]
