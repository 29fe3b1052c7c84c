"""
Experiment engine for the accuracy, consistency and speed sweeps and the
first-index study.

Every trial is a pure function of (config, sweep point, trial number): the
instance seed is derived from base_seed and the position, so trials can run
in any order on any number of workers and still produce the same rows.
"""
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from functools import partial
from pathlib import Path

import numpy as np
import pandas as pd
from scipy import stats

from obcs.baselines import BihtConfig, run_biht
from obcs.config import config_to_text
from obcs.errors import ConfigError, ObcsError
from obcs.metrics import CSV_COLUMNS, evaluate
from obcs.model import RNG_IDENTITY, derive_trial_seed, generate_instance
from obcs.reduction import first_index_measurement_bound, select_first_index
from obcs.solvers import Objective
from obcs.strmp import StrmpConfig, run_strmp

logger = logging.getLogger(__name__)

ROW_COLUMNS = CSV_COLUMNS + ["sweep_value", "trial", "converged", "status"]
FIRST_INDEX_COLUMNS = ["m", "trials", "successes", "success_rate", "bound"]
FLOAT_FORMAT = "%.12g"

_GROUP = ["sweep_value", "algorithm"]
_KIND_COLUMNS = {
    "accuracy": ["n_exact", "snr_mean", "snr_mean_converged", "missed_mean",
                 "misidentified_mean", "l2_error_median"],
    "consistency": ["n_consistent", "hamming_mean", "hamming_max"],
    "speed": ["time_mean", "time_std", "time_max"],
}


def _strmp_runner(variant):
    def run(A, y, s, cfg):
        return run_strmp(A, y, StrmpConfig(
            s=s, c0=cfg.c0, epsilon=cfg.epsilon, variant=variant,
            atoms_per_iteration=cfg.atoms_per_iteration, solver_tol=cfg.solver_tol,
            solver_max_iter=cfg.solver_max_iter,
        ))
    return run


def _biht_runner(A, y, s, cfg):
    return run_biht(A, y, BihtConfig(s=s, step_size=cfg.biht_step_size, max_iter=cfg.biht_max_iter))


ALGORITHMS = {
    "strmp": _strmp_runner(Objective.L2),
    "strmp-l1": _strmp_runner(Objective.L1),
    "biht": _biht_runner,
}


def run_algorithm(name, A, y, s, cfg):
    """Dispatch a recovery by algorithm name with the sweep's sensitivity settings."""
    try:
        runner = ALGORITHMS[name]
    except KeyError:
        raise ConfigError(f"unknown algorithm '{name}'; choose from {list(ALGORITHMS)}")
    return runner(A, y, s, cfg)


@dataclass(frozen=True)
class TrialTask:
    point: int
    trial: int
    sweep_value: float
    m: int
    n: int
    s: int

    def seed(self, base_seed):
        return derive_trial_seed(base_seed, self.point, self.trial)


def build_tasks(cfg):
    return [
        TrialTask(point=p, trial=t, sweep_value=value, m=m, n=cfg.n, s=s)
        for p, (value, m, s) in enumerate(cfg.points())
        for t in range(cfg.trials)
    ]


def _failed_row(task, seed, algorithm, error):
    row = dict.fromkeys(CSV_COLUMNS, np.nan)
    row.update(algorithm=algorithm, m=task.m, n=task.n, s=task.s, trial_seed=seed)
    row.update(sweep_value=task.sweep_value, trial=task.trial, converged=False,
               status=f"error:{type(error).__name__}")
    return row


def run_trial(task, cfg, timing=True):
    """Rows (one per algorithm) for a single trial."""
    seed = task.seed(cfg.base_seed)
    try:
        signal, ensemble = generate_instance(task.m, task.n, task.s, seed)
    except ObcsError as e:
        logger.warning("trial %d at %s: instance generation failed: %s", task.trial, task.sweep_value, e)
        return [_failed_row(task, seed, name, e) for name in cfg.algorithms]

    rows = []
    for name in cfg.algorithms:
        try:
            result = run_algorithm(name, ensemble.A, ensemble.y, task.s, cfg)
        except ObcsError as e:
            logger.warning("trial %d at %s: %s failed: %s", task.trial, task.sweep_value, name, e)
            rows.append(_failed_row(task, seed, name, e))
            continue
        row = evaluate(result, signal, ensemble, trial_seed=seed).to_row()
        if not timing:
            row["wall_time"] = 0.0
        row.update(sweep_value=task.sweep_value, trial=task.trial, converged=bool(result.converged), status="ok")
        if not result.converged:
            logger.warning("trial %d at %s: %s stopped on '%s' (residual %.3e)", task.trial, task.sweep_value,
                           name, result.stop_reason, result.final_residual)
        rows.append(row)
    return rows


def sort_rows(rows):
    """Canonical order: (sweep_value, trial, algorithm)."""
    frame = pd.DataFrame(rows, columns=ROW_COLUMNS)
    return frame.sort_values(["sweep_value", "trial", "algorithm"], kind="stable").reset_index(drop=True)


def execute(cfg, timing=True):
    """Run every trial of cfg and return the canonically sorted rows."""
    tasks = build_tasks(cfg)
    job = partial(run_trial, cfg=cfg, timing=timing)
    logger.info("running %d trials x %d algorithms on %d worker(s)", len(tasks), len(cfg.algorithms), cfg.workers)
    if cfg.workers == 1:
        batches = [job(task) for task in tasks]
    else:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            batches = list(pool.map(job, tasks, chunksize=max(1, len(tasks) // (4 * cfg.workers))))
    return sort_rows([row for batch in batches for row in batch])


def _finite_mean(values):
    values = values[np.isfinite(values)]
    return float(values.mean()) if len(values) else np.nan


def _summarize(group):
    ok = group[group["status"] == "ok"]
    snr = ok["snr_db"].astype(float)
    converged = ok["converged"].astype(bool)
    times = ok["wall_time"].astype(float)
    return {
        "m": int(group["m"].iloc[0]),
        "s": int(group["s"].iloc[0]),
        "trials": len(group),
        "n_failed": int((group["status"] != "ok").sum()),
        "n_exact": int(np.isposinf(snr).sum()),
        "snr_mean": _finite_mean(snr),
        "snr_mean_converged": _finite_mean(snr[converged]),
        "missed_mean": float(ok["missed"].mean()),
        "misidentified_mean": float(ok["misidentified"].mean()),
        "l2_error_median": float(ok["l2_error_unit"].median()),
        "n_consistent": int((ok["hamming_error"] == 0).sum()),
        "hamming_mean": float(ok["hamming_error"].mean()),
        "hamming_max": float(ok["hamming_error"].max()),
        "time_mean": float(times.mean()),
        "time_std": float(times.std(ddof=1)) if len(times) > 1 else 0.0,
        "time_max": float(times.max()),
    }


def aggregate(rows, kind="accuracy"):
    """Per-(sweep_value, algorithm) summary of a rows frame.

    SNR means skip infinite values (exact recoveries, counted in n_exact).
    snr_mean covers every completed trial; snr_mean_converged only those
    that stopped on the residual or consistency test.
    """
    if kind not in _KIND_COLUMNS:
        raise ConfigError(f"unknown aggregate kind '{kind}'")
    records = [
        {"sweep_value": value, "algorithm": algorithm, **_summarize(group)}
        for (value, algorithm), group in rows.groupby(_GROUP, sort=True)
    ]
    columns = _GROUP + ["m", "s", "trials", "n_failed"] + _KIND_COLUMNS[kind]
    return pd.DataFrame(records).reindex(columns=columns)


def aggregate_path(output_path):
    path = Path(output_path)
    return path.with_name(f"{path.stem}.agg.csv")


def write_results(rows, summary, cfg, xlsx=False):
    """Rows CSV, aggregate CSV, run metadata and (optionally) an Excel workbook."""
    path = Path(cfg.output_path)
    path.parent.mkdir(parents=True, exist_ok=True)
    rows.to_csv(path, index=False, float_format=FLOAT_FORMAT, na_rep="nan")
    summary.to_csv(aggregate_path(path), index=False, float_format=FLOAT_FORMAT, na_rep="nan")
    path.with_name(f"{path.stem}.meta.txt").write_text(f"# rng = {RNG_IDENTITY}\n" + config_to_text(cfg))
    logger.info("wrote %d rows to %s", len(rows), path)
    if xlsx:
        with pd.ExcelWriter(path.with_suffix(".xlsx"), engine="openpyxl") as writer:
            summary.to_excel(writer, sheet_name="aggregate", index=False)
            rows.to_excel(writer, sheet_name="rows", index=False)
        logger.info("wrote workbook %s", path.with_suffix(".xlsx"))


def run_sweep(cfg, kind, timing=True, write=True, xlsx=False):
    rows = execute(cfg, timing=timing)
    summary = aggregate(rows, kind)
    if write:
        write_results(rows, summary, cfg, xlsx=xlsx)
    return rows, summary


def run_accuracy_sweep(cfg, **kwargs):
    """SNR, missed and misidentified counts per sweep point."""
    return run_sweep(cfg, "accuracy", **kwargs)


def run_consistency_sweep(cfg, **kwargs):
    """Hamming error between sign(A x) and y per sweep point."""
    return run_sweep(cfg, "consistency", **kwargs)


def run_speed_sweep(cfg, **kwargs):
    """Wall time per recovery; always serial so trials do not compete for cores."""
    if cfg.workers != 1:
        logger.warning("speed sweeps run with workers=1 (requested %d)", cfg.workers)
        cfg = replace(cfg, workers=1)
    return run_sweep(cfg, "speed", **kwargs)


SWEEPS = {
    "accuracy": run_accuracy_sweep,
    "consistency": run_consistency_sweep,
    "speed": run_speed_sweep,
}


def load_results(path):
    rows = pd.read_csv(path)
    missing = [c for c in ROW_COLUMNS if c not in rows.columns]
    if missing:
        raise ConfigError(f"{path} is not a results file; missing columns {missing}")
    return rows


def canonical_rows(rows):
    """CSV text of the rows without wall_time, in canonical order, for determinism checks."""
    if not isinstance(rows, pd.DataFrame):
        rows = load_results(rows)
    frame = rows.drop(columns=["wall_time"]).sort_values(["sweep_value", "trial", "algorithm"], kind="stable")
    return frame.to_csv(index=False, float_format=FLOAT_FORMAT, na_rep="nan")


def run_first_index_study(n, s, m_values, trials, base_seed):
    """Fraction of trials in which argmax |A_i^T y| falls in the true support, per m."""
    m_values = [int(m) for m in m_values]
    if not m_values or trials < 1:
        raise ConfigError("first-index study needs at least one m and one trial")
    bound = first_index_measurement_bound(n, s)
    records = []
    for point, m in enumerate(m_values):
        successes = 0
        for trial in range(trials):
            signal, ensemble = generate_instance(m, n, s, derive_trial_seed(base_seed, point, trial))
            successes += int(select_first_index(ensemble.A, ensemble.y) in signal.support)
        logger.info("first index: m=%d success %d/%d", m, successes, trials)
        records.append({"m": m, "trials": trials, "successes": successes,
                        "success_rate": successes / trials, "bound": bound})
    return pd.DataFrame(records, columns=FIRST_INDEX_COLUMNS)


def first_index_trend(study, saturation=1.0):
    """Spearman correlation of success rate against m (nan when the rate is constant).

    Only the sweep up to the first m whose rate reaches ``saturation`` counts.
    """
    study = study.sort_values("m")
    saturated = np.flatnonzero(study["success_rate"].to_numpy() >= saturation)
    if len(saturated):
        study = study.iloc[: saturated[0] + 1]
    if len(study) < 2 or study["success_rate"].nunique() < 2:
        return np.nan
    return float(stats.spearmanr(study["m"], study["success_rate"])[0])
