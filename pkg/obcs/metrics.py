"""
Evaluation quantities: SNR, missed / misidentified coefficients, Hamming error.
"""
import math
from dataclasses import asdict, dataclass

import numpy as np

from obcs.errors import DimensionError
from obcs.model import sign_measure, support_of

CSV_COLUMNS = [
    "algorithm", "m", "n", "s", "trial_seed", "snr_db", "missed",
    "misidentified", "hamming_error", "l2_error_unit", "wall_time",
]


@dataclass(frozen=True)
class MetricsRecord:
    algorithm: str
    m: int
    n: int
    s: int
    trial_seed: int
    snr_db: float
    missed: int
    misidentified: int
    hamming_error: float
    l2_error_unit: float
    wall_time: float

    def to_row(self):
        return asdict(self)


def _pair(x_est, x_true):
    x_est = np.asarray(x_est, dtype=float)
    x_true = np.asarray(x_true, dtype=float)
    if x_est.shape != x_true.shape:
        raise DimensionError(f"estimate {x_est.shape} and truth {x_true.shape} differ in shape")
    return x_est, x_true


def snr(x_est, x_true):
    """10 log10(||x_est||^2 / ||x_est - x_true||^2); +inf on exact recovery, -inf for x_est = 0."""
    x_est, x_true = _pair(x_est, x_true)
    err = float(np.sum((x_est - x_true) ** 2))
    if err == 0:
        return math.inf
    signal = float(np.sum(x_est ** 2))
    if signal == 0:
        return -math.inf
    return 10.0 * math.log10(signal / err)


def _supports(x_est, x_true):
    x_est, x_true = _pair(x_est, x_true)
    return set(support_of(x_est).tolist()), set(support_of(x_true).tolist())


def missed_count(x_est, x_true):
    """True-support entries estimated as zero."""
    est, true = _supports(x_est, x_true)
    return len(true - est)


def misidentified_count(x_est, x_true):
    """Zero entries of the truth estimated as nonzero."""
    est, true = _supports(x_est, x_true)
    return len(est - true)


def hamming_error(x_est, A, y):
    """||sign(A x_est) - y||_0 / m with sign(0) = +1."""
    A = np.asarray(A, dtype=float)
    y = np.asarray(y, dtype=float)
    x_est = np.asarray(x_est, dtype=float)
    if A.shape != (len(y), len(x_est)):
        raise DimensionError(f"matrix {A.shape} does not match y ({len(y)}) and x ({len(x_est)})")
    return int(np.count_nonzero(sign_measure(A @ x_est) != y)) / len(y)


def evaluate(result, signal, ensemble, trial_seed=0):
    """MetricsRecord for one recovery against its ground truth."""
    x_unit = np.asarray(result.x_unit, dtype=float)
    truth = signal.values / np.linalg.norm(signal.values)
    return MetricsRecord(
        algorithm=result.algorithm,
        m=ensemble.m,
        n=ensemble.n,
        s=signal.s,
        trial_seed=int(trial_seed),
        snr_db=snr(x_unit, truth),
        missed=missed_count(x_unit, truth),
        misidentified=misidentified_count(x_unit, truth),
        hamming_error=hamming_error(x_unit, ensemble.A, ensemble.y),
        l2_error_unit=float(np.linalg.norm(x_unit - truth)),
        wall_time=float(result.wall_time),
    )
