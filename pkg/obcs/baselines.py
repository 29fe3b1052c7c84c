"""
Binary iterative hard thresholding (BIHT), the comparison baseline.
"""
import logging
import time
from dataclasses import dataclass

import numpy as np

from obcs.errors import DimensionError, SolverNumericError
from obcs.model import RecoveryResult, TraceStep, sign_measure, unit_normalize

logger = logging.getLogger(__name__)

DEFAULT_BIHT_MAX_ITER = 300


@dataclass(frozen=True)
class BihtConfig:
    s: int
    step_size: float = None
    max_iter: int = DEFAULT_BIHT_MAX_ITER
    halt_on_consistency: bool = True

    def __post_init__(self):
        if self.s < 1:
            raise DimensionError(f"sparsity budget must be >= 1, got {self.s}")
        if self.step_size is not None and not self.step_size > 0:
            raise ValueError(f"step_size must be positive, got {self.step_size}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be >= 1, got {self.max_iter}")

    def step_for(self, m):
        """tau, defaulting to 1/m."""
        return self.step_size if self.step_size is not None else 1.0 / m


def hard_threshold(x, s):
    """Keep the s largest-magnitude entries (smallest index first on ties), zero the rest."""
    x = np.asarray(x, dtype=float)
    if not 1 <= s <= len(x):
        raise DimensionError(f"s={s} must lie in [1, {len(x)}]")
    keep = np.argsort(-np.abs(x), kind="stable")[:s]
    out = np.zeros_like(x)
    out[keep] = x[keep]
    return out


def run_biht(A, y, cfg):
    """x <- H_s(x + (tau/2) A^T (y - sign(Ax))), renormalized every step.

    Starts from H_s(A^T y) and returns the iterate with the lowest Hamming
    error (later iterates win ties).
    """
    A = np.asarray(A, dtype=float)
    y = np.asarray(y, dtype=float)
    m, n = A.shape
    if y.shape != (m,):
        raise DimensionError(f"sign vector has length {y.size}, expected {m}")
    if cfg.s > n:
        raise DimensionError(f"s={cfg.s} exceeds n={n}")
    tau = cfg.step_for(m)
    start = time.perf_counter()

    x = unit_normalize(hard_threshold(A.T @ y, cfg.s))
    mismatches = int(np.count_nonzero(sign_measure(A @ x) != y))
    best_x, best_mismatches = x, mismatches
    trace = [TraceStep(iteration=0, indices=tuple(int(i) for i in np.flatnonzero(x)), residual=mismatches / m)]

    k = 0
    while k < cfg.max_iter and not (cfg.halt_on_consistency and best_mismatches == 0):
        k += 1
        x = x + (tau / 2) * (A.T @ (y - sign_measure(A @ x)))
        x = unit_normalize(hard_threshold(x, cfg.s))
        if not np.all(np.isfinite(x)):
            raise SolverNumericError("non-finite BIHT iterate", k)
        mismatches = int(np.count_nonzero(sign_measure(A @ x) != y))
        trace.append(TraceStep(iteration=k, indices=tuple(int(i) for i in np.flatnonzero(x)), residual=mismatches / m))
        if mismatches <= best_mismatches:
            best_x, best_mismatches = x, mismatches

    wall_time = time.perf_counter() - start
    logger.debug("biht: %d iterations, best Hamming error %d/%d", k, best_mismatches, m)
    return RecoveryResult(
        x_raw=best_x.copy(),
        x_unit=unit_normalize(best_x),
        support=tuple(int(i) for i in np.flatnonzero(best_x)),
        iterations=k,
        final_residual=best_mismatches / m,
        trace=trace,
        wall_time=wall_time,
        converged=best_mismatches == 0,
        stop_reason="consistent" if best_mismatches == 0 else "max_iter",
        algorithm="biht",
        metadata={"step_size": tau, "max_iter": cfg.max_iter},
    )
