"""
Reference answers for small instances: exhaustive l0 search over supports
and a Monte-Carlo check of E[A_ij y_i] = 2 x_j / sqrt(2 pi).
"""
import logging
import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from obcs.errors import DimensionError, OracleRefusedError, PivotDegenerateError, SolverNumericError
from obcs.model import make_rng, sign_measure
from obcs.reduction import DEFAULT_C0, build_reduced_problem, certify_solution, lift_solution
from obcs.solvers import SubproblemSpec, bb_minimize
from obcs.strmp import polish_consistency

logger = logging.getLogger(__name__)

MAX_ORACLE_N = 25
MAX_ORACLE_S = 3
FEASIBILITY_TOL = 1e-10
ORACLE_SOLVER_TOL = 1e-12
ORACLE_MAX_ITER = 10000
EXPECTATION_BATCH = 100_000


@dataclass
class OracleResult:
    best_support: tuple
    best_x: np.ndarray
    min_sparsity: int
    feasible: bool
    feasible_supports: list = field(default_factory=list)


@dataclass(frozen=True)
class ExpectationEstimate:
    mean: float
    stderr: float
    trials: int
    theoretical: float

    @property
    def z_score(self):
        return (self.mean - self.theoretical) / self.stderr if self.stderr > 0 else math.inf


def _feasible_point(A, y, support, reduced, c0):
    """Lifted x supported on `support` with sign(Ax) = y, or None."""
    for j0 in support:
        if reduced.get(j0) is None:
            try:
                reduced[j0] = build_reduced_problem(A, y, j0, c0)
            except PivotDegenerateError:
                reduced[j0] = False
        rp = reduced[j0]
        if rp is False:
            continue
        spec = SubproblemSpec(C=rp.C, d=rp.d, active_set=rp.to_reduced([j for j in support if j != j0]))
        try:
            report = bb_minimize(spec, np.zeros(len(spec.active_set)), tol=ORACLE_SOLVER_TOL,
                                 max_iter=ORACLE_MAX_ITER)
        except SolverNumericError as exc:
            logger.debug("oracle: support %s with j0=%d skipped: %s", support, j0, exc)
            continue
        if report.objective_value >= FEASIBILITY_TOL:
            return None
        z, consistent = polish_consistency(rp, spec.active_set, report.z, ORACLE_MAX_ITER)
        if not consistent:
            continue
        x = lift_solution(z, rp, A, y)
        if certify_solution(x, A, y).consistent:
            return x
    return None


def brute_force_l0(A, y, s_max, c0=DEFAULT_C0):
    """Smallest-support x with sign(Ax) = y and y^T A x = c0, by enumerating supports.

    Supports are visited by size, then lexicographically; every feasible
    support of the minimal size is listed in ``feasible_supports``.
    """
    A = np.asarray(A, dtype=float)
    y = np.asarray(y, dtype=float)
    m, n = A.shape
    if y.shape != (m,):
        raise DimensionError(f"sign vector has length {y.size}, expected {m}")
    if n > MAX_ORACLE_N or not 1 <= s_max <= MAX_ORACLE_S:
        raise OracleRefusedError(f"brute force limited to n <= {MAX_ORACLE_N}, 1 <= s_max <= {MAX_ORACLE_S}; "
                                 f"got n={n}, s_max={s_max}")

    reduced = {}
    for size in range(1, min(s_max, n) + 1):
        found = []
        for support in combinations(range(n), size):
            x = _feasible_point(A, y, support, reduced, c0)
            if x is not None:
                found.append((support, x))
        if found:
            logger.debug("oracle: %d feasible supports of size %d", len(found), size)
            return OracleResult(best_support=found[0][0], best_x=found[0][1], min_sparsity=size, feasible=True,
                                feasible_supports=[support for support, _ in found])
    return OracleResult(best_support=(), best_x=np.zeros(n), min_sparsity=None, feasible=False)


def theoretical_expectation(x_true, j):
    return 2.0 * float(x_true.values[j]) / math.sqrt(2.0 * math.pi)


def estimate_expectation(x_true, j, trials, seed, batch=EXPECTATION_BATCH):
    """Mean and standard error of a_j * sign(a^T x_true) over a ~ N(0, I_n).

    Only the coordinates in supp(x_true) and j influence the product, so
    only those are drawn.
    """
    if not 0 <= j < x_true.n:
        raise DimensionError(f"j={j} outside [0, {x_true.n})")
    if trials < 2:
        raise ValueError("need at least two trials for a standard error")
    cols = sorted(set(x_true.support.tolist()) | {int(j)})
    weights = x_true.values[cols]
    pos = cols.index(int(j))
    rng = make_rng(seed)
    total = 0.0
    total_sq = 0.0
    remaining = trials
    while remaining > 0:
        size = min(batch, remaining)
        rows = rng.standard_normal((size, len(cols)))
        samples = rows[:, pos] * sign_measure(rows @ weights)
        total += float(samples.sum())
        total_sq += float(samples @ samples)
        remaining -= size
    mean = total / trials
    variance = max(total_sq / trials - mean ** 2, 0.0) * trials / (trials - 1)
    return ExpectationEstimate(mean=mean, stderr=math.sqrt(variance / trials), trials=trials,
                               theoretical=theoretical_expectation(x_true, j))


def monte_carlo_expectation(x_true, j, trials, seed):
    return estimate_expectation(x_true, j, trials, seed).mean
