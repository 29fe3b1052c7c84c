"""
Dimension reduction around a first index j0.

Fixing y^T A x = c0 and solving it for x_j0 turns the sign-consistency
problem over x in R^n into the problem  Cz + d >= 0  over z in R^(n-1).
This module selects j0, builds (C, d), lifts reduced solutions back to R^n
and certifies candidate solutions against the measurements.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np

from obcs.errors import DegenerateMeasurementError, DimensionError, PivotDegenerateError
from obcs.model import sign_measure, support_of

logger = logging.getLogger(__name__)

DEFAULT_C0 = 1.0
PIVOT_REL_TOL = 1e-12
SPARSITY_REL_TOL = 1e-12


@dataclass(frozen=True)
class ReducedProblem:
    C: np.ndarray
    d: np.ndarray
    j0: int
    c0: float
    col_map: np.ndarray
    pivot: float

    @property
    def m(self):
        return self.C.shape[0]

    @property
    def n_reduced(self):
        return self.C.shape[1]

    def to_reduced(self, original_indices):
        """Map original column indices (other than j0) to reduced ones."""
        lookup = {int(j): r for r, j in enumerate(self.col_map)}
        return [lookup[int(j)] for j in original_indices]


@dataclass(frozen=True)
class SolutionCertificate:
    consistent: bool
    hamming_mismatches: int
    sparsity: int
    l1_of_Ax: float
    y_dot_Ax: float

    def normalization_gap(self, c0):
        return abs(self.l1_of_Ax - c0)


def _check_pair(A, y):
    A = np.asarray(A, dtype=float)
    y = np.asarray(y, dtype=float)
    if A.ndim != 2 or y.shape != (A.shape[0],):
        raise DimensionError(f"matrix {A.shape} and sign vector {y.shape} do not agree")
    return A, y


def proxy(A, y):
    """The correlation vector A^T y."""
    A, y = _check_pair(A, y)
    return A.T @ y


def select_first_index(A, y):
    """Smallest index attaining max_i |A_i^T y|."""
    magnitudes = np.abs(proxy(A, y))
    j0 = int(np.argmax(magnitudes))
    if magnitudes[j0] == 0:
        raise DegenerateMeasurementError("A^T y is identically zero")
    return j0


def top_k_proxy_indices(A, y, k):
    """Indices of the k largest |A_i^T y|, descending, ties by ascending index."""
    magnitudes = np.abs(proxy(A, y))
    if not 1 <= k <= len(magnitudes):
        raise DimensionError(f"k={k} must lie in [1, {len(magnitudes)}]")
    return [int(i) for i in np.argsort(-magnitudes, kind="stable")[:k]]


def build_reduced_problem(A, y, j0, c0=DEFAULT_C0):
    """Build C = diag(y) P and d = diag(y) q without forming the m x m projector."""
    A, y = _check_pair(A, y)
    m, n = A.shape
    if not 0 <= j0 < n:
        raise DimensionError(f"j0={j0} outside [0, {n})")
    if not c0 > 0:
        raise ValueError(f"c0 must be positive, got {c0}")

    a_pivot = A[:, j0]
    pivot = float(y @ a_pivot)
    if abs(pivot) <= PIVOT_REL_TOL * np.linalg.norm(a_pivot) * math.sqrt(m):
        raise PivotDegenerateError(f"y^T A_j0 = {pivot:.3e} is degenerate for j0={j0}")

    col_map = np.delete(np.arange(n), j0)
    A_rest = A[:, col_map]
    weights = y @ A_rest
    u = y * a_pivot
    C = np.asfortranarray(y[:, None] * A_rest - np.outer(u, weights / pivot))
    d = (c0 / pivot) * u
    logger.debug("reduced problem: j0=%d pivot=%.4g m=%d n-1=%d", j0, pivot, m, n - 1)
    return ReducedProblem(C=C, d=d, j0=j0, c0=float(c0), col_map=col_map, pivot=pivot)


def lift_solution(z, rp, A, y):
    """Embed z into R^n and solve y^T A x = c0 for the j0 coordinate."""
    A, y = _check_pair(A, y)
    z = np.asarray(z, dtype=float)
    if z.shape != (A.shape[1] - 1,):
        raise DimensionError(f"reduced vector has length {z.size}, expected {A.shape[1] - 1}")
    x = np.zeros(A.shape[1])
    x[rp.col_map] = z
    x[rp.j0] = (rp.c0 - (y @ A[:, rp.col_map]) @ z) / rp.pivot
    return x


def reduced_ground_truth(x, rp, A, y):
    """Scale x so that y^T A x = c0 and return its reduced coordinates."""
    A, y = _check_pair(A, y)
    x = np.asarray(x, dtype=float)
    level = float(y @ (A @ x))
    if level <= 0:
        raise DimensionError("x is not sign-consistent enough to be scaled onto y^T A x = c0")
    return (x * (rp.c0 / level))[rp.col_map]


def certify_solution(x, A, y, s=None, c0=None):
    """Check consistency sign(Ax) = y, sparsity and the l1 normalization of Ax.

    ``s`` and ``c0`` do not change the certificate itself; callers compare
    ``sparsity`` and ``normalization_gap`` against them.
    """
    A, y = _check_pair(A, y)
    x = np.asarray(x, dtype=float)
    Ax = A @ x
    mismatches = int(np.count_nonzero(sign_measure(Ax) != y))
    cert = SolutionCertificate(
        consistent=mismatches == 0,
        hamming_mismatches=mismatches,
        sparsity=len(support_of(x, SPARSITY_REL_TOL)),
        l1_of_Ax=float(np.sum(np.abs(Ax))),
        y_dot_Ax=float(y @ Ax),
    )
    if s is not None and cert.sparsity > s:
        logger.debug("certificate: sparsity %d exceeds budget %d", cert.sparsity, s)
    if c0 is not None and cert.consistent:
        logger.debug("certificate: | ||Ax||_1 - c0 | = %.3e", cert.normalization_gap(c0))
    return cert


def first_index_measurement_bound(n, s, eps=1.0):
    """Measurements sufficient for j0 to land in the support with probability >= 1 - 2e*exp(-c eps^2)."""
    if not 1 <= s < n:
        raise DimensionError(f"need 1 <= s < n, got s={s}, n={n}")
    return math.pi / 2 * s * (eps + math.sqrt(eps ** 2 + 2 * math.log(n - s))) ** 2
