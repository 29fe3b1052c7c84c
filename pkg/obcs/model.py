"""
Core data model: sparse signals, Gaussian measurement ensembles, recovery
results, seeded generators and the sign / sign-truncation primitives.
"""
import logging
from dataclasses import dataclass, field

import numpy as np

from obcs.errors import DimensionError

logger = logging.getLogger(__name__)

# Recorded in harness metadata so a CSV can be traced back to its stream.
RNG_IDENTITY = "numpy.random.PCG64/SeedSequence, ziggurat standard normals"

_SEED_MASK = (1 << 64) - 1


def _as_seed(seed):
    """Fold any Python integer into the unsigned 64-bit seed space."""
    return int(seed) & _SEED_MASK


def make_rng(seed):
    """Return the package's generator for a seed."""
    return np.random.Generator(np.random.PCG64(_as_seed(seed)))


def derive_trial_seed(base_seed, *path):
    """Derive an independent seed for a position in an experiment.

    ``path`` is a tuple of non-negative integers (sweep point, trial, ...);
    the derivation is numpy's SeedSequence spawn-key hashing, so distinct
    paths give statistically independent streams. The top bit of the 64-bit
    word is dropped so seeds fit signed 64-bit CSV columns.
    """
    seq = np.random.SeedSequence(_as_seed(base_seed), spawn_key=tuple(int(p) for p in path))
    return int(seq.generate_state(1, dtype=np.uint64)[0]) >> 1


def _freeze(array):
    array.flags.writeable = False
    return array


@dataclass(frozen=True)
class SparseSignal:
    """An s-sparse ground-truth vector with its support."""
    values: np.ndarray
    support: np.ndarray

    def __post_init__(self):
        values = _freeze(np.array(self.values, dtype=float))
        support = _freeze(np.array(sorted(int(i) for i in self.support), dtype=int))
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "support", support)
        if values.ndim != 1:
            raise DimensionError("signal values must be a vector")
        if len(np.unique(support)) != len(support):
            raise DimensionError("support indices must be distinct")
        if len(support) and (support[0] < 0 or support[-1] >= len(values)):
            raise DimensionError("support index out of range")
        off = np.ones(len(values), dtype=bool)
        off[support] = False
        if np.any(values[off] != 0) or np.any(values[support] == 0):
            raise DimensionError("values must be nonzero exactly on the support")

    @property
    def n(self):
        return len(self.values)

    @property
    def s(self):
        return len(self.support)

    @classmethod
    def from_vector(cls, x):
        x = np.asarray(x, dtype=float)
        return cls(values=x, support=np.flatnonzero(x))

    def normalized(self):
        return SparseSignal(values=self.values / np.linalg.norm(self.values), support=self.support)


@dataclass(frozen=True)
class MeasurementEnsemble:
    """The m x n Gaussian matrix, the sign vector and the generating seed."""
    A: np.ndarray
    y: np.ndarray
    seed: int = 0

    def __post_init__(self):
        A = _freeze(np.array(self.A, dtype=float, order="F"))
        y = _freeze(np.array(self.y, dtype=float))
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "y", y)
        if A.ndim != 2:
            raise DimensionError("measurement matrix must be two-dimensional")
        if y.shape != (A.shape[0],):
            raise DimensionError(f"sign vector has length {y.size}, expected {A.shape[0]}")
        if not np.all(np.abs(y) == 1.0):
            raise DimensionError("sign vector entries must be exactly +1 or -1")

    @property
    def m(self):
        return self.A.shape[0]

    @property
    def n(self):
        return self.A.shape[1]

    @classmethod
    def from_signal(cls, A, signal, seed=0):
        A = np.asfortranarray(A, dtype=float)
        return cls(A=A, y=sign_measure(A @ signal.values), seed=seed)


@dataclass(frozen=True)
class TraceStep:
    """One greedy or iterative step: indices chosen (original coordinates) and the residual after it."""
    iteration: int
    indices: tuple
    residual: float


@dataclass
class RecoveryResult:
    x_raw: np.ndarray
    x_unit: np.ndarray
    support: tuple
    iterations: int
    final_residual: float
    trace: list = field(default_factory=list)
    wall_time: float = 0.0
    converged: bool = False
    stop_reason: str = ""
    algorithm: str = ""
    j0: int = None
    metadata: dict = field(default_factory=dict)

    @property
    def chosen_indices(self):
        """Flattened sequence of identified indices, in selection order."""
        return [i for step in self.trace for i in step.indices]


def unit_normalize(x):
    """Scale x to unit l2 norm; the zero vector is returned unchanged."""
    x = np.asarray(x, dtype=float)
    norm = np.linalg.norm(x)
    if norm == 0:
        logger.warning("cannot normalize the zero vector")
        return x.copy()
    return x / norm


def support_of(x, rel_tol=1e-12):
    """Indices of entries above rel_tol * ||x||_inf (empty for the zero vector)."""
    x = np.asarray(x, dtype=float)
    scale = np.max(np.abs(x)) if x.size else 0.0
    if scale == 0:
        return np.array([], dtype=int)
    return np.flatnonzero(np.abs(x) > rel_tol * scale)


def generate_gaussian_matrix(m, n, seed):
    """i.i.d. standard normal m x n matrix, stored column-major."""
    if m < 1 or n < 1:
        raise DimensionError(f"matrix dimensions must be positive, got {m}x{n}")
    return np.asfortranarray(make_rng(seed).standard_normal((m, n)))


def generate_sparse_signal(n, s, seed, normalize=True):
    """Uniformly random size-s support with i.i.d. standard normal nonzeros."""
    if not 1 <= s <= n:
        raise DimensionError(f"sparsity s={s} must lie in [1, n={n}]")
    rng = make_rng(seed)
    support = np.sort(rng.choice(n, size=s, replace=False))
    values = np.zeros(n)
    values[support] = rng.standard_normal(s)
    if normalize:
        values /= np.linalg.norm(values)
    return SparseSignal(values=values, support=support)


def generate_instance(m, n, s, seed, normalize=True):
    """Signal and ensemble for one trial; both are pure functions of (m, n, s, seed)."""
    signal = generate_sparse_signal(n, s, derive_trial_seed(seed, 1), normalize=normalize)
    A = generate_gaussian_matrix(m, n, derive_trial_seed(seed, 0))
    return signal, MeasurementEnsemble.from_signal(A, signal, seed=seed)


def sign_measure(v):
    """Componentwise sign with sign(0) = +1, so the result lies in {-1, +1}^m."""
    return np.where(np.asarray(v, dtype=float) >= 0, 1.0, -1.0)


def sign_truncate(v):
    """(v)_- = min(v, 0) componentwise."""
    return np.minimum(np.asarray(v, dtype=float), 0.0)
