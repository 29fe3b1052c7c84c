"""
Inner solvers for the support-restricted subproblems

    L2:  min_z || (C_L z + d)_- ||_2^2      (two-point step size gradient method)
    L1:  min_z || (C_L z + d)_- ||_1        (subgradient descent, BB step, Armijo fallback)

Vectors passed to the objective functions live on the active set only
(length |L|); reports carry both that vector and its embedding in R^(n-1).
"""
import enum
import logging
from collections import deque
from dataclasses import dataclass, replace
from functools import cached_property

import numpy as np

from obcs.errors import DimensionError, SolverNumericError
from obcs.model import sign_truncate

logger = logging.getLogger(__name__)

DEFAULT_MAX_ITER = 2000
ARMIJO_SHRINK = 0.5
ARMIJO_C1 = 1e-4
ARMIJO_MAX_HALVINGS = 60
STEP_MIN = 1e-10
STEP_MAX = 1e10
NONMONOTONE_WINDOW = 10
L1_PATIENCE = 20
L1_MIN_IMPROVEMENT = 1e-12


class Objective(str, enum.Enum):
    L2 = "L2"
    L1 = "L1"


@dataclass(frozen=True)
class SubproblemSpec:
    C: np.ndarray
    d: np.ndarray
    active_set: tuple
    objective_kind: Objective = Objective.L2

    def __post_init__(self):
        active = tuple(sorted(int(i) for i in self.active_set))
        if len(set(active)) != len(active):
            raise DimensionError("active set indices must be distinct")
        if active and (active[0] < 0 or active[-1] >= self.C.shape[1]):
            raise DimensionError(f"active set must lie within [0, {self.C.shape[1]})")
        object.__setattr__(self, "active_set", active)
        object.__setattr__(self, "objective_kind", Objective(self.objective_kind))

    @cached_property
    def C_active(self):
        return np.asfortranarray(self.C[:, list(self.active_set)])

    def residual(self, z_active):
        z_active = np.asarray(z_active, dtype=float)
        if z_active.shape != (len(self.active_set),):
            raise DimensionError(f"expected {len(self.active_set)} active coefficients, got {z_active.shape}")
        return self.C_active @ z_active + self.d

    def embed(self, z_active):
        z = np.zeros(self.C.shape[1])
        z[list(self.active_set)] = z_active
        return z


@dataclass(frozen=True)
class SolverReport:
    z: np.ndarray
    z_active: np.ndarray
    objective_value: float
    iterations: int
    converged: bool
    grad_norm_final: float
    initial_objective: float = float("nan")


def objective_l2(z_active, spec):
    r = sign_truncate(spec.residual(z_active))
    return float(r @ r)


def gradient_l2(z_active, spec):
    return 2.0 * (spec.C_active.T @ sign_truncate(spec.residual(z_active)))


def objective_l1(z_active, spec):
    return float(-np.sum(sign_truncate(spec.residual(z_active))))


def subgradient_l1(z_active, spec):
    """C_L^T sign((C_L z + d)_-) with sign(0) = 0."""
    return spec.C_active.T @ np.sign(sign_truncate(spec.residual(z_active)))


def default_tol(d, kind=Objective.L2):
    """1e-10 * max(1, ||d||_2^2) for the L2 gradient test, 1e-10 * max(1, ||d||_1) for the L1 objective test."""
    d = np.asarray(d, dtype=float)
    if Objective(kind) is Objective.L2:
        return 1e-10 * max(1.0, float(d @ d))
    return 1e-10 * max(1.0, float(np.sum(np.abs(d))))


def _check_finite(iteration, *values):
    for v in values:
        if not np.all(np.isfinite(v)):
            raise SolverNumericError("non-finite objective or gradient", iteration)


def armijo_step(fun, x, f, g, direction, alpha=1.0, shrink=ARMIJO_SHRINK, c1=ARMIJO_C1,
                max_halvings=ARMIJO_MAX_HALVINGS):
    """Backtrack from alpha until f(x + a*direction) <= f + c1*a*g^T direction.

    Returns (alpha, x_new, f_new), or None when no acceptable step was found.
    """
    slope = float(g @ direction)
    for _ in range(max_halvings):
        x_new = x + alpha * direction
        f_new = fun(x_new)
        if np.isfinite(f_new) and f_new <= f + c1 * alpha * slope:
            return alpha, x_new, f_new
        alpha *= shrink
    return None


def two_point_minimize(fun, grad, x0, tol, max_iter=DEFAULT_MAX_ITER):
    """Two-point (Barzilai-Borwein) step size gradient method.

    The first step, and any step where s^T y <= 0 or y = 0, comes from Armijo
    backtracking; otherwise alpha = s^T y / ||y||^2, clipped to
    [STEP_MIN, STEP_MAX]. A BB step is kept when its objective stays below
    the largest of the last NONMONOTONE_WINDOW values (with the Armijo
    decrease term); otherwise it is shortened by backtracking against that
    reference. Stops when ||grad|| <= tol or after max_iter steps. The
    method is nonmonotone, so the report carries the best iterate seen.
    """
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol}")
    x = np.array(x0, dtype=float)
    f = fun(x)
    g = grad(x)
    _check_finite(0, f, g)
    initial = f
    best_x, best_f, best_gnorm = x, f, float(np.linalg.norm(g))

    def report(iterations, converged):
        return SolverReport(z=best_x, z_active=best_x, objective_value=float(best_f), iterations=iterations,
                            converged=converged, grad_norm_final=best_gnorm, initial_objective=float(initial))

    if best_gnorm <= tol:
        return report(0, True)

    step = armijo_step(fun, x, f, g, -g)
    if step is None:
        logger.debug("first line search failed at ||g||=%.3e", best_gnorm)
        return report(0, False)
    _, x_new, f_new = step
    recent = deque([f, f_new], maxlen=NONMONOTONE_WINDOW)

    k = 0
    while True:
        k += 1
        g_new = grad(x_new)
        _check_finite(k, f_new, g_new, x_new)
        gnorm = float(np.linalg.norm(g_new))
        if f_new < best_f or (f_new == best_f and gnorm < best_gnorm):
            best_x, best_f, best_gnorm = x_new, f_new, gnorm
        if gnorm <= tol:
            return report(k, True)
        if k >= max_iter:
            return report(k, False)

        s_vec = x_new - x
        y_vec = g_new - g
        sy = float(s_vec @ y_vec)
        yy = float(y_vec @ y_vec)
        x, f, g = x_new, f_new, g_new
        if sy <= 0 or yy == 0:
            step = armijo_step(fun, x, f, g, -g)
            if step is None:
                logger.debug("line search failed at iteration %d, ||g||=%.3e", k, gnorm)
                return report(k, False)
            _, x_new, f_new = step
        else:
            alpha = min(max(sy / yy, STEP_MIN), STEP_MAX)
            x_new = x - alpha * g
            f_new = fun(x_new)
            reference = max(recent)
            if not np.isfinite(f_new) or f_new > reference - ARMIJO_C1 * alpha * float(g @ g):
                step = armijo_step(fun, x, reference, g, -g, alpha=alpha * ARMIJO_SHRINK)
                if step is None:
                    logger.debug("BB safeguard failed at iteration %d, ||g||=%.3e", k, gnorm)
                    return report(k, False)
                _, x_new, f_new = step
        recent.append(f_new)


def bb_minimize(spec, z_init, tol=None, max_iter=DEFAULT_MAX_ITER):
    """Minimize ||(C_L z + d)_-||_2^2 over the active set from z_init (active coordinates)."""
    if tol is None:
        tol = default_tol(spec.d, Objective.L2)
    z_init = np.asarray(z_init, dtype=float)
    if z_init.shape != (len(spec.active_set),):
        raise DimensionError(f"z_init has shape {z_init.shape}, expected ({len(spec.active_set)},)")
    rep = two_point_minimize(lambda z: objective_l2(z, spec), lambda z: gradient_l2(z, spec), z_init, tol, max_iter)
    logger.debug("bb_minimize |L|=%d: %d iterations, objective %.3e, converged=%s",
                 len(spec.active_set), rep.iterations, rep.objective_value, rep.converged)
    return replace(rep, z=spec.embed(rep.z_active))


def l1_minimize(spec, z_init, tol=None, max_iter=DEFAULT_MAX_ITER, patience=L1_PATIENCE,
                min_improvement=L1_MIN_IMPROVEMENT):
    """Minimize ||(C_L z + d)_-||_1 by monotone subgradient descent.

    Trial steps use the two-point length s^T y / ||y||^2 when it is defined
    and positive (otherwise twice the last accepted step) and are backtracked
    until the Armijo condition holds, so the objective never increases.
    Stops when the objective is <= tol, after `patience` consecutive steps
    improving by less than `min_improvement`, when no descent step exists,
    or after max_iter steps.
    """
    if tol is None:
        tol = default_tol(spec.d, Objective.L1)
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol}")
    z = np.array(z_init, dtype=float)
    if z.shape != (len(spec.active_set),):
        raise DimensionError(f"z_init has shape {z.shape}, expected ({len(spec.active_set)},)")

    fun = lambda v: objective_l1(v, spec)  # noqa: E731
    f = fun(z)
    h = subgradient_l1(z, spec)
    _check_finite(0, f, h)
    initial = f
    trial = 1.0
    stalled = 0
    k = 0
    converged = f <= tol
    while not converged and k < max_iter:
        if not np.any(h):
            break
        step = armijo_step(fun, z, f, h, -h, alpha=trial)
        if step is None:
            logger.debug("l1 line search failed at iteration %d", k)
            break
        k += 1
        alpha, z_new, f_new = step
        h_new = subgradient_l1(z_new, spec)
        _check_finite(k, f_new, h_new, z_new)

        stalled = stalled + 1 if f - f_new < min_improvement else 0
        s_vec = z_new - z
        y_vec = h_new - h
        sy = float(s_vec @ y_vec)
        yy = float(y_vec @ y_vec)
        trial = min(max(sy / yy, STEP_MIN), STEP_MAX) if sy > 0 and yy > 0 else min(2 * alpha, STEP_MAX)
        z, f, h = z_new, f_new, h_new
        converged = f <= tol
        if stalled >= patience:
            break

    logger.debug("l1_minimize |L|=%d: %d iterations, objective %.3e, converged=%s",
                 len(spec.active_set), k, f, converged)
    return SolverReport(z=spec.embed(z), z_active=z, objective_value=float(f), iterations=k, converged=bool(converged),
                        grad_norm_final=float(np.linalg.norm(h)), initial_objective=float(initial))


def minimize(spec, z_init, tol=None, max_iter=DEFAULT_MAX_ITER):
    """Dispatch on spec.objective_kind."""
    if spec.objective_kind is Objective.L1:
        return l1_minimize(spec, z_init, tol=tol, max_iter=max_iter)
    return bb_minimize(spec, z_init, tol=tol, max_iter=max_iter)
