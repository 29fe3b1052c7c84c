"""
Sign truncated matching pursuit (STrMP) and its l1 variant.

    j0 = argmax |A_i^T y|, build (C, d) around j0, then repeat
        match:    h = C^T (Cz + d)_-          (l1: C^T sign((Cz + d)_-))
        identify: add the largest |h_i| outside the current support
        update:   re-solve the convex subproblem on the enlarged support
    until ||(Cz + d)_-||^2 < eps with every row of Cz + d clear of zero, or s
    atoms are in use; lift z back to R^n.
"""
import logging
import time
from dataclasses import dataclass

import numpy as np

from obcs.errors import DimensionError, StagnationError
from obcs.model import RecoveryResult, TraceStep, sign_truncate, unit_normalize
from obcs.reduction import DEFAULT_C0, build_reduced_problem, lift_solution, select_first_index
from obcs.solvers import DEFAULT_MAX_ITER, Objective, SubproblemSpec, bb_minimize, default_tol, minimize, objective_l2

logger = logging.getLogger(__name__)

# Margin, relative to c0 / m, that polish_consistency asks of every row.
POLISH_MARGIN = 1e-6
POLISH_TOL_FACTOR = 1e-3


@dataclass(frozen=True)
class StrmpConfig:
    s: int
    c0: float = DEFAULT_C0
    epsilon: float = None
    variant: Objective = Objective.L2
    atoms_per_iteration: int = 1
    solver_tol: float = None
    solver_max_iter: int = DEFAULT_MAX_ITER

    def __post_init__(self):
        object.__setattr__(self, "variant", Objective(self.variant))
        if self.s < 1:
            raise DimensionError(f"sparsity budget must be >= 1, got {self.s}")
        if not self.c0 > 0:
            raise ValueError(f"c0 must be positive, got {self.c0}")
        if self.epsilon is not None and not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if self.atoms_per_iteration < 1:
            raise ValueError(f"atoms_per_iteration must be >= 1, got {self.atoms_per_iteration}")
        if self.solver_max_iter < 1:
            raise ValueError(f"solver_max_iter must be >= 1, got {self.solver_max_iter}")

    @property
    def algorithm(self):
        return "strmp-l1" if self.variant is Objective.L1 else "strmp"

    def epsilon_for(self, m):
        """Residual tolerance; defaults to 1e-12 * m * c0^2."""
        return self.epsilon if self.epsilon is not None else 1e-12 * m * self.c0 ** 2


def match_step(z, rp, variant=Objective.L2):
    """Proxy vector over all n-1 reduced coordinates."""
    violation = sign_truncate(rp.C @ np.asarray(z, dtype=float) + rp.d)
    if Objective(variant) is Objective.L1:
        violation = np.sign(violation)
    return rp.C.T @ violation


def identify_step(h, forbidden, k_atoms=1):
    """The k_atoms largest |h_i| outside `forbidden`, smallest index first on ties.

    Only indices with h_i != 0 are eligible; if fewer remain, fewer are
    returned. Raises StagnationError when none remain.
    """
    h = np.asarray(h, dtype=float)
    forbidden = set(int(i) for i in forbidden)
    if len(forbidden) + k_atoms > len(h):
        raise DimensionError(f"cannot pick {k_atoms} atoms with {len(forbidden)} of {len(h)} forbidden")
    magnitudes = np.abs(h)
    if forbidden:
        magnitudes[list(forbidden)] = 0.0
    order = np.argsort(-magnitudes, kind="stable")[:k_atoms]
    chosen = [int(i) for i in order if magnitudes[i] > 0]
    if not chosen:
        raise StagnationError("proxy vanishes on every allowed index")
    return chosen


def polish_margin(rp):
    """Row margin polish_consistency aims for: POLISH_MARGIN * c0 / m."""
    return POLISH_MARGIN * rp.c0 / rp.m


def is_margin_consistent(rp, z):
    """True when every row of Cz + d is at least half the polish margin.

    Rows at roundoff level can flip sign once z is lifted to R^n, so a
    merely positive row does not count. The test scales with c0.
    """
    rows = rp.C @ np.asarray(z, dtype=float) + rp.d
    return bool(np.min(rows) >= 0.5 * polish_margin(rp))


def polish_consistency(rp, active, z, max_iter=DEFAULT_MAX_ITER):
    """Move z off the boundary of Cz + d >= 0.

    A minimizer of the truncated residual may leave rows at or just below
    zero, which sign(Ax) does not accept. Re-solving against d - margin on the
    same support lifts every row to about the margin when the support allows
    it; otherwise z is returned unchanged. Returns (z, consistent).
    """
    z = np.asarray(z, dtype=float)
    if is_margin_consistent(rp, z):
        return z, True
    margin = polish_margin(rp)
    spec = SubproblemSpec(C=rp.C, d=rp.d - margin, active_set=active)
    report = bb_minimize(spec, z[list(spec.active_set)], tol=POLISH_TOL_FACTOR * margin, max_iter=max_iter)
    if is_margin_consistent(rp, report.z):
        return report.z, True
    logger.debug("polish: no margin-feasible point on %d atoms", len(spec.active_set))
    return z, False


def run_strmp(A, y, cfg):
    """Recover an s-sparse unit vector consistent with y = sign(Ax)."""
    A = np.asarray(A, dtype=float)
    y = np.asarray(y, dtype=float)
    if not np.all(np.abs(y) == 1.0):
        raise DimensionError("sign vector entries must be exactly +1 or -1")
    m, n = A.shape
    start = time.perf_counter()

    j0 = select_first_index(A, y)
    rp = build_reduced_problem(A, y, j0, cfg.c0)
    eps = cfg.epsilon_for(m)
    solver_tol = cfg.solver_tol
    if solver_tol is None:
        solver_tol = cfg.c0 * default_tol(rp.d / cfg.c0, cfg.variant)

    z = np.zeros(n - 1)
    active = []
    residual = float(np.sum(sign_truncate(rp.d) ** 2))
    trace = [TraceStep(iteration=0, indices=(j0,), residual=residual)]
    solver_iterations = []
    atoms = 1
    k = 0
    polished = False

    def settle(z, residual):
        # A residual below eps only counts once every row clears the margin.
        if residual >= eps:
            return z, residual, False, False
        z_new, consistent = polish_consistency(rp, active, z, cfg.solver_max_iter)
        if not consistent:
            logger.debug("residual %.3e < eps on %d atoms but rows remain at the boundary", residual, len(active))
            return z, residual, False, False
        moved = z_new is not z
        return z_new, float(np.sum(sign_truncate(rp.C @ z_new + rp.d) ** 2)), True, moved

    z, residual, consistent, moved = settle(z, residual)
    polished = polished or moved
    stop_reason = "residual" if consistent else "budget"

    while not consistent and atoms < cfg.s:
        take = min(cfg.atoms_per_iteration, cfg.s - atoms, (n - 1) - len(active))
        if take == 0:
            stop_reason = "exhausted"
            break
        h = match_step(z, rp, cfg.variant)
        try:
            new = identify_step(h, active, take)
        except StagnationError:
            logger.warning("stagnation at iteration %d with residual %.3e (eps %.3e)", k, residual, eps)
            stop_reason = "stagnation"
            break
        active = sorted(active + new)
        spec = SubproblemSpec(C=rp.C, d=rp.d, active_set=active, objective_kind=cfg.variant)
        report = minimize(spec, z[active], tol=solver_tol, max_iter=cfg.solver_max_iter)
        z = report.z
        residual = objective_l2(report.z_active, spec)
        solver_iterations.append(report.iterations)
        k += 1
        atoms += len(new)
        chosen = tuple(int(rp.col_map[i]) for i in new)
        trace.append(TraceStep(iteration=k, indices=chosen, residual=residual))
        logger.debug("iteration %d: added %s, residual %.3e", k, chosen, residual)
        z, residual, consistent, moved = settle(z, residual)
        polished = polished or moved
        stop_reason = "residual" if consistent else "budget"

    x_raw = lift_solution(z, rp, A, y)
    x_unit = unit_normalize(x_raw)
    wall_time = time.perf_counter() - start
    return RecoveryResult(
        x_raw=x_raw,
        x_unit=x_unit,
        support=tuple(int(i) for i in np.flatnonzero(x_raw)),
        iterations=k,
        final_residual=residual,
        trace=trace,
        wall_time=wall_time,
        converged=consistent,
        stop_reason=stop_reason,
        algorithm=cfg.algorithm,
        j0=j0,
        metadata={
            "c0": cfg.c0,
            "epsilon": eps,
            "solver_tol": solver_tol,
            "solver_iterations": solver_iterations,
            "atoms_per_iteration": cfg.atoms_per_iteration,
            "polished": polished,
        },
    )
