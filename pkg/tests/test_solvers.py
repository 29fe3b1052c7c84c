import numpy as np
import pytest

from obcs.errors import DimensionError, SolverNumericError
from obcs.solvers import (
    Objective,
    SubproblemSpec,
    armijo_step,
    bb_minimize,
    default_tol,
    gradient_l2,
    l1_minimize,
    minimize,
    objective_l1,
    objective_l2,
    subgradient_l1,
    two_point_minimize,
)


def hand_spec():
    return SubproblemSpec(C=np.array([[1.0], [-1.0]]), d=np.zeros(2), active_set=(0,))


def planted_spec(rp, signal, kind=Objective.L2):
    others = [int(j) for j in signal.support if j != rp.j0]
    return SubproblemSpec(C=rp.C, d=rp.d, active_set=rp.to_reduced(others), objective_kind=kind)


def random_kink_free_point(seed, m=50, n_reduced=12, k=5):
    rng = np.random.default_rng(seed)
    C = rng.standard_normal((m, n_reduced))
    d = rng.standard_normal(m)
    spec = SubproblemSpec(C=C, d=d, active_set=rng.choice(n_reduced, size=k, replace=False))
    while True:
        z = rng.standard_normal(k)
        if np.min(np.abs(spec.residual(z))) > 1e-4:
            return spec, z


def test_hand_objective_and_gradient():
    spec = hand_spec()
    assert objective_l2(np.array([1.0]), spec) == 1.0
    np.testing.assert_allclose(gradient_l2(np.array([1.0]), spec), [2.0])
    assert objective_l1(np.array([1.0]), spec) == 1.0


def test_objective_at_zero_is_truncated_d(planted_reduction):
    _, _, rp = planted_reduction
    spec = SubproblemSpec(C=rp.C, d=rp.d, active_set=(0, 1))
    d_minus = np.minimum(rp.d, 0.0)
    assert objective_l2(np.zeros(2), spec) == pytest.approx(d_minus @ d_minus)


@pytest.mark.parametrize("seed", range(20))
def test_gradient_matches_central_differences(seed):
    spec, z = random_kink_free_point(seed)
    g = gradient_l2(z, spec)
    h = 1e-6
    for i in range(len(z)):
        e = np.zeros(len(z))
        e[i] = h
        fd = (objective_l2(z + e, spec) - objective_l2(z - e, spec)) / (2 * h)
        assert abs(fd - g[i]) <= 1e-5 * max(1.0, abs(g[i]))


def test_subgradient_uses_sign_zero_convention():
    spec = SubproblemSpec(C=np.array([[1.0], [1.0]]), d=np.array([0.0, -1.0]), active_set=(0,))
    np.testing.assert_allclose(subgradient_l1(np.zeros(1), spec), [-1.0])


def test_subgradient_single_violated_row():
    C = np.array([[2.0, 1.0], [0.5, -3.0], [1.0, 1.0]])
    spec = SubproblemSpec(C=C, d=np.array([1.0, -3.0, 1.0]), active_set=(0, 1))
    np.testing.assert_allclose(subgradient_l1(np.zeros(2), spec), -C[1])


def test_subgradient_inequality(rng):
    spec, z = random_kink_free_point(3)
    g = subgradient_l1(z, spec)
    f = objective_l1(z, spec)
    for _ in range(100):
        v = rng.standard_normal(len(z))
        v /= np.linalg.norm(v)
        assert objective_l1(z + 1e-4 * v, spec) - f >= 1e-4 * (g @ v) - 1e-8


def test_default_tol():
    assert default_tol(np.array([0.1])) == pytest.approx(1e-10)
    assert default_tol(np.array([10.0, 0.0])) == pytest.approx(1e-8)
    assert default_tol(np.array([10.0, -5.0]), Objective.L1) == pytest.approx(1.5e-9)


def test_subproblem_spec_validation():
    with pytest.raises(DimensionError):
        SubproblemSpec(C=np.eye(3), d=np.zeros(3), active_set=(1, 1))
    with pytest.raises(DimensionError):
        SubproblemSpec(C=np.eye(3), d=np.zeros(3), active_set=(3,))
    spec = SubproblemSpec(C=np.eye(3), d=np.zeros(3), active_set=(2, 0))
    assert spec.active_set == (0, 2)
    with pytest.raises(DimensionError):
        spec.residual(np.zeros(3))


@pytest.mark.parametrize("solve", [bb_minimize, l1_minimize])
def test_already_optimal(solve):
    spec = SubproblemSpec(C=np.eye(3), d=np.ones(3), active_set=(0, 2))
    report = solve(spec, np.zeros(2))
    assert report.converged and report.iterations == 0
    assert report.objective_value == 0.0


def test_two_point_minimize_solves_least_squares(rng):
    M = rng.standard_normal((30, 5))
    b = rng.standard_normal(30)
    report = two_point_minimize(lambda z: float(np.sum((M @ z - b) ** 2)),
                                lambda z: 2 * M.T @ (M @ z - b), np.zeros(5), tol=1e-10, max_iter=500)
    expected = np.linalg.lstsq(M, b, rcond=None)[0]
    assert report.converged
    np.testing.assert_allclose(report.z_active, expected, atol=1e-8)


def test_bb_minimize_reaches_zero_on_planted_support(planted_reduction):
    signal, _, rp = planted_reduction
    spec = planted_spec(rp, signal)
    report = bb_minimize(spec, np.zeros(len(spec.active_set)))
    assert report.objective_value <= 1e-12
    assert report.objective_value <= report.initial_objective
    assert report.objective_value == pytest.approx(objective_l2(report.z_active, spec), rel=1e-10, abs=1e-300)
    off = np.setdiff1d(np.arange(rp.n_reduced), spec.active_set)
    assert np.all(report.z[off] == 0)


def test_l1_minimize_planted_support(planted_reduction):
    signal, _, rp = planted_reduction
    spec = planted_spec(rp, signal, Objective.L1)
    report = minimize(spec, np.zeros(len(spec.active_set)))
    assert report.objective_value < report.initial_objective


def test_l1_minimize_is_monotone(planted_reduction):
    signal, _, rp = planted_reduction
    spec = planted_spec(rp, signal, Objective.L1)
    z0 = np.zeros(len(spec.active_set))
    values = [l1_minimize(spec, z0, max_iter=k).objective_value for k in range(1, 12)]
    assert all(b <= a for a, b in zip(values, values[1:]))


def test_solution_scales_with_d(planted_reduction):
    signal, _, rp = planted_reduction
    spec = planted_spec(rp, signal)
    scaled = SubproblemSpec(C=rp.C, d=10.0 * rp.d, active_set=spec.active_set)
    a = bb_minimize(spec, np.zeros(len(spec.active_set)), tol=1e-12)
    b = bb_minimize(scaled, np.zeros(len(spec.active_set)), tol=1e-11)
    assert objective_l2(a.z_active * 10.0, scaled) <= 1e-10
    assert b.objective_value <= 1e-10


def test_armijo_rejects_ascent_direction():
    assert armijo_step(lambda x: float(x @ x), np.array([1.0]), 1.0, np.array([2.0]), np.array([1.0]),
                       max_halvings=20) is None


def test_non_finite_objective_raises():
    with pytest.raises(SolverNumericError) as info:
        two_point_minimize(lambda z: float("nan"), lambda z: np.ones_like(z), np.zeros(2), tol=1e-8)
    assert info.value.iteration == 0


def test_two_point_iterates_never_exceed_the_start(rng):
    Q, _ = np.linalg.qr(rng.standard_normal((20, 20)))
    H = Q @ np.diag(np.logspace(0, 6, 20)) @ Q.T
    b = rng.standard_normal(20)
    fun = lambda z: float(z @ H @ z - 2 * b @ z)
    visited = []

    def grad(z):
        visited.append(np.array(z))
        return 2 * (H @ z - b)

    x0 = 1e3 * rng.standard_normal(20)
    two_point_minimize(fun, grad, x0, tol=1e-8, max_iter=300)
    assert len(visited) > 10
    assert max(fun(z) for z in visited) <= fun(x0)
