import numpy as np
import pytest

from slprobust.oracle2d import grid_oracle, random_problem
from slprobust.socp import (
    INFEASIBLE,
    OPTIMAL,
    BarrierSolver,
    SocpProblem,
    SocpRow,
    solve,
    solve_batch,
    verify,
)


def row(alpha, g, h):
    return SocpRow(alpha, np.asarray(g, dtype=float), h)


def test_halfspace_projection():
    s = solve(SocpProblem(2, [row(0.0, [1, 0], 1.0)]))
    assert s.status == OPTIMAL
    assert np.allclose(s.u, [1, 0], atol=1e-6)
    assert abs(s.objective - 1.0) <= 2e-8


def test_cone_row_shifts_optimum():
    # 1-D reduction: u2 = 0 and u1 >= 1 + 0.5 u1, so u1 = 2
    s = solve(SocpProblem(2, [row(0.5, [1, 0], 1.0)]))
    assert np.allclose(s.u, [2, 0], atol=1e-5)
    assert abs(s.objective - 4.0) <= 4e-6


def test_certified_infeasible_pair():
    # 2||u|| <= u1 forces u = 0, which cannot satisfy -u1 >= 1
    s = solve(SocpProblem(2, [row(2.0, [1, 0], 0.0), row(0.0, [-1, 0], 1.0)]))
    assert s.status == INFEASIBLE
    assert grid_oracle(SocpProblem(2, [row(2.0, [1, 0], 0.0), row(0.0, [-1, 0], 1.0)])) is None


def test_all_nonpositive_h_gives_zero():
    s = solve(SocpProblem(3, [row(1.0, [1, 0, 0], -0.5), row(0.0, [0, 1, 0], 0.0)]))
    assert s.status == OPTIMAL
    assert s.objective == 0.0
    assert s.max_violation == 0.0


def test_solution_invariant_violation_within_tol():
    rng = np.random.default_rng(0)
    for _ in range(50):
        prob, _ = random_problem(rng)
        s = solve(prob)
        assert s.status == OPTIMAL
        assert s.max_violation <= 1e-8 * (1 + np.linalg.norm(s.u))


def test_oracle_equivalence_random():
    rng = np.random.default_rng(1)
    for _ in range(60):
        prob, _ = random_problem(rng)
        s = solve(prob)
        ref = grid_oracle(prob)
        assert s.status == OPTIMAL and ref is not None
        assert abs(s.objective - ref) <= 1e-3 * max(ref, 1e-9)


def test_never_unbounded_status():
    rng = np.random.default_rng(2)
    seen = set()
    for _ in range(40):
        prob, _ = random_problem(rng)
        seen.add(solve(prob).status)
    # objective coercivity: only these statuses can ever appear
    assert seen <= {OPTIMAL, INFEASIBLE, "numerical-failure"}


def test_verify_examples():
    prob = SocpProblem(2, [row(0.0, [1, 0], 1.0)])
    v = verify(prob, np.array([2.0, 0.5]))  # strictly inside
    assert v["max_violation"] == 0.0
    v = verify(prob, np.array([1.0, 0.0]))  # active at the optimum
    assert v["max_violation"] == 0.0
    assert v["stationarity_residual"] <= 1e-9
    prob2 = SocpProblem(2, [row(0.5, [1, 0], 1.0)])
    v = verify(prob2, np.array([1.9, 0.0]))
    assert abs(v["max_violation"] - 0.05) <= 1e-12


def test_kkt_residuals_on_optima():
    rng = np.random.default_rng(3)
    for _ in range(40):
        prob, _ = random_problem(rng)
        s = solve(prob)
        v = verify(prob, s.u)
        assert v["max_violation"] <= 1e-6
        assert v["stationarity_residual"] <= 1e-5


def test_scaling_equivariance():
    rng = np.random.default_rng(4)
    for _ in range(20):
        prob, _ = random_problem(rng)
        alphas, G, h = prob.stacked()
        c = rng.uniform(0.5, 20.0)
        scaled = SocpProblem.from_arrays(alphas * c, G * c, h * c)
        u1 = solve(prob).u
        u2 = solve(scaled).u
        assert np.allclose(u1, u2, atol=1e-8 * (1 + np.linalg.norm(u1)))
    # alpha = 0 rows: scaling (g, h) alone is already an equivalence
    prob = SocpProblem(2, [row(0.0, [1, 0.2], 1.0), row(0.0, [-0.1, 1], 0.5)])
    alphas, G, h = prob.stacked()
    u1 = solve(prob).u
    u2 = solve(SocpProblem.from_arrays(alphas, G * 7.5, h * 7.5)).u
    assert np.allclose(u1, u2, atol=1e-8)


def test_batch_matches_single():
    rng = np.random.default_rng(5)
    probs = []
    for _ in range(17):
        prob, _ = random_problem(rng, max_rows=3)
        alphas, G, h = prob.stacked()
        pad = 3 - len(h)
        if pad:  # pad with vacuous rows so shapes are uniform
            alphas = np.concatenate([alphas, np.zeros(pad)])
            G = np.vstack([G, np.zeros((pad, 2))])
            h = np.concatenate([h, -np.ones(pad)])
        probs.append((alphas, G, h))
    A = np.stack([p[0] for p in probs])
    G = np.stack([p[1] for p in probs])
    H = np.stack([p[2] for p in probs])
    U, statuses, _ = solve_batch(A, G, H)
    for i in range(len(probs)):
        s = solve(SocpProblem.from_arrays(*probs[i]))
        assert statuses[i] == s.status
        if s.status == OPTIMAL:
            assert np.allclose(U[i], s.u, atol=1e-9 * (1 + np.linalg.norm(s.u)))


def test_backend_is_pluggable():
    calls = []

    class Recorder(BarrierSolver):
        def solve_batch(self, alphas, G, h, tol=1e-8):
            calls.append(G.shape)
            return super().solve_batch(alphas, G, h, tol=tol)

    prob = SocpProblem(2, [row(0.0, [1, 0], 1.0)])
    s = solve(prob, backend=Recorder())
    assert s.status == OPTIMAL and calls == [(1, 1, 2)]


def test_problem_validation():
    with pytest.raises(ValueError):
        SocpProblem(2, [])
    with pytest.raises(ValueError):
        SocpProblem(2, [row(-0.1, [1, 0], 0.0)])
    with pytest.raises(ValueError):
        SocpProblem(2, [row(0.0, [1, 0, 0], 0.0)])
    with pytest.raises(ValueError):
        solve(SocpProblem(2, [row(0.0, [1, 0], 1.0)]), tol=0.0)


def test_worstcase_toy_power():
    # symmetric two-row cone problem: c(1 - 1/sqrt(2))... solved by
    # 0.5*sqrt(2)*c = c - 1, c = 1/(1 - sqrt(0.5)), power = 2 c^2
    s = solve(SocpProblem(2, [row(0.5, [1, 0], 1.0), row(0.5, [0, 1], 1.0)]))
    c = 1.0 / (1.0 - np.sqrt(0.5))
    assert abs(s.objective - 2 * c * c) <= 1e-4
    assert np.allclose(s.u, [c, c], atol=1e-4)
