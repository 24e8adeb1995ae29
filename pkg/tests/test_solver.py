"""Subproblem solver tests against brute-force oracles and contracts."""

import numpy as np
import pytest

from rmsbeam.linkmath import LiftedBeamMatrix, LinkBudget, PowerAllocation, TransmissionCoefficients
from rmsbeam.solver import (
    STATUS_INFEASIBLE,
    STATUS_OPTIMAL,
    PsdSubproblem,
    SimplexSubproblem,
    extract_rank_one,
    find_feasible_point,
    max_min_power_allocation,
    solve_psd_subproblem,
    solve_simplex_subproblem,
)


def log_psd_problem(h, power, noise, linear=None, qos_coeffs=None, qos_rhs=None):
    m = h.shape[1]
    k = h.shape[0]
    return PsdSubproblem(
        channel_vectors=h,
        gain_scales=np.full(k, power / noise),
        term_weights=np.ones(k),
        linear_term=np.zeros((m, m), dtype=complex) if linear is None else linear,
        constant=k * np.log2(noise),
        qos_coeffs=np.zeros(0) if qos_coeffs is None else qos_coeffs,
        qos_rhs=np.zeros(0) if qos_rhs is None else qos_rhs,
    )


def test_psd_scalar_hits_diag_cap():
    # maximize log2(p |h|^2 F + s2) over 0 <= F <= 1 -> F = 1
    prob = log_psd_problem(np.array([[1.5 + 0.5j]]), power=2.0, noise=0.5)
    report = solve_psd_subproblem(prob, np.array([[0.25 + 0j]]), tol=1e-8)
    assert report.status == STATUS_OPTIMAL
    assert report.solution.matrix[0, 0].real == pytest.approx(1.0, abs=1e-6)
    assert report.residual <= 1e-8


def test_psd_matches_brute_force_m2():
    rng = np.random.default_rng(4)
    power, noise = 2.0, 0.5
    for _ in range(3):
        h = (rng.standard_normal(2) + 1j * rng.standard_normal(2))[None, :]
        prob = log_psd_problem(h, power, noise)
        report = solve_psd_subproblem(prob, 0.5 * np.eye(2, dtype=complex), tol=1e-8)

        # dense grid over rank-one beams (1, b e^{jg}) and (b e^{jg'}, 1)
        n = 100
        b = np.linspace(0, 1, n)
        g = np.linspace(0, 2 * np.pi, n, endpoint=False)
        bb, gg = np.meshgrid(b, g, indexing="ij")
        best = -np.inf
        for first, second in (
            (np.ones_like(bb), bb * np.exp(1j * gg)),
            (bb * np.exp(1j * gg), np.ones_like(bb)),
        ):
            inner = np.conj(h[0, 0]) * first + np.conj(h[0, 1]) * second
            vals = np.log2(power * np.abs(inner) ** 2 + noise)
            best = max(best, float(vals.max()))
        assert report.objective >= best - 0.01 * abs(best)


def test_psd_ascent_and_constraints():
    rng = np.random.default_rng(5)
    m, k = 6, 3
    h = (rng.standard_normal((k, m)) + 1j * rng.standard_normal((k, m))) * 0.5
    linear = 0.1 * np.eye(m, dtype=complex)
    prob = log_psd_problem(h, power=1.5, noise=0.7, linear=linear)
    start = np.diag(rng.uniform(0.1, 0.9, m)).astype(complex)
    report = solve_psd_subproblem(prob, start, tol=1e-6)
    assert report.status == STATUS_OPTIMAL
    assert report.objective >= prob.objective(start) - 1e-9
    sol = report.solution.matrix
    assert np.real(np.diag(sol)).max() <= 1.0 + 1e-7
    assert np.linalg.eigvalsh(sol)[0] >= -1e-7 * np.real(np.trace(sol))


def test_psd_infeasible_qos_detected():
    h = np.array([[1.0 + 0j, 0.5 + 0j]])
    prob = log_psd_problem(
        h, power=1.0, noise=1.0, qos_coeffs=np.array([-0.5]), qos_rhs=np.array([1.0])
    )
    report = solve_psd_subproblem(prob, 0.5 * np.eye(2, dtype=complex))
    assert report.status == STATUS_INFEASIBLE


def test_psd_qos_rows_respected():
    rng = np.random.default_rng(6)
    m, k = 5, 2
    h = rng.standard_normal((k, m)) + 1j * rng.standard_normal((k, m))
    start = 0.8 * np.eye(m, dtype=complex)
    prob = log_psd_problem(h, power=1.0, noise=1.0)
    gains0 = prob.gains(start)
    # require each gain to stay above half its starting value
    prob = log_psd_problem(
        h, power=1.0, noise=1.0,
        linear=0.5 * np.eye(m, dtype=complex),
        qos_coeffs=np.ones(k), qos_rhs=0.5 * gains0,
    )
    report = solve_psd_subproblem(prob, start, tol=1e-7)
    assert report.status == STATUS_OPTIMAL
    assert (prob.qos_slacks(report.solution.matrix) >= -1e-7 * np.abs(prob.qos_rhs)).all()


def simplex_problem(gains, noise, linear, budget, rows=None, rhs=None, floor=None):
    k = len(gains)
    return SimplexSubproblem(
        gains=np.asarray(gains, dtype=float),
        noise_powers=np.full(k, noise),
        term_weights=np.ones(k),
        linear_term=np.asarray(linear, dtype=float),
        qos_matrix=np.zeros((0, k)) if rows is None else np.asarray(rows, dtype=float),
        qos_rhs=np.zeros(0) if rhs is None else np.asarray(rhs, dtype=float),
        budget=budget,
        power_floor=1e-9 * budget if floor is None else floor,
    )


def test_simplex_single_user_takes_full_budget():
    prob = simplex_problem([2.0], noise=1.0, linear=[0.0], budget=3.0)
    report = solve_simplex_subproblem(prob, np.array([1.0]), tol=1e-8)
    assert report.status == STATUS_OPTIMAL
    assert report.solution.powers[0] == pytest.approx(3.0, rel=1e-5)


def test_simplex_matches_grid_k2():
    rng = np.random.default_rng(7)
    for _ in range(3):
        gains = rng.uniform(0.5, 2.0, 2)
        linear = rng.uniform(0.0, 0.5, 2)
        budget = 2.0
        prob = simplex_problem(gains, noise=1.0, linear=linear, budget=budget)
        report = solve_simplex_subproblem(prob, np.array([0.9, 0.9]), tol=1e-8)

        # 1e5-point scan of p1 on the full-budget line plus interior totals
        best = -np.inf
        for total in np.linspace(0.2 * budget, budget - 1e-9, 40):
            p1 = np.linspace(1e-9, total - 1e-9, 2500)
            p = np.stack([p1, total - p1])
            vals = (
                np.log2(gains[0] * total + 1.0)
                + np.log2(gains[1] * total + 1.0)
                - linear @ p
            )
            best = max(best, float(vals.max()))
        assert report.objective >= best - 0.005 * abs(best)


def test_simplex_sca_fixed_point_dominates_equal_split():
    # true sum-rate is convex on the budget line: SCA must end at least as
    # good as the equal split and respect the constraint set
    from rmsbeam import sca
    from rmsbeam.sca import ScaExpansionPoint

    rng = np.random.default_rng(8)
    m, k = 5, 2
    h = rng.standard_normal((k, m)) + 1j * rng.standard_normal((k, m))

    class Chan:
        def __init__(self, c):
            self.coefficients = c
            self.n_elements = len(c)

    channels = [Chan(h[i]) for i in range(k)]
    budget = LinkBudget(noise_power=1.0, sinr_threshold=0.0, total_power=2.0)
    f = np.exp(1j * rng.uniform(0, 2 * np.pi, m))
    f_mat = LiftedBeamMatrix(np.outer(f, f.conj()))

    def true_rate(p):
        gains = np.array([abs(np.vdot(c.coefficients, f)) ** 2 for c in channels])
        total = np.sum(p)
        return float(
            np.sum(np.log2(1.0 + p * gains / (gains * (total - p) + budget.noise_power)))
        )

    from rmsbeam.ao import build_simplex_subproblem

    p = np.full(k, budget.total_power / k)
    equal_rate = true_rate(p)
    for _ in range(20):
        expansion = ScaExpansionPoint(f_mat, PowerAllocation(p))
        prob = build_simplex_subproblem(channels, budget, f_mat.matrix, expansion)
        report = solve_simplex_subproblem(prob, PowerAllocation(p), tol=1e-8)
        new_p = report.solution.powers
        if np.allclose(new_p, p, rtol=1e-9):
            break
        p = new_p
    assert true_rate(p) >= equal_rate - 1e-9
    assert np.sum(p) <= budget.total_power * (1 + 1e-9)
    assert (p > 0).all()
    # vertex structure: nearly all power on one user
    assert p.max() / np.sum(p) > 0.99


def test_simplex_infeasible_rows():
    # both users demand more than the whole budget allows
    rows = np.array([[1.0, 0.0], [0.0, 1.0]])
    rhs = np.array([1.5, 1.5])
    prob = simplex_problem([1.0, 1.0], noise=1.0, linear=[0.0, 0.0], budget=2.0,
                           rows=rows, rhs=rhs)
    report = solve_simplex_subproblem(prob, np.array([0.9, 0.9]))
    assert report.status == STATUS_INFEASIBLE


def test_extract_rank_one_exact():
    rng = np.random.default_rng(9)
    v = rng.uniform(0.3, 1.0, 6) * np.exp(1j * rng.uniform(0, 2 * np.pi, 6))
    f = extract_rank_one(LiftedBeamMatrix(np.outer(v, v.conj())))
    # equal up to a global phase
    phase = np.vdot(f.values, v)
    phase /= abs(phase)
    np.testing.assert_allclose(f.values * phase, v, atol=1e-9)


def test_extract_rank_one_degenerate_pair():
    f = extract_rank_one(np.diag([0.5, 0.5]).astype(complex))
    mags = np.sort(np.abs(f.values))
    np.testing.assert_allclose(mags, [0.0, np.sqrt(0.5)], atol=1e-12)


def test_extract_rank_one_zero_matrix_warns():
    with pytest.warns(UserWarning, match="zero"):
        f = extract_rank_one(np.zeros((3, 3), dtype=complex))
    assert (f.values == 0).all()


def test_extract_after_optimization_matches_cophasing():
    # K=1: optimized-then-extracted beam reaches the co-phased optimum
    rng = np.random.default_rng(10)
    h = (rng.standard_normal(6) + 1j * rng.standard_normal(6))[None, :]
    prob = log_psd_problem(h, power=1.0, noise=1.0)
    report = solve_psd_subproblem(prob, 0.5 * np.eye(6, dtype=complex), tol=1e-8)
    f = extract_rank_one(report.solution)
    achieved = abs(np.vdot(h[0], f.values))
    assert achieved >= 0.98 * np.sum(np.abs(h[0]))


def test_max_min_power_closed_form():
    gains = np.array([1.0, 0.5, 0.25])
    budget = LinkBudget(noise_power=0.1, sinr_threshold=0.0, total_power=3.0)
    p, gamma = max_min_power_allocation(gains, budget)
    sinrs = p.powers * gains / (gains * (p.powers.sum() - p.powers) + budget.noise_power)
    np.testing.assert_allclose(sinrs, gamma, rtol=1e-12)
    assert p.powers.sum() == pytest.approx(3.0, rel=1e-12)


class _Chan:
    def __init__(self, c):
        self.coefficients = np.asarray(c, dtype=complex)
        self.n_elements = len(self.coefficients)


def test_find_feasible_zero_threshold_returns_default():
    rng = np.random.default_rng(11)
    channels = [_Chan(rng.standard_normal(4) + 1j * rng.standard_normal(4)) for _ in range(2)]
    budget = LinkBudget(noise_power=1.0, sinr_threshold=0.0, total_power=2.0)
    report = find_feasible_point(channels, budget)
    assert report.status == STATUS_OPTIMAL
    f, p = report.solution
    assert isinstance(f, TransmissionCoefficients)
    np.testing.assert_allclose(np.abs(f.values), 1.0, atol=1e-12)
    assert p.powers.sum() == pytest.approx(2.0)


def test_find_feasible_single_user_infeasible_bound():
    # gamma_th beyond the co-phased ceiling Pt (sum |h|)^2 / noise
    h = np.array([0.5 + 0.1j, 0.2 - 0.3j, 0.4 + 0j])
    ceiling = 2.0 * np.sum(np.abs(h)) ** 2 / 1.0
    channels = [_Chan(h)]
    budget = LinkBudget(noise_power=1.0, sinr_threshold=2.0 * ceiling, total_power=2.0)
    report = find_feasible_point(channels, budget)
    assert report.status == STATUS_INFEASIBLE
    assert report.objective <= ceiling * 1.01


def test_find_feasible_positive_threshold_strict_slack():
    rng = np.random.default_rng(12)
    channels = [_Chan(rng.standard_normal(6) + 1j * rng.standard_normal(6)) for _ in range(3)]
    budget = LinkBudget(noise_power=1.0, sinr_threshold=0.15, total_power=2.0)
    report = find_feasible_point(channels, budget)
    assert report.status == STATUS_OPTIMAL
    f, p = report.solution
    gains = np.array([abs(np.vdot(c.coefficients, f.values)) ** 2 for c in channels])
    total = p.powers.sum()
    sinrs = p.powers * gains / (gains * (total - p.powers) + budget.noise_power)
    assert (sinrs > budget.sinr_threshold).all()
    assert total <= budget.total_power * (1 + 1e-9)
