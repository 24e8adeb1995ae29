"""Interior-point solvers for the two convex subproblems.

Both subproblems maximize a concave objective of the form

    sum_k  term(gain_k(x))  -  <c, x>  + constant

over a convex set; ``term`` is either a log (rate surrogates) or a
negative inverse (max-min feasibility).  They are solved by a log-barrier
path-following scheme with exact Newton steps.

For the beam subproblem the variable is a Hermitian PSD matrix F with a
unit diagonal cap and per-user QoS rows.  The Newton system

    mu * F^-1 D F^-1  +  sum_j beta_j^2 <V_j, D> V_j  =  G

is solved in closed form: the barrier block inverts as D -> F D F / mu
and every remaining curvature term is rank one in matrix space, so a
small Woodbury system of size (terms + QoS rows + diagonal caps) gives
the exact direction in O(M^3).  No general-purpose SDP machinery is
needed at these sizes.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy.optimize import linprog

from rmsbeam._threads import single_threaded_blas
from rmsbeam.linkmath import (
    LN2,
    LiftedBeamMatrix,
    PowerAllocation,
    TransmissionCoefficients,
)

STATUS_OPTIMAL = "optimal"
STATUS_MAX_ITERATIONS = "max-iterations"
STATUS_INFEASIBLE = "infeasible"

DEFAULT_TOL = 1e-6
DEFAULT_MAX_NEWTON = 200

# Path-following controls: initial barrier weight, geometric decrease, and
# Armijo backtracking constants.
MU_INITIAL = 5e-2
MU_DECREASE = 0.1
ARMIJO_SLOPE = 0.25
BACKTRACK = 0.5
MAX_BACKTRACKS = 60


@dataclass
class SolverReport:
    """Outcome of one subproblem solve."""

    solution: object
    objective: float
    iterations: int
    residual: float
    status: str
    message: str = ""


@dataclass
class PsdSubproblem:
    """Concave maximization over {F PSD, diag(F) <= cap, QoS rows}.

    Objective: sum_k w_k * term(gain_scale_k * h_k^H F h_k) - Re tr(C F)
    + constant, where term is log2(1 + .) for ``term_kind='log'`` and
    -1/. for ``term_kind='inverse'``.  QoS row q requires
    qos_coeff_q * h_q^H F h_q >= qos_rhs_q.
    """

    channel_vectors: np.ndarray
    gain_scales: np.ndarray
    term_weights: np.ndarray
    linear_term: np.ndarray
    constant: float = 0.0
    term_kind: str = "log"
    qos_coeffs: np.ndarray = field(default_factory=lambda: np.zeros(0))
    qos_rhs: np.ndarray = field(default_factory=lambda: np.zeros(0))
    diag_cap: float = 1.0

    @property
    def n_elements(self):
        return self.channel_vectors.shape[1]

    def gains(self, f_mat):
        rows = self.channel_vectors.conj() @ f_mat
        return np.real(np.sum(rows * self.channel_vectors, axis=1))

    def term_values(self, gains):
        scaled = self.gain_scales * gains
        if self.term_kind == "log":
            return self.term_weights * np.log1p(scaled) / LN2
        return -self.term_weights / scaled

    def term_derivatives(self, gains):
        """(d/dgain, d2/dgain2) of each term at the given raw gains."""
        scaled = self.gain_scales * gains
        if self.term_kind == "log":
            d1 = self.term_weights * self.gain_scales / ((1.0 + scaled) * LN2)
            d2 = -self.term_weights * self.gain_scales**2 / ((1.0 + scaled) ** 2 * LN2)
        else:
            d1 = self.term_weights * self.gain_scales / scaled**2
            d2 = -2.0 * self.term_weights * self.gain_scales**2 / scaled**3
        return d1, d2

    def objective(self, f_mat):
        value = float(np.sum(self.term_values(self.gains(f_mat))))
        value -= float(np.real(np.sum(self.linear_term.conj() * f_mat)))
        return value + self.constant

    def qos_slacks(self, f_mat):
        if self.qos_rhs.size == 0:
            return np.zeros(0)
        return self.qos_coeffs * self.gains(f_mat) - self.qos_rhs


def _cholesky_or_none(mat):
    try:
        return scipy.linalg.cholesky(mat, lower=True)
    except scipy.linalg.LinAlgError:
        return None


def _max_step_psd(f_mat, direction):
    """Largest t with F + t*D staying positive definite (0.99 safety)."""
    chol = _cholesky_or_none(f_mat)
    if chol is None:
        return 0.0
    half = scipy.linalg.solve_triangular(chol, direction, lower=True)
    inner = scipy.linalg.solve_triangular(chol, half.conj().T, lower=True)
    min_eig = float(np.linalg.eigvalsh((inner + inner.conj().T) / 2.0)[0])
    if min_eig >= 0.0:
        return np.inf
    return -0.99 / min_eig


def _psd_interior_ok(prob, cand, diag_margin=1e-6):
    if _cholesky_or_none(cand + 0.0j) is None:
        return False
    if np.real(np.diag(cand)).max() >= prob.diag_cap * (1.0 - diag_margin):
        return False
    slacks = prob.qos_slacks(cand)
    if slacks.size and np.any(slacks <= 0.0):
        return False
    if prob.term_kind == "inverse" and np.any(prob.gain_scales * prob.gains(cand) <= 0.0):
        return False
    return True


def _interiorize_psd(prob, start, blends=(1e-4, 1e-3, 1e-2, 0.1)):
    """Blend the start toward (cap/2)*I until strictly interior.

    Blends below ~1e-4 normally leave face slacks so thin that the first
    barrier stage spends dozens of steps crawling off the face; they are
    used only as a last resort when active QoS rows pin the start (the
    blend then shrinks until it preserves what little slack there is).
    """
    m = prob.n_elements
    anchor = 0.5 * prob.diag_cap * np.eye(m, dtype=complex)
    for delta in blends:
        cand = (1.0 - delta) * start + delta * anchor
        cand = (cand + cand.conj().T) / 2.0
        if _psd_interior_ok(prob, cand):
            return cand

    # Active QoS rows: the identity anchor may reduce their slack, so pick
    # the largest blend that provably keeps every row positive.
    if prob.qos_rhs.size:
        start_slack = prob.qos_slacks(start)
        anchor_slack = prob.qos_slacks(anchor)
        if np.any(start_slack <= 0.0):
            return None
        worsening = anchor_slack < start_slack
        if np.any(worsening):
            ratios = start_slack[worsening] / (start_slack - anchor_slack)[worsening]
            delta = 0.5 * float(np.min(ratios))
        else:
            delta = 1e-4
        delta = float(np.clip(delta, 1e-12, 1e-4))
        cand = (1.0 - delta) * start + delta * anchor
        cand = (cand + cand.conj().T) / 2.0
        if _psd_interior_ok(prob, cand, diag_margin=0.0):
            return cand
    return None


def solve_psd_subproblem(prob, start, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_NEWTON):
    """Path-following barrier solve of the beam-matrix subproblem.

    ``start`` must be feasible; it is blended slightly into the interior
    before the first Newton step.  The reported residual is the barrier
    suboptimality bound mu * (cone degree + #inequalities); the returned
    iterate is never worse than the start in objective.
    """
    with single_threaded_blas():
        return _solve_psd(prob, start, tol, max_iter)


def _solve_psd(prob, start, tol, max_iter):
    start_mat = start.matrix if isinstance(start, LiftedBeamMatrix) else np.asarray(start, dtype=complex)
    m = prob.n_elements
    h = prob.channel_vectors
    n_qos = int(prob.qos_rhs.size)

    if n_qos:
        impossible = (prob.qos_coeffs <= 0.0) & (prob.qos_rhs > 0.0)
        if np.any(impossible):
            return SolverReport(
                solution=None, objective=-np.inf, iterations=0, residual=np.inf,
                status=STATUS_INFEASIBLE,
                message="QoS row requires positive gain with nonpositive coefficient",
            )
        start_slacks = prob.qos_slacks(start_mat)
        if np.any(start_slacks < -1e-12 * np.maximum(prob.qos_rhs, 1.0)):
            return SolverReport(
                solution=None, objective=-np.inf, iterations=0, residual=np.inf,
                status=STATUS_INFEASIBLE, message="start violates a QoS row",
            )

    f_mat = _interiorize_psd(prob, start_mat)
    if f_mat is None:
        return SolverReport(
            solution=None, objective=-np.inf, iterations=0, residual=np.inf,
            status=STATUS_INFEASIBLE, message="no strictly interior point near start",
        )

    # Barrier degree: PSD cone (m) + diagonal caps (m) + QoS rows.
    degree = 2 * m + n_qos
    mu_final = max(tol / degree, 1e-14)
    mu = max(MU_INITIAL, mu_final)

    best_mat = start_mat.copy()
    best_obj = prob.objective(start_mat)
    newton_used = 0
    status = STATUS_OPTIMAL

    def barrier_value(mat, gains, chol):
        # inverse terms need no extra barrier: gains stay positive inside
        # the PSD cone
        value = 2.0 * float(np.sum(np.log(np.real(np.diag(chol)))))
        value += float(np.sum(np.log(prob.diag_cap - np.real(np.diag(mat)))))
        if n_qos:
            value += float(np.sum(np.log(prob.qos_coeffs * gains - prob.qos_rhs)))
        return value

    while True:
        for _ in range(max_iter):
            if newton_used >= max_iter:
                status = STATUS_MAX_ITERATIONS
                break
            chol = _cholesky_or_none(f_mat)
            if chol is None:
                status = STATUS_MAX_ITERATIONS
                break
            gains = prob.gains(f_mat)
            d1, d2 = prob.term_derivatives(gains)
            diag_slack = prob.diag_cap - np.real(np.diag(f_mat))
            qos_slack = prob.qos_coeffs * gains - prob.qos_rhs if n_qos else np.zeros(0)

            inv_f = scipy.linalg.cho_solve((chol, True), np.eye(m, dtype=complex))

            # Total gradient G (Hermitian matrix form).
            grad_term_coeff = d1.copy()
            if n_qos:
                grad_term_coeff = grad_term_coeff + mu * prob.qos_coeffs / qos_slack
            grad = (h.T * grad_term_coeff) @ h.conj()
            grad -= prob.linear_term
            grad += mu * inv_f
            grad -= np.diag(mu / diag_slack)
            grad = (grad + grad.conj().T) / 2.0

            # Rank-one curvature factors: objective terms, QoS barriers, diag caps.
            beta_terms = np.sqrt(-d2)
            if n_qos:
                beta_qos = np.sqrt(mu) * prob.qos_coeffs / qos_slack
                beta_chan = np.concatenate([beta_terms, beta_qos])
                chan = np.vstack([h, h])
            else:
                beta_chan = beta_terms
                chan = h
            beta_diag = np.sqrt(mu) / diag_slack

            fgf = f_mat @ grad @ f_mat
            x_rows = chan.conj() @ f_mat            # row j = h_j^H F
            pair = x_rows @ chan.T                  # h_j^H F h_l
            n_chan = chan.shape[0]
            q = n_chan + m

            gram = np.empty((q, q))
            gram[:n_chan, :n_chan] = np.abs(pair) ** 2 * np.outer(beta_chan, beta_chan)
            cross = np.abs(x_rows) ** 2 * np.outer(beta_chan, beta_diag)
            gram[:n_chan, n_chan:] = cross
            gram[n_chan:, :n_chan] = cross.T
            gram[n_chan:, n_chan:] = np.abs(f_mat) ** 2 * np.outer(beta_diag, beta_diag)
            gram /= mu

            rhs = np.empty(q)
            rhs[:n_chan] = beta_chan * np.real(
                np.sum((chan.conj() @ fgf) * chan, axis=1)
            )
            rhs[n_chan:] = beta_diag * np.real(np.diag(fgf))
            rhs /= mu

            coef = np.linalg.solve(np.eye(q) + gram, rhs)
            adj = grad - (chan.T * (beta_chan * coef[:n_chan])) @ chan.conj()
            adj -= np.diag(beta_diag * coef[n_chan:])
            direction = f_mat @ adj @ f_mat / mu
            direction = (direction + direction.conj().T) / 2.0

            decrement = float(np.real(np.sum(grad.conj() * direction)))
            if decrement <= max(1e-13, 0.05 * mu):
                break

            # Feasible step caps from the linear constraints, then PSD.
            t_max = _max_step_psd(f_mat, direction)
            d_diag = np.real(np.diag(direction))
            rising = d_diag > 0
            if np.any(rising):
                t_max = min(t_max, 0.99 * float(np.min(diag_slack[rising] / d_diag[rising])))
            if n_qos:
                d_gain = prob.qos_coeffs * np.real(
                    np.sum((prob.channel_vectors.conj() @ direction) * prob.channel_vectors, axis=1)
                )
                falling = d_gain < 0
                if np.any(falling):
                    t_max = min(t_max, 0.99 * float(np.min(qos_slack[falling] / -d_gain[falling])))
            if prob.term_kind == "inverse":
                d_gain = np.real(
                    np.sum((prob.channel_vectors.conj() @ direction) * prob.channel_vectors, axis=1)
                )
                falling = d_gain < 0
                if np.any(falling):
                    t_max = min(t_max, 0.99 * float(np.min(gains[falling] / -d_gain[falling])))
            if not np.isfinite(t_max):
                t_max = 1e8

            psi_ref = prob.objective(f_mat) + mu * barrier_value(f_mat, gains, chol)
            step = min(1.0, t_max)
            accepted = False
            for _ in range(MAX_BACKTRACKS):
                cand = f_mat + step * direction
                cand = (cand + cand.conj().T) / 2.0
                chol_cand = _cholesky_or_none(cand)
                if chol_cand is not None:
                    cand_gains = prob.gains(cand)
                    sll = prob.qos_coeffs * cand_gains - prob.qos_rhs if n_qos else np.zeros(0)
                    if (
                        np.real(np.diag(cand)).max() < prob.diag_cap
                        and (not n_qos or np.all(sll > 0.0))
                        and (prob.term_kind != "inverse" or np.all(cand_gains > 0.0))
                    ):
                        psi_cand = prob.objective(cand) + mu * barrier_value(cand, cand_gains, chol_cand)
                        if psi_cand >= psi_ref + ARMIJO_SLOPE * step * decrement:
                            accepted = True
                            break
                step *= BACKTRACK
            if not accepted:
                break
            f_mat = cand
            newton_used += 1
        if status != STATUS_OPTIMAL:
            break
        obj_here = prob.objective(f_mat)
        if obj_here > best_obj:
            best_obj = obj_here
            best_mat = f_mat.copy()
        if mu <= mu_final * (1.0 + 1e-12):
            break
        mu = max(mu * MU_DECREASE, mu_final)

    residual = min(mu * degree, tol) if status == STATUS_OPTIMAL else mu * degree
    final = best_mat
    # Clip roundoff so the result always satisfies the lifted-matrix invariants.
    final = (final + final.conj().T) / 2.0
    eigenvalues, vectors = np.linalg.eigh(final)
    if eigenvalues[0] < 0.0:
        final = (vectors * np.maximum(eigenvalues, 0.0)) @ vectors.conj().T
        final = (final + final.conj().T) / 2.0
    return SolverReport(
        solution=LiftedBeamMatrix(final),
        objective=prob.objective(final),
        iterations=newton_used,
        residual=residual,
        status=status,
    )


@dataclass
class SimplexSubproblem:
    """Concave maximization over the power simplex with QoS rows.

    Objective: sum_k w_k * log2(gain_k * sum(p) + noise_k) - c^T p +
    constant, subject to p >= floor, sum(p) <= budget and rows
    A p >= b (one per QoS-constrained user).
    """

    gains: np.ndarray
    noise_powers: np.ndarray
    term_weights: np.ndarray
    linear_term: np.ndarray
    constant: float = 0.0
    qos_matrix: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))
    qos_rhs: np.ndarray = field(default_factory=lambda: np.zeros(0))
    budget: float = 1.0
    power_floor: float = 0.0

    @property
    def n_users(self):
        return self.linear_term.shape[0]

    def objective(self, p):
        total = float(np.sum(p))
        value = float(np.sum(self.term_weights * np.log2(self.gains * total + self.noise_powers)))
        value -= float(self.linear_term @ p)
        return value + self.constant

    def row_slacks(self, p):
        if self.qos_rhs.size == 0:
            return np.zeros(0)
        return self.qos_matrix @ p - self.qos_rhs


def _simplex_phase1(prob):
    """Max-min slack LP: recover a strictly interior point or report none."""
    k = prob.n_users
    n_rows = prob.qos_rhs.size
    # Variables (p, s); maximize s.
    cost = np.zeros(k + 1)
    cost[-1] = -1.0
    a_ub = []
    b_ub = []
    row = np.zeros(k + 1)
    row[:k] = 1.0
    row[-1] = 1.0
    a_ub.append(row)  # sum p + s <= budget
    b_ub.append(prob.budget)
    for i in range(n_rows):
        row = np.zeros(k + 1)
        row[:k] = -prob.qos_matrix[i]
        row[-1] = 1.0
        a_ub.append(row)  # -A_i p + s <= -b_i
        b_ub.append(-prob.qos_rhs[i])
    bounds = [(prob.power_floor, None)] * k + [(None, None)]
    res = linprog(cost, A_ub=np.array(a_ub), b_ub=np.array(b_ub), bounds=bounds, method="highs")
    if not res.success or res.x[-1] <= 0.0:
        return None
    return res.x[:k]


def solve_simplex_subproblem(prob, start, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_NEWTON):
    """Barrier Newton solve of the power subproblem (K variables)."""
    with single_threaded_blas():
        return _solve_simplex(prob, start, tol, max_iter)


def _solve_simplex(prob, start, tol, max_iter):
    p = np.asarray(start.powers if isinstance(start, PowerAllocation) else start, dtype=float).copy()
    k = prob.n_users
    n_rows = int(prob.qos_rhs.size)

    def strictly_interior(x, margin=0.0):
        if np.any(x - prob.power_floor <= margin * prob.budget):
            return False
        if prob.budget - np.sum(x) <= margin * prob.budget:
            return False
        return n_rows == 0 or bool(np.all(prob.row_slacks(x) > 0.0))

    # Blend toward a half-budget split: starts typically sit exactly on the
    # budget face, and a blend toward another boundary point would leave the
    # barrier crawling off a ~1e-16 slack.
    center = np.full(k, prob.budget / (2.0 * k))
    if not strictly_interior(p, margin=1e-6):
        for delta in (1e-4, 1e-3, 1e-2, 0.1, 0.5):
            cand = (1.0 - delta) * p + delta * center
            if strictly_interior(cand):
                p = cand
                break
        else:
            recovered = _simplex_phase1(prob)
            if recovered is None:
                return SolverReport(
                    solution=None, objective=-np.inf, iterations=0, residual=np.inf,
                    status=STATUS_INFEASIBLE, message="QoS rows conflict with the power budget",
                )
            p = recovered

    start_arr = np.asarray(start.powers if isinstance(start, PowerAllocation) else start, dtype=float)
    best_p = start_arr.copy()
    best_obj = prob.objective(start_arr)

    degree = k + 1 + n_rows
    mu_final = max(tol / degree, 1e-14)
    mu = max(MU_INITIAL, mu_final)
    newton_used = 0
    status = STATUS_OPTIMAL
    ones = np.ones(k)

    def barrier_value(x):
        value = float(np.sum(np.log(x - prob.power_floor)))
        value += float(np.log(prob.budget - np.sum(x)))
        if n_rows:
            value += float(np.sum(np.log(prob.row_slacks(x))))
        return value

    while True:
        for _ in range(max_iter):
            if newton_used >= max_iter:
                status = STATUS_MAX_ITERATIONS
                break
            total = float(np.sum(p))
            args = prob.gains * total + prob.noise_powers
            d_total = float(np.sum(prob.term_weights * prob.gains / (args * LN2)))
            d2_total = float(np.sum(prob.term_weights * prob.gains**2 / (args**2 * LN2)))
            floor_slack = p - prob.power_floor
            budget_slack = prob.budget - total
            row_slack = prob.row_slacks(p)

            grad = d_total * ones - prob.linear_term
            grad += mu / floor_slack
            grad -= mu / budget_slack * ones
            hess = d2_total * np.outer(ones, ones)
            hess += np.diag(mu / floor_slack**2)
            hess += mu / budget_slack**2 * np.outer(ones, ones)
            if n_rows:
                grad += mu * prob.qos_matrix.T @ (1.0 / row_slack)
                hess += (prob.qos_matrix.T / row_slack**2) @ prob.qos_matrix * mu
            try:
                direction = np.linalg.solve(hess, grad)
            except np.linalg.LinAlgError:
                # Near-floor iterates make the barrier diagonal span ~30
                # orders of magnitude; a relative ridge keeps the solve alive.
                ridge = np.diag(1e-12 * np.maximum(np.diag(hess), 1e-300))
                direction = np.linalg.solve(hess + ridge, grad)
            decrement = float(grad @ direction)
            if decrement <= max(1e-13, 0.05 * mu):
                break

            t_max = np.inf
            falling = direction < 0
            if np.any(falling):
                t_max = min(t_max, 0.99 * float(np.min(floor_slack[falling] / -direction[falling])))
            d_sum = float(np.sum(direction))
            if d_sum > 0:
                t_max = min(t_max, 0.99 * budget_slack / d_sum)
            if n_rows:
                d_rows = prob.qos_matrix @ direction
                falling = d_rows < 0
                if np.any(falling):
                    t_max = min(t_max, 0.99 * float(np.min(row_slack[falling] / -d_rows[falling])))
            psi_ref = prob.objective(p) + mu * barrier_value(p)
            step = min(1.0, t_max)
            accepted = False
            for _ in range(MAX_BACKTRACKS):
                cand = p + step * direction
                if strictly_interior(cand):
                    psi_cand = prob.objective(cand) + mu * barrier_value(cand)
                    if psi_cand >= psi_ref + ARMIJO_SLOPE * step * decrement:
                        accepted = True
                        break
                step *= BACKTRACK
            if not accepted:
                break
            p = cand
            newton_used += 1
        if status != STATUS_OPTIMAL:
            break
        obj_here = prob.objective(p)
        if obj_here > best_obj:
            best_obj = obj_here
            best_p = p.copy()
        if mu <= mu_final * (1.0 + 1e-12):
            break
        mu = max(mu * MU_DECREASE, mu_final)

    return SolverReport(
        solution=PowerAllocation(np.maximum(best_p, prob.power_floor if prob.power_floor > 0 else np.finfo(float).tiny)),
        objective=best_obj,
        iterations=newton_used,
        residual=min(mu * degree, tol) if status == STATUS_OPTIMAL else mu * degree,
        status=status,
    )


def extract_rank_one(f_matrix):
    """Principal-component beam vector sqrt(sigma_1) * u_max, magnitudes clipped to 1."""
    mat = f_matrix.matrix if isinstance(f_matrix, LiftedBeamMatrix) else np.asarray(f_matrix)
    eigenvalues, vectors = np.linalg.eigh(mat)
    top = float(eigenvalues[-1])
    if top <= 0.0:
        warnings.warn("extracting from a zero (or negative) matrix; returning the zero beam")
        return TransmissionCoefficients(np.zeros(mat.shape[0], dtype=complex))
    f = np.sqrt(top) * vectors[:, -1]
    magnitudes = np.abs(f)
    over = magnitudes > 1.0
    if np.any(over):
        f = f.copy()
        f[over] /= magnitudes[over]
    return TransmissionCoefficients(f)


def max_min_power_allocation(gains, budget):
    """Equal-SINR allocation at full budget for fixed effective gains.

    For a shared beam the max-min SINR at fixed gains has the closed form
        gamma* = Pt / ((K-1) Pt + sum_k noise/gain_k),
    attained by p_k = gamma* (Pt + noise/gain_k) / (1 + gamma*).
    """
    gains = np.asarray(gains, dtype=float)
    if np.any(gains <= 0.0):
        return None, 0.0
    pt = budget.total_power
    k = gains.shape[0]
    load = float(np.sum(budget.noise_power / gains))
    gamma = pt / ((k - 1) * pt + load)
    p = gamma * (pt + budget.noise_power / gains) / (1.0 + gamma)
    return PowerAllocation(p), float(gamma)


def _cophase_start(channels):
    """Unit-modulus beam phase-matched to the largest co-phased-gain user."""
    strengths = [float(np.sum(np.abs(ch.coefficients))) for ch in channels]
    best = int(np.argmax(strengths))
    h = channels[best].coefficients
    phases = np.where(np.abs(h) > 0.0, h / np.where(np.abs(h) > 0.0, np.abs(h), 1.0), 1.0)
    return TransmissionCoefficients(phases)


def find_feasible_point(channels, budget, rank_rounds=4):
    """Start satisfying the QoS, power, and magnitude constraints strictly.

    Maximizes the minimum SINR: the power block has a closed form at fixed
    gains, and the beam block reduces to minimizing sum_k noise/gain_k
    over the relaxed PSD set, reusing the barrier engine.  Returns a
    report whose solution is an (f, p) pair; infeasible when even the
    relaxed surface cannot reach the threshold.
    """
    k = len(channels)
    gamma_th = budget.sinr_threshold
    f0 = _cophase_start(channels)

    if gamma_th == 0.0:
        p0 = PowerAllocation(np.full(k, budget.total_power / k))
        return SolverReport(solution=(f0, p0), objective=np.inf, iterations=0,
                            residual=0.0, status=STATUS_OPTIMAL)

    gains0 = np.array([float(np.abs(np.vdot(ch.coefficients, f0.values)) ** 2) for ch in channels])
    p0, gamma0 = max_min_power_allocation(gains0, budget)
    if p0 is not None and gamma0 > gamma_th * (1.0 + 1e-9):
        return SolverReport(solution=(f0, p0), objective=gamma0, iterations=0,
                            residual=0.0, status=STATUS_OPTIMAL)

    h = np.array([ch.coefficients for ch in channels])
    m = h.shape[1]
    prob = PsdSubproblem(
        channel_vectors=h,
        gain_scales=np.ones(k),
        term_weights=np.full(k, budget.noise_power),
        linear_term=np.zeros((m, m), dtype=complex),
        term_kind="inverse",
    )
    start = LiftedBeamMatrix(
        0.9 * np.outer(f0.values, f0.values.conj()) + 0.05 * np.eye(m, dtype=complex)
    )
    report = solve_psd_subproblem(prob, start, tol=1e-9)
    relaxed = report.solution.matrix
    relaxed_gains = prob.gains(relaxed)
    _, gamma_relaxed = max_min_power_allocation(relaxed_gains, budget)
    if gamma_relaxed < gamma_th:
        return SolverReport(
            solution=None, objective=gamma_relaxed, iterations=report.iterations,
            residual=report.residual, status=STATUS_INFEASIBLE,
            message=f"relaxed max-min SINR {gamma_relaxed:.6g} below threshold {gamma_th:.6g}",
        )

    best_gamma = gamma0 if p0 is not None else 0.0
    best_pair = (f0, p0) if p0 is not None else None
    penalty = 0.0
    expansion = relaxed
    iterations = report.iterations
    for _ in range(rank_rounds):
        f_cand = extract_rank_one(LiftedBeamMatrix(expansion))
        cand_gains = np.array(
            [float(np.abs(np.vdot(ch.coefficients, f_cand.values)) ** 2) for ch in channels]
        )
        p_cand, gamma_cand = max_min_power_allocation(cand_gains, budget)
        if p_cand is not None and gamma_cand > best_gamma:
            best_gamma, best_pair = gamma_cand, (f_cand, p_cand)
        if best_gamma > gamma_th * (1.0 + 1e-9):
            return SolverReport(solution=best_pair, objective=best_gamma,
                                iterations=iterations, residual=0.0, status=STATUS_OPTIMAL)
        # Tighten toward rank one and retry.
        eigenvalues, vectors = np.linalg.eigh(expansion)
        u = vectors[:, -1]
        penalty = 2.0 * penalty if penalty > 0.0 else 1.0 / max(np.real(np.trace(expansion)), 1e-12)
        pen_prob = PsdSubproblem(
            channel_vectors=h,
            gain_scales=np.ones(k),
            term_weights=np.full(k, budget.noise_power),
            linear_term=penalty * (np.eye(m, dtype=complex) - np.outer(u, u.conj())),
            term_kind="inverse",
        )
        report = solve_psd_subproblem(pen_prob, LiftedBeamMatrix(expansion), tol=1e-9)
        expansion = report.solution.matrix
        iterations += report.iterations

    return SolverReport(
        solution=None, objective=best_gamma, iterations=iterations, residual=np.inf,
        status=STATUS_INFEASIBLE,
        message=(
            f"achieved max-min SINR {best_gamma:.6g} below threshold {gamma_th:.6g} "
            "(relaxed surface is feasible; rank-one extraction fell short)"
        ),
    )
