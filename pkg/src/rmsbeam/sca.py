"""First-order surrogates used by the alternating optimizer.

Per user the lifted rate splits as R_k = g1(F) - g2(F); g2 is concave so
its tangent plane is a global upper bound, making g1 - g2^ub a concave
minorant of R_k.  The same construction on the power side gives h2^ub.
The rank-one defect of a PSD matrix is trace(F) - ||F||_2, penalized via
a tangent lower bound on the spectral norm.

All matrix inner products take the real part of tr(A^H B); the imaginary
residue is checked to be numerically zero.
"""

from dataclasses import dataclass

import numpy as np

from rmsbeam.linkmath import LN2, LiftedBeamMatrix, PowerAllocation

IMAG_RESIDUE_TOL = 1e-9


@dataclass(frozen=True)
class ScaExpansionPoint:
    """Iterate (F^r, p^r) around which the surrogates are expanded."""

    f_matrix: LiftedBeamMatrix
    powers: PowerAllocation


def _as_matrix(f_matrix):
    return f_matrix.matrix if isinstance(f_matrix, LiftedBeamMatrix) else np.asarray(f_matrix)


def _gain_matrix(channel):
    h = channel.coefficients if hasattr(channel, "coefficients") else np.asarray(channel)
    return np.outer(h, h.conj())


def real_trace_product(a, b):
    """Re tr(A^H B), guarding against a non-trivial imaginary part."""
    value = np.sum(a.conj() * b)
    scale = max(abs(value), 1.0)
    if abs(value.imag) > IMAG_RESIDUE_TOL * scale:
        raise ValueError(f"inner product has imaginary residue {value.imag}")
    return float(value.real)


def lifted_gain(f_matrix, channel):
    """tr(F h h^H) = h^H F h >= 0."""
    mat = _as_matrix(f_matrix)
    h = channel.coefficients if hasattr(channel, "coefficients") else np.asarray(channel)
    value = np.vdot(h, mat @ h)
    return float(value.real)


def g1(f_matrix, k, p, channels, budget):
    """log2 of the total received power (all users) plus noise, user k."""
    t_k = lifted_gain(f_matrix, channels[k])
    total = float(np.sum(p.powers))
    return float(np.log2(total * t_k + budget.noise_power))


def g2(f_matrix, k, p, channels, budget):
    """log2 of interference-plus-noise power at user k."""
    t_k = lifted_gain(f_matrix, channels[k])
    other = float(np.sum(p.powers)) - p.powers[k]
    return float(np.log2(other * t_k + budget.noise_power))


def g2_gradient(at, k, channels, budget):
    """Gradient of g2 at the expansion point: a PSD multiple of h_k h_k^H."""
    h_mat = _gain_matrix(channels[k])
    other = float(np.sum(at.powers.powers)) - at.powers.powers[k]
    denom = (other * lifted_gain(at.f_matrix, channels[k]) + budget.noise_power) * LN2
    return other * h_mat / denom


def g2_upper_bound(f_matrix, at, k, channels, budget):
    """Tangent-plane upper bound of g2, affine in F."""
    base = g2(at.f_matrix, k, at.powers, channels, budget)
    grad = g2_gradient(at, k, channels, budget)
    delta = _as_matrix(f_matrix) - at.f_matrix.matrix
    return base + real_trace_product(grad, delta)


def rank_one_gap(f_matrix):
    """trace(F) - largest eigenvalue; zero iff a PSD F has rank <= 1."""
    mat = _as_matrix(f_matrix)
    eigenvalues = np.linalg.eigvalsh(mat)
    return float(np.real(np.trace(mat)) - eigenvalues[-1])


def principal_eigenvector(f_matrix, tie_tol=1e-10):
    """Unit eigenvector of the largest eigenvalue, deterministic under ties.

    eigh orders eigenvalues ascending with a deterministic eigenvector
    choice, so near-ties simply take the last column; any unit principal
    eigenvector gives a valid subgradient of the spectral norm.
    """
    mat = _as_matrix(f_matrix)
    eigenvalues, vectors = np.linalg.eigh(mat)
    del tie_tol  # ties need no special casing with a deterministic eigh
    return vectors[:, -1]


def spectral_norm_lower_bound(f_matrix, at):
    """Tangent lower bound on ||F||_2 expanded at F^r, affine in F."""
    ref = at.f_matrix.matrix
    u = principal_eigenvector(at.f_matrix)
    base = float(np.linalg.eigvalsh(ref)[-1])
    delta = _as_matrix(f_matrix) - ref
    return base + real_trace_product(np.outer(u, u.conj()), delta)


def h1(p, k, f_matrix, channels, budget):
    """Power-side twin of g1: log2 over the powers at fixed F."""
    t_k = lifted_gain(f_matrix, channels[k])
    powers = p.powers if isinstance(p, PowerAllocation) else np.asarray(p, dtype=float)
    return float(np.log2(float(np.sum(powers)) * t_k + budget.noise_power))


def h2(p, k, f_matrix, channels, budget):
    t_k = lifted_gain(f_matrix, channels[k])
    powers = p.powers if isinstance(p, PowerAllocation) else np.asarray(p, dtype=float)
    other = float(np.sum(powers)) - powers[k]
    return float(np.log2(other * t_k + budget.noise_power))


def h2_gradient_coefficient(at, k, f_matrix, channels, budget):
    """d h2 / d p_i for every interferer i != k (a single shared scalar)."""
    t_k = lifted_gain(f_matrix, channels[k])
    ref = at.powers.powers
    other = float(np.sum(ref)) - ref[k]
    return t_k / ((other * t_k + budget.noise_power) * LN2)


def h2_upper_bound(p, at, k, f_matrix, channels, budget):
    """Tangent-plane upper bound of h2 in the powers, affine in p."""
    base = h2(at.powers, k, f_matrix, channels, budget)
    coeff = h2_gradient_coefficient(at, k, f_matrix, channels, budget)
    powers = p.powers if isinstance(p, PowerAllocation) else np.asarray(p, dtype=float)
    ref = at.powers.powers
    delta_other = (float(np.sum(powers)) - powers[k]) - (float(np.sum(ref)) - ref[k])
    return base + coeff * delta_other


def initial_penalty_weight(initial_rate, f_matrix, scale=0.5, trace_floor=1e-12):
    """Starting weight for the rank-one penalty.

    Docked to the objective scale per unit trace: strong enough to keep
    the relaxation near rank one without freezing the beam direction
    early on.  Grown geometrically by the optimizer if the gap persists.
    """
    trace = float(np.real(np.trace(_as_matrix(f_matrix))))
    return scale * max(abs(initial_rate), 1.0) / max(trace, trace_floor)
