"""Effective gains, SINR, and rates for the shared-beam downlink.

All K users receive the same beam, so user k's interference passes
through its own effective gain |h_k^H f|^2:

    SINR_k = p_k g_k / (g_k * sum_{i != k} p_i + sigma_k^2)

Rates are log2 throughout.  dBm/watt conversions live here because the
scenario parameters are quoted in dBm while all formulas are linear.
"""

from dataclasses import dataclass

import numpy as np

LN2 = float(np.log(2.0))

MAGNITUDE_TOL = 1e-9
HERMITIAN_TOL = 1e-9
EIGENVALUE_TOL = 1e-8


def dbm_to_watt(value_dbm):
    return 10.0 ** ((value_dbm - 30.0) / 10.0)


def watt_to_dbm(value_watt):
    return 10.0 * np.log10(value_watt) + 30.0


@dataclass(frozen=True)
class TransmissionCoefficients:
    """Per-element complex coefficients f with |f_m| <= 1."""

    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        object.__setattr__(self, "values", values)
        worst = np.max(np.abs(values)) if values.size else 0.0
        if worst > 1.0 + MAGNITUDE_TOL:
            raise ValueError(f"coefficient magnitude {worst} exceeds 1")

    @property
    def n_elements(self):
        return self.values.shape[0]

    def lifted(self):
        return LiftedBeamMatrix(np.outer(self.values, self.values.conj()))


@dataclass(frozen=True)
class LiftedBeamMatrix:
    """Hermitian PSD matrix F = f f^H (possibly relaxed to rank > 1)."""

    matrix: np.ndarray

    def __post_init__(self):
        matrix = np.asarray(self.matrix, dtype=complex)
        object.__setattr__(self, "matrix", matrix)
        scale = max(np.abs(matrix).max(), 1.0) if matrix.size else 1.0
        if np.abs(matrix - matrix.conj().T).max() > HERMITIAN_TOL * scale:
            raise ValueError("matrix is not Hermitian")
        trace = float(np.real(np.trace(matrix)))
        min_eig = float(np.linalg.eigvalsh(matrix)[0])
        if min_eig < -EIGENVALUE_TOL * max(trace, 1.0):
            raise ValueError(f"matrix is not PSD (min eigenvalue {min_eig})")
        if np.real(np.diag(matrix)).max() > 1.0 + MAGNITUDE_TOL:
            raise ValueError("diagonal entries exceed the unit cap")

    @property
    def n_elements(self):
        return self.matrix.shape[0]

    def trace(self):
        return float(np.real(np.trace(self.matrix)))


@dataclass(frozen=True)
class PowerAllocation:
    """Per-user transmit powers in watts (all positive)."""

    powers: np.ndarray

    def __post_init__(self):
        powers = np.asarray(self.powers, dtype=float)
        object.__setattr__(self, "powers", powers)
        if np.any(powers <= 0.0):
            raise ValueError("powers must be strictly positive")

    @property
    def n_users(self):
        return self.powers.shape[0]

    def total(self):
        return float(np.sum(self.powers))

    def validate_budget(self, total_power, tol=1e-9):
        if self.total() > total_power * (1.0 + tol):
            raise ValueError(
                f"allocation {self.total()} W exceeds the {total_power} W budget"
            )


@dataclass(frozen=True)
class LinkBudget:
    """Noise power, SINR threshold (linear), and total power budget."""

    noise_power: float
    sinr_threshold: float = 0.0
    total_power: float = 1.0

    def __post_init__(self):
        if self.noise_power <= 0.0 or self.total_power <= 0.0:
            raise ValueError("noise and total power must be strictly positive")
        if self.sinr_threshold < 0.0:
            raise ValueError("SINR threshold must be nonnegative")

    @classmethod
    def from_dbm(cls, noise_dbm, pt_dbm, sinr_threshold=0.0):
        return cls(
            noise_power=dbm_to_watt(noise_dbm),
            sinr_threshold=sinr_threshold,
            total_power=dbm_to_watt(pt_dbm),
        )


def _coeff_array(f):
    return f.values if isinstance(f, TransmissionCoefficients) else np.asarray(f)


def _power_array(p):
    return p.powers if isinstance(p, PowerAllocation) else np.asarray(p, dtype=float)


def effective_gain(channel, f):
    """|h^H f|^2 for one user; equals tr((f f^H)(h h^H))."""
    h = channel.coefficients if hasattr(channel, "coefficients") else np.asarray(channel)
    values = _coeff_array(f)
    if h.shape != values.shape:
        raise ValueError(f"dimension mismatch: {h.shape} vs {values.shape}")
    return float(np.abs(np.vdot(h, values)) ** 2)


def effective_gains(channels, f):
    return np.array([effective_gain(ch, f) for ch in channels])


def sinr(k, gains, p, budget):
    """SINR of user k given every user's effective gain and the powers."""
    powers = _power_array(p)
    g_k = float(gains[k])
    interference = g_k * (float(np.sum(powers)) - powers[k])
    return powers[k] * g_k / (interference + budget.noise_power)


def all_sinrs(gains, p, budget):
    powers = _power_array(p)
    gains = np.asarray(gains, dtype=float)
    interference = gains * (np.sum(powers) - powers)
    return powers * gains / (interference + budget.noise_power)


def sum_rate(channels, f, p, budget):
    """Achievable sum-rate sum_k log2(1 + SINR_k) in bits/s/Hz."""
    gains = effective_gains(channels, f)
    return float(np.sum(np.log2(1.0 + all_sinrs(gains, p, budget))))


def rate_difference_form(channels, f, p, budget):
    """Sum-rate via the total-minus-interference log difference.

    Algebraically identical to sum_rate; kept as a separate code path so
    the equivalence can be checked numerically.
    """
    gains = effective_gains(channels, f)
    powers = _power_array(p)
    total = float(np.sum(powers))
    rates = np.log2(total * gains + budget.noise_power) - np.log2(
        (total - powers) * gains + budget.noise_power
    )
    return float(np.sum(rates))


def qos_slacks(channels, f, p, budget):
    """Per-user SINR_k - gamma_th."""
    gains = effective_gains(channels, f)
    return all_sinrs(gains, p, budget) - budget.sinr_threshold


def qos_satisfied(channels, f, p, budget, rel_tol=1e-6):
    """True iff every user meets the SINR threshold (closed set, small slack).

    Returns (ok, slacks).
    """
    slacks = qos_slacks(channels, f, p, budget)
    ok = bool(np.all(slacks >= -rel_tol * budget.sinr_threshold))
    return ok, slacks
