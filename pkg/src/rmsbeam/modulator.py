"""Source-bit mapping onto the surface and symbol-level reception.

The transmitter maps each 2-bit pair to a QPSK phase, multiplies it into
every element's beamforming coefficient (the information rotation rides
on top of the beam), and the receiver of user k sees

    y_k = h_k^H f sqrt(p_k) s_k + h_k^H f sum_{i != k} sqrt(p_i) s_i + n_k.

Gray labeling for the constellation: 00, 01, 11, 10 counter-clockwise
from pi/4.
"""

from dataclasses import dataclass

import numpy as np

from rmsbeam.linkmath import PowerAllocation, TransmissionCoefficients, effective_gains

GRAY_PHASES = {
    (0, 0): np.pi / 4.0,
    (0, 1): 3.0 * np.pi / 4.0,
    (1, 1): 5.0 * np.pi / 4.0,
    (1, 0): 7.0 * np.pi / 4.0,
}


@dataclass(frozen=True)
class QpskSymbol:
    phase: float
    bits: tuple

    def __post_init__(self):
        if not any(np.isclose(self.phase, v) for v in GRAY_PHASES.values()):
            raise ValueError(f"{self.phase} is not a QPSK constellation phase")

    @property
    def value(self):
        return np.exp(1j * self.phase)


@dataclass(frozen=True)
class UltimateCoefficient:
    """Per-element coefficient after the information rotation."""

    value: complex


@dataclass(frozen=True)
class ReceivedSample:
    value: complex
    noise_power: float


def map_bits(bits):
    """2-bit pair -> QPSK symbol (Gray labeling)."""
    pair = tuple(int(b) for b in bits)
    if pair not in GRAY_PHASES:
        raise ValueError(f"need a 2-bit pair, got {bits!r}")
    return QpskSymbol(phase=GRAY_PHASES[pair], bits=pair)


def demap_symbol(sym):
    """Inverse of map_bits."""
    for pair, phase in GRAY_PHASES.items():
        if np.isclose(sym.phase, phase):
            return pair
    raise ValueError(f"{sym.phase} is not a QPSK constellation phase")


def compose(f_m, sym):
    """Element coefficient with the symbol rotation applied; |.| preserved."""
    if abs(f_m) > 1.0 + 1e-9:
        raise ValueError("beamforming coefficient magnitude exceeds 1")
    return UltimateCoefficient(value=f_m * sym.value)


def random_symbols(k_users, n_symbols, rng):
    """Unit-modulus QPSK symbol streams, one row per user."""
    phases = GRAY_PHASES[(0, 0)] + 0.5 * np.pi * rng.integers(0, 4, size=(k_users, n_symbols))
    return np.exp(1j * phases)


def receive_symbol(channel, f, p, k, symbols_now, budget, rng):
    """Single received sample at user k for one symbol slot."""
    values = f.values if isinstance(f, TransmissionCoefficients) else np.asarray(f)
    powers = p.powers if isinstance(p, PowerAllocation) else np.asarray(p, dtype=float)
    gain = np.vdot(channel.coefficients, values)
    amps = np.sqrt(powers)
    signal = gain * amps[k] * symbols_now[k]
    interference = gain * (np.sum(amps * symbols_now) - amps[k] * symbols_now[k])
    noise = np.sqrt(budget.noise_power / 2.0) * (rng.standard_normal() + 1j * rng.standard_normal())
    return ReceivedSample(value=complex(signal + interference + noise), noise_power=budget.noise_power)


def simulate_received(channels, f, p, symbols, budget, rng):
    """Received samples for all users over a block of symbols.

    ``symbols`` is a (K, N) array of unit-variance symbols; the return
    value is the matching (K, N) complex array of received samples.
    """
    values = f.values if isinstance(f, TransmissionCoefficients) else np.asarray(f)
    powers = p.powers if isinstance(p, PowerAllocation) else np.asarray(p, dtype=float)
    symbols = np.asarray(symbols)
    k_users, n_symbols = symbols.shape
    gains = np.array([np.vdot(ch.coefficients, values) for ch in channels])
    amps = np.sqrt(powers)
    mixed = (amps[:, None] * symbols).sum(axis=0)  # sum_i sqrt(p_i) s_i per slot
    noise = np.sqrt(budget.noise_power / 2.0) * (
        rng.standard_normal((k_users, n_symbols)) + 1j * rng.standard_normal((k_users, n_symbols))
    )
    return gains[:, None] * mixed[None, :] + noise


def empirical_sinr(received, symbols, k):
    """Estimate user k's SINR from received samples and known symbols.

    Projects onto the known symbol stream; everything orthogonal to it is
    interference plus noise.
    """
    y = received[k]
    s = symbols[k]
    alpha = np.vdot(s, y) / np.vdot(s, s)
    residual = y - alpha * s
    signal_power = np.abs(alpha) ** 2 * float(np.mean(np.abs(s) ** 2))
    residual_power = float(np.mean(np.abs(residual) ** 2))
    return signal_power / residual_power


def analytic_sinrs(channels, f, p, budget):
    """Reference SINRs from the effective gains (no symbol noise)."""
    gains = effective_gains(channels, f)
    powers = p.powers if isinstance(p, PowerAllocation) else np.asarray(p, dtype=float)
    total = float(np.sum(powers))
    return powers * gains / (gains * (total - powers) + budget.noise_power)
