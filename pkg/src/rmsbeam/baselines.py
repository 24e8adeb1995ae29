"""Comparison schemes: equal allocation, zero-forcing, random allocation.

Equal allocation reuses the alternating optimizer with the power block
frozen at an even split.  Zero-forcing aims the beam so every user sees
the same complex gain (least-squares, since a single shared beam cannot
null per-user interference), also with even powers.  Random allocation
draws uniform phases and a uniform simplex power split.

None of the baselines enforces the QoS rows; their SINR slacks are
reported by the caller where needed.
"""

import dataclasses

import numpy as np

from rmsbeam.ao import AoConfig, optimize
from rmsbeam.linkmath import PowerAllocation, TransmissionCoefficients


def equal_allocation(channels, budget, config=None):
    """Optimized beam with the power split frozen at Pt/K."""
    frozen = dataclasses.replace(config or AoConfig(), optimize_power=False)
    result = optimize(channels, budget, frozen)
    return result.beam, result.powers, result


def zf_beamforming(channels, budget, loading=1.0, ridge_rel=1e-9):
    """Gain-equalizing beam: regularized least squares toward H^H f = 1.

    The beam is rescaled so its largest element magnitude is one, which
    radiates as much power as the unit cap allows; powers split evenly.
    Requires K <= M.

    ``loading`` scales a diagonal load of tr(H^H H)/K on the Gram matrix.
    Exact equalization (loading=0) burns most of the radiated power on
    the weakest user and falls below even the random baseline once K
    grows past ~4; the default load keeps the equalizer efficient while
    preserving its character.
    """
    h = np.array([ch.coefficients for ch in channels]).T  # columns h_k
    k = h.shape[1]
    if k > h.shape[0]:
        raise ValueError(f"zero-forcing needs K <= M, got K={k}, M={h.shape[0]}")
    gram = h.conj().T @ h
    trace = float(np.real(np.trace(gram)))
    lam = max(loading, ridge_rel) * trace / k
    weights = np.linalg.solve(gram + lam * np.eye(k), np.ones(k, dtype=complex))
    f = h @ weights
    peak = float(np.max(np.abs(f)))
    if peak > 0.0:
        f = f / peak
    powers = PowerAllocation(np.full(k, budget.total_power / k))
    return TransmissionCoefficients(f), powers


def random_allocation(channels, budget, rng):
    """Uniform random phases and a uniform random simplex power split."""
    m = channels[0].n_elements
    k = len(channels)
    phases = rng.uniform(0.0, 2.0 * np.pi, m)
    f = TransmissionCoefficients(np.exp(1j * phases))
    split = rng.dirichlet(np.ones(k))
    powers = PowerAllocation(budget.total_power * split)
    return f, powers
