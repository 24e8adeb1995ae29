"""Shared fixtures.

The heavy batches (hundred-seed default runs, twenty-seed sweeps) are
session-scoped and shared between the module tests and the acceptance
suite so the whole run stays within a desk-scale time budget.
"""

import dataclasses
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np
import pytest

from rmsbeam.ao import optimize
from rmsbeam.experiments import ScenarioConfig, scenario_channels

N_DEFAULT_RUNS = 100
N_SWEEP_SEEDS = 20
WORKERS = 2


def default_config(**overrides):
    return dataclasses.replace(ScenarioConfig(), **overrides)


def make_channels(seed, k_users=None, m_side=None, config=None):
    config = config or ScenarioConfig()
    geometry = None
    if m_side is not None:
        from rmsbeam.channel import ArrayGeometry

        geometry = ArrayGeometry.half_wavelength(m_side, m_side)
    return scenario_channels(config, seed, k_users=k_users, geometry=geometry)


def _default_run(seed):
    config = ScenarioConfig()
    channels = scenario_channels(config, seed)
    result = optimize(channels, config.budget(), config.ao_config())
    return seed, result


@pytest.fixture(scope="session")
def default_hundred():
    """(elapsed_seconds, {seed: AoResult}) for 100 seeds at the default setup."""
    started = time.perf_counter()
    with ProcessPoolExecutor(max_workers=WORKERS) as pool:
        results = dict(pool.map(_default_run, range(N_DEFAULT_RUNS)))
    elapsed = time.perf_counter() - started
    return elapsed, results


@pytest.fixture(scope="session")
def sweep_rows(tmp_path_factory):
    """User-, element-, and Pt-sweep rows at >= 20 seeds (shared)."""
    from rmsbeam.experiments import run_convergence, run_element_sweep, run_user_sweep

    out = tmp_path_factory.mktemp("sweeps")
    config = default_config(seeds=list(range(N_SWEEP_SEEDS)), jobs=WORKERS)
    users = run_user_sweep(config, out / "users.csv")
    elements = run_element_sweep(config, out / "elements.csv")
    convergence = run_convergence(config, out / "convergence.csv")
    return {"users": users, "elements": elements, "convergence": convergence}


def mean_rates(rows, scenario, algorithm):
    vals = [
        r.sum_rate_bps_hz
        for r in rows
        if r.scenario == scenario and r.algorithm == algorithm and r.iteration == ""
    ]
    return float(np.mean(vals))
