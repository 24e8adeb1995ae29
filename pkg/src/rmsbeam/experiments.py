"""Scenario configuration, sweep drivers, and CSV emission.

Seeding is nested so sweeps are coupled: a seed draws user positions and
per-user path parameters from per-user substreams, which makes the user
set for K=5 a subset of the set for K=6 and keeps each user's paths
identical across array sizes.  Trends over K and M are then visible per
seed instead of being buried in draw noise.

CSV schema (fixed): scenario,seed,algorithm,iteration,sum_rate_bps_hz,
rank_one_gap,min_qos_slack,wall_ms.  Sweep rows leave ``iteration``
empty; convergence rows carry the per-iteration surrogate objective in
the sum-rate column (it equals the extracted sum-rate once the rank-one
gap is negligible, and it is the quantity that is monotone).
"""

import csv
import dataclasses
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from rmsbeam import sca
from rmsbeam.ao import AO_INFEASIBLE, AoConfig, optimize
from rmsbeam.baselines import equal_allocation, random_allocation, zf_beamforming
from rmsbeam.channel import ArrayGeometry, generate_channel, place_users
from rmsbeam.linkmath import (
    LinkBudget,
    PowerAllocation,
    TransmissionCoefficients,
    all_sinrs,
    effective_gains,
    sum_rate,
)

CSV_HEADER = "scenario,seed,algorithm,iteration,sum_rate_bps_hz,rank_one_gap,min_qos_slack,wall_ms"

ALGORITHMS = ("proposed", "ea", "zf", "ra")

# Sub-stream tags for the nested seeding scheme.
_STREAM_POSITIONS = 0
_STREAM_CHANNEL = 1
_STREAM_RANDOM_ALLOC = 2
_STREAM_SYMBOLS = 3


class ConfigError(ValueError):
    pass


class InfeasibleError(RuntimeError):
    pass


@dataclass
class ScenarioConfig:
    """Flat experiment configuration; defaults are the reference setup."""

    k_users: int = 4
    m_x: int = 5
    m_z: int = 5
    l_paths: int = 3
    pt_dbm: float = 43.0
    noise_dbm: float = -70.0
    gamma_th_db: float = None
    cell_radius_m: float = 50.0
    rms_height_m: float = 15.0
    seeds: list = field(default_factory=lambda: list(range(20)))
    algorithm: str = "proposed"
    pt_list_dbm: list = field(default_factory=lambda: [39.0, 41.0, 43.0])
    k_list: list = field(default_factory=lambda: [2, 3, 4, 5, 6])
    m_list: list = field(default_factory=lambda: [16, 25, 36])
    convergence_threshold: float = 1e-3
    max_outer_iterations: int = 50
    penalty_initial_scale: float = 0.5
    rank_tolerance: float = 1e-3
    jobs: int = 1

    def validate(self):
        if self.k_users < 1 or self.l_paths < 1:
            raise ConfigError("k_users and l_paths must be at least 1")
        if self.m_x < 1 or self.m_z < 1:
            raise ConfigError("array dimensions must be at least 1")
        if self.cell_radius_m <= 0:
            raise ConfigError("cell radius must be positive")
        if not self.seeds:
            raise ConfigError("need at least one seed")
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"unknown algorithm {self.algorithm!r}; pick one of {ALGORITHMS}")
        for m in self.m_list:
            if int(np.sqrt(m)) ** 2 != m:
                raise ConfigError(f"element sweep sizes must be square counts, got {m}")
        return self

    def geometry(self):
        return ArrayGeometry.half_wavelength(self.m_x, self.m_z)

    def budget(self):
        gamma = 0.0 if self.gamma_th_db is None else 10.0 ** (self.gamma_th_db / 10.0)
        return LinkBudget.from_dbm(self.noise_dbm, self.pt_dbm, sinr_threshold=gamma)

    def ao_config(self):
        return AoConfig(
            convergence_threshold=self.convergence_threshold,
            max_outer_iterations=self.max_outer_iterations,
            penalty_initial_scale=self.penalty_initial_scale,
            rank_tolerance=self.rank_tolerance,
        )


_LIST_FIELDS = {"seeds", "pt_list_dbm", "k_list", "m_list"}
_INT_FIELDS = {"k_users", "m_x", "m_z", "l_paths", "max_outer_iterations", "jobs"}


def parse_config_file(path):
    """Read ``key = value`` lines into a ScenarioConfig."""
    config = ScenarioConfig()
    names = {f.name for f in dataclasses.fields(ScenarioConfig)}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in names:
            raise ConfigError(f"{path}:{lineno}: unknown field {key!r}")
        setattr(config, key, _parse_value(key, value))
    return config


def _parse_value(key, text):
    if key in _LIST_FIELDS:
        items = [item for item in text.replace(",", " ").split() if item]
        caster = int if key in ("seeds", "k_list", "m_list") else float
        return [caster(item) for item in items]
    if key in _INT_FIELDS:
        return int(text)
    if key == "algorithm":
        return text
    if key == "gamma_th_db":
        return None if text.lower() in ("none", "-inf", "off") else float(text)
    return float(text)


def scenario_channels(config, seed, k_users=None, geometry=None):
    """Synthesize the channel set for one seed (nested substreams)."""
    k = k_users if k_users is not None else config.k_users
    geom = geometry if geometry is not None else config.geometry()
    rms_pos = np.array([0.0, 0.0, config.rms_height_m])
    pos_rng = np.random.default_rng(np.random.SeedSequence([seed, _STREAM_POSITIONS]))
    positions = place_users(k, config.cell_radius_m, pos_rng)
    channels = []
    for user in range(k):
        rng = np.random.default_rng(np.random.SeedSequence([seed, _STREAM_CHANNEL, user]))
        channels.append(
            generate_channel(geom, config.l_paths, rng, positions[user], rms_pos)
        )
    return channels


@dataclass
class ResultRow:
    scenario: str
    seed: int
    algorithm: str
    iteration: object  # int for convergence rows, "" for final rows
    sum_rate_bps_hz: float
    rank_one_gap: float
    min_qos_slack: float
    wall_ms: float

    def as_csv(self):
        it = "" if self.iteration == "" else str(self.iteration)
        return (
            f"{self.scenario},{self.seed},{self.algorithm},{it},"
            f"{self.sum_rate_bps_hz:.10g},{self.rank_one_gap:.6g},"
            f"{self.min_qos_slack:.6g},{self.wall_ms:.3f}"
        )


def run_one(config, seed, algorithm, scenario, k_users=None, geometry=None, budget=None):
    """One (seed, algorithm) run; returns (final_row, per_iteration_rows, f, p)."""
    channels = scenario_channels(config, seed, k_users=k_users, geometry=geometry)
    budget = budget if budget is not None else config.budget()
    started = time.perf_counter()

    iteration_rows = []
    if algorithm in ("proposed", "ea"):
        if algorithm == "proposed":
            result = optimize(channels, budget, config.ao_config())
        else:
            _, _, result = equal_allocation(channels, budget, config.ao_config())
        if result.status == AO_INFEASIBLE:
            raise InfeasibleError(result.message)
        f, p = result.beam, result.powers
        for it in result.trace.iterations:
            iteration_rows.append(
                ResultRow(
                    scenario=scenario, seed=seed, algorithm=algorithm,
                    iteration=it.iteration, sum_rate_bps_hz=it.surrogate_after,
                    rank_one_gap=it.rank_one_gap, min_qos_slack=it.min_qos_slack,
                    wall_ms=1e3 * it.wall_seconds,
                )
            )
    elif algorithm == "zf":
        f, p = zf_beamforming(channels, budget)
    elif algorithm == "ra":
        rng = np.random.default_rng(np.random.SeedSequence([seed, _STREAM_RANDOM_ALLOC]))
        f, p = random_allocation(channels, budget, rng)
    else:
        raise ConfigError(f"unknown algorithm {algorithm!r}")

    wall_ms = 1e3 * (time.perf_counter() - started)
    rate = sum_rate(channels, f, p, budget)
    gains = effective_gains(channels, f)
    slack = float(np.min(all_sinrs(gains, p, budget)) - budget.sinr_threshold)
    gap = sca.rank_one_gap(np.outer(f.values, f.values.conj()))
    final = ResultRow(
        scenario=scenario, seed=seed, algorithm=algorithm, iteration="",
        sum_rate_bps_hz=rate, rank_one_gap=gap, min_qos_slack=slack, wall_ms=wall_ms,
    )
    return final, iteration_rows, f, p


def _run_task(args):
    config_dict, seed, algorithm, scenario, k_users, m_count, pt_dbm = args
    config = ScenarioConfig(**config_dict)
    geometry = None
    if m_count is not None:
        side = int(np.sqrt(m_count))
        geometry = ArrayGeometry.half_wavelength(side, side)
    budget = None
    if pt_dbm is not None:
        budget = dataclasses.replace(config, pt_dbm=pt_dbm).budget()
    return args, run_one(
        config, seed, algorithm, scenario, k_users=k_users, geometry=geometry, budget=budget
    )


def _run_all(config, tasks):
    """Run (seed, algorithm, scenario, ...) tasks, possibly in parallel."""
    config_dict = dataclasses.asdict(config)
    packed = [
        (config_dict, seed, algorithm, scenario, k_users, m_count, pt_dbm)
        for (seed, algorithm, scenario, k_users, m_count, pt_dbm) in tasks
    ]
    outputs = []
    if config.jobs > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            outputs = list(pool.map(_run_task, packed))
    else:
        outputs = [_run_task(args) for args in packed]
    return outputs


def run_convergence(config, out_path, solutions_dir=None):
    """Per-iteration rows of the proposed algorithm for each Pt in the list."""
    config.validate()
    tasks = [
        (seed, "proposed", f"PT{pt:g}", None, None, pt)
        for pt in config.pt_list_dbm
        for seed in config.seeds
    ]
    outputs = _run_all(config, tasks)
    rows = []
    for args, (final, iteration_rows, f, p) in outputs:
        rows.extend(iteration_rows)
        _maybe_persist(solutions_dir, args, final, f, p)
    _write_csv(out_path, rows)
    return rows


def run_user_sweep(config, out_path, solutions_dir=None):
    """Final sum-rate of every algorithm for each K in the list."""
    config.validate()
    tasks = [
        (seed, algorithm, f"K{k}", k, None, None)
        for k in config.k_list
        for algorithm in ALGORITHMS
        for seed in config.seeds
    ]
    outputs = _run_all(config, tasks)
    rows = []
    for args, (final, _, f, p) in outputs:
        rows.append(final)
        _maybe_persist(solutions_dir, args, final, f, p)
    _write_csv(out_path, rows)
    return rows


def run_element_sweep(config, out_path, solutions_dir=None):
    """Final sum-rate of every algorithm for each square M in the list."""
    config.validate()
    tasks = [
        (seed, algorithm, f"M{m}", None, m, None)
        for m in config.m_list
        for algorithm in ALGORITHMS
        for seed in config.seeds
    ]
    outputs = _run_all(config, tasks)
    rows = []
    for args, (final, _, f, p) in outputs:
        rows.append(final)
        _maybe_persist(solutions_dir, args, final, f, p)
    _write_csv(out_path, rows)
    return rows


def run_single(config, out_path, solutions_dir=None):
    """One algorithm, the configured scenario, one row per seed."""
    config.validate()
    tasks = [(seed, config.algorithm, "DEFAULT", None, None, None) for seed in config.seeds]
    outputs = _run_all(config, tasks)
    rows = []
    for args, (final, _, f, p) in outputs:
        rows.append(final)
        _maybe_persist(solutions_dir, args, final, f, p)
    _write_csv(out_path, rows)
    return rows


def _write_csv(path, rows):
    rows = sorted(rows, key=lambda r: (r.scenario, r.algorithm, r.seed, str(r.iteration)))
    text = CSV_HEADER + "\n" + "\n".join(row.as_csv() for row in rows) + "\n"
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(text)


def _maybe_persist(solutions_dir, args, final, f, p):
    if solutions_dir is None:
        return
    seed, algorithm, scenario = args[1], args[2], args[3]
    path = Path(solutions_dir) / f"{scenario}_{algorithm}_seed{seed}.txt"
    save_solution(path, f, p, scenario)


def save_solution(path, f, p, scenario):
    """Text persistence: 3 header lines (M, K, scenario id), then f, then p."""
    values = f.values if isinstance(f, TransmissionCoefficients) else np.asarray(f)
    powers = p.powers if isinstance(p, PowerAllocation) else np.asarray(p, dtype=float)
    lines = [f"M {values.shape[0]}", f"K {powers.shape[0]}", f"scenario {scenario}"]
    lines += [f"{v.real:.17g} {v.imag:.17g}" for v in values]
    lines += [f"{w:.17g}" for w in powers]
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n")


def load_solution(path):
    """Inverse of save_solution; returns (f, p, scenario_id)."""
    lines = Path(path).read_text().splitlines()
    m = int(lines[0].split()[1])
    k = int(lines[1].split()[1])
    scenario = lines[2].split(maxsplit=1)[1]
    f_vals = np.array(
        [complex(float(a), float(b)) for a, b in (ln.split() for ln in lines[3 : 3 + m])]
    )
    p_vals = np.array([float(ln) for ln in lines[3 + m : 3 + m + k]])
    return TransmissionCoefficients(f_vals), PowerAllocation(p_vals), scenario


def read_rows(path):
    """Parse a results CSV back into ResultRow objects (schema-checked)."""
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header != CSV_HEADER.split(","):
            raise ConfigError(f"unexpected CSV header in {path}: {header}")
        rows = []
        for record in reader:
            rows.append(
                ResultRow(
                    scenario=record[0],
                    seed=int(record[1]),
                    algorithm=record[2],
                    iteration="" if record[3] == "" else int(record[3]),
                    sum_rate_bps_hz=float(record[4]),
                    rank_one_gap=float(record[5]),
                    min_qos_slack=float(record[6]),
                    wall_ms=float(record[7]),
                )
            )
    return rows
