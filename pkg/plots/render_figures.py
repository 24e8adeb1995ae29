#!/usr/bin/env python3
"""Render figures from rmsbeam experiment CSVs.

Usage:
    python render_figures.py <kind> <csv> <out-image>

Kinds:
    convergence    sum-rate vs iteration, one curve per Pt scenario
    user-sweep     sum-rate vs K, one curve per algorithm
    element-sweep  sum-rate vs M, one curve per algorithm

Curves show the mean over seeds with standard-error bands.  The CSV must
carry the exact schema produced by the rmsbeam CLI; the iteration column
must be populated for convergence data and empty for sweep data.
"""

import csv
import sys
from collections import defaultdict
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

EXPECTED_HEADER = [
    "scenario",
    "seed",
    "algorithm",
    "iteration",
    "sum_rate_bps_hz",
    "rank_one_gap",
    "min_qos_slack",
    "wall_ms",
]

KINDS = ("convergence", "user-sweep", "element-sweep")

X_LABELS = {
    "convergence": "outer iteration",
    "user-sweep": "number of users K",
    "element-sweep": "number of surface elements M",
}


class SchemaError(ValueError):
    pass


@dataclass(frozen=True)
class FigureSpec:
    kind: str
    csv_path: str
    out_path: str

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SchemaError(f"unknown figure kind {self.kind!r}; expected one of {KINDS}")


def read_rows(csv_path):
    with open(csv_path, newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header != EXPECTED_HEADER:
            raise SchemaError(
                f"column mismatch in {csv_path}: expected {EXPECTED_HEADER}, got {header}"
            )
        rows = [row for row in reader if row]
    if not rows:
        raise SchemaError(f"{csv_path} has no data rows")
    return rows


def scenario_number(tag):
    """Numeric part of a scenario tag like K4, M25, PT43."""
    digits = "".join(ch for ch in tag if ch.isdigit() or ch == ".")
    if not digits:
        raise SchemaError(f"scenario tag {tag!r} carries no sweep value")
    return float(digits)


def collect_series(spec, rows):
    """Group rows into plot series: {label: (x values, means, stderrs)}.

    Convergence groups by scenario (Pt) with iteration on the x axis;
    sweeps group by algorithm with the scenario value on the x axis.
    """
    buckets = defaultdict(lambda: defaultdict(list))
    for row in rows:
        scenario, _, algorithm, iteration, rate = row[0], row[1], row[2], row[3], float(row[4])
        if spec.kind == "convergence":
            if iteration == "":
                raise SchemaError("convergence input needs a populated iteration column")
            buckets[scenario][int(iteration)].append(rate)
        else:
            if iteration != "":
                raise SchemaError(f"{spec.kind} input must leave the iteration column empty")
            buckets[algorithm][scenario_number(scenario)].append(rate)

    series = {}
    for label in sorted(buckets):
        xs = np.array(sorted(buckets[label]))
        means = np.array([np.mean(buckets[label][x]) for x in xs])
        errs = np.array(
            [
                np.std(buckets[label][x]) / max(np.sqrt(len(buckets[label][x])), 1.0)
                for x in xs
            ]
        )
        series[label] = (xs, means, errs)
    return series


def render(spec):
    """Render one figure; returns the plotted series for inspection."""
    rows = read_rows(spec.csv_path)
    series = collect_series(spec, rows)

    fig, ax = plt.subplots(figsize=(5.2, 3.6))
    for label, (xs, means, errs) in series.items():
        ax.plot(xs, means, marker="o", markersize=3.5, linewidth=1.2, label=label)
        ax.fill_between(xs, means - errs, means + errs, alpha=0.2)
    ax.set_xlabel(X_LABELS[spec.kind])
    ax.set_ylabel("sum-rate (bits/s/Hz)")
    ax.grid(alpha=0.3, linestyle="--")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(spec.out_path, dpi=160)
    plt.close(fig)
    return series


def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    if len(argv) != 3:
        print(__doc__, file=sys.stderr)
        return 2
    try:
        spec = FigureSpec(kind=argv[0], csv_path=argv[1], out_path=argv[2])
        series = render(spec)
    except (SchemaError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {spec.out_path} ({len(series)} series)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
