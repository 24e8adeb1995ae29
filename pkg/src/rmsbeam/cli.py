"""Command-line entry point.

Subcommands mirror the three reference experiments plus a single run:

    rmsbeam convergence   --out conv.csv
    rmsbeam user-sweep    --out users.csv
    rmsbeam element-sweep --out elements.csv
    rmsbeam single-run    --out single.csv --algo proposed

Flags override config-file values; exit code 0 on success, 2 on a
configuration error, 3 on an infeasible scenario.
"""

import argparse
import sys

from rmsbeam.experiments import (
    ALGORITHMS,
    ConfigError,
    InfeasibleError,
    ScenarioConfig,
    parse_config_file,
    run_convergence,
    run_element_sweep,
    run_single,
    run_user_sweep,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3

_RUNNERS = {
    "convergence": run_convergence,
    "user-sweep": run_user_sweep,
    "element-sweep": run_element_sweep,
    "single-run": run_single,
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="rmsbeam",
        description="Metasurface-transmitter downlink experiments (CSV output)",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _RUNNERS:
        cmd = sub.add_parser(name)
        cmd.add_argument("--config", help="flat key = value config file")
        cmd.add_argument("--out", required=True, help="output CSV path")
        cmd.add_argument("--solutions-dir", help="persist per-run (f, p) solutions here")
        cmd.add_argument("--seeds", help="seed count (N) or comma list (e.g. 0,1,5)")
        cmd.add_argument("--algo", choices=ALGORITHMS, help="algorithm for single-run")
        cmd.add_argument("--jobs", type=int, help="parallel worker processes")
        cmd.add_argument("--k-users", type=int)
        cmd.add_argument("--m-x", type=int)
        cmd.add_argument("--m-z", type=int)
        cmd.add_argument("--l-paths", type=int)
        cmd.add_argument("--pt-dbm", type=float)
        cmd.add_argument("--noise-dbm", type=float)
        cmd.add_argument("--gamma-th-db", help="QoS threshold in dB, or 'none'")
        cmd.add_argument("--cell-radius-m", type=float)
        cmd.add_argument("--rms-height-m", type=float)
        cmd.add_argument("--max-outer-iterations", type=int)
        cmd.add_argument("--convergence-threshold", type=float)
    return parser


def _parse_seeds(text):
    if "," in text:
        return [int(part) for part in text.split(",") if part.strip() != ""]
    return list(range(int(text)))


def apply_overrides(config, args):
    simple = (
        "k_users", "m_x", "m_z", "l_paths", "pt_dbm", "noise_dbm",
        "cell_radius_m", "rms_height_m", "max_outer_iterations",
        "convergence_threshold", "jobs",
    )
    for name in simple:
        value = getattr(args, name, None)
        if value is not None:
            setattr(config, name, value)
    if args.seeds is not None:
        config.seeds = _parse_seeds(args.seeds)
    if args.algo is not None:
        config.algorithm = args.algo
    if args.gamma_th_db is not None:
        text = args.gamma_th_db
        config.gamma_th_db = None if text.lower() in ("none", "-inf", "off") else float(text)
    return config


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        config = parse_config_file(args.config) if args.config else ScenarioConfig()
        apply_overrides(config, args)
        config.validate()
        rows = _RUNNERS[args.command](config, args.out, solutions_dir=args.solutions_dir)
    except (ConfigError, OSError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InfeasibleError as exc:
        print(f"infeasible scenario: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    print(f"wrote {len(rows)} rows to {args.out}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
