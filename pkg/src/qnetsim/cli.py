"""``qnet-sim`` command line entry point."""

from __future__ import annotations

import argparse
import sys

from .barrett_kok import NotEntangled
from .config import SCENARIOS, ALIASES, ConfigError, load_config
from .kernel import SimulationError
from .runner import FORMATS, emit_report, run_scenario
from .teleportation import ResourceExhausted

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qnet-sim", description="Quantum network entanglement and teleportation simulator")
    sub = ap.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run one scenario")
    run.add_argument("--config", required=True, help="scenario file, or a preset name: ideal, pfaff, table1")
    run.add_argument("--scenario", choices=sorted(SCENARIOS + tuple(ALIASES)))
    run.add_argument("--seed", type=int)
    run.add_argument("--trials", type=int)
    run.add_argument("--out-dir", default="out")
    run.add_argument("--format", choices=FORMATS, default="csv")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        changes = {}
        if args.scenario:
            changes["scenario"] = ALIASES.get(args.scenario, args.scenario)
        if args.seed is not None:
            if args.seed < 0 or args.seed >= 2**64:
                raise ConfigError("--seed", "must be an unsigned 64-bit integer")
            changes["seed"] = args.seed
        if args.trials is not None:
            if args.trials < 1:
                raise ConfigError("--trials", "must be >= 1")
            changes["trials"] = args.trials
        cfg = cfg.replace(**changes)
        if cfg.scenario == "fidelity_sweep" and not cfg.sweep:
            raise ConfigError("sweep.rows", "fidelity_sweep needs at least one row")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        report = run_scenario(cfg)
        manifest = emit_report(report, args.out_dir, args.format)
    except (NotEntangled, SimulationError, ResourceExhausted, OSError, ValueError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    print(f"{cfg.scenario} (seed {cfg.seed}) -> {args.out_dir}")
    for name, value in report.metrics.items():
        print(f"  {name}: {value}")
    for name in manifest:
        print(f"  wrote {name}")
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
