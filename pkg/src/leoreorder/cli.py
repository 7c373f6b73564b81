"""Command-line entry point: ``leoreorder --scenario baseline --cc reno --out runs/reno``.

Exit codes: 0 success, 1 scenario infeasible (no visible satellite or no
route), 2 configuration or I/O error.
"""
from __future__ import annotations

import argparse
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

from .scenario import CC_NAMES, PRESETS, ConfigError, UnknownPreset, load_config, preset
from .topology import NoVisibleSatellite, Unreachable

EXIT_OK = 0
EXIT_INFEASIBLE = 1
EXIT_CONFIG = 2

# default spacing of constellation start offsets in sweep mode; not a divisor of
# the orbital period, so runs see different geometry
SWEEP_STEP_S = 97.0


def build_parser():
    p = argparse.ArgumentParser(prog="leoreorder",
                                description="Simulate one TCP flow across a LEO constellation with route changes.")
    p.add_argument("--scenario", choices=sorted(PRESETS), help="preset to start from (default baseline)")
    p.add_argument("--config", help="INI config file; flags given on the command line override it")
    p.add_argument("--cc", choices=CC_NAMES, help="congestion control")
    p.add_argument("--duration", type=float, help="simulated seconds")
    p.add_argument("--out", default="out", help="output directory (default: out)")
    p.add_argument("--seed", type=int, help="seed (the simulation is deterministic; kept for reproducibility records)")
    p.add_argument("--bin-ms", type=float, help="goodput/RTT sampling bin in ms")
    p.add_argument("--queue-pkts", type=int, help="drop-tail capacity per directed ISL in packets")
    p.add_argument("--planes", type=int, help="number of orbital planes")
    p.add_argument("--sats-per-plane", type=int, help="satellites per plane")
    p.add_argument("--start-offset", type=float, help="constellation time at simulation start (s)")
    p.add_argument("--packet-trace", action="store_true", default=None, help="also write packets.csv")
    p.add_argument("--sweep", type=int, metavar="N",
                   help="run N copies with start offsets spaced --sweep-step apart, in parallel")
    p.add_argument("--sweep-step", type=float, default=SWEEP_STEP_S, help="start offset spacing for --sweep (s)")
    p.add_argument("--workers", type=int, default=None, help="worker processes for --sweep")
    return p


def config_from_args(args):
    """Resolve preset, config file and flag overrides into one ScenarioConfig."""
    if args.config:
        cfg = load_config(args.config)
        if args.scenario:
            base = preset(args.scenario)
            cfg = replace(cfg, name=base.name, constellation=base.constellation,
                          gs_src=base.gs_src, gs_dst=base.gs_dst)
    else:
        cfg = preset(args.scenario or "baseline")
    over = {}
    if args.cc is not None:
        over["cc_name"] = args.cc
    if args.duration is not None:
        over["duration_s"] = args.duration
    if args.seed is not None:
        over["seed"] = args.seed
    if args.bin_ms is not None:
        over["bin_s"] = args.bin_ms / 1e3
    if args.queue_pkts is not None:
        over["queue_capacity_pkts"] = args.queue_pkts
    if args.start_offset is not None:
        over["start_offset_s"] = args.start_offset
    if args.packet_trace:
        over["packet_trace"] = True
    const = {}
    if args.planes is not None:
        const["num_planes"] = args.planes
    if args.sats_per_plane is not None:
        const["sats_per_plane"] = args.sats_per_plane
    if const:
        try:
            over["constellation"] = replace(cfg.constellation, **const)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    return replace(cfg, **over)


def _run_one(cfg, out_dir):
    from .runner import run
    return run(cfg, out_dir).one_line()


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
    except (ConfigError, UnknownPreset, ValueError) as exc:
        print(f"leoreorder: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"leoreorder: cannot read config: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    out = Path(args.out)
    if args.sweep:
        if args.sweep < 1:
            print("leoreorder: --sweep needs a positive count", file=sys.stderr)
            return EXIT_CONFIG
        jobs = [(replace(cfg, start_offset_s=cfg.start_offset_s + i * args.sweep_step), out / f"run{i:03d}")
                for i in range(args.sweep)]
    else:
        jobs = [(cfg, out)]

    try:
        if len(jobs) == 1:
            lines = [_run_one(*jobs[0])]
        else:
            with ProcessPoolExecutor(max_workers=args.workers) as pool:
                futures = [pool.submit(_run_one, c, d) for c, d in jobs]
                lines = [f.result() for f in futures]
    except (NoVisibleSatellite, Unreachable) as exc:
        print(f"leoreorder: scenario infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except OSError as exc:
        print(f"leoreorder: I/O error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    for line in lines:
        print(line)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
