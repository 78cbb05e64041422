"""Command-line front end: run scenarios, sweeps, and named presets."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from aqmsim.config import ConfigError, ScenarioConfig, SweepSpec, emit_scenario, parse_scenario
from aqmsim.presets import preset, preset_names
from aqmsim.runner import run_scenario, run_sweep


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.add_argument("--duration", type=float, default=None, help="override duration (seconds)")
    p.add_argument("--out-dir", default=None, help="override the output directory")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="aqmsim",
        description="Dumbbell-topology AQM simulator (Drop Tail, RED, FRED, BLUE, SFB, CHOKe)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a single scenario config")
    run_p.add_argument("config", help="path to a scenario config file")
    _add_common(run_p)

    sweep_p = sub.add_parser("sweep", help="run a parameter sweep config")
    sweep_p.add_argument("config", help="path to a sweep config file")
    _add_common(sweep_p)

    preset_p = sub.add_parser("preset", help="run (or print) a named preset")
    preset_p.add_argument("name", nargs="?", help="preset name; omit to list")
    preset_p.add_argument(
        "--emit-config", action="store_true", help="print the preset's config instead of running"
    )
    _add_common(preset_p)
    return parser


def _print_report(report) -> None:
    jain = f"{report.jain:.4f}" if report.jain is not None else "undefined"
    print(
        f"utilization={report.utilization:.4f} jain={jain} "
        f"tcp_share={report.tcp_share:.4f} udp_share={report.udp_share:.4f}"
    )
    for f in report.flows:
        print(
            f"  flow {f.flow_id:3d} {f.kind}: {f.throughput_bps / 1e6:.4f} Mbps "
            f"({f.delivered_bytes} B delivered, {f.dropped_packets} dropped)"
        )


def _print_sweep(result) -> None:
    leaf = result.spec.parameter.rsplit(".", 1)[-1]
    for value, reports in result.by_value().items():
        n = len(reports)
        util = sum(r.utilization for r in reports) / n
        udp = sum(r.udp_throughput_bps for r in reports) / n
        tcp = sum(r.tcp_throughput_bps for r in reports) / n
        print(
            f"  {leaf}={value}: utilization={util:.4f} "
            f"tcp={tcp / 1e6:.4f} Mbps udp={udp / 1e6:.4f} Mbps"
        )


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            cfg = parse_scenario(Path(args.config).read_text())
            if isinstance(cfg, SweepSpec):
                print("config contains sweep.* keys; use `aqmsim sweep`", file=sys.stderr)
                return 2
            report = run_scenario(
                cfg, seed=args.seed, duration_s=args.duration,
                out_dir=args.out_dir, write=True,
            )
            _print_report(report)
            print(f"wrote {Path(report.config.out_dir).resolve()}")
            return 0

        if args.command == "sweep":
            spec = parse_scenario(Path(args.config).read_text())
            if isinstance(spec, ScenarioConfig):
                print("config has no sweep.* keys; use `aqmsim run`", file=sys.stderr)
                return 2
            if args.seed is not None:
                spec.base.seed = args.seed
            result = run_sweep(
                spec, out_dir=args.out_dir, duration_s=args.duration, write=True
            )
            _print_sweep(result)
            out = args.out_dir if args.out_dir is not None else spec.base.out_dir
            print(f"wrote {Path(out).resolve()}")
            return 0

        # preset
        if args.name is None:
            print("available presets:")
            for name in preset_names():
                print(f"  {name}")
            return 0
        try:
            obj = preset(args.name)
        except ValueError as exc:
            print(str(exc), file=sys.stderr)
            return 2
        if args.emit_config:
            sys.stdout.write(emit_scenario(obj))
            return 0
        if isinstance(obj, SweepSpec):
            if args.seed is not None:
                obj.base.seed = args.seed
            out = args.out_dir if args.out_dir is not None else f"out/{args.name}"
            result = run_sweep(obj, out_dir=out, duration_s=args.duration, write=True)
            _print_sweep(result)
            print(f"wrote {Path(out).resolve()}")
        else:
            out = args.out_dir if args.out_dir is not None else f"out/{args.name}"
            report = run_scenario(
                obj, seed=args.seed, duration_s=args.duration, out_dir=out, write=True
            )
            _print_report(report)
            print(f"wrote {Path(out).resolve()}")
        return 0
    except ConfigError as exc:
        for err in exc.errors:
            print(f"config error: {err}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(str(exc), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
