"""Scenario execution: build the dumbbell from a config, run, report, emit CSVs.

CSV schemas are fixed:
  flows.csv   flow_id, kind, delivered_bytes, dropped_packets, throughput_bps
  queue.csv   time_s, total_qlen, tcp_qlen, udp_qlen, ewma_qlen
  summary.csv utilization, jain_index, tcp_share, udp_share
Identical (config, seed) pairs produce byte-identical files.
"""

from __future__ import annotations

import copy
import dataclasses
import time
from pathlib import Path

from aqmsim.aqm import make_queue
from aqmsim.config import ConfigError, ScenarioConfig, SweepSpec, set_param
from aqmsim.engine import s_to_ns
from aqmsim.metrics import FlowStats, QueueTrace, flow_throughput_bps, jain_index, utilization
from aqmsim.network import Dumbbell
from aqmsim.rng import derive_seed


@dataclasses.dataclass
class RunReport:
    config: ScenarioConfig
    flows: list[FlowStats]
    queue_samples: list[tuple[int, int, int, int, float]]
    utilization: float
    jain: float | None
    tcp_share: float
    udp_share: float
    steady_ewma: float
    events: int
    wall_s: float

    @property
    def udp_throughput_bps(self) -> float:
        return sum(f.throughput_bps for f in self.flows if f.kind == "udp")

    @property
    def tcp_throughput_bps(self) -> float:
        return sum(f.throughput_bps for f in self.flows if f.kind == "tcp")


def build_network(cfg: ScenarioConfig) -> tuple[Dumbbell, QueueTrace]:
    queue = make_queue(
        cfg.discipline,
        cfg.discipline_params(),
        capacity=cfg.buffer.capacity,
        capacity_is_bytes=(cfg.buffer.unit == "bytes"),
        packet_size=cfg.traffic.packet_size,
        seed=derive_seed(cfg.seed, 1),
    )
    trace = QueueTrace()
    net = Dumbbell(
        queue,
        n_tcp=cfg.traffic.tcp_flows,
        n_udp=cfg.traffic.udp_flows,
        tcp_window=cfg.traffic.tcp_window,
        tcp_variant=cfg.traffic.tcp_variant,
        udp_rate_bps=cfg.traffic.udp_rate_bps,
        packet_size=cfg.traffic.packet_size,
        access_bw_bps=cfg.topology.access_bw_bps,
        access_delay_s=cfg.topology.access_delay_s,
        bottleneck_bw_bps=cfg.topology.bottleneck_bw_bps,
        bottleneck_delay_s=cfg.topology.bottleneck_delay_s,
        warmup_ns=s_to_ns(cfg.warmup_s),
        stagger_ns=s_to_ns(cfg.traffic.stagger_s),
        trace=trace,
    )
    return net, trace


def run_scenario(
    cfg: ScenarioConfig,
    *,
    seed: int | None = None,
    duration_s: float | None = None,
    out_dir: str | None = None,
    write: bool = False,
) -> RunReport:
    """Run one scenario deterministically; optionally write the CSV set."""
    cfg = copy.deepcopy(cfg)
    if seed is not None:
        cfg.seed = seed
    if duration_s is not None:
        if cfg.warmup_s > duration_s:
            cfg.warmup_s = 0.1 * duration_s
        cfg.duration_s = duration_s
    if out_dir is not None:
        cfg.out_dir = out_dir
    errors = cfg.validate()
    if errors:
        raise ConfigError(errors)

    net, trace = build_network(cfg)
    t0 = time.perf_counter()
    net.run(s_to_ns(cfg.duration_s))
    wall = time.perf_counter() - t0

    report = _make_report(cfg, net, trace, wall)
    if write:
        write_report(report, Path(cfg.out_dir))
    return report


def _make_report(cfg: ScenarioConfig, net: Dumbbell, trace: QueueTrace, wall: float) -> RunReport:
    window_s = cfg.duration_s - cfg.warmup_s
    window_ns = s_to_ns(window_s)
    n_tcp = cfg.traffic.tcp_flows
    flows = []
    for fid in range(n_tcp + cfg.traffic.udp_flows):
        flows.append(
            FlowStats(
                flow_id=fid,
                kind="udp" if net.is_udp[fid] else "tcp",
                delivered_bytes=net.sink.delivered_bytes[fid],
                dropped_packets=net.router.dropped[fid],
                throughput_bps=flow_throughput_bps(net.sink.window_bytes[fid], window_ns),
            )
        )
    tcp_bytes = sum(net.sink.window_bytes[:n_tcp])
    udp_bytes = sum(net.sink.window_bytes[n_tcp:])
    total = tcp_bytes + udp_bytes
    if window_s > 0 and total > 0:
        util = utilization(total * 8, cfg.topology.bottleneck_bw_bps, window_s)
        try:
            jain = jain_index([f.throughput_bps for f in flows])
        except ValueError:
            jain = None
        tcp_share = tcp_bytes / total
        udp_share = udp_bytes / total
    else:
        util, jain, tcp_share, udp_share = 0.0, None, 0.0, 0.0
    return RunReport(
        config=cfg,
        flows=flows,
        queue_samples=trace.samples,
        utilization=util,
        jain=jain,
        tcp_share=tcp_share,
        udp_share=udp_share,
        steady_ewma=trace.steady_ewma_mean(s_to_ns(cfg.warmup_s)),
        events=net.loop.events_processed,
        wall_s=wall,
    )


# -- CSV emission --------------------------------------------------------------

def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    if v is None:
        return ""
    return str(v)


def _write_csv(path: Path, header: str, rows) -> None:
    lines = [header]
    lines.extend(",".join(_fmt(c) for c in row) for row in rows)
    path.write_text("\n".join(lines) + "\n")


def write_report(report: RunReport, out_dir: Path) -> None:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_csv(
        out_dir / "flows.csv",
        "flow_id,kind,delivered_bytes,dropped_packets,throughput_bps",
        (
            (f.flow_id, f.kind, f.delivered_bytes, f.dropped_packets, f.throughput_bps)
            for f in report.flows
        ),
    )
    _write_csv(
        out_dir / "queue.csv",
        "time_s,total_qlen,tcp_qlen,udp_qlen,ewma_qlen",
        ((t / 1e9, total, tcp, udp, ewma) for t, total, tcp, udp, ewma in report.queue_samples),
    )
    _write_csv(
        out_dir / "summary.csv",
        "utilization,jain_index,tcp_share,udp_share",
        [(report.utilization, report.jain, report.tcp_share, report.udp_share)],
    )


# -- sweeps ----------------------------------------------------------------------

@dataclasses.dataclass
class SweepRow:
    value: object
    seed: int
    report: RunReport


@dataclasses.dataclass
class SweepResult:
    spec: SweepSpec
    rows: list[SweepRow]

    def by_value(self) -> dict:
        grouped: dict = {}
        for row in self.rows:
            grouped.setdefault(row.value, []).append(row.report)
        return grouped


def run_sweep(
    spec: SweepSpec,
    *,
    out_dir: str | None = None,
    seed: int | None = None,
    duration_s: float | None = None,
    write: bool = False,
) -> SweepResult:
    """Run every (value, repetition) point; rows ordered by sweep value."""
    if seed is not None:
        spec = dataclasses.replace(spec, base=dataclasses.replace(spec.base, seed=seed))
    errors = spec.validate()
    if errors:
        raise ConfigError(errors)
    base_out = Path(out_dir if out_dir is not None else spec.base.out_dir)
    leaf = spec.parameter.rsplit(".", 1)[-1]

    rows = []
    for value, rep, cfg in spec.points():
        run_dir = base_out / f"{leaf}={_fmt(value)}" / f"rep{rep}"
        report = run_scenario(
            cfg,
            duration_s=duration_s,
            out_dir=str(run_dir),
            write=write,
        )
        rows.append(SweepRow(value=value, seed=cfg.seed, report=report))
    result = SweepResult(spec=spec, rows=rows)
    if write:
        _write_sweep_tables(result, base_out, leaf)
    return result


def _write_sweep_tables(result: SweepResult, out_dir: Path, leaf: str) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_csv(
        out_dir / "sweep.csv",
        f"{leaf},seed,utilization,jain_index,tcp_share,udp_share,"
        "tcp_throughput_bps,udp_throughput_bps",
        (
            (
                row.value,
                row.seed,
                row.report.utilization,
                row.report.jain,
                row.report.tcp_share,
                row.report.udp_share,
                row.report.tcp_throughput_bps,
                row.report.udp_throughput_bps,
            )
            for row in result.rows
        ),
    )
    summary_rows = []
    for value, reports in result.by_value().items():
        n = len(reports)
        summary_rows.append(
            (
                value,
                sum(r.utilization for r in reports) / n,
                sum((r.jain or 0.0) for r in reports) / n,
                sum(r.tcp_share for r in reports) / n,
                sum(r.udp_share for r in reports) / n,
                sum(r.udp_throughput_bps for r in reports) / n,
            )
        )
    _write_csv(
        out_dir / "sweep_summary.csv",
        f"{leaf},utilization,jain_index,tcp_share,udp_share,udp_throughput_bps",
        summary_rows,
    )
    # two-column plot series per curve of interest
    _write_csv(
        out_dir / "series_udp_throughput_bps.csv",
        f"{leaf},udp_throughput_bps",
        ((r[0], r[5]) for r in summary_rows),
    )
    _write_csv(
        out_dir / "series_jain_index.csv",
        f"{leaf},jain_index",
        ((r[0], r[2]) for r in summary_rows),
    )
