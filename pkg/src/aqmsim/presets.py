"""Named experiment presets for the comparison scenarios.

The baseline is 10 TCP (window 50) + 1 UDP at 8 Mbps over a 1 Mbps / 10 ms
bottleneck with a 150-packet buffer and RED thresholds 50/100. The 49-TCP
scenarios use 300 KB windows with byte-denominated buffers (300 KB for
BLUE, 150 KB for SFB) and a 40 Mbps unresponsive flow.
"""

from __future__ import annotations

from aqmsim.config import ScenarioConfig, SweepSpec
from aqmsim.aqm.params import DISCIPLINES

MBPS = 1_000_000


def _baseline(discipline: str, *, udp_rate_bps: int = 8 * MBPS) -> ScenarioConfig:
    cfg = ScenarioConfig()
    cfg.discipline = discipline
    cfg.traffic.udp_rate_bps = udp_rate_bps
    return cfg


def _49tcp(discipline: str, *, buffer_bytes: int, udp_flows: int) -> ScenarioConfig:
    cfg = ScenarioConfig()
    cfg.discipline = discipline
    cfg.buffer.capacity = buffer_bytes
    cfg.buffer.unit = "bytes"
    cfg.traffic.tcp_flows = 49
    cfg.traffic.tcp_window = 300  # 300 KB of 1000-byte packets
    cfg.traffic.udp_flows = udp_flows
    cfg.traffic.udp_rate_bps = 40 * MBPS
    # the 40 Mbps source must reach the router unthrottled
    cfg.topology.access_bw_bps = 50 * MBPS
    return cfg


def _udp_rate_sweep(discipline: str) -> SweepSpec:
    return SweepSpec(
        base=_baseline(discipline),
        parameter="traffic.udp_rate_bps",
        values=[MBPS // 10, MBPS // 2, MBPS, 2 * MBPS, 4 * MBPS, 8 * MBPS],
    )


def _table1_fred() -> SweepSpec:
    return SweepSpec(
        base=_baseline("fred", udp_rate_bps=2 * MBPS),
        parameter="topology.bottleneck_bw_bps",
        values=[MBPS // 2, MBPS, 2 * MBPS, 4 * MBPS, 8 * MBPS, 10 * MBPS, 20 * MBPS],
    )


def _fred_buffer_sweep() -> SweepSpec:
    base = _baseline("fred")
    # FRED derives its thresholds from the buffer so one parameter sweeps
    base.fred.auto_thresholds = True
    return SweepSpec(
        base=base,
        parameter="buffer.capacity",
        values=[15, 25, 35, 45, 60, 90, 120, 150],
    )


def _sfb_boxtime_sweep() -> SweepSpec:
    return SweepSpec(
        base=_49tcp("sfb", buffer_bytes=150_000, udp_flows=1),
        parameter="discipline.sfb.boxtime",
        values=[0.5, 0.05, 0.02],
    )


def _sfb_5udp() -> ScenarioConfig:
    cfg = _baseline("sfb", udp_rate_bps=4 * MBPS)
    cfg.traffic.udp_flows = 5
    # randomized boxtime evens out which boxed flow wins each admission
    cfg.sfb.boxtime_jitter = 0.5
    return cfg


def _choke_candidates() -> SweepSpec:
    base = _baseline("choke")
    base.choke.adaptive = False
    return SweepSpec(
        base=base,
        parameter="discipline.choke.cand_num",
        values=[1, 2, 3, 4, 6, 8, 10],
    )


def _choke_intervals() -> SweepSpec:
    return SweepSpec(
        base=_baseline("choke"),
        parameter="discipline.choke.interval_num",
        values=[1, 2, 5, 8],
    )


def _choke_mix(n_tcp: int, n_udp: int) -> ScenarioConfig:
    cfg = _baseline("choke")
    cfg.traffic.tcp_flows = n_tcp
    cfg.traffic.udp_flows = n_udp
    return cfg


def _build_table() -> dict:
    table = {"baseline": lambda: _baseline("red")}
    for d in DISCIPLINES:
        table[f"baseline-{d}"] = (lambda d=d: _baseline(d))
        table[f"fig4-sweep-{d}"] = (lambda d=d: _udp_rate_sweep(d))
        table[f"fig5-traces-{d}"] = (lambda d=d: _baseline(d))
    table["table1-fred"] = _table1_fred
    table["blue-49tcp"] = lambda: _49tcp("blue", buffer_bytes=300_000, udp_flows=0)
    table["sfb-49tcp-1udp"] = lambda: _49tcp("sfb", buffer_bytes=150_000, udp_flows=1)
    table["sfb-boxtime"] = _sfb_boxtime_sweep
    table["sfb-5udp-fairness"] = _sfb_5udp
    table["fred-buffer-sensitivity"] = _fred_buffer_sweep
    table["choke-candidates"] = _choke_candidates
    table["choke-intervals"] = _choke_intervals
    table["choke-flow-mix-1x1"] = lambda: _choke_mix(1, 1)
    table["choke-flow-mix-10x1"] = lambda: _choke_mix(10, 1)
    table["choke-flow-mix-10x5"] = lambda: _choke_mix(10, 5)
    return table


_PRESETS = _build_table()


def preset_names() -> list[str]:
    return sorted(_PRESETS)


def preset(name: str):
    """Fully populated ScenarioConfig or SweepSpec for a known preset name."""
    builder = _PRESETS.get(name)
    if builder is None:
        raise ValueError(
            f"unknown preset {name!r}; available: {', '.join(preset_names())}"
        )
    return builder()
