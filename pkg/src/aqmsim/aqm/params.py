"""Parameter blocks for the six queue disciplines.

Defaults follow the standard comparison setup: 150-packet buffer with RED
thresholds at 50/100 packets, BLUE at d1=0.02/d2=0.002/freeze=10ms, SFB with
2x23 bins, and adaptive CHOKe with 5 regions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

DISCIPLINES = ("droptail", "red", "fred", "blue", "sfb", "choke")


@dataclass
class RedParams:
    min_th: float = 50.0  # packets
    max_th: float = 100.0
    max_p: float = 0.02
    w_q: float = 0.002
    # original count-spreading p_a = p_b / (1 - count*p_b); off for A/B runs
    count_spread: bool = True

    def validate(self, capacity_pkts: int, prefix: str, errors: list[str]) -> None:
        if not 0 < self.min_th < self.max_th:
            errors.append(f"{prefix}: min_th < max_th required")
        if self.max_th > capacity_pkts:
            errors.append(f"{prefix}: max_th must be <= buffer capacity ({capacity_pkts} packets)")
        if not 0 < self.max_p <= 1:
            errors.append(f"{prefix}.max_p must be in (0, 1]")
        if not 0 < self.w_q < 1:
            errors.append(f"{prefix}.w_q must be in (0, 1)")


@dataclass
class FredParams:
    red: RedParams = field(default_factory=RedParams)
    min_q: int = 2  # per-flow packets always allowed
    two_packet_mode: bool = False  # experimental: cap flows at 2 near-full
    # derive min_th/max_th as 20%/80% of capacity instead of red block values
    auto_thresholds: bool = False

    def validate(self, capacity_pkts: int, prefix: str, errors: list[str]) -> None:
        if not self.auto_thresholds:
            self.red.validate(capacity_pkts, prefix, errors)
        if self.min_q < 1:
            errors.append(f"{prefix}.min_q must be >= 1")


@dataclass
class BlueParams:
    d1: float = 0.02
    d2: float = 0.002
    freeze_time: float = 0.01  # seconds between pm updates

    def validate(self, capacity_pkts: int, prefix: str, errors: list[str]) -> None:
        if self.d1 <= 0 or self.d2 <= 0:
            errors.append(f"{prefix}: d1 and d2 must be > 0")
        if self.freeze_time < 0:
            errors.append(f"{prefix}.freeze_time must be >= 0")


@dataclass
class SfbParams:
    levels: int = 2  # L
    bins: int = 23  # N per level
    d1: float = 0.005
    d2: float = 0.001
    freeze_time: float = 0.001
    bin_size: float = 0.0  # packets; 0 derives (1.5/N) * buffer
    boxtime: float = 0.05  # penalty-box admission interval, seconds
    boxtime_jitter: float = 0.0  # fraction; >0 randomizes boxtime per decision
    h_interval: float = 5.0  # hash rotation period, seconds

    def validate(self, capacity_pkts: int, prefix: str, errors: list[str]) -> None:
        if self.levels < 1 or self.bins < 1:
            errors.append(f"{prefix}: levels and bins must be >= 1")
        if self.bin_size < 0:
            errors.append(f"{prefix}.bin_size must be >= 0 (0 = derived)")
        elif self.bin_size == 0 and capacity_pkts > 0 and 1.5 * capacity_pkts / self.bins <= 0:
            errors.append(f"{prefix}: derived bin_size must be > 0")
        if self.d1 <= 0 or self.d2 <= 0:
            errors.append(f"{prefix}: d1 and d2 must be > 0")
        if self.boxtime < 0:
            errors.append(f"{prefix}.boxtime must be >= 0")
        if not 0 <= self.boxtime_jitter < 1:
            errors.append(f"{prefix}.boxtime_jitter must be in [0, 1)")
        if self.h_interval <= 0:
            errors.append(f"{prefix}.h_interval must be > 0")

    def effective_bin_size(self, capacity_pkts: int) -> float:
        if self.bin_size > 0:
            return self.bin_size
        return 1.5 * capacity_pkts / self.bins


@dataclass
class ChokeParams:
    red: RedParams = field(default_factory=RedParams)
    adaptive: bool = True  # A-CHOKe: m = 2i over interval_num regions
    cand_num: int = 1  # M-CHOKe candidates when not adaptive
    interval_num: int = 5  # k regions between min_th and max_th

    def validate(self, capacity_pkts: int, prefix: str, errors: list[str]) -> None:
        self.red.validate(capacity_pkts, prefix, errors)
        if self.cand_num < 1:
            errors.append(f"{prefix}.cand_num must be >= 1")
        if self.interval_num < 1:
            errors.append(f"{prefix}.interval_num must be >= 1")


def default_params(name: str):
    """Fresh default parameter block for a discipline name (None for droptail)."""
    return {
        "droptail": lambda: None,
        "red": RedParams,
        "fred": FredParams,
        "blue": BlueParams,
        "sfb": SfbParams,
        "choke": ChokeParams,
    }[name]()
