"""Per-flow throughput accounting, EWMA queue traces, and fairness indices."""

from __future__ import annotations

from dataclasses import dataclass

from aqmsim.engine import NS_PER_S

EWMA_WEIGHT = 0.002
EMIT_INTERVAL_NS = 10_000_000  # trace downsampled to 100 points per sim second


def jain_index(throughputs) -> float:
    """Jain's fairness index (sum x)^2 / (n * sum x^2), in (0, 1].

    Raises ValueError for an empty or all-zero vector (undefined index).
    """
    xs = list(throughputs)
    n = len(xs)
    if n < 1:
        raise ValueError("jain_index needs at least one throughput")
    if any(x < 0 for x in xs):
        raise ValueError("throughputs must be non-negative")
    sq = sum(x * x for x in xs)
    if sq == 0:
        raise ValueError("jain_index undefined for all-zero throughputs")
    s = sum(xs)
    return (s * s) / (n * sq)


def utilization(total_delivered_bits: float, bottleneck_bps: float, duration_s: float) -> float:
    """Fraction of the bottleneck capacity actually delivered."""
    if duration_s <= 0:
        raise ValueError("duration must be > 0")
    return total_delivered_bits / (bottleneck_bps * duration_s)


@dataclass
class FlowStats:
    flow_id: int
    kind: str  # "tcp" | "udp"
    delivered_bytes: int
    dropped_packets: int
    throughput_bps: float


class QueueTrace:
    """EWMA queue-length trace, sampled on every enqueue and dequeue.

    Every sample feeds the EWMA; the stored series is capped at one point
    per 10 ms of simulated time (the raw series is too jittery to plot).
    """

    def __init__(self, weight: float = EWMA_WEIGHT, emit_interval_ns: int = EMIT_INTERVAL_NS):
        self.weight = weight
        self.emit_interval_ns = emit_interval_ns
        self.ewma = 0.0
        self.samples: list[tuple[int, int, int, int, float]] = []
        self._next_emit = 0

    def record(self, now_ns: int, total: int, tcp: int, udp: int) -> None:
        w = self.weight
        self.ewma = (1.0 - w) * self.ewma + w * total
        if now_ns >= self._next_emit:
            self.samples.append((now_ns, total, tcp, udp, self.ewma))
            self._next_emit = now_ns + self.emit_interval_ns

    def steady_ewma_mean(self, warmup_ns: int) -> float:
        """Mean of the EWMA series over samples at or after the warmup point."""
        vals = [s[4] for s in self.samples if s[0] >= warmup_ns]
        if not vals:
            return 0.0
        return sum(vals) / len(vals)

    def final_ewma(self) -> float:
        return self.ewma


def flow_throughput_bps(delivered_bytes: int, window_ns: int) -> float:
    if window_ns <= 0:
        return 0.0
    return delivered_bytes * 8.0 * NS_PER_S / window_ns
