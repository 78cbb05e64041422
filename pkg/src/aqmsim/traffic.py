"""Traffic endpoints: a windowed loss-responsive TCP source (FTP model),
a constant-bit-rate UDP source, and the receiving sink.

The TCP model is Reno-style AIMD: slow start to ssthresh, additive increase
after, fast retransmit on the third duplicate ACK (halving, or collapse to
one packet in Tahoe mode), timeout with exponential backoff. ACKs ride an
uncongested reverse path and are never dropped.
"""

from __future__ import annotations

from aqmsim.engine import DATA, EventLoop, NS_PER_S, Packet

ACK_SIZE = 40  # bytes; reverse-path ACK packets

INITIAL_RTO_NS = NS_PER_S  # 1 s
MAX_RTO_NS = 60 * NS_PER_S


class TcpSource:
    """Reno/Tahoe sender with an unlimited backlog (FTP model)."""

    def __init__(
        self,
        loop: EventLoop,
        flow_id: int,
        send_fn,
        *,
        max_window: int = 50,
        packet_size: int = 1000,
        start_ns: int = 0,
        variant: str = "reno",
    ):
        if variant not in ("reno", "tahoe"):
            raise ValueError(f"unknown TCP variant {variant!r}")
        self.loop = loop
        self.flow_id = flow_id
        self.send_fn = send_fn
        self.max_window = max_window
        self.packet_size = packet_size
        self.start_ns = start_ns
        self.variant = variant

        self.cwnd = 1.0
        self.ssthresh = float(max_window)
        self.next_seq = 0
        self.highest_acked = 0
        self.dup_acks = 0
        self.base_rto_ns = INITIAL_RTO_NS
        self.backoff = 1
        self.srtt_ns = 0
        self.rttvar_ns = 0
        self.retransmits = 0
        self.timeouts = 0

        # one segment is timed at a time; any retransmission cancels the
        # measurement (Karn), so recovery periods never poison the RTT
        self._timed_seq = -1
        self._timed_sent = 0
        self._timer_gen = 0
        self._timer_armed = False
        # NewReno-style recovery: holes up to this seq are retransmitted on
        # partial ACKs (one window halving per loss episode, no RTO chains)
        self._recover = -1

    @property
    def in_flight(self) -> int:
        return self.next_seq - self.highest_acked

    @property
    def rto_ns(self) -> int:
        rto = self.base_rto_ns * self.backoff
        return rto if rto < MAX_RTO_NS else MAX_RTO_NS

    def start(self) -> None:
        self.loop.schedule(self.start_ns, self._fill_window)

    # -- sending ----------------------------------------------------------

    def _window(self) -> int:
        w = self.cwnd if self.cwnd < self.max_window else float(self.max_window)
        return int(w)

    def _fill_window(self) -> None:
        while self.in_flight < self._window():
            seq = self.next_seq
            self.next_seq += 1
            self._transmit(seq, retransmission=False)

    def _transmit(self, seq: int, retransmission: bool) -> None:
        now = self.loop.now_ns
        if retransmission:
            self.retransmits += 1
            self._timed_seq = -1
        elif self._timed_seq < 0:
            self._timed_seq = seq
            self._timed_sent = now
        self.send_fn(Packet(self.flow_id, self.packet_size, seq, DATA, now))
        if not self._timer_armed:
            self._arm_timer(now)

    def _arm_timer(self, now: int) -> None:
        self._timer_gen += 1
        self._timer_armed = True
        gen = self._timer_gen
        self.loop.schedule(now + self.rto_ns, lambda: self._on_timeout(gen))

    # -- feedback ---------------------------------------------------------

    def on_ack(self, ack_seq: int, now: int) -> None:
        if ack_seq > self.highest_acked:
            if self._timed_seq >= 0 and ack_seq > self._timed_seq:
                self._sample_rtt(now - self._timed_sent)
                self._timed_seq = -1
            self.highest_acked = ack_seq
            self.dup_acks = 0
            self.backoff = 1  # new data acked; exponential backoff ends
            if self.cwnd < self.ssthresh:
                self.cwnd += 1.0
            else:
                self.cwnd += 1.0 / self.cwnd
            if self.cwnd > self.max_window:
                self.cwnd = float(self.max_window)
            self._timer_armed = False
            self._timer_gen += 1
            if self._recover >= 0:
                if ack_seq < self._recover:
                    # partial ack: the next hole is known lost; resend now
                    self._transmit(ack_seq, retransmission=True)
                else:
                    self._recover = -1
            if self.in_flight > 0:
                self._arm_timer(now)
            self._fill_window()
        elif ack_seq == self.highest_acked and self.in_flight > 0:
            self.dup_acks += 1
            if self.dup_acks == 3 and self._recover < 0:
                self.ssthresh = max(self.cwnd / 2.0, 2.0)
                self.cwnd = 1.0 if self.variant == "tahoe" else self.ssthresh
                self._recover = self.next_seq
                self._transmit(self.highest_acked, retransmission=True)
        # acks below highest_acked are stale; ignore

    def _on_timeout(self, gen: int) -> None:
        if gen != self._timer_gen or not self._timer_armed:
            return
        if self.in_flight == 0:
            self._timer_armed = False
            return
        self.timeouts += 1
        self.ssthresh = max(self.cwnd / 2.0, 2.0)
        self.cwnd = 1.0
        self.dup_acks = 0
        if self.backoff < 64:
            self.backoff *= 2
        self._recover = self.next_seq
        self._timer_armed = False
        self._transmit(self.highest_acked, retransmission=True)

    def _sample_rtt(self, sample: int) -> None:
        if self.srtt_ns == 0:
            self.srtt_ns = sample
            self.rttvar_ns = sample // 2
        else:
            self.rttvar_ns = (3 * self.rttvar_ns + abs(sample - self.srtt_ns)) // 4
            self.srtt_ns = (7 * self.srtt_ns + sample) // 8
        rto = self.srtt_ns + 4 * self.rttvar_ns
        self.base_rto_ns = max(INITIAL_RTO_NS, min(rto, MAX_RTO_NS))


class CbrSource:
    """Constant-bit-rate source: one packet every size*8/rate seconds, exactly."""

    def __init__(
        self,
        loop: EventLoop,
        flow_id: int,
        send_fn,
        *,
        rate_bps: int,
        packet_size: int = 1000,
        start_ns: int = 0,
    ):
        if rate_bps <= 0:
            raise ValueError("rate_bps must be > 0")
        self.loop = loop
        self.flow_id = flow_id
        self.send_fn = send_fn
        self.rate_bps = rate_bps
        self.packet_size = packet_size
        self.gap_ns = (packet_size * 8 * NS_PER_S) // rate_bps
        self.next_send_ns = start_ns
        self.next_seq = 0

    def start(self) -> None:
        self.loop.schedule(self.next_send_ns, self._emit)

    def _emit(self) -> None:
        now = self.loop.now_ns
        self.send_fn(Packet(self.flow_id, self.packet_size, self.next_seq, DATA, now))
        self.next_seq += 1
        self.next_send_ns += self.gap_ns
        self.loop.schedule(self.next_send_ns, self._emit)


class Sink:
    """Receiving side for all flows: byte counters plus cumulative-ACK state."""

    def __init__(self, n_flows: int, warmup_ns: int):
        self.warmup_ns = warmup_ns
        self.delivered_bytes = [0] * n_flows
        self.delivered_pkts = [0] * n_flows
        self.window_bytes = [0] * n_flows
        self.next_expected = [0] * n_flows
        self._out_of_order: list[set[int]] = [set() for _ in range(n_flows)]

    def on_data(self, pkt: Packet, delivered_ns: int) -> int:
        """Record a delivery; returns the cumulative ACK (next expected seq)."""
        fid = pkt.flow_id
        self.delivered_bytes[fid] += pkt.size_bytes
        self.delivered_pkts[fid] += 1
        if delivered_ns >= self.warmup_ns:
            self.window_bytes[fid] += pkt.size_bytes
        exp = self.next_expected[fid]
        if pkt.seq == exp:
            exp += 1
            ooo = self._out_of_order[fid]
            while exp in ooo:
                ooo.discard(exp)
                exp += 1
            self.next_expected[fid] = exp
        elif pkt.seq > exp:
            self._out_of_order[fid].add(pkt.seq)
        return self.next_expected[fid]
