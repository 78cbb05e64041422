"""Dumbbell assembly: N sources and sinks joined by one bottleneck router.

Forward data path per flow: source -> access link -> router (discipline) ->
bottleneck link -> sink access link -> sink. ACKs return on an uncongested
reverse path modeled as a fixed delay (three propagation legs plus ACK
serialization), so only the forward-path AQM shapes the results.
"""

from __future__ import annotations

from functools import partial

from aqmsim.engine import ConservationLedger, EventLoop, Link, Packet, Router
from aqmsim.traffic import ACK_SIZE, CbrSource, Sink, TcpSource


class Dumbbell:
    def __init__(
        self,
        queue,
        *,
        n_tcp: int,
        n_udp: int,
        tcp_window: int = 50,
        tcp_variant: str = "reno",
        udp_rate_bps: int = 8_000_000,
        packet_size: int = 1000,
        access_bw_bps: int = 10_000_000,
        access_delay_s: float = 0.001,
        bottleneck_bw_bps: int = 1_000_000,
        bottleneck_delay_s: float = 0.010,
        warmup_ns: int = 0,
        stagger_ns: int = 100_000_000,
        trace=None,
    ):
        n_flows = n_tcp + n_udp
        if n_flows < 1:
            raise ValueError("need at least one flow")
        self.loop = EventLoop()
        self.n_tcp = n_tcp
        self.n_udp = n_udp
        self.is_udp = [False] * n_tcp + [True] * n_udp
        self.ledger = ConservationLedger(n_flows)

        self.access = [Link(access_bw_bps, access_delay_s) for _ in range(n_flows)]
        self.sink_links = [Link(access_bw_bps, access_delay_s) for _ in range(n_flows)]
        self.bottleneck = Link(bottleneck_bw_bps, bottleneck_delay_s)
        self.router = Router(
            self.loop, queue, self.bottleneck, n_flows, self.is_udp,
            self._deliver, trace,
        )
        self.sink = Sink(n_flows, warmup_ns)

        # fixed reverse-path delay for ACKs (never queued, never dropped):
        # access + bottleneck + access legs, serialization plus propagation
        acc = self.access[0]
        self.ack_delay_ns = (
            2 * (acc.serialization_ns(ACK_SIZE) + acc.prop_delay_ns)
            + self.bottleneck.serialization_ns(ACK_SIZE)
            + self.bottleneck.prop_delay_ns
        )

        self.sources = []
        for fid in range(n_tcp):
            self.sources.append(
                TcpSource(
                    self.loop, fid, self._send,
                    max_window=tcp_window, packet_size=packet_size,
                    start_ns=fid * stagger_ns, variant=tcp_variant,
                )
            )
        for j in range(n_udp):
            self.sources.append(
                CbrSource(
                    self.loop, n_tcp + j, self._send,
                    rate_bps=udp_rate_bps, packet_size=packet_size,
                    start_ns=j * stagger_ns,
                )
            )

    # -- forward path ------------------------------------------------------

    def _send(self, pkt: Packet) -> None:
        fid = pkt.flow_id
        self.ledger.injected[fid] += 1
        self.ledger.in_transit[fid] += 1
        _, deliver_at = self.access[fid].transmit(pkt.size_bytes, self.loop.now_ns)
        self.loop.schedule(deliver_at, partial(self._arrive, pkt))

    def _arrive(self, pkt: Packet) -> None:
        self.ledger.in_transit[pkt.flow_id] -= 1
        self.router.receive(pkt)

    def _deliver(self, pkt: Packet, bottleneck_exit_ns: int) -> None:
        fid = pkt.flow_id
        self.ledger.in_transit[fid] += 1
        _, delivered_at = self.sink_links[fid].transmit(pkt.size_bytes, bottleneck_exit_ns)
        if self.is_udp[fid]:
            self.loop.schedule(delivered_at, partial(self._udp_done, pkt, delivered_at))
        else:
            # sink receipt and the returning ACK are handled in one event at
            # ACK arrival time; the true delivery timestamp rides along
            self.loop.schedule(
                delivered_at + self.ack_delay_ns,
                partial(self._tcp_done, pkt, delivered_at),
            )

    def _udp_done(self, pkt: Packet, delivered_ns: int) -> None:
        self.ledger.in_transit[pkt.flow_id] -= 1
        self.ledger.delivered[pkt.flow_id] += 1
        self.sink.on_data(pkt, delivered_ns)

    def _tcp_done(self, pkt: Packet, delivered_ns: int) -> None:
        self.ledger.in_transit[pkt.flow_id] -= 1
        self.ledger.delivered[pkt.flow_id] += 1
        ack = self.sink.on_data(pkt, delivered_ns)
        self.sources[pkt.flow_id].on_ack(ack, self.loop.now_ns)

    # -- lifecycle -----------------------------------------------------------

    def run(self, duration_ns: int) -> None:
        for src in self.sources:
            src.start()
        self.loop.run_until(duration_ns)
        self.ledger.check(self.router)
