"""Pure-Python queue disciplines (reference backend).

Every discipline is a state machine over one shared FIFO: `offer` decides
admission on arrival, `take` pops the head for service. Drop decisions,
probability updates, and RNG draw order are the contract the compiled
backend mirrors exactly; change one, change both.

Packet records are tuples (flow_id, size_bytes, seq, kind, created_ns).
"""

from __future__ import annotations

from aqmsim.rng import SplitMix64, hash_to_bin

NEG_INF = -(1 << 62)


def ewma_update(avg: float, q: float, w: float) -> float:
    """One EWMA step: (1-w)*avg + w*q."""
    return (1.0 - w) * avg + w * q


def red_drop_probability(
    avg: float,
    min_th: float,
    max_th: float,
    max_p: float,
    count: int,
    count_spread: bool,
) -> float:
    """Classic RED drop probability.

    Zero below min_th, one at or above max_th, linear in between; with
    count-spreading the linear term p_b becomes p_b / (1 - count*p_b),
    clamped to [0, 1].
    """
    if avg < min_th:
        return 0.0
    if avg >= max_th:
        return 1.0
    p_b = max_p * (avg - min_th) / (max_th - min_th)
    if count_spread:
        denom = 1.0 - count * p_b
        if denom <= 0.0:
            return 1.0
        p_b = p_b / denom
    return p_b if p_b < 1.0 else 1.0


class FifoQueue:
    """Shared FIFO buffer with packet- or byte-denominated capacity."""

    idle_poll_ns = 0

    def __init__(self, capacity_pkts: int, capacity_bytes: int = 0):
        if capacity_pkts <= 0:
            raise ValueError("capacity must be > 0")
        self.capacity_pkts = capacity_pkts
        self.capacity_bytes = capacity_bytes  # 0 = packet-counted buffer
        self.qbytes = 0
        self._q: list = []
        self._head = 0

    @property
    def qlen(self) -> int:
        return len(self._q) - self._head

    def _has_room(self, size: int) -> bool:
        if self.capacity_bytes:
            return self.qbytes + size <= self.capacity_bytes
        return self.qlen < self.capacity_pkts

    def _push(self, item, size: int) -> None:
        self._q.append(item)
        self.qbytes += size

    def _pop(self):
        if self._head == len(self._q):
            return None
        item = self._q[self._head]
        self._head += 1
        if self._head > 256 and self._head * 2 > len(self._q):
            del self._q[: self._head]
            self._head = 0
        return item

    def _item_rec(self, item):
        return item

    def snapshot(self) -> list:
        """Queued packet records, head first."""
        return [self._item_rec(it) for it in self._q[self._head:]]

    def take(self, now_ns: int):
        item = self._pop()
        if item is None:
            return None
        rec = self._item_rec(item)
        self.qbytes -= rec[1]
        return rec

    def notify_idle(self, now_ns: int) -> None:
        pass

    def wants_idle_poll(self) -> bool:
        return False


class DropTailQueue(FifoQueue):
    """Accept until the buffer is full; drop everything after."""

    def offer(self, flow_id, size, seq, kind, created_ns, now_ns):
        if self._has_room(size):
            self._push((flow_id, size, seq, kind, created_ns), size)
            return True, None
        return False, None


class RedQueue(FifoQueue):
    """RED: EWMA of the queue length gates probabilistic early drops."""

    def __init__(
        self,
        capacity_pkts,
        capacity_bytes,
        min_th,
        max_th,
        max_p,
        w_q,
        count_spread,
        seed,
    ):
        super().__init__(capacity_pkts, capacity_bytes)
        self.min_th = float(min_th)
        self.max_th = float(max_th)
        self.max_p = float(max_p)
        self.w_q = float(w_q)
        self.count_spread = bool(count_spread)
        self.avg = 0.0
        self.count = 0
        self.rng = SplitMix64(seed)
        self._avg_frozen = False

    def debug_set_avg(self, avg: float, freeze: bool = True) -> None:
        """Test hook: pin the average so drop rates can be measured."""
        self.avg = float(avg)
        self._avg_frozen = freeze

    def _update_avg(self) -> None:
        if not self._avg_frozen:
            self.avg = ewma_update(self.avg, self.qlen, self.w_q)

    def offer(self, flow_id, size, seq, kind, created_ns, now_ns):
        self._update_avg()
        if self.avg < self.min_th:
            # below the early-drop region; count restarts so the spread
            # probability doesn't carry over a quiet period
            self.count = 0
            if self._has_room(size):
                self._push((flow_id, size, seq, kind, created_ns), size)
                return True, None
            return False, None
        if self.avg >= self.max_th:
            self.count = 0
            return False, None
        p = red_drop_probability(
            self.avg, self.min_th, self.max_th, self.max_p, self.count, self.count_spread
        )
        if self.rng.random() < p:
            self.count = 0
            return False, None
        if not self._has_room(size):
            self.count = 0
            return False, None
        self.count += 1
        self._push((flow_id, size, seq, kind, created_ns), size)
        return True, None


class FredQueue(FifoQueue):
    """FRED: RED plus per-active-flow accounting.

    A flow's buffered-packet count is capped at max_q (min_th normally, 2
    once the average crosses max_th); flows caught over their cap collect
    strikes, and struck flows are pinned down to the per-flow average
    avgcq. The average queue length is refreshed on departures as well as
    arrivals, and avgcq = avg / n_active is maintained at departure.
    """

    def __init__(
        self,
        capacity_pkts,
        capacity_bytes,
        min_th,
        max_th,
        max_p,
        w_q,
        count_spread,
        min_q,
        two_packet_mode,
        seed,
    ):
        super().__init__(capacity_pkts, capacity_bytes)
        self.min_th = float(min_th)
        self.max_th = float(max_th)
        self.max_p = float(max_p)
        self.w_q = float(w_q)
        self.count_spread = bool(count_spread)
        self.min_q = int(min_q)
        self.two_packet_mode = bool(two_packet_mode)
        self.avg = 0.0
        self.count = 0
        self.avgcq = 0.0
        self.n_active = 0
        self.accounts: dict[int, list] = {}  # flow_id -> [qlen, strike]
        self.rng = SplitMix64(seed)
        self._avg_frozen = False

    def debug_set_avg(self, avg: float, freeze: bool = True) -> None:
        self.avg = float(avg)
        self._avg_frozen = freeze

    def flow_qlens(self) -> dict[int, int]:
        return {fid: acct[0] for fid, acct in self.accounts.items()}

    def _near_full(self) -> bool:
        if self.capacity_bytes:
            return self.qbytes * 10 >= self.capacity_bytes * 9
        return self.qlen * 10 >= self.capacity_pkts * 9

    def offer(self, flow_id, size, seq, kind, created_ns, now_ns):
        if not self._avg_frozen:
            self.avg = ewma_update(self.avg, self.qlen, self.w_q)
        acct = self.accounts.get(flow_id)
        qlen_i = acct[0] if acct is not None else 0
        strike_i = acct[1] if acct is not None else 0

        max_q = self.min_th
        if self.two_packet_mode and self._near_full():
            max_q = 2.0
        if self.avg >= self.max_th:
            max_q = 2.0

        # unresponsive-flow guard: over the per-flow cap, or a struck flow
        # holding more than the per-flow average while the queue is loaded
        if qlen_i >= max_q or (
            self.avg >= 2.0 * self.avgcq and qlen_i > self.avgcq and strike_i > 1
        ):
            acct[1] += 1
            self.count = 0
            return False, None

        if self.min_th <= self.avg < self.max_th:
            threshold = self.min_q if self.min_q > self.avgcq else self.avgcq
            if qlen_i >= threshold:
                p = red_drop_probability(
                    self.avg,
                    self.min_th,
                    self.max_th,
                    self.max_p,
                    self.count,
                    self.count_spread,
                )
                if self.rng.random() < p:
                    self.count = 0
                    return False, None
        elif self.avg < self.min_th:
            pass
        else:
            self.count = 0
            return False, None

        if not self._has_room(size):
            self.count = 0
            return False, None
        if acct is None:
            acct = [0, 0]
            self.accounts[flow_id] = acct
            self.n_active += 1
        acct[0] += 1
        self.count += 1
        self._push((flow_id, size, seq, kind, created_ns), size)
        return True, None

    def take(self, now_ns: int):
        rec = super().take(now_ns)
        if rec is None:
            return None
        acct = self.accounts[rec[0]]
        acct[0] -= 1
        if acct[0] == 0:
            del self.accounts[rec[0]]
            self.n_active -= 1
        if not self._avg_frozen:
            self.avg = ewma_update(self.avg, self.qlen, self.w_q)
        self.avgcq = self.avg / self.n_active if self.n_active else self.avg
        return rec


class BlueQueue(FifoQueue):
    """BLUE: a single drop probability driven by loss and idle events."""

    def __init__(self, capacity_pkts, capacity_bytes, d1, d2, freeze_ns, seed):
        super().__init__(capacity_pkts, capacity_bytes)
        self.d1 = float(d1)
        self.d2 = float(d2)
        self.freeze_ns = int(freeze_ns)
        self.pm = 0.0
        self.last_update = NEG_INF
        self.rng = SplitMix64(seed)
        self.idle_poll_ns = int(freeze_ns)

    def debug_set_pm(self, pm: float) -> None:
        self.pm = float(pm)

    def _on_loss(self, now_ns: int) -> None:
        if now_ns - self.last_update > self.freeze_ns:
            self.pm = min(1.0, self.pm + self.d1)
            self.last_update = now_ns

    def notify_idle(self, now_ns: int) -> None:
        if now_ns - self.last_update > self.freeze_ns:
            self.pm = max(0.0, self.pm - self.d2)
            self.last_update = now_ns

    def wants_idle_poll(self) -> bool:
        return self.pm > 0.0

    def offer(self, flow_id, size, seq, kind, created_ns, now_ns):
        if not self._has_room(size):
            self._on_loss(now_ns)
            return False, None
        if self.rng.random() < self.pm:
            return False, None
        self._push((flow_id, size, seq, kind, created_ns), size)
        return True, None


class SfbQueue(FifoQueue):
    """SFB: L levels of N accounting bins with double-buffered moving hashes.

    Each arrival is hashed into one bin per level in the active grid; bins
    over their size push their marking probability up, empty bins pull it
    down. A flow whose minimum bin probability reaches 1 is non-responsive
    and goes through the boxtime rate limiter. Admitted packets increment
    the mapped bins of both the active and the warm-up grid and remember
    them, so departures decrement the same bins across hash rotations.
    """

    def __init__(
        self,
        capacity_pkts,
        capacity_bytes,
        levels,
        nbins,
        d1,
        d2,
        freeze_ns,
        bin_size,
        boxtime_ns,
        boxtime_jitter,
        h_interval_ns,
        seed,
    ):
        super().__init__(capacity_pkts, capacity_bytes)
        self.levels = int(levels)
        self.nbins = int(nbins)
        self.d1 = float(d1)
        self.d2 = float(d2)
        self.freeze_ns = int(freeze_ns)
        self.bin_size = float(bin_size)
        self.boxtime_ns = int(boxtime_ns)
        self.boxtime_jitter = float(boxtime_jitter)
        self.h_interval_ns = int(h_interval_ns)
        self.rng = SplitMix64(seed)

        L, N = self.levels, self.nbins
        # two grids: slot 0 starts active, slot 1 warms up
        self._qlen = [[[0] * N for _ in range(L)] for _ in range(2)]
        self._pm = [[[0.0] * N for _ in range(L)] for _ in range(2)]
        self._last = [[[NEG_INF] * N for _ in range(L)] for _ in range(2)]
        self._salts = [
            [self.rng.next_u64() for _ in range(L)],
            [self.rng.next_u64() for _ in range(L)],
        ]
        self._gen = [1, 2]
        self._next_gen = 3
        self.active = 0
        self.next_switch_ns = self.h_interval_ns
        self.last_box_ns = NEG_INF
        self.rotations = 0

    # -- debug / introspection -------------------------------------------

    def bins_for(self, flow_id: int, slot: int | None = None) -> list[int]:
        s = self.active if slot is None else slot
        return [
            hash_to_bin(flow_id, self._salts[s][lvl], self.nbins)
            for lvl in range(self.levels)
        ]

    def bin_qlens(self, level: int, slot: int | None = None) -> list[int]:
        s = self.active if slot is None else slot
        return list(self._qlen[s][level])

    def bin_pm(self, level: int, idx: int, slot: int | None = None) -> float:
        s = self.active if slot is None else slot
        return self._pm[s][level][idx]

    def debug_set_bin(self, level, idx, qlen=None, pm=None, slot=None) -> None:
        s = self.active if slot is None else slot
        if qlen is not None:
            self._qlen[s][level][idx] = qlen
        if pm is not None:
            self._pm[s][level][idx] = pm

    # -- hash rotation ----------------------------------------------------

    def _rotate(self) -> None:
        old = self.active
        self.active = 1 - old
        L, N = self.levels, self.nbins
        self._qlen[old] = [[0] * N for _ in range(L)]
        self._pm[old] = [[0.0] * N for _ in range(L)]
        self._last[old] = [[NEG_INF] * N for _ in range(L)]
        self._salts[old] = [self.rng.next_u64() for _ in range(L)]
        self._gen[old] = self._next_gen
        self._next_gen += 1
        self.next_switch_ns += self.h_interval_ns
        self.rotations += 1

    def _catch_up(self, now_ns: int) -> None:
        while now_ns >= self.next_switch_ns:
            self._rotate()

    # -- arrival / departure ------------------------------------------------

    def offer(self, flow_id, size, seq, kind, created_ns, now_ns):
        self._catch_up(now_ns)
        a = self.active
        w = 1 - a
        bins_a = [
            hash_to_bin(flow_id, self._salts[a][lvl], self.nbins)
            for lvl in range(self.levels)
        ]

        over_threshold = False
        pmin = 1.0
        for lvl, b in enumerate(bins_a):
            ql = self._qlen[a][lvl][b]
            if ql > self.bin_size:
                if now_ns - self._last[a][lvl][b] > self.freeze_ns:
                    self._pm[a][lvl][b] = min(1.0, self._pm[a][lvl][b] + self.d1)
                    self._last[a][lvl][b] = now_ns
                over_threshold = True
            elif ql == 0:
                if now_ns - self._last[a][lvl][b] > self.freeze_ns:
                    self._pm[a][lvl][b] = max(0.0, self._pm[a][lvl][b] - self.d2)
                    self._last[a][lvl][b] = now_ns
            if self._pm[a][lvl][b] < pmin:
                pmin = self._pm[a][lvl][b]

        bins_w = [
            hash_to_bin(flow_id, self._salts[w][lvl], self.nbins)
            for lvl in range(self.levels)
        ]
        nonresponsive = pmin >= 1.0
        if nonresponsive:
            # warm up the standby grid so the flow stays rate-limited after
            # the next hash switch
            for lvl, b in enumerate(bins_w):
                if now_ns - self._last[w][lvl][b] > self.freeze_ns:
                    self._pm[w][lvl][b] = min(1.0, self._pm[w][lvl][b] + self.d1)
                    self._last[w][lvl][b] = now_ns

        if over_threshold:
            return False, None
        if nonresponsive:
            eff_ns = self.boxtime_ns
            if self.boxtime_jitter > 0.0:
                u = self.rng.random()
                eff_ns = int(
                    self.boxtime_ns * (1.0 + self.boxtime_jitter * (2.0 * u - 1.0))
                )
            if eff_ns > 0 and now_ns - self.last_box_ns <= eff_ns:
                return False, None
        else:
            if self.rng.random() < pmin:
                return False, None

        if not self._has_room(size):
            return False, None
        for lvl, b in enumerate(bins_a):
            self._qlen[a][lvl][b] += 1
        for lvl, b in enumerate(bins_w):
            self._qlen[w][lvl][b] += 1
        if nonresponsive:
            self.last_box_ns = now_ns
        rec = (flow_id, size, seq, kind, created_ns)
        self._push((rec, self._gen[a], bins_a, self._gen[w], bins_w), size)
        return True, None

    def _item_rec(self, item):
        return item[0]

    def take(self, now_ns: int):
        self._catch_up(now_ns)
        item = self._pop()
        if item is None:
            return None
        rec, gen_a, bins_a, gen_w, bins_w = item
        self.qbytes -= rec[1]
        for gen, bins in ((gen_a, bins_a), (gen_w, bins_w)):
            if self._gen[0] == gen:
                slot = 0
            elif self._gen[1] == gen:
                slot = 1
            else:
                continue  # grid was reset by a rotation since admission
            for lvl, b in enumerate(bins):
                self._qlen[slot][lvl][b] -= 1
                if self._qlen[slot][lvl][b] == 0 and slot == self.active:
                    if now_ns - self._last[slot][lvl][b] > self.freeze_ns:
                        self._pm[slot][lvl][b] = max(
                            0.0, self._pm[slot][lvl][b] - self.d2
                        )
                        self._last[slot][lvl][b] = now_ns
        return rec


class ChokeQueue(FifoQueue):
    """CHOKe: arrivals above min_th duel random drop candidates from the queue.

    A flow-ID match drops candidate and arrival both; otherwise survivors
    keep their queue position and the arrival faces the RED probability
    (forced drop at or above max_th). Adaptive mode scales the candidate
    count as 2i across interval_num regions of [min_th, max_th).
    """

    def __init__(
        self,
        capacity_pkts,
        capacity_bytes,
        min_th,
        max_th,
        max_p,
        w_q,
        count_spread,
        adaptive,
        cand_num,
        interval_num,
        seed,
    ):
        super().__init__(capacity_pkts, capacity_bytes)
        self.min_th = float(min_th)
        self.max_th = float(max_th)
        self.max_p = float(max_p)
        self.w_q = float(w_q)
        self.count_spread = bool(count_spread)
        self.adaptive = bool(adaptive)
        self.cand_num = int(cand_num)
        self.interval_num = int(interval_num)
        self.avg = 0.0
        self.count = 0
        self.rng = SplitMix64(seed)
        self._avg_frozen = False

    def debug_set_avg(self, avg: float, freeze: bool = True) -> None:
        self.avg = float(avg)
        self._avg_frozen = freeze

    def candidate_count(self, avg: float) -> int:
        """Number of drop candidates to draw for an average at or above min_th."""
        if not self.adaptive:
            return self.cand_num
        k = self.interval_num
        width = (self.max_th - self.min_th) / k
        region = 1 + int((avg - self.min_th) / width)
        if region > k:
            region = k
        return 2 * region

    def offer(self, flow_id, size, seq, kind, created_ns, now_ns):
        if not self._avg_frozen:
            self.avg = ewma_update(self.avg, self.qlen, self.w_q)

        victims = None
        n = self.qlen
        if self.avg >= self.min_th and n > 0:
            m = self.candidate_count(self.avg)
            if m > n:
                m = n
            idx = list(range(n))
            for t in range(m):
                j = t + self.rng.randbelow(n - t)
                idx[t], idx[j] = idx[j], idx[t]
            matched = sorted(
                i for i in idx[:m] if self._q[self._head + i][0] == flow_id
            )
            if matched:
                victims = []
                for i in reversed(matched):
                    rec = self._q[self._head + i]
                    del self._q[self._head + i]
                    self.qbytes -= rec[1]
                    victims.append(rec)
                victims.reverse()  # report in queue order

        if self.avg < self.min_th:
            self.count = 0
            if self._has_room(size):
                self._push((flow_id, size, seq, kind, created_ns), size)
                return True, None
            return False, None
        if victims:
            self.count = 0
            return False, victims
        if self.avg >= self.max_th:
            self.count = 0
            return False, None
        p = red_drop_probability(
            self.avg, self.min_th, self.max_th, self.max_p, self.count, self.count_spread
        )
        if self.rng.random() < p:
            self.count = 0
            return False, None
        if not self._has_room(size):
            self.count = 0
            return False, None
        self.count += 1
        self._push((flow_id, size, seq, kind, created_ns), size)
        return True, None
