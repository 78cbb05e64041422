# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled queue-discipline kernels.

Mirrors _pure.py decision-for-decision: same state updates, same RNG draw
order, same float expression order, so both backends produce bit-identical
streams from the same seed. Keep the two files in lockstep.
"""

from libc.stdlib cimport calloc, free, malloc

ctypedef unsigned long long u64

cdef long long NEG_INF = -(<long long>1 << 62)
cdef u64 GAMMA = 0x9E3779B97F4A7C15ULL
cdef double INV_2_53 = 1.0 / 9007199254740992.0  # 2**-53


cdef inline u64 mix64(u64 z) noexcept:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline u64 hash_to_bin(u64 flow_id, u64 salt, u64 nbins) noexcept:
    return mix64((flow_id * GAMMA) ^ salt) % nbins


cdef inline double ewma(double avg, double q, double w) noexcept:
    return (1.0 - w) * avg + w * q


cdef inline double red_prob(
    double avg, double min_th, double max_th, double max_p,
    long long count, bint count_spread,
) noexcept:
    cdef double p_b, denom
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


cdef struct PktRec:
    long long flow_id
    long long seq
    long long created
    int size
    int kind


cdef class BaseQueue:
    """Ring-buffer FIFO with packet- or byte-denominated capacity."""

    cdef PktRec* _buf
    cdef Py_ssize_t _alloc
    cdef Py_ssize_t _head
    cdef Py_ssize_t _count
    cdef public long long qbytes
    cdef public int capacity_pkts
    cdef public long long capacity_bytes
    cdef public long long idle_poll_ns

    def __cinit__(self, int capacity_pkts, long long capacity_bytes=0, *args):
        if capacity_pkts <= 0:
            raise ValueError("capacity must be > 0")
        self.capacity_pkts = capacity_pkts
        self.capacity_bytes = capacity_bytes
        self.qbytes = 0
        self.idle_poll_ns = 0
        self._head = 0
        self._count = 0
        if capacity_bytes > 0:
            self._alloc = capacity_bytes // 1000 + 16
        else:
            self._alloc = capacity_pkts + 1
        self._buf = <PktRec*> malloc(self._alloc * sizeof(PktRec))
        if self._buf == NULL:
            raise MemoryError()

    def __dealloc__(self):
        if self._buf != NULL:
            free(self._buf)

    @property
    def qlen(self):
        return self._count

    cdef bint _has_room(self, int size) noexcept:
        if self.capacity_bytes > 0:
            return self.qbytes + size <= self.capacity_bytes
        return self._count < self.capacity_pkts

    cdef void _grow(self):
        cdef Py_ssize_t new_alloc = self._alloc * 2
        cdef PktRec* nb = <PktRec*> malloc(new_alloc * sizeof(PktRec))
        cdef Py_ssize_t i
        if nb == NULL:
            raise MemoryError()
        for i in range(self._count):
            nb[i] = self._buf[(self._head + i) % self._alloc]
        free(self._buf)
        self._buf = nb
        self._alloc = new_alloc
        self._head = 0

    cdef Py_ssize_t _push_slot(
        self, long long flow_id, int size, long long seq, int kind, long long created,
    ):
        cdef Py_ssize_t slot
        if self._count == self._alloc:
            self._grow()
        slot = (self._head + self._count) % self._alloc
        self._buf[slot].flow_id = flow_id
        self._buf[slot].size = size
        self._buf[slot].seq = seq
        self._buf[slot].kind = kind
        self._buf[slot].created = created
        self._count += 1
        self.qbytes += size
        return slot

    cdef Py_ssize_t _pop_slot(self) noexcept:
        cdef Py_ssize_t slot
        if self._count == 0:
            return -1
        slot = self._head
        self._head = (self._head + 1) % self._alloc
        self._count -= 1
        self.qbytes -= self._buf[slot].size
        return slot

    cdef tuple _rec_tuple(self, Py_ssize_t slot):
        cdef PktRec* r = &self._buf[slot]
        return (r.flow_id, r.size, r.seq, r.kind, r.created)

    def take(self, long long now_ns):
        cdef Py_ssize_t slot = self._pop_slot()
        if slot < 0:
            return None
        return self._rec_tuple(slot)

    def snapshot(self):
        cdef Py_ssize_t i
        return [
            self._rec_tuple((self._head + i) % self._alloc)
            for i in range(self._count)
        ]

    def notify_idle(self, long long now_ns):
        pass

    def wants_idle_poll(self):
        return False


cdef class Rng:
    cdef u64 state

    def __cinit__(self, u64 seed):
        self.state = seed

    cdef inline u64 next_u64(self) noexcept:
        self.state += GAMMA
        return mix64(self.state)

    cdef inline double random(self) noexcept:
        return <double>(self.next_u64() >> 11) * INV_2_53

    cdef inline u64 randbelow(self, u64 n) noexcept:
        return self.next_u64() % n

    # Python-visible wrappers (testing the generator itself)
    def py_next_u64(self):
        return self.next_u64()

    def py_random(self):
        return self.random()


cdef class DropTailQueue(BaseQueue):

    def __init__(self, capacity_pkts, capacity_bytes=0):
        pass

    def offer(self, long long flow_id, int size, long long seq, int kind,
              long long created_ns, long long now_ns):
        if self._has_room(size):
            self._push_slot(flow_id, size, seq, kind, created_ns)
            return True, None
        return False, None


cdef class RedQueue(BaseQueue):

    cdef public double min_th
    cdef public double max_th
    cdef public double max_p
    cdef public double w_q
    cdef public bint count_spread
    cdef public double avg
    cdef public long long count
    cdef Rng rng
    cdef bint _avg_frozen

    def __init__(self, capacity_pkts, capacity_bytes, min_th, max_th, max_p,
                 w_q, count_spread, seed):
        self.min_th = min_th
        self.max_th = max_th
        self.max_p = max_p
        self.w_q = w_q
        self.count_spread = count_spread
        self.avg = 0.0
        self.count = 0
        self.rng = Rng(seed)
        self._avg_frozen = False

    def debug_set_avg(self, double avg, bint freeze=True):
        self.avg = avg
        self._avg_frozen = freeze

    def offer(self, long long flow_id, int size, long long seq, int kind,
              long long created_ns, long long now_ns):
        cdef double p
        if not self._avg_frozen:
            self.avg = ewma(self.avg, <double>self._count, self.w_q)
        if self.avg < self.min_th:
            self.count = 0
            if self._has_room(size):
                self._push_slot(flow_id, size, seq, kind, created_ns)
                return True, None
            return False, None
        if self.avg >= self.max_th:
            self.count = 0
            return False, None
        p = red_prob(self.avg, self.min_th, self.max_th, self.max_p,
                     self.count, self.count_spread)
        if self.rng.random() < p:
            self.count = 0
            return False, None
        if not self._has_room(size):
            self.count = 0
            return False, None
        self.count += 1
        self._push_slot(flow_id, size, seq, kind, created_ns)
        return True, None


cdef class FredQueue(BaseQueue):

    cdef public double min_th
    cdef public double max_th
    cdef public double max_p
    cdef public double w_q
    cdef public bint count_spread
    cdef public int min_q
    cdef public bint two_packet_mode
    cdef public double avg
    cdef public long long count
    cdef public double avgcq
    cdef public int n_active
    cdef readonly dict accounts
    cdef Rng rng
    cdef bint _avg_frozen

    def __init__(self, capacity_pkts, capacity_bytes, min_th, max_th, max_p,
                 w_q, count_spread, min_q, two_packet_mode, seed):
        self.min_th = min_th
        self.max_th = max_th
        self.max_p = max_p
        self.w_q = w_q
        self.count_spread = count_spread
        self.min_q = min_q
        self.two_packet_mode = two_packet_mode
        self.avg = 0.0
        self.count = 0
        self.avgcq = 0.0
        self.n_active = 0
        self.accounts = {}
        self.rng = Rng(seed)
        self._avg_frozen = False

    def debug_set_avg(self, double avg, bint freeze=True):
        self.avg = avg
        self._avg_frozen = freeze

    def flow_qlens(self):
        return {fid: acct[0] for fid, acct in self.accounts.items()}

    cdef bint _near_full(self) noexcept:
        if self.capacity_bytes > 0:
            return self.qbytes * 10 >= self.capacity_bytes * 9
        return self._count * 10 >= self.capacity_pkts * 9

    def offer(self, long long flow_id, int size, long long seq, int kind,
              long long created_ns, long long now_ns):
        cdef double max_q, threshold, p
        cdef long long qlen_i, strike_i
        cdef list acct

        if not self._avg_frozen:
            self.avg = ewma(self.avg, <double>self._count, self.w_q)
        acct = self.accounts.get(flow_id)
        if acct is not None:
            qlen_i = acct[0]
            strike_i = acct[1]
        else:
            qlen_i = 0
            strike_i = 0

        max_q = self.min_th
        if self.two_packet_mode and self._near_full():
            max_q = 2.0
        if self.avg >= self.max_th:
            max_q = 2.0

        if qlen_i >= max_q or (
            self.avg >= 2.0 * self.avgcq and qlen_i > self.avgcq and strike_i > 1
        ):
            acct[1] = strike_i + 1
            self.count = 0
            return False, None

        if self.min_th <= self.avg < self.max_th:
            threshold = self.min_q if self.min_q > self.avgcq else self.avgcq
            if qlen_i >= threshold:
                p = red_prob(self.avg, self.min_th, self.max_th, self.max_p,
                             self.count, self.count_spread)
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
        acct[0] = qlen_i + 1
        self.count += 1
        self._push_slot(flow_id, size, seq, kind, created_ns)
        return True, None

    def take(self, long long now_ns):
        cdef Py_ssize_t slot = self._pop_slot()
        cdef list acct
        if slot < 0:
            return None
        rec = self._rec_tuple(slot)
        acct = self.accounts[rec[0]]
        acct[0] = acct[0] - 1
        if acct[0] == 0:
            del self.accounts[rec[0]]
            self.n_active -= 1
        if not self._avg_frozen:
            self.avg = ewma(self.avg, <double>self._count, self.w_q)
        self.avgcq = self.avg / self.n_active if self.n_active else self.avg
        return rec


cdef class BlueQueue(BaseQueue):

    cdef public double d1
    cdef public double d2
    cdef public long long freeze_ns
    cdef public double pm
    cdef public long long last_update
    cdef Rng rng

    def __init__(self, capacity_pkts, capacity_bytes, d1, d2, freeze_ns, seed):
        self.d1 = d1
        self.d2 = d2
        self.freeze_ns = freeze_ns
        self.pm = 0.0
        self.last_update = NEG_INF
        self.rng = Rng(seed)
        self.idle_poll_ns = freeze_ns

    def debug_set_pm(self, double pm):
        self.pm = pm

    cdef void _on_loss(self, long long now_ns) noexcept:
        if now_ns - self.last_update > self.freeze_ns:
            self.pm = self.pm + self.d1
            if self.pm > 1.0:
                self.pm = 1.0
            self.last_update = now_ns

    def notify_idle(self, long long now_ns):
        if now_ns - self.last_update > self.freeze_ns:
            self.pm = self.pm - self.d2
            if self.pm < 0.0:
                self.pm = 0.0
            self.last_update = now_ns

    def wants_idle_poll(self):
        return self.pm > 0.0

    def offer(self, long long flow_id, int size, long long seq, int kind,
              long long created_ns, long long now_ns):
        if not self._has_room(size):
            self._on_loss(now_ns)
            return False, None
        if self.rng.random() < self.pm:
            return False, None
        self._push_slot(flow_id, size, seq, kind, created_ns)
        return True, None


cdef class SfbQueue(BaseQueue):

    cdef public int levels
    cdef public int nbins
    cdef public double d1
    cdef public double d2
    cdef public long long freeze_ns
    cdef public double bin_size
    cdef public long long boxtime_ns
    cdef public double boxtime_jitter
    cdef public long long h_interval_ns
    cdef public long long last_box_ns
    cdef public long long next_switch_ns
    cdef public int active
    cdef public long long rotations

    cdef long long* _bqlen      # [slot][lvl][bin] flattened: 2*L*N
    cdef double* _bpm
    cdef long long* _blast
    cdef u64* _salts            # 2*L
    cdef long long _gen[2]
    cdef long long _next_gen
    # per queued packet, parallel to the ring: generation + bins for both grids
    cdef long long* _rec_gen_a
    cdef long long* _rec_gen_w
    cdef int* _rec_bins_a       # alloc*L
    cdef int* _rec_bins_w
    cdef Rng rng

    def __cinit__(self, int capacity_pkts, long long capacity_bytes=0, *args):
        self._bqlen = NULL
        self._bpm = NULL
        self._blast = NULL
        self._salts = NULL
        self._rec_gen_a = NULL
        self._rec_gen_w = NULL
        self._rec_bins_a = NULL
        self._rec_bins_w = NULL

    def __init__(self, capacity_pkts, capacity_bytes, levels, nbins, d1, d2,
                 freeze_ns, bin_size, boxtime_ns, boxtime_jitter,
                 h_interval_ns, seed):
        cdef Py_ssize_t cells, i
        self.levels = levels
        self.nbins = nbins
        self.d1 = d1
        self.d2 = d2
        self.freeze_ns = freeze_ns
        self.bin_size = bin_size
        self.boxtime_ns = boxtime_ns
        self.boxtime_jitter = boxtime_jitter
        self.h_interval_ns = h_interval_ns
        self.rng = Rng(seed)

        cells = 2 * self.levels * self.nbins
        self._bqlen = <long long*> calloc(cells, sizeof(long long))
        self._bpm = <double*> calloc(cells, sizeof(double))
        self._blast = <long long*> malloc(cells * sizeof(long long))
        self._salts = <u64*> malloc(2 * self.levels * sizeof(u64))
        self._rec_gen_a = <long long*> malloc(self._alloc * sizeof(long long))
        self._rec_gen_w = <long long*> malloc(self._alloc * sizeof(long long))
        self._rec_bins_a = <int*> malloc(self._alloc * self.levels * sizeof(int))
        self._rec_bins_w = <int*> malloc(self._alloc * self.levels * sizeof(int))
        if (self._bqlen == NULL or self._bpm == NULL or self._blast == NULL
                or self._salts == NULL or self._rec_gen_a == NULL
                or self._rec_gen_w == NULL or self._rec_bins_a == NULL
                or self._rec_bins_w == NULL):
            raise MemoryError()
        for i in range(cells):
            self._blast[i] = NEG_INF
        for i in range(2 * self.levels):
            self._salts[i] = self.rng.next_u64()
        self._gen[0] = 1
        self._gen[1] = 2
        self._next_gen = 3
        self.active = 0
        self.next_switch_ns = self.h_interval_ns
        self.last_box_ns = NEG_INF
        self.rotations = 0

    def __dealloc__(self):
        if self._bqlen != NULL:
            free(self._bqlen)
        if self._bpm != NULL:
            free(self._bpm)
        if self._blast != NULL:
            free(self._blast)
        if self._salts != NULL:
            free(self._salts)
        if self._rec_gen_a != NULL:
            free(self._rec_gen_a)
        if self._rec_gen_w != NULL:
            free(self._rec_gen_w)
        if self._rec_bins_a != NULL:
            free(self._rec_bins_a)
        if self._rec_bins_w != NULL:
            free(self._rec_bins_w)

    cdef inline Py_ssize_t _cell(self, int slot, int lvl, int b) noexcept:
        return (<Py_ssize_t>slot * self.levels + lvl) * self.nbins + b

    cdef void _grow(self):
        # mirror BaseQueue._grow, relocating the parallel record arrays
        cdef Py_ssize_t new_alloc = self._alloc * 2
        cdef Py_ssize_t i, src
        cdef int lvl
        cdef PktRec* nb = <PktRec*> malloc(new_alloc * sizeof(PktRec))
        cdef long long* nga = <long long*> malloc(new_alloc * sizeof(long long))
        cdef long long* ngw = <long long*> malloc(new_alloc * sizeof(long long))
        cdef int* nba = <int*> malloc(new_alloc * self.levels * sizeof(int))
        cdef int* nbw = <int*> malloc(new_alloc * self.levels * sizeof(int))
        if nb == NULL or nga == NULL or ngw == NULL or nba == NULL or nbw == NULL:
            raise MemoryError()
        for i in range(self._count):
            src = (self._head + i) % self._alloc
            nb[i] = self._buf[src]
            nga[i] = self._rec_gen_a[src]
            ngw[i] = self._rec_gen_w[src]
            for lvl in range(self.levels):
                nba[i * self.levels + lvl] = self._rec_bins_a[src * self.levels + lvl]
                nbw[i * self.levels + lvl] = self._rec_bins_w[src * self.levels + lvl]
        free(self._buf)
        free(self._rec_gen_a)
        free(self._rec_gen_w)
        free(self._rec_bins_a)
        free(self._rec_bins_w)
        self._buf = nb
        self._rec_gen_a = nga
        self._rec_gen_w = ngw
        self._rec_bins_a = nba
        self._rec_bins_w = nbw
        self._alloc = new_alloc
        self._head = 0

    # -- debug / introspection -------------------------------------------

    def bins_for(self, long long flow_id, slot=None):
        cdef int s = self.active if slot is None else <int>slot
        cdef int lvl
        return [
            <int>hash_to_bin(<u64>flow_id, self._salts[s * self.levels + lvl],
                             <u64>self.nbins)
            for lvl in range(self.levels)
        ]

    def bin_qlens(self, int level, slot=None):
        cdef int s = self.active if slot is None else <int>slot
        cdef int b
        return [self._bqlen[self._cell(s, level, b)] for b in range(self.nbins)]

    def bin_pm(self, int level, int idx, slot=None):
        cdef int s = self.active if slot is None else <int>slot
        return self._bpm[self._cell(s, level, idx)]

    def debug_set_bin(self, int level, int idx, qlen=None, pm=None, slot=None):
        cdef int s = self.active if slot is None else <int>slot
        cdef Py_ssize_t c = self._cell(s, level, idx)
        if qlen is not None:
            self._bqlen[c] = qlen
        if pm is not None:
            self._bpm[c] = pm

    # -- hash rotation ----------------------------------------------------

    cdef void _rotate(self) noexcept:
        cdef int old = self.active
        cdef Py_ssize_t i, base
        cdef int lvl
        self.active = 1 - old
        base = self._cell(old, 0, 0)
        for i in range(self.levels * self.nbins):
            self._bqlen[base + i] = 0
            self._bpm[base + i] = 0.0
            self._blast[base + i] = NEG_INF
        for lvl in range(self.levels):
            self._salts[old * self.levels + lvl] = self.rng.next_u64()
        self._gen[old] = self._next_gen
        self._next_gen += 1
        self.next_switch_ns += self.h_interval_ns
        self.rotations += 1

    cdef inline void _catch_up(self, long long now_ns) noexcept:
        while now_ns >= self.next_switch_ns:
            self._rotate()

    # -- arrival / departure ----------------------------------------------

    def offer(self, long long flow_id, int size, long long seq, int kind,
              long long created_ns, long long now_ns):
        cdef int a, w, lvl, b
        cdef Py_ssize_t c, slot
        cdef bint over_threshold = False
        cdef bint nonresponsive
        cdef double pmin = 1.0
        cdef long long eff_ns
        cdef double u
        cdef int bins_a[16]
        cdef int bins_w[16]

        self._catch_up(now_ns)
        a = self.active
        w = 1 - a
        for lvl in range(self.levels):
            bins_a[lvl] = <int>hash_to_bin(
                <u64>flow_id, self._salts[a * self.levels + lvl], <u64>self.nbins)

        for lvl in range(self.levels):
            b = bins_a[lvl]
            c = self._cell(a, lvl, b)
            if self._bqlen[c] > self.bin_size:
                if now_ns - self._blast[c] > self.freeze_ns:
                    self._bpm[c] = self._bpm[c] + self.d1
                    if self._bpm[c] > 1.0:
                        self._bpm[c] = 1.0
                    self._blast[c] = now_ns
                over_threshold = True
            elif self._bqlen[c] == 0:
                if now_ns - self._blast[c] > self.freeze_ns:
                    self._bpm[c] = self._bpm[c] - self.d2
                    if self._bpm[c] < 0.0:
                        self._bpm[c] = 0.0
                    self._blast[c] = now_ns
            if self._bpm[c] < pmin:
                pmin = self._bpm[c]

        for lvl in range(self.levels):
            bins_w[lvl] = <int>hash_to_bin(
                <u64>flow_id, self._salts[w * self.levels + lvl], <u64>self.nbins)
        nonresponsive = pmin >= 1.0
        if nonresponsive:
            for lvl in range(self.levels):
                c = self._cell(w, lvl, bins_w[lvl])
                if now_ns - self._blast[c] > self.freeze_ns:
                    self._bpm[c] = self._bpm[c] + self.d1
                    if self._bpm[c] > 1.0:
                        self._bpm[c] = 1.0
                    self._blast[c] = now_ns

        if over_threshold:
            return False, None
        if nonresponsive:
            eff_ns = self.boxtime_ns
            if self.boxtime_jitter > 0.0:
                u = self.rng.random()
                eff_ns = <long long>(
                    self.boxtime_ns * (1.0 + self.boxtime_jitter * (2.0 * u - 1.0)))
            if eff_ns > 0 and now_ns - self.last_box_ns <= eff_ns:
                return False, None
        else:
            if self.rng.random() < pmin:
                return False, None

        if not self._has_room(size):
            return False, None
        for lvl in range(self.levels):
            self._bqlen[self._cell(a, lvl, bins_a[lvl])] += 1
        for lvl in range(self.levels):
            self._bqlen[self._cell(w, lvl, bins_w[lvl])] += 1
        if nonresponsive:
            self.last_box_ns = now_ns
        slot = self._push_slot(flow_id, size, seq, kind, created_ns)
        self._rec_gen_a[slot] = self._gen[a]
        self._rec_gen_w[slot] = self._gen[w]
        for lvl in range(self.levels):
            self._rec_bins_a[slot * self.levels + lvl] = bins_a[lvl]
            self._rec_bins_w[slot * self.levels + lvl] = bins_w[lvl]
        return True, None

    def take(self, long long now_ns):
        cdef Py_ssize_t slot
        cdef int grid, lvl, s, b
        cdef long long gen
        cdef Py_ssize_t c
        self._catch_up(now_ns)
        slot = self._pop_slot()
        if slot < 0:
            return None
        rec = self._rec_tuple(slot)
        for grid in range(2):
            gen = self._rec_gen_a[slot] if grid == 0 else self._rec_gen_w[slot]
            if self._gen[0] == gen:
                s = 0
            elif self._gen[1] == gen:
                s = 1
            else:
                continue
            for lvl in range(self.levels):
                if grid == 0:
                    b = self._rec_bins_a[slot * self.levels + lvl]
                else:
                    b = self._rec_bins_w[slot * self.levels + lvl]
                c = self._cell(s, lvl, b)
                self._bqlen[c] -= 1
                if self._bqlen[c] == 0 and s == self.active:
                    if now_ns - self._blast[c] > self.freeze_ns:
                        self._bpm[c] = self._bpm[c] - self.d2
                        if self._bpm[c] < 0.0:
                            self._bpm[c] = 0.0
                        self._blast[c] = now_ns
        return rec


cdef class ChokeQueue(BaseQueue):

    cdef public double min_th
    cdef public double max_th
    cdef public double max_p
    cdef public double w_q
    cdef public bint count_spread
    cdef public bint adaptive
    cdef public int cand_num
    cdef public int interval_num
    cdef public double avg
    cdef public long long count
    cdef Rng rng
    cdef bint _avg_frozen
    cdef int* _scratch
    cdef Py_ssize_t _scratch_alloc

    def __cinit__(self, int capacity_pkts, long long capacity_bytes=0, *args):
        self._scratch = NULL

    def __init__(self, capacity_pkts, capacity_bytes, min_th, max_th, max_p,
                 w_q, count_spread, adaptive, cand_num, interval_num, seed):
        self.min_th = min_th
        self.max_th = max_th
        self.max_p = max_p
        self.w_q = w_q
        self.count_spread = count_spread
        self.adaptive = adaptive
        self.cand_num = cand_num
        self.interval_num = interval_num
        self.avg = 0.0
        self.count = 0
        self.rng = Rng(seed)
        self._avg_frozen = False
        self._scratch_alloc = self._alloc
        self._scratch = <int*> malloc(self._scratch_alloc * sizeof(int))
        if self._scratch == NULL:
            raise MemoryError()

    def __dealloc__(self):
        if self._scratch != NULL:
            free(self._scratch)

    def debug_set_avg(self, double avg, bint freeze=True):
        self.avg = avg
        self._avg_frozen = freeze

    def candidate_count(self, double avg):
        cdef int k, region
        cdef double width
        if not self.adaptive:
            return self.cand_num
        k = self.interval_num
        width = (self.max_th - self.min_th) / k
        region = 1 + <int>((avg - self.min_th) / width)
        if region > k:
            region = k
        return 2 * region

    cdef void _remove_at(self, Py_ssize_t logical) noexcept:
        # shift everything after `logical` one slot toward the head
        cdef Py_ssize_t i, src, dst
        for i in range(logical, self._count - 1):
            dst = (self._head + i) % self._alloc
            src = (self._head + i + 1) % self._alloc
            self._buf[dst] = self._buf[src]
        self._count -= 1

    def offer(self, long long flow_id, int size, long long seq, int kind,
              long long created_ns, long long now_ns):
        cdef Py_ssize_t n, t, j, i, phys
        cdef int m
        cdef double p
        cdef int tmp
        cdef list victims = None
        cdef list matched = None

        if not self._avg_frozen:
            self.avg = ewma(self.avg, <double>self._count, self.w_q)

        n = self._count
        if self.avg >= self.min_th and n > 0:
            m = <int>self.candidate_count(self.avg)
            if m > n:
                m = <int>n
            if n > self._scratch_alloc:
                free(self._scratch)
                self._scratch_alloc = self._alloc
                self._scratch = <int*> malloc(self._scratch_alloc * sizeof(int))
                if self._scratch == NULL:
                    raise MemoryError()
            for t in range(n):
                self._scratch[t] = <int>t
            for t in range(m):
                j = t + <Py_ssize_t>self.rng.randbelow(<u64>(n - t))
                tmp = self._scratch[t]
                self._scratch[t] = self._scratch[j]
                self._scratch[j] = tmp
            for t in range(m):
                i = self._scratch[t]
                phys = (self._head + i) % self._alloc
                if self._buf[phys].flow_id == flow_id:
                    if matched is None:
                        matched = []
                    matched.append(i)
            if matched is not None:
                matched.sort()
                victims = []
                for t in range(len(matched) - 1, -1, -1):
                    i = matched[t]
                    phys = (self._head + i) % self._alloc
                    rec = self._rec_tuple(phys)
                    self.qbytes -= self._buf[phys].size
                    self._remove_at(i)
                    victims.append(rec)
                victims.reverse()

        if self.avg < self.min_th:
            self.count = 0
            if self._has_room(size):
                self._push_slot(flow_id, size, seq, kind, created_ns)
                return True, None
            return False, None
        if victims is not None:
            self.count = 0
            return False, victims
        if self.avg >= self.max_th:
            self.count = 0
            return False, None
        p = red_prob(self.avg, self.min_th, self.max_th, self.max_p,
                     self.count, self.count_spread)
        if self.rng.random() < p:
            self.count = 0
            return False, None
        if not self._has_room(size):
            self.count = 0
            return False, None
        self.count += 1
        self._push_slot(flow_id, size, seq, kind, created_ns)
        return True, None
