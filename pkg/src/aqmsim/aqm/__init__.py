"""Queue disciplines behind one admission/dequeue interface.

Two interchangeable backends implement the disciplines: a compiled Cython
kernel (`_kernel`, built at install time) and a pure-Python fallback
(`_pure`). Both produce bit-identical decision streams from the same seed;
the compiled one is picked automatically when present. Set AQMSIM_PURE=1
to force the fallback.
"""

from __future__ import annotations

import os

from aqmsim.aqm import _pure
from aqmsim.aqm.params import (
    DISCIPLINES,
    BlueParams,
    ChokeParams,
    FredParams,
    RedParams,
    SfbParams,
    default_params,
)
from aqmsim.engine import s_to_ns
from aqmsim.rng import MASK64

try:
    from aqmsim.aqm import _kernel
except ImportError:  # extension not built; fall back to pure Python
    _kernel = None

if os.environ.get("AQMSIM_PURE"):
    _default_backend = "pure"
else:
    _default_backend = "compiled" if _kernel is not None else "pure"

MAX_SFB_LEVELS = 16  # compiled kernel uses fixed-size per-arrival scratch


def available_backends() -> tuple[str, ...]:
    return ("pure", "compiled") if _kernel is not None else ("pure",)


def active_backend() -> str:
    return _default_backend


def _module(backend: str | None):
    name = backend or _default_backend
    if name == "pure":
        return _pure
    if name == "compiled":
        if _kernel is None:
            raise RuntimeError("compiled backend requested but not built")
        return _kernel
    raise ValueError(f"unknown backend {name!r}")


def ewma_update(avg: float, q: float, w: float) -> float:
    """One EWMA step of the average queue length."""
    if not 0 < w < 1:
        raise ValueError("EWMA weight must be in (0, 1)")
    return _pure.ewma_update(avg, q, w)


def red_drop_probability(avg: float, params: RedParams, count: int = 0) -> float:
    """RED drop probability for a given average queue length."""
    return _pure.red_drop_probability(
        avg, params.min_th, params.max_th, params.max_p, count, params.count_spread
    )


def make_queue(
    discipline: str,
    params=None,
    *,
    capacity: int = 150,
    capacity_is_bytes: bool = False,
    packet_size: int = 1000,
    seed: int = 0,
    backend: str | None = None,
):
    """Build a discipline instance over its own FIFO buffer.

    `capacity` is packets unless `capacity_is_bytes`; byte-denominated
    buffers derive their packet-equivalent capacity from `packet_size`
    for threshold bookkeeping (SFB bin sizing).
    """
    if discipline not in DISCIPLINES:
        raise ValueError(f"unknown discipline {discipline!r}")
    if params is None:
        params = default_params(discipline)
    mod = _module(backend)
    seed = seed & MASK64

    if capacity_is_bytes:
        cap_bytes = int(capacity)
        cap_pkts = max(1, cap_bytes // packet_size)
    else:
        cap_bytes = 0
        cap_pkts = int(capacity)

    if discipline == "droptail":
        return mod.DropTailQueue(cap_pkts, cap_bytes)
    if discipline == "red":
        r = params
        return mod.RedQueue(
            cap_pkts, cap_bytes, r.min_th, r.max_th, r.max_p, r.w_q,
            r.count_spread, seed,
        )
    if discipline == "fred":
        f = params
        r = f.red
        if f.auto_thresholds:
            min_th, max_th = 0.2 * cap_pkts, 0.8 * cap_pkts
        else:
            min_th, max_th = r.min_th, r.max_th
        return mod.FredQueue(
            cap_pkts, cap_bytes, min_th, max_th, r.max_p, r.w_q,
            r.count_spread, f.min_q, f.two_packet_mode, seed,
        )
    if discipline == "blue":
        b = params
        return mod.BlueQueue(
            cap_pkts, cap_bytes, b.d1, b.d2, s_to_ns(b.freeze_time), seed
        )
    if discipline == "sfb":
        s = params
        if not 1 <= s.levels <= MAX_SFB_LEVELS:
            raise ValueError(f"sfb levels must be in 1..{MAX_SFB_LEVELS}")
        return mod.SfbQueue(
            cap_pkts, cap_bytes, s.levels, s.bins, s.d1, s.d2,
            s_to_ns(s.freeze_time), s.effective_bin_size(cap_pkts),
            s_to_ns(s.boxtime), s.boxtime_jitter, s_to_ns(s.h_interval), seed,
        )
    c = params
    return mod.ChokeQueue(
        cap_pkts, cap_bytes, c.red.min_th, c.red.max_th, c.red.max_p,
        c.red.w_q, c.red.count_spread, c.adaptive, c.cand_num,
        c.interval_num, seed,
    )


__all__ = [
    "DISCIPLINES",
    "RedParams",
    "FredParams",
    "BlueParams",
    "SfbParams",
    "ChokeParams",
    "default_params",
    "available_backends",
    "active_backend",
    "make_queue",
    "ewma_update",
    "red_drop_probability",
]
