"""Scenario configuration: flat `key = value` text with dotted sections.

One discipline per run; the active discipline's parameter block is
addressed as `discipline.<name>.<field>`. A document containing any
`sweep.*` key parses to a SweepSpec wrapping the remaining scenario.
Validation collects every violation before failing.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field

from aqmsim.aqm.params import (
    DISCIPLINES,
    BlueParams,
    ChokeParams,
    FredParams,
    RedParams,
    SfbParams,
)


class ConfigError(ValueError):
    def __init__(self, errors: list[str]):
        self.errors = errors
        super().__init__("; ".join(errors))


@dataclass
class Topology:
    access_bw_bps: int = 10_000_000
    access_delay_s: float = 0.001
    bottleneck_bw_bps: int = 1_000_000
    bottleneck_delay_s: float = 0.010


@dataclass
class BufferSpec:
    capacity: int = 150
    unit: str = "packets"  # or "bytes"


@dataclass
class TrafficSpec:
    tcp_flows: int = 10
    tcp_window: int = 50  # packets
    tcp_variant: str = "reno"
    udp_flows: int = 1
    udp_rate_bps: int = 8_000_000
    packet_size: int = 1000
    stagger_s: float = 0.1  # flow i starts at i * stagger


@dataclass
class ScenarioConfig:
    discipline: str = "red"
    duration_s: float = 100.0
    warmup_s: float = 10.0
    seed: int = 1
    out_dir: str = "out"
    topology: Topology = field(default_factory=Topology)
    buffer: BufferSpec = field(default_factory=BufferSpec)
    traffic: TrafficSpec = field(default_factory=TrafficSpec)
    red: RedParams = field(default_factory=RedParams)
    fred: FredParams = field(default_factory=FredParams)
    blue: BlueParams = field(default_factory=BlueParams)
    sfb: SfbParams = field(default_factory=SfbParams)
    choke: ChokeParams = field(default_factory=ChokeParams)

    def discipline_params(self):
        if self.discipline == "droptail":
            return None
        return getattr(self, self.discipline)

    def capacity_pkts(self) -> int:
        if self.buffer.unit == "bytes":
            return max(1, self.buffer.capacity // self.traffic.packet_size)
        return self.buffer.capacity

    def validate(self) -> list[str]:
        errors: list[str] = []
        if self.discipline not in DISCIPLINES:
            errors.append(
                f"discipline must be one of {', '.join(DISCIPLINES)} (got {self.discipline!r})"
            )
        t = self.topology
        for name in ("access_bw_bps", "bottleneck_bw_bps"):
            if getattr(t, name) <= 0:
                errors.append(f"topology.{name} must be > 0")
        for name in ("access_delay_s", "bottleneck_delay_s"):
            if getattr(t, name) < 0:
                errors.append(f"topology.{name} must be >= 0")
        if self.buffer.unit not in ("packets", "bytes"):
            errors.append("buffer.unit must be 'packets' or 'bytes'")
        if self.buffer.capacity < 1:
            errors.append("buffer.capacity must be >= 1")
        elif self.buffer.unit == "bytes" and self.buffer.capacity < self.traffic.packet_size:
            errors.append("buffer.capacity (bytes) must hold at least one packet")
        tr = self.traffic
        if tr.tcp_flows < 0 or tr.udp_flows < 0:
            errors.append("traffic flow counts must be >= 0")
        if tr.tcp_flows + tr.udp_flows < 1:
            errors.append("traffic needs at least one flow")
        if tr.tcp_window < 1:
            errors.append("traffic.tcp_window must be >= 1")
        if tr.tcp_variant not in ("reno", "tahoe"):
            errors.append("traffic.tcp_variant must be 'reno' or 'tahoe'")
        if tr.udp_flows > 0 and tr.udp_rate_bps <= 0:
            errors.append("traffic.udp_rate_bps must be > 0")
        if tr.packet_size <= 0:
            errors.append("traffic.packet_size must be > 0")
        if tr.stagger_s < 0:
            errors.append("traffic.stagger_s must be >= 0")
        if self.duration_s < 0:
            errors.append("duration_s must be >= 0")
        if not 0 <= self.warmup_s <= max(self.duration_s, 0):
            errors.append("warmup_s must be within [0, duration_s]")
        if self.seed < 0:
            errors.append("seed must be >= 0")
        if self.discipline in DISCIPLINES and self.discipline != "droptail":
            params = self.discipline_params()
            params.validate(self.capacity_pkts(), f"discipline.{self.discipline}", errors)
        return errors


@dataclass
class SweepSpec:
    base: ScenarioConfig
    parameter: str
    values: list
    repetitions: int = 1

    def validate(self) -> list[str]:
        errors = self.base.validate()
        if self.parameter not in SWEEPABLE_KEYS:
            errors.append(f"sweep.parameter {self.parameter!r} does not name a config value")
        if not self.values:
            errors.append("sweep.values must list at least one value")
        if self.repetitions < 1:
            errors.append("sweep.repetitions must be >= 1")
        return errors

    def points(self):
        """Yield (value, rep, config) with the swept parameter applied."""
        for value in self.values:
            for rep in range(self.repetitions):
                cfg = copy.deepcopy(self.base)
                set_param(cfg, self.parameter, value)
                cfg.seed = self.base.seed + rep
                yield value, rep, cfg


# -- key schema --------------------------------------------------------------

_TOP = {
    "discipline": ("str", ("discipline",)),
    "duration_s": ("float", ("duration_s",)),
    "warmup_s": ("float", ("warmup_s",)),
    "seed": ("int", ("seed",)),
    "out_dir": ("str", ("out_dir",)),
}

_SECTIONS = {
    "topology.access_bw_bps": ("int", ("topology", "access_bw_bps")),
    "topology.access_delay_s": ("float", ("topology", "access_delay_s")),
    "topology.bottleneck_bw_bps": ("int", ("topology", "bottleneck_bw_bps")),
    "topology.bottleneck_delay_s": ("float", ("topology", "bottleneck_delay_s")),
    "buffer.capacity": ("int", ("buffer", "capacity")),
    "buffer.unit": ("str", ("buffer", "unit")),
    "traffic.tcp_flows": ("int", ("traffic", "tcp_flows")),
    "traffic.tcp_window": ("int", ("traffic", "tcp_window")),
    "traffic.tcp_variant": ("str", ("traffic", "tcp_variant")),
    "traffic.udp_flows": ("int", ("traffic", "udp_flows")),
    "traffic.udp_rate_bps": ("int", ("traffic", "udp_rate_bps")),
    "traffic.packet_size": ("int", ("traffic", "packet_size")),
    "traffic.stagger_s": ("float", ("traffic", "stagger_s")),
}

_RED_FIELDS = {
    "min_th": "float",
    "max_th": "float",
    "max_p": "float",
    "w_q": "float",
    "count_spread": "bool",
}


def _discipline_keys() -> dict:
    keys = {}
    for f, typ in _RED_FIELDS.items():
        keys[f"discipline.red.{f}"] = (typ, ("red", f))
        keys[f"discipline.fred.{f}"] = (typ, ("fred", "red", f))
        keys[f"discipline.choke.{f}"] = (typ, ("choke", "red", f))
    for f, typ in (
        ("min_q", "int"),
        ("two_packet_mode", "bool"),
        ("auto_thresholds", "bool"),
    ):
        keys[f"discipline.fred.{f}"] = (typ, ("fred", f))
    for f in ("d1", "d2", "freeze_time"):
        keys[f"discipline.blue.{f}"] = ("float", ("blue", f))
    for f, typ in (
        ("levels", "int"),
        ("bins", "int"),
        ("d1", "float"),
        ("d2", "float"),
        ("freeze_time", "float"),
        ("bin_size", "float"),
        ("boxtime", "float"),
        ("boxtime_jitter", "float"),
        ("h_interval", "float"),
    ):
        keys[f"discipline.sfb.{f}"] = (typ, ("sfb", f))
    for f, typ in (
        ("adaptive", "bool"),
        ("cand_num", "int"),
        ("interval_num", "int"),
    ):
        keys[f"discipline.choke.{f}"] = (typ, ("choke", f))
    return keys


SCHEMA: dict[str, tuple[str, tuple]] = {**_TOP, **_SECTIONS, **_discipline_keys()}

_SWEEP_KEYS = {"sweep.parameter", "sweep.values", "sweep.repetitions"}

# anything numeric or boolean can be swept; names and units cannot
SWEEPABLE_KEYS = {
    k for k, (typ, _) in SCHEMA.items() if typ in ("int", "float", "bool")
}


def get_param(cfg: ScenarioConfig, key: str):
    typ_path = SCHEMA.get(key)
    if typ_path is None:
        raise KeyError(f"unknown config key {key!r}")
    obj = cfg
    for attr in typ_path[1]:
        obj = getattr(obj, attr)
    return obj


def set_param(cfg: ScenarioConfig, key: str, value) -> None:
    typ_path = SCHEMA.get(key)
    if typ_path is None:
        raise KeyError(f"unknown config key {key!r}")
    path = typ_path[1]
    obj = cfg
    for attr in path[:-1]:
        obj = getattr(obj, attr)
    setattr(obj, path[-1], value)


# -- parsing -----------------------------------------------------------------

def _parse_scalar(typ: str, raw: str, key: str, errors: list[str]):
    raw = raw.strip()
    if typ == "str":
        return raw
    if typ == "bool":
        low = raw.lower()
        if low in ("true", "yes", "on", "1"):
            return True
        if low in ("false", "no", "off", "0"):
            return False
        errors.append(f"{key}: expected a boolean, got {raw!r}")
        return None
    try:
        value = float(raw)
    except ValueError:
        errors.append(f"{key}: expected a number, got {raw!r}")
        return None
    if typ == "int":
        if not value.is_integer():
            errors.append(f"{key}: expected an integer, got {raw!r}")
            return None
        return int(value)
    return value


def _parse_value_list(raw: str, key: str, errors: list[str]):
    values = []
    for part in raw.split(","):
        part = part.strip()
        if not part:
            continue
        try:
            v = float(part)
        except ValueError:
            errors.append(f"{key}: expected comma-separated numbers, got {part!r}")
            return []
        values.append(int(v) if v.is_integer() else v)
    if not values:
        errors.append(f"{key}: expected at least one value")
    return values


def parse_scenario(text: str):
    """Parse a config document into a ScenarioConfig or SweepSpec.

    Raises ConfigError listing every problem: unknown keys, bad values,
    violated invariants.
    """
    errors: list[str] = []
    entries: dict[str, str] = {}
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            errors.append(f"line {lineno}: expected 'key = value', got {raw_line.strip()!r}")
            continue
        key, _, raw = line.partition("=")
        key = key.strip()
        if key in entries:
            errors.append(f"line {lineno}: duplicate key {key!r}")
            continue
        entries[key] = raw

    cfg = ScenarioConfig()
    warmup_given = False
    sweep_fields: dict[str, object] = {}
    for key, raw in entries.items():
        if key in _SWEEP_KEYS:
            if key == "sweep.parameter":
                sweep_fields["parameter"] = raw.strip()
            elif key == "sweep.values":
                sweep_fields["values"] = _parse_value_list(raw, key, errors)
            else:
                v = _parse_scalar("int", raw, key, errors)
                if v is not None:
                    sweep_fields["repetitions"] = v
            continue
        spec = SCHEMA.get(key)
        if spec is None:
            errors.append(f"unknown key {key!r}")
            continue
        value = _parse_scalar(spec[0], raw, key, errors)
        if value is not None:
            if key == "warmup_s":
                warmup_given = True
            set_param(cfg, key, value)

    if not warmup_given:
        cfg.warmup_s = 0.1 * cfg.duration_s

    if sweep_fields:
        if "parameter" not in sweep_fields:
            errors.append("sweep.parameter is required for a sweep")
        if "values" not in sweep_fields:
            errors.append("sweep.values is required for a sweep")
        result = SweepSpec(
            base=cfg,
            parameter=sweep_fields.get("parameter", ""),
            values=sweep_fields.get("values", []),
            repetitions=sweep_fields.get("repetitions", 1),
        )
        errors.extend(err for err in result.validate() if err not in errors)
    else:
        result = cfg
        errors.extend(cfg.validate())

    if errors:
        raise ConfigError(errors)
    return result


# -- emission ------------------------------------------------------------------

def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def emit_scenario(cfg) -> str:
    """Render a config (or sweep) as parseable text; round-trips exactly."""
    if isinstance(cfg, SweepSpec):
        lines = emit_scenario(cfg.base).splitlines()
        lines.append(f"sweep.parameter = {cfg.parameter}")
        lines.append("sweep.values = " + ", ".join(_fmt(v) for v in cfg.values))
        lines.append(f"sweep.repetitions = {cfg.repetitions}")
        return "\n".join(lines) + "\n"

    lines = [f"discipline = {cfg.discipline}"]
    for key in ("duration_s", "warmup_s", "seed", "out_dir"):
        lines.append(f"{key} = {_fmt(getattr(cfg, key))}")
    for key in _SECTIONS:
        lines.append(f"{key} = {_fmt(get_param(cfg, key))}")
    prefix = f"discipline.{cfg.discipline}."
    for key in SCHEMA:
        if key.startswith(prefix):
            lines.append(f"{key} = {_fmt(get_param(cfg, key))}")
    return "\n".join(lines) + "\n"
