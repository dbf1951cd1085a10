"""Scenario files: ``section.key = value unit`` lines.

Example::

    # XOR point
    topology.r_vertex = 210 MΩ
    stimulus.inputs   = both
    sim.dt            = 0.5 us

Blank lines and ``#`` comments are ignored.  Omitted keys keep their
defaults (the standard segment and the 6/6/3 merge).  Dimensioned values
need a unit; ``µ``/``μ``/``u``, ``Ω``/``ohm`` and ``²``/``2`` are
interchangeable.  :meth:`ScenarioConfig.dump` writes every value in
canonical units and parses back to an identical config.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, fields, replace
from decimal import Decimal, InvalidOperation
from typing import Any, Callable, Literal

from .engine import SimConfig
from .logic import InputDrive
from .network import EDGE_CONVENTIONS, MergeParams
from .segment import (
    InvariantError,
    MembraneConstants,
    SegmentElectrical,
    SegmentGeometry,
    derive_electrical,
)


class ConfigError(ValueError):
    """Configuration text or values are invalid; ``line``/``column`` are 1-based."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "") + ": "
        super().__init__(where + message)


# canonical unit -> {accepted spelling: power of ten}
_UNITS: dict[str, dict[str, int]] = {
    "V": {"V": 0, "mV": -3, "uV": -6},
    "A": {"A": 0, "mA": -3, "uA": -6, "nA": -9, "pA": -12},
    "s": {"s": 0, "ms": -3, "us": -6, "ns": -9},
    "ohm": {"ohm": 0, "kohm": 3, "Mohm": 6, "M": 6, "Gohm": 9},
    "cm": {"cm": 0, "m": 2, "mm": -1, "um": -4, "nm": -7},
    "F/cm2": {"F/cm2": 0, "mF/cm2": -3, "uF/cm2": -6, "nF/cm2": -9},
    "S/cm2": {"S/cm2": 0, "mS/cm2": -3, "uS/cm2": -6},
    "A/cm2": {"A/cm2": 0, "mA/cm2": -3, "uA/cm2": -6, "nA/cm2": -9},
    "ohm*cm": {"ohm*cm": 0, "ohm-cm": 0, "ohmcm": 0, "kohm*cm": 3},
}

_NUMBER = re.compile(r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?")
_LINE = re.compile(r"^\s*([A-Za-z_][A-Za-z0-9_]*)\.([A-Za-z_][A-Za-z0-9_]*)\s*=\s*(.*?)\s*$")


def _normalize_unit(unit: str) -> str:
    for old, new in (("Ω", "ohm"), ("Ohm", "ohm"), ("OHM", "ohm"), ("µ", "u"), ("μ", "u"),
                     ("²", "2"), ("·", "*"), (" ", "")):
        unit = unit.replace(old, new)
    return unit


def parse_quantity(text: str, canonical: str) -> float:
    """Parse ``"<number> <unit>"`` into the canonical unit of its dimension.

    The decimal scaling is exact, so ``"269 uA/cm2"`` gives the same float
    as the literal ``269e-6``.
    """
    m = _NUMBER.match(text)
    if not m:
        raise ValueError(f"expected a number, got {text!r}")
    unit = _normalize_unit(text[m.end():].strip())
    if not unit:
        raise ValueError(f"missing unit (expected {canonical} or a scaled form)")
    table = _UNITS[canonical]
    if unit not in table:
        raise ValueError(f"unit {unit!r} is not a {canonical} unit (use one of {sorted(table)})")
    try:
        return float(Decimal(m.group(0)).scaleb(table[unit]))
    except InvalidOperation as exc:  # pragma: no cover - the regex guards this
        raise ValueError(str(exc)) from None


def _bool(text: str) -> bool:
    low = text.lower()
    if low in ("on", "true", "yes", "1"):
        return True
    if low in ("off", "false", "no", "0"):
        return False
    raise ValueError(f"expected on/off, got {text!r}")


def _int(text: str) -> int:
    if not re.fullmatch(r"[+-]?\d+", text):
        raise ValueError(f"expected an integer, got {text!r}")
    return int(text)


def _choice(*options: str) -> Callable[[str], str]:
    def parse(text: str) -> str:
        if text not in options:
            raise ValueError(f"expected one of {', '.join(options)}, got {text!r}")
        return text

    return parse


def _qty(canonical: str) -> Callable[[str], float]:
    return lambda text: parse_quantity(text, canonical)


def _r_vertex(text: str) -> float | None:
    return None if text == "nominal" else parse_quantity(text, "ohm")


@dataclass(frozen=True)
class TopologyConfig:
    branch_len: int = 6
    out_len: int = 3
    r_vertex: float | None = None  # None: same as every other segment
    vertex_sources: bool = True
    edge_convention: Literal["ladder", "split_half"] = "ladder"


@dataclass(frozen=True)
class StimulusConfig:
    kind: Literal["inject", "force"] = "inject"
    amplitude: float = 1e-9
    duration: float = 0.5e-3
    skew: float = 0.0
    inputs: Literal["none", "a", "b", "both"] = "a"

    def __post_init__(self) -> None:
        if not self.duration > 0:
            raise InvariantError(f"duration must be positive, got {self.duration!r}")
        if not self.skew >= 0:
            raise InvariantError(f"skew must be >= 0, got {self.skew!r}")

    @property
    def input_bits(self) -> tuple[int, int]:
        return {"none": (0, 0), "a": (1, 0), "b": (0, 1), "both": (1, 1)}[self.inputs]


# section -> key -> (parser, canonical unit or None)
_SCHEMA: dict[str, dict[str, tuple[Callable[[str], Any], str | None]]] = {
    "membrane": {
        "c_mem": (_qty("F/cm2"), "F/cm2"),
        "g_leak": (_qty("S/cm2"), "S/cm2"),
        "rho_axial": (_qty("ohm*cm"), "ohm*cm"),
        "j_na": (_qty("A/cm2"), "A/cm2"),
        "j_k": (_qty("A/cm2"), "A/cm2"),
        "v_rest": (_qty("V"), "V"),
        "v_trig": (_qty("V"), "V"),
        "v_max": (_qty("V"), "V"),
        "v_min": (_qty("V"), "V"),
        "rearm_delta": (_qty("V"), "V"),
    },
    "geometry": {
        "length": (_qty("cm"), "cm"),
        "diameter": (_qty("cm"), "cm"),
    },
    "topology": {
        "branch_len": (_int, None),
        "out_len": (_int, None),
        "r_vertex": (_r_vertex, "ohm"),
        "vertex_sources": (_bool, None),
        "edge_convention": (_choice(*EDGE_CONVENTIONS), None),
    },
    "stimulus": {
        "kind": (_choice("inject", "force"), None),
        "amplitude": (_qty("A"), "A"),
        "duration": (_qty("s"), "s"),
        "skew": (_qty("s"), "s"),
        "inputs": (_choice("none", "a", "b", "both"), None),
    },
    "sim": {
        "dt": (_qty("s"), "s"),
        "t_end": (_qty("s"), "s"),
        "record_stride": (_int, None),
        "method": (_choice("euler", "rk4"), None),
    },
}

_SECTION_TYPES = {
    "membrane": MembraneConstants,
    "geometry": SegmentGeometry,
    "topology": TopologyConfig,
    "stimulus": StimulusConfig,
    "sim": SimConfig,
}


@dataclass(frozen=True)
class ScenarioConfig:
    membrane: MembraneConstants = field(default_factory=MembraneConstants)
    geometry: SegmentGeometry = field(default_factory=SegmentGeometry)
    topology: TopologyConfig = field(default_factory=TopologyConfig)
    stimulus: StimulusConfig = field(default_factory=StimulusConfig)
    sim: SimConfig = field(default_factory=SimConfig)

    def __post_init__(self) -> None:
        if self.topology.branch_len < 2:
            raise InvariantError(f"branch_len must be >= 2, got {self.topology.branch_len}")
        if self.topology.out_len < 1:
            raise InvariantError(f"out_len must be >= 1, got {self.topology.out_len}")
        r = self.topology.r_vertex
        if r is not None and not r > 0:
            raise InvariantError(f"r_vertex must be positive, got {r!r}")

    def segment(self) -> SegmentElectrical:
        return derive_electrical(self.geometry, self.membrane)

    def merge_params(self) -> MergeParams:
        tc = self.topology
        return MergeParams(
            seg=self.segment(),
            branch_len=tc.branch_len,
            out_len=tc.out_len,
            r_vertex=tc.r_vertex,
            vertex_sources=tc.vertex_sources,
            convention=tc.edge_convention,
        )

    def drive(self) -> InputDrive:
        s = self.stimulus
        return InputDrive(s.kind, s.amplitude, s.duration)

    def dump(self) -> str:
        """Every value in canonical units, one ``section.key = value`` per line."""
        lines = []
        for section, keys in _SCHEMA.items():
            block = getattr(self, section)
            for key, (_, unit) in keys.items():
                value = getattr(block, key)
                if value is None:
                    text = "nominal"
                elif isinstance(value, bool):
                    text = "on" if value else "off"
                elif unit is not None:
                    text = f"{value!r} {unit}"
                else:
                    text = str(value)
                lines.append(f"{section}.{key} = {text}")
        return "\n".join(lines) + "\n"


def parse_config(text: str) -> ScenarioConfig:
    """Parse scenario text; see the module docstring for the format.

    Raises:
        ConfigError: malformed lines, unknown or repeated keys, bad values
            (with line and column) or violated invariants (naming the keys).
    """
    values: dict[str, dict[str, Any]] = {s: {} for s in _SCHEMA}
    where: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        m = _LINE.match(line)
        if not m:
            col = len(line) - len(line.lstrip()) + 1
            raise ConfigError("expected 'section.key = value'", lineno, col)
        section, key, value = m.groups()
        if section not in _SCHEMA:
            raise ConfigError(f"unknown section {section!r}", lineno, m.start(1) + 1)
        if key not in _SCHEMA[section]:
            raise ConfigError(f"unknown key {section}.{key}", lineno, m.start(2) + 1)
        dotted = f"{section}.{key}"
        if dotted in where:
            raise ConfigError(f"{dotted} already set on line {where[dotted]}", lineno, m.start(1) + 1)
        parser, _ = _SCHEMA[section][key]
        try:
            values[section][key] = parser(value)
        except ValueError as exc:
            raise ConfigError(f"{dotted}: {exc}", lineno, m.start(3) + 1) from None
        where[dotted] = lineno

    blocks = {}
    for section, cls in _SECTION_TYPES.items():
        try:
            blocks[section] = cls(**values[section])
        except InvariantError as exc:
            raise ConfigError(_blame(section, exc, where)) from None
    try:
        return ScenarioConfig(**blocks)
    except InvariantError as exc:
        raise ConfigError(_blame("topology", exc, where)) from None


def _blame(section: str, exc: Exception, where: dict[str, int]) -> str:
    msg = str(exc)
    named = [k for k in _SCHEMA[section] if re.search(rf"\b{k}\b", msg)]
    keys = [f"{section}.{k}" for k in named] or [section]
    set_here = [f"{k} (line {where[k]})" for k in keys if k in where]
    suffix = f"; set at {', '.join(set_here)}" if set_here else ""
    return f"invalid {', '.join(keys)}: {msg}{suffix}"


def with_overrides(cfg: ScenarioConfig, **sections: dict[str, Any]) -> ScenarioConfig:
    """Copy of ``cfg`` with some block fields replaced, e.g. ``topology={"vertex_sources": False}``."""
    blocks = {f.name: getattr(cfg, f.name) for f in fields(cfg)}
    for name, changes in sections.items():
        blocks[name] = replace(blocks[name], **changes)
    return ScenarioConfig(**blocks)
