"""Boolean read-out of vertex simulations.

Inputs ``A`` and ``B`` are the two branch terminals (``input_a`` and
``input_b``); the output is a full pulse at ``output_probe``.  Truth tables
are ordered ``(A, B) = (0,0), (0,1), (1,0), (1,1)``.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable, Literal, Sequence, TypeVar

import numpy as np

from .engine import SimConfig, WaveformSet, simulate
from .network import CurrentInjection, ForceTrigger, MergeParams, Stimulus, Topology
from .segment import MembraneConstants, Phase

INPUT_PAIRS: tuple[tuple[int, int], ...] = ((0, 0), (0, 1), (1, 0), (1, 1))

T = TypeVar("T")
R = TypeVar("R")


def _default_workers() -> int:
    return min(8, os.cpu_count() or 1)


def _pmap(fn: Callable[[T], R], items: Sequence[T], workers: int | None) -> list[R]:
    # the compiled kernel releases the GIL, so threads run simulations in parallel;
    # map() keeps the results in input order
    workers = _default_workers() if workers is None else workers
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


class GateKind(Enum):
    """The 16 two-input Boolean functions, valued by their output bits.

    Bit 3 (most significant) is the output for ``(0,0)``, bit 0 for ``(1,1)``.
    """

    FALSE = 0b0000
    AND = 0b0001
    A_NIMP_B = 0b0010
    A = 0b0011
    B_NIMP_A = 0b0100
    B = 0b0101
    XOR = 0b0110
    OR = 0b0111
    NOR = 0b1000
    XNOR = 0b1001
    NOT_B = 0b1010
    B_IMP_A = 0b1011
    NOT_A = 0b1100
    A_IMP_B = 0b1101
    NAND = 0b1110
    TRUE = 0b1111

    @property
    def table(self) -> "TruthTable":
        return TruthTable(tuple(bool(self.value >> (3 - k) & 1) for k in range(4)))


@dataclass(frozen=True)
class TruthTable:
    outputs: tuple[bool, bool, bool, bool]

    def __post_init__(self) -> None:
        if len(self.outputs) != 4 or not all(isinstance(x, (bool, np.bool_)) for x in self.outputs):
            raise ValueError(f"a truth table needs exactly four Booleans, got {self.outputs!r}")
        object.__setattr__(self, "outputs", tuple(bool(x) for x in self.outputs))

    @classmethod
    def from_bits(cls, bits: Iterable[int]) -> "TruthTable":
        return cls(tuple(bool(b) for b in bits))

    def __getitem__(self, pair: tuple[int, int]) -> bool:
        return self.outputs[INPUT_PAIRS.index(tuple(pair))]

    @property
    def bits(self) -> tuple[int, int, int, int]:
        return tuple(int(x) for x in self.outputs)

    def format(self) -> str:
        lines = ["A B | out"]
        lines += [f"{a} {b} |  {int(o)}" for (a, b), o in zip(INPUT_PAIRS, self.outputs)]
        return "\n".join(lines)


def classify_gate(tt: TruthTable) -> GateKind:
    code = 0
    for bit in tt.outputs:
        code = (code << 1) | int(bit)
    return GateKind(code)


def detect_output(w: WaveformSet, probe: str) -> bool:
    """True iff ``probe`` both triggers and reaches the sodium-off voltage.

    A node that crosses the trigger but never completes the upstroke does
    not count.
    """
    seen_trigger = False
    for e in w.events_at(probe):
        if e.phase is Phase.DEPOLARIZING:
            seen_trigger = True
        elif e.phase is Phase.REPOLARIZING and seen_trigger:
            return True
    return False


StimulusKind = Literal["inject", "force"]


@dataclass(frozen=True)
class InputDrive:
    """How a logical 1 is applied at an input terminal."""

    kind: StimulusKind = "inject"
    amplitude: float = 1e-9
    duration: float = 0.5e-3

    def stimuli(self, a: int, b: int, skew: float = 0.0) -> list[Stimulus]:
        out: list[Stimulus] = []
        for role, on, start in (("input_a", a, 0.0), ("input_b", b, skew)):
            if not on:
                continue
            if self.kind == "force":
                out.append(ForceTrigger(role, start))
            else:
                out.append(CurrentInjection(role, self.amplitude, start, self.duration))
        return out


def truth_table_runs(
    t: Topology,
    cfg: SimConfig,
    mc: MembraneConstants,
    skew: float = 0.0,
    *,
    drive: InputDrive = InputDrive(),
    pairs: Sequence[tuple[int, int]] = INPUT_PAIRS,
    backend: str | None = None,
    workers: int | None = None,
) -> list[WaveformSet]:
    """Simulate each input pair; ``input_b`` fires ``skew`` seconds late."""
    return _pmap(
        lambda ab: simulate(t, drive.stimuli(*ab, skew), cfg, mc, backend=backend),
        list(pairs),
        workers,
    )


def truth_table(
    t: Topology,
    cfg: SimConfig,
    mc: MembraneConstants,
    skew: float = 0.0,
    *,
    drive: InputDrive = InputDrive(),
    backend: str | None = None,
    workers: int | None = None,
) -> TruthTable:
    runs = truth_table_runs(t, cfg, mc, skew, drive=drive, backend=backend, workers=workers)
    probe = t.resolve("output_probe")
    return TruthTable(tuple(detect_output(w, probe) for w in runs))


def skew_tolerance(
    t: Topology,
    cfg: SimConfig,
    mc: MembraneConstants,
    *,
    resolution: float = 10e-6,
    max_skew: float = 2e-3,
    drive: InputDrive = InputDrive(),
    backend: str | None = None,
) -> float | None:
    """Largest input skew (on the ``resolution`` grid) that keeps the XOR table.

    Returns None when the topology is not an XOR at zero skew, and
    ``max_skew`` if the table survives the whole scan.
    """
    if classify_gate(truth_table(t, cfg, mc, 0.0, drive=drive, backend=backend)) is not GateKind.XOR:
        return None
    probe = t.resolve("output_probe")
    best = 0.0
    for k in range(1, int(round(max_skew / resolution)) + 1):
        skew = k * resolution
        both = simulate(t, drive.stimuli(1, 1, skew), cfg, mc, backend=backend)
        single_b = simulate(t, drive.stimuli(0, 1, skew), cfg, mc, backend=backend)
        if detect_output(both, probe) or not detect_output(single_b, probe):
            break
        best = skew
    return best


def pulse_width(w: WaveformSet, node: str, mc: MembraneConstants = MembraneConstants()) -> float | None:
    """Full width at half amplitude of the first pulse at ``node``.

    Amplitude is measured from ``mc.v_rest`` to the pulse peak; crossings of
    the half level are linearly interpolated between samples.  Returns None
    if the node never rises above ``mc.v_trig``.
    """
    v = w.voltage(node)
    t = w.times
    above = np.flatnonzero(v > mc.v_trig)
    if above.size == 0:
        return None
    start = int(above[0])
    below = np.flatnonzero(v[start:] < mc.v_rest)
    stop = start + int(below[0]) if below.size else v.size
    peak_at = start + int(np.argmax(v[start:stop]))
    level = mc.v_rest + (v[peak_at] - mc.v_rest) / 2

    i = peak_at
    while i > 0 and v[i - 1] >= level:
        i -= 1
    if i == 0:
        t_rise = t[0]
    else:
        t_rise = t[i - 1] + (level - v[i - 1]) * (t[i] - t[i - 1]) / (v[i] - v[i - 1])
    j = peak_at
    while j < v.size - 1 and v[j + 1] >= level:
        j += 1
    if j == v.size - 1:
        t_fall = t[-1]
    else:
        t_fall = t[j] + (v[j] - level) * (t[j + 1] - t[j]) / (v[j] - v[j + 1])
    return float(t_fall - t_rise)


@dataclass(frozen=True)
class Boundary:
    """A refined gate change: ``gate_low`` at ``r_low``, ``gate_high`` at ``r_high``."""

    r_low: float
    r_high: float
    gate_low: GateKind
    gate_high: GateKind

    @property
    def r_mid(self) -> float:
        return (self.r_low + self.r_high) / 2


@dataclass(frozen=True)
class RegimeReport:
    """Sampled classifications of a vertex-resistance scan.

    ``intervals`` partitions the scanned range into maximal constant-gate
    pieces, split at the midpoint of each refined boundary bracket.
    """

    samples: tuple[tuple[float, GateKind], ...]
    intervals: tuple[tuple[float, float, GateKind], ...]
    transitions: tuple[Boundary, ...] = field(default=())

    @property
    def sequence(self) -> list[GateKind]:
        return [g for _, _, g in self.intervals]

    def interval_of(self, gate: GateKind) -> tuple[float, float] | None:
        for lo, hi, g in self.intervals:
            if g is gate:
                return lo, hi
        return None

    def to_csv(self) -> str:
        lines = [
            f"# boundary {b.r_low:.12g} {b.r_high:.12g} {b.gate_low.name}->{b.gate_high.name}"
            for b in self.transitions
        ]
        lines.append("r_vertex_ohm,gate")
        lines += [f"{r:.12g},{g.name}" for r, g in self.samples]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_csv(cls, text: str) -> "RegimeReport":
        samples = []
        transitions = []
        for line in text.splitlines():
            if line.startswith("# boundary"):
                _, _, lo, hi, change = line.split()
                a, b = change.split("->")
                transitions.append(Boundary(float(lo), float(hi), GateKind[a], GateKind[b]))
            elif line and not line.startswith(("#", "r_vertex_ohm")):
                r, g = line.split(",")
                samples.append((float(r), GateKind[g]))
        return cls(tuple(samples), _intervals(samples, transitions), tuple(transitions))


def _intervals(samples, transitions) -> tuple[tuple[float, float, GateKind], ...]:
    if not samples:
        return ()
    cuts = {(b.r_low, b.r_high): b.r_mid for b in transitions}
    out = []
    lo = samples[0][0]
    for (r0, g0), (r1, g1) in zip(samples, samples[1:]):
        if g0 is not g1:
            mid = cuts.get((r0, r1), (r0 + r1) / 2)
            out.append((lo, mid, g0))
            lo = mid
    out.append((lo, samples[-1][0], samples[-1][1]))
    return tuple(out)


def _grid(lo: float, hi: float, step: float) -> list[float]:
    n = int(math.floor((hi - lo) / step + 1e-9))
    points = [lo + k * step for k in range(n + 1)]
    if hi - points[-1] > 1e-9 * max(1.0, abs(hi)):
        points.append(hi)
    return points


def scan_regimes(
    classify: Callable[[float], GateKind],
    r_range: tuple[float, float],
    coarse_step: float,
    *,
    resolution: float = 1e6,
    workers: int | None = None,
) -> RegimeReport:
    """Coarse grid plus bisection of every gate change.

    The range is first sampled every ``coarse_step`` (the upper end is
    always included).  Each pair of adjacent samples with different gates is
    then bisected until the bracket is at most ``resolution`` wide; a third
    gate that only shows up mid-bisection gets bracketed on both sides.
    """
    lo, hi = r_range
    if not (lo > 0 and hi >= lo):
        raise ValueError(f"r_range must be ascending and positive, got {r_range!r}")
    if not coarse_step > 0:
        raise ValueError(f"coarse_step must be positive, got {coarse_step!r}")

    grid = _grid(lo, hi, coarse_step)
    coarse = list(zip(grid, _pmap(classify, grid, workers)))

    def refine(pair):
        (a, ga), (b, gb) = pair
        found: list[tuple[float, GateKind]] = []
        brackets: list[Boundary] = []
        stack = [(a, ga, b, gb)]
        while stack:
            a, ga, b, gb = stack.pop()
            while b - a > resolution:
                m = (a + b) / 2
                gm = classify(m)
                found.append((m, gm))
                if gm is ga:
                    a = m
                elif gm is gb:
                    b = m
                else:
                    stack.append((m, gm, b, gb))
                    b, gb = m, gm
            brackets.append(Boundary(a, b, ga, gb))
        return found, brackets

    changes = [(p, q) for p, q in zip(coarse, coarse[1:]) if p[1] is not q[1]]
    samples = list(coarse)
    transitions: list[Boundary] = []
    for found, brackets in _pmap(refine, changes, workers):
        samples += found
        transitions += brackets
    samples.sort(key=lambda s: s[0])
    transitions.sort(key=lambda b: b.r_low)
    return RegimeReport(tuple(samples), _intervals(samples, transitions), tuple(transitions))


def sweep_vertex_resistance(
    base: MergeParams,
    r_range: tuple[float, float],
    coarse_step: float,
    cfg: SimConfig,
    mc: MembraneConstants,
    *,
    resolution: float = 1e6,
    skew: float = 0.0,
    drive: InputDrive = InputDrive(),
    backend: str | None = None,
    workers: int | None = None,
) -> RegimeReport:
    """Classify the vertex gate of ``base`` over a range of vertex resistances."""

    def classify(r: float) -> GateKind:
        t = base.with_r_vertex(r).build()
        return classify_gate(truth_table(t, cfg, mc, skew, drive=drive, backend=backend, workers=1))

    return scan_regimes(classify, r_range, coarse_step, resolution=resolution, workers=workers)
