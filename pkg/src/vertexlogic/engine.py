"""Transient integration of a segment network with switched sources.

Each node obeys::

    C_i dV_i/dt = (v_rest - V_i) / R_leak,i
                  + sum_j (V_j - V_i) / R_edge(i, j)
                  + I_source,i(phase_i) + I_stim,i(t)

The sources are ideal: their value depends only on the node's phase, never
on the load.  Voltages advance by forward Euler (or classical RK4 with the
phases frozen over the step); afterwards every node's phase is advanced
once from its pre- and post-step voltages.

The stepping loop lives in a compiled Cython extension when it is
available and in numpy otherwise.  Set ``VERTEXLOGIC_BACKEND=python`` to
force the fallback.
"""

from __future__ import annotations

import csv
import io
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Literal, Sequence

import numpy as np

from . import _kernel_py
from .network import (
    CurrentInjection,
    ForceTrigger,
    Stimulus,
    Topology,
    TopologyError,
    edge_resistance,
    retarget,
    validate,
)
from .segment import (
    TRANSITION_NAMES,
    InvariantError,
    MembraneConstants,
    Phase,
    source_current,
)

try:
    from . import _kernel as _kernel_c
except ImportError:  # pragma: no cover - depends on the build
    _kernel_c = None

__all__ = [
    "AVAILABLE_BACKENDS",
    "DEFAULT_BACKEND",
    "Event",
    "NumericalError",
    "SimConfig",
    "WaveformSet",
    "edge_resistance",
    "simulate",
]

AVAILABLE_BACKENDS: tuple[str, ...] = ("cython", "python") if _kernel_c else ("python",)
_requested = os.environ.get("VERTEXLOGIC_BACKEND", "").strip().lower()
DEFAULT_BACKEND = _requested if _requested in AVAILABLE_BACKENDS else AVAILABLE_BACKENDS[0]


class NumericalError(RuntimeError):
    """A node voltage left [-1 V, 1 V] or became non-finite."""

    def __init__(self, node: str, time: float):
        super().__init__(f"numerical blow-up at node {node} at t = {time:.9g} s")
        self.node = node
        self.time = time


@dataclass(frozen=True)
class SimConfig:
    dt: float = 1e-6
    t_end: float = 50e-3
    record_stride: int = 10
    method: Literal["euler", "rk4"] = "euler"

    def __post_init__(self) -> None:
        if not self.dt > 0:
            raise InvariantError(f"dt must be positive, got {self.dt!r}")
        if not self.t_end > self.dt:
            raise InvariantError(f"t_end must exceed dt, got t_end={self.t_end!r}")
        if not (isinstance(self.record_stride, int) and self.record_stride >= 1):
            raise InvariantError(f"record_stride must be an int >= 1, got {self.record_stride!r}")
        if self.method not in ("euler", "rk4"):
            raise InvariantError(f"method must be 'euler' or 'rk4', got {self.method!r}")

    @property
    def steps(self) -> int:
        return int(round(self.t_end / self.dt))

    def step_of(self, t: float) -> int:
        return int(round(t / self.dt))


@dataclass(frozen=True)
class Event:
    node: str
    time: float
    phase: Phase

    @property
    def transition(self) -> str:
        return TRANSITION_NAMES[self.phase]


@dataclass(frozen=True)
class WaveformSet:
    """Decimated node voltages plus the full phase-transition log.

    ``voltages`` has shape ``(len(times), len(node_ids))``.
    """

    times: np.ndarray
    voltages: np.ndarray
    node_ids: tuple[str, ...]
    events: tuple[Event, ...] = field(default=())

    def column(self, node: str) -> int:
        try:
            return self.node_ids.index(node)
        except ValueError:
            raise TopologyError(f"unknown node {node!r}") from None

    def voltage(self, node: str) -> np.ndarray:
        return self.voltages[:, self.column(node)]

    def events_at(self, node: str) -> list[Event]:
        self.column(node)
        return [e for e in self.events if e.node == node]

    def pulse_count(self, node: str) -> int:
        """Number of completed upstrokes (depolarizing -> repolarizing) at ``node``."""
        return sum(1 for e in self.events_at(node) if e.phase is Phase.REPOLARIZING)

    def waveform_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["time_s", *self.node_ids])
        for t, row in zip(self.times, self.voltages):
            w.writerow([f"{t:.12g}", *(f"{x:.12g}" for x in row)])
        return buf.getvalue()

    def events_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["node", "time_s", "transition"])
        for e in self.events:
            w.writerow([e.node, f"{e.time:.12g}", e.transition])
        return buf.getvalue()

    def write_csv(self, out_dir: str | os.PathLike, prefix: str = "") -> tuple[Path, Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        wave = out / f"{prefix}waveforms.csv"
        events = out / f"{prefix}events.csv"
        wave.write_text(self.waveform_csv())
        events.write_text(self.events_csv())
        return wave, events


def _stimulus_arrays(stimuli: Iterable[Stimulus], t: Topology, cfg: SimConfig):
    inj_node, inj_k0, inj_k1, inj_amp, force_node, force_k = [], [], [], [], [], []
    for s in retarget(list(stimuli), t):
        if isinstance(s, CurrentInjection):
            k0 = cfg.step_of(s.start)
            inj_node.append(t.index(s.target))
            inj_k0.append(k0)
            inj_k1.append(k0 + max(1, cfg.step_of(s.duration)))
            inj_amp.append(s.amplitude)
        elif isinstance(s, ForceTrigger):
            force_node.append(t.index(s.target))
            force_k.append(cfg.step_of(s.time))
        else:
            raise TypeError(f"not a stimulus: {s!r}")
    ints = lambda xs: np.asarray(xs, dtype=np.int_)  # noqa: E731
    return (ints(inj_node), ints(inj_k0), ints(inj_k1), np.asarray(inj_amp, dtype=np.float64),
            ints(force_node), ints(force_k))


def simulate(
    t: Topology,
    stimuli: Sequence[Stimulus],
    cfg: SimConfig,
    mc: MembraneConstants,
    *,
    backend: str | None = None,
) -> WaveformSet:
    """Run one transient from rest and return waveforms and the event log.

    Stimulus targets may be node ids or role labels of ``t``.

    Raises:
        TopologyError: ``t`` fails :func:`validate`.
        NumericalError: a voltage left [-1 V, 1 V].
    """
    report = validate(t)
    if not report.ok:
        raise TopologyError(str(report))
    backend = backend or DEFAULT_BACKEND
    if backend not in AVAILABLE_BACKENDS:
        raise ValueError(f"backend {backend!r} not available (have {AVAILABLE_BACKENDS})")

    segs = [s for _, s in t.nodes]
    f64 = lambda xs: np.asarray(xs, dtype=np.float64)  # noqa: E731
    cap = f64([s.cap for s in segs])
    r_leak = f64([s.r_leak for s in segs])
    src_dep = f64([source_current(Phase.DEPOLARIZING, s) for s in segs])
    src_rep = f64([source_current(Phase.REPOLARIZING, s) for s in segs])
    na_en = np.asarray([s.na_enabled for s in segs], dtype=np.uint8)
    ei = np.asarray([t.index(a) for a, _, _ in t.edges], dtype=np.int_)
    ej = np.asarray([t.index(b) for _, b, _ in t.edges], dtype=np.int_)
    r_edge = f64([r for _, _, r in t.edges])
    stim = _stimulus_arrays(stimuli, t, cfg)
    thresholds = (mc.v_rest, mc.v_trig, mc.v_max, mc.v_min, mc.v_rearm)
    nsteps, stride = cfg.steps, cfg.record_stride
    rk4 = cfg.method == "rk4"

    if backend == "cython":
        capacity = 64 * len(segs)
        while True:
            out = _kernel_c.run(cap, r_leak, src_dep, src_rep, na_en, ei, ej, r_edge, *stim,
                                *thresholds, cfg.dt, nsteps, stride, rk4, capacity)
            if out[4] != _kernel_c.STATUS_OVERFLOW:
                break
            capacity *= 4
    else:
        out = _kernel_py.run(cap, r_leak, src_dep, src_rep, na_en, ei, ej, r_edge, *stim,
                             *thresholds, cfg.dt, nsteps, stride, rk4)

    rec, ev_node, ev_step, ev_phase, status, bad_node, bad_step = out
    ids = tuple(t.node_ids)
    if status == _kernel_py.STATUS_BLOWUP:
        raise NumericalError(ids[bad_node], bad_step * cfg.dt)
    events = tuple(
        Event(ids[i], float(k) * cfg.dt, Phase(p)) for i, k, p in zip(ev_node, ev_step, ev_phase)
    )
    times = np.arange(rec.shape[0], dtype=np.float64) * (stride * cfg.dt)
    return WaveformSet(times, rec, ids, events)
