"""Membrane constants, per-segment circuit values and the channel state machine.

A segment is one lumped patch of active dendrite: a capacitor, a leak
resistor to the rest potential, an axial series resistor toward its
neighbours and two switched current sources.  The sodium source is a
constant inward current that switches on when the membrane crosses the
trigger voltage and off at the peak voltage; the potassium source switches
on together with sodium and stays on until the membrane reaches the
undershoot voltage.

All quantities are SI (V, A, F, ohm, s) except the area-normalised membrane
densities and the geometry, which keep the customary cm-based units.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import IntEnum


class InvariantError(ValueError):
    """A parameter set violates one of its physical invariants."""


class Phase(IntEnum):
    """Excitation phase of one segment.

    The integer values are shared with the stepping kernels.
    """

    RESTING = 0
    DEPOLARIZING = 1
    REPOLARIZING = 2
    RECOVERING = 3

    @property
    def successor(self) -> "Phase":
        return Phase((self + 1) % 4)


TRANSITION_NAMES = {
    Phase.DEPOLARIZING: "resting->depolarizing",
    Phase.REPOLARIZING: "depolarizing->repolarizing",
    Phase.RECOVERING: "repolarizing->recovering",
    Phase.RESTING: "recovering->resting",
}


@dataclass(frozen=True)
class MembraneConstants:
    """Area-normalised membrane properties and the switching thresholds.

    Attributes:
        c_mem: specific capacitance, F/cm^2.
        g_leak: specific leak conductance, S/cm^2.
        rho_axial: axial resistivity, ohm*cm.
        j_na: sodium current density while depolarizing, A/cm^2.
        j_k: potassium current density, A/cm^2.
        v_rest, v_trig, v_max, v_min: rest, trigger, sodium-off and
            potassium-off voltages, V.
        rearm_delta: a recovering segment returns to rest once it is within
            this distance below ``v_rest``, V.
    """

    c_mem: float = 1e-6
    g_leak: float = 0.3e-3
    rho_axial: float = 15.7
    j_na: float = 269e-6
    j_k: float = 60.8e-6
    v_rest: float = -70e-3
    v_trig: float = -54e-3
    v_max: float = 48e-3
    v_min: float = -96e-3
    rearm_delta: float = 2e-3

    def __post_init__(self) -> None:
        for name in ("c_mem", "g_leak", "rho_axial", "j_na", "j_k"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise InvariantError(f"{name} must be positive, got {value!r}")
        if not self.v_min < self.v_rest < self.v_trig < self.v_max:
            raise InvariantError(
                "thresholds must satisfy v_min < v_rest < v_trig < v_max, got "
                f"v_min={self.v_min!r}, v_rest={self.v_rest!r}, "
                f"v_trig={self.v_trig!r}, v_max={self.v_max!r}"
            )
        if not self.j_na > self.j_k:
            raise InvariantError(
                f"j_na must exceed j_k, got j_na={self.j_na!r}, j_k={self.j_k!r}"
            )
        if not (0 <= self.rearm_delta < self.v_rest - self.v_min):
            raise InvariantError(
                f"rearm_delta must lie in [0, v_rest - v_min), got {self.rearm_delta!r}"
            )

    @property
    def v_rearm(self) -> float:
        return self.v_rest - self.rearm_delta


@dataclass(frozen=True)
class SegmentGeometry:
    """Cylindrical segment; both lengths in cm."""

    length: float = 500e-4
    diameter: float = 1e-4

    def __post_init__(self) -> None:
        for name in ("length", "diameter"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise InvariantError(f"{name} must be positive, got {value!r}")


@dataclass(frozen=True)
class SegmentElectrical:
    """Lumped circuit values of one segment.

    ``na_enabled``/``k_enabled`` model a patch whose channels are silenced
    (for instance by myelination); a segment without sodium never fires.
    """

    cap: float
    r_leak: float
    r_series: float
    i_na: float
    i_k: float
    na_enabled: bool = True
    k_enabled: bool = True

    def __post_init__(self) -> None:
        for name in ("cap", "r_leak", "r_series"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise InvariantError(f"{name} must be positive, got {value!r}")
        for name in ("i_na", "i_k"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise InvariantError(f"{name} must be non-negative, got {value!r}")

    def with_series(self, r_series: float) -> "SegmentElectrical":
        return replace(self, r_series=r_series)

    def passive(self) -> "SegmentElectrical":
        """Copy with both sources removed."""
        return replace(self, na_enabled=False, k_enabled=False)


def derive_electrical(geom: SegmentGeometry, mc: MembraneConstants) -> SegmentElectrical:
    """Lump the membrane densities over a cylindrical segment.

    The membrane area is the lateral surface ``pi * d * L``; the series
    resistance is the axial resistivity over the cross-section ``pi d^2 / 4``.
    """
    area = math.pi * geom.diameter * geom.length
    cross_section = math.pi * geom.diameter**2 / 4
    return SegmentElectrical(
        cap=mc.c_mem * area,
        r_leak=1.0 / (mc.g_leak * area),
        r_series=mc.rho_axial * geom.length / cross_section,
        i_na=mc.j_na * area,
        i_k=mc.j_k * area,
    )


def step_channel_state(
    phase: Phase,
    v_prev: float,
    v_now: float,
    seg: SegmentElectrical,
    mc: MembraneConstants,
) -> Phase:
    """Advance the phase after one voltage update.

    At most one transition happens per call.  The trigger needs an upward
    crossing of ``v_trig`` between ``v_prev`` and ``v_now``; the other
    transitions only look at ``v_now``.
    """
    phase = Phase(phase)
    if phase is Phase.RESTING:
        if seg.na_enabled and v_prev < mc.v_trig <= v_now:
            return Phase.DEPOLARIZING
    elif phase is Phase.DEPOLARIZING:
        if v_now >= mc.v_max:
            return Phase.REPOLARIZING
    elif phase is Phase.REPOLARIZING:
        if v_now <= mc.v_min:
            return Phase.RECOVERING
    elif phase is Phase.RECOVERING:
        if v_now >= mc.v_rearm:
            return Phase.RESTING
    return phase


def source_current(phase: Phase, seg: SegmentElectrical) -> float:
    """Net membrane source current in A; positive charges the membrane."""
    phase = Phase(phase)
    i_k = seg.i_k if seg.k_enabled else 0.0
    if phase is Phase.DEPOLARIZING:
        return (seg.i_na if seg.na_enabled else 0.0) - i_k
    if phase is Phase.REPOLARIZING:
        return -i_k
    return 0.0
