import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vertexlogic.segment import (
    InvariantError,
    MembraneConstants,
    Phase,
    SegmentElectrical,
    SegmentGeometry,
    derive_electrical,
    source_current,
    step_channel_state,
)

mV = 1e-3
nA = 1e-9
pF = 1e-12
MOHM = 1e6
UM = 1e-4  # cm


@pytest.mark.parametrize(
    "attr, expected",
    [("cap", 15.7 * pF), ("r_leak", 212 * MOHM), ("r_series", 99.9 * MOHM),
     ("i_na", 4.22 * nA), ("i_k", 0.955 * nA)],
)
def test_derive_reproduces_published_segment(seg, attr, expected):
    assert getattr(seg, attr) == pytest.approx(expected, rel=5e-3)
    assert seg.na_enabled and seg.k_enabled


def test_doubling_length(mc, seg):
    long = derive_electrical(SegmentGeometry(length=1000 * UM, diameter=1 * UM), mc)
    assert long.cap == pytest.approx(31.4 * pF, rel=5e-3)
    assert long.r_leak == pytest.approx(106 * MOHM, rel=5e-3)
    assert long.r_series == pytest.approx(199.8 * MOHM, rel=5e-3)


def test_doubling_diameter(mc):
    # by hand: A = pi * 2e-4 cm * 0.05 cm = 3.14159e-5 cm^2 -> C = 31.4159 pF;
    # R = 15.7 * 0.05 / (pi * (2e-4)^2 / 4) = 0.785e8 / pi ohm = 24.98733 MOhm
    wide = derive_electrical(SegmentGeometry(length=500 * UM, diameter=2 * UM), mc)
    assert wide.cap == pytest.approx(31.4159e-12, rel=1e-5)
    assert wide.r_series == pytest.approx(24.98733e6, rel=1e-5)


@given(k=st.floats(0.01, 100), length=st.floats(1e-4, 1.0), diameter=st.floats(1e-5, 1e-2))
def test_derive_is_homogeneous_in_length(k, length, diameter):
    mc = MembraneConstants()
    base = derive_electrical(SegmentGeometry(length, diameter), mc)
    scaled = derive_electrical(SegmentGeometry(length * k, diameter), mc)
    assert scaled.cap == pytest.approx(base.cap * k, rel=1e-12)
    assert scaled.i_na == pytest.approx(base.i_na * k, rel=1e-12)
    assert scaled.r_leak == pytest.approx(base.r_leak / k, rel=1e-12)
    assert scaled.r_series == pytest.approx(base.r_series * k, rel=1e-12)


@pytest.mark.parametrize(
    "phase, v_prev, v_now, expected",
    [
        (Phase.RESTING, -55 * mV, -53 * mV, Phase.DEPOLARIZING),
        (Phase.DEPOLARIZING, 40 * mV, 49 * mV, Phase.REPOLARIZING),
        (Phase.REPOLARIZING, -95 * mV, -97 * mV, Phase.RECOVERING),
        (Phase.RESTING, -70 * mV, -70 * mV, Phase.RESTING),
        (Phase.RECOVERING, -73 * mV, -72 * mV, Phase.RESTING),
        (Phase.RECOVERING, -80 * mV, -72.5 * mV, Phase.RECOVERING),
        # downward crossing of the trigger does not fire
        (Phase.RESTING, -53 * mV, -55 * mV, Phase.RESTING),
        # already above trigger: needs a fresh crossing
        (Phase.RESTING, -50 * mV, -49 * mV, Phase.RESTING),
        (Phase.RESTING, -55 * mV, -54 * mV, Phase.DEPOLARIZING),
    ],
)
def test_step_channel_state(mc, seg, phase, v_prev, v_now, expected):
    assert step_channel_state(phase, v_prev, v_now, seg, mc) is expected


def test_disabled_segment_never_triggers(mc, seg):
    assert step_channel_state(Phase.RESTING, -80 * mV, 40 * mV, seg.passive(), mc) is Phase.RESTING


@pytest.mark.parametrize(
    "phase, expected",
    [(Phase.DEPOLARIZING, 3.265 * nA), (Phase.REPOLARIZING, -0.955 * nA),
     (Phase.RESTING, 0.0), (Phase.RECOVERING, 0.0)],
)
def test_source_current(seg, phase, expected):
    assert source_current(phase, seg) == pytest.approx(expected, rel=5e-3, abs=1e-15)


@pytest.mark.parametrize("phase", list(Phase))
def test_removed_sources_give_zero(seg, phase):
    assert source_current(phase, seg.passive()) == 0.0


def test_k_only_removed(seg):
    from dataclasses import replace

    no_k = replace(seg, k_enabled=False)
    assert source_current(Phase.DEPOLARIZING, no_k) == seg.i_na
    assert source_current(Phase.REPOLARIZING, no_k) == 0.0


def _isolated_rate(phase, v, seg, mc):
    return (mc.v_rest - v) / seg.r_leak + source_current(phase, seg)


def test_isolated_depolarizing_always_reaches_peak(mc, seg):
    worst = _isolated_rate(Phase.DEPOLARIZING, mc.v_max, seg, mc)
    assert worst == pytest.approx(3.265 * nA - 0.557 * nA, rel=5e-3)
    for k in range(200):
        v = mc.v_min + (mc.v_max - mc.v_min) * k / 200
        assert _isolated_rate(Phase.DEPOLARIZING, v, seg, mc) > 0


def test_isolated_repolarizing_always_reaches_undershoot(mc, seg):
    worst = _isolated_rate(Phase.REPOLARIZING, mc.v_min, seg, mc)
    assert worst == pytest.approx(-0.955 * nA + 0.123 * nA, rel=5e-3)
    for k in range(1, 201):
        v = mc.v_min + (mc.v_max + 0.01 - mc.v_min) * k / 200
        assert _isolated_rate(Phase.REPOLARIZING, v, seg, mc) < 0


@settings(max_examples=200)
@given(st.lists(st.floats(-0.12, 0.08), min_size=2, max_size=300), st.booleans())
def test_phase_cycle_order(trajectory, na_enabled):
    mc = MembraneConstants()
    seg = SegmentElectrical(15.7e-12, 212e6, 99.9e6, 4.22e-9, 0.955e-9, na_enabled, True)
    phase = Phase.RESTING
    for v_prev, v_now in zip(trajectory, trajectory[1:]):
        nxt = step_channel_state(phase, v_prev, v_now, seg, mc)
        assert nxt is phase or nxt is phase.successor
        if not na_enabled:
            assert nxt is Phase.RESTING
        phase = nxt


@pytest.mark.parametrize(
    "kwargs",
    [dict(v_trig=-0.1), dict(v_min=-0.05), dict(v_max=-0.06), dict(c_mem=0.0),
     dict(j_na=50e-6, j_k=60e-6), dict(g_leak=-1.0), dict(rearm_delta=0.05)],
)
def test_membrane_invariants(kwargs):
    with pytest.raises(InvariantError):
        MembraneConstants(**kwargs)


def test_geometry_and_electrical_invariants():
    with pytest.raises(InvariantError):
        SegmentGeometry(length=0.0)
    with pytest.raises(InvariantError):
        SegmentElectrical(cap=1e-12, r_leak=1e6, r_series=-1.0, i_na=0, i_k=0)
    with pytest.raises(InvariantError):
        SegmentElectrical(cap=1e-12, r_leak=1e6, r_series=1e6, i_na=-1e-9, i_k=0)
    assert math.isclose(MembraneConstants().v_rearm, -0.072)
