import pytest
from hypothesis import given
from hypothesis import strategies as st

from vertexlogic.config import (
    ConfigError,
    ScenarioConfig,
    parse_config,
    parse_quantity,
    with_overrides,
)
from vertexlogic.engine import SimConfig
from vertexlogic.segment import MembraneConstants, SegmentGeometry


def test_empty_is_defaults():
    cfg = parse_config("")
    assert cfg == ScenarioConfig()
    seg = cfg.segment()
    assert seg.cap == pytest.approx(15.7e-12, rel=5e-3)
    assert seg.r_series == pytest.approx(99.9e6, rel=5e-3)
    assert cfg.merge_params().resolved_r_vertex == seg.r_series


def test_single_override():
    cfg = parse_config("topology.r_vertex = 200 MΩ\n")
    assert cfg.topology.r_vertex == 200e6
    assert cfg == with_overrides(ScenarioConfig(), topology={"r_vertex": 200e6})


def test_comments_and_blank_lines():
    text = "# scenario\n\n  sim.dt = 0.5 us   # finer\nstimulus.inputs = both\n"
    cfg = parse_config(text)
    assert cfg.sim.dt == 0.5e-6
    assert cfg.stimulus.input_bits == (1, 1)


def test_threshold_invariant_named():
    with pytest.raises(ConfigError) as info:
        parse_config("membrane.v_trig = -100 mV")
    msg = str(info.value)
    assert "membrane.v_trig" in msg and "v_rest < v_trig" in msg and "line 1" in msg


@pytest.mark.parametrize(
    "text, line, column, fragment",
    [
        ("sim.dt = 1 us\nsim.dt 5", 2, 1, "section.key = value"),
        ("\n\nfoo.bar = 1", 3, 1, "unknown section"),
        ("membrane.bogus = 1 V", 1, 10, "unknown key"),
        ("sim.dt = 1", 1, 10, "missing unit"),
        ("sim.dt =   3 kg", 1, 12, "not a s unit"),
        ("topology.branch_len = six", 1, 23, "integer"),
        ("topology.vertex_sources = maybe", 1, 27, "on/off"),
        ("sim.dt = 1 us\nsim.dt = 2 us", 2, 1, "already set on line 1"),
        ("sim.method = heun", 1, 14, "euler"),
    ],
)
def test_parse_errors_are_located(text, line, column, fragment):
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    assert info.value.line == line
    assert info.value.column == column
    assert fragment in str(info.value)


@pytest.mark.parametrize(
    "text, expected",
    [
        ("membrane.c_mem = 1 µF/cm²", 1e-6),
        ("membrane.c_mem = 1 uF/cm2", 1e-6),
        ("membrane.c_mem = 1 μF/cm2", 1e-6),
        ("membrane.g_leak = 0.3 mS/cm²", 0.3e-3),
        ("membrane.rho_axial = 15.7 Ohm-cm", 15.7),
        ("membrane.rho_axial = 15.7 Ω·cm", 15.7),
        ("membrane.j_na = 269 µA/cm²", 269e-6),
        ("membrane.j_k = 60.8 uA/cm2", 60.8e-6),
    ],
)
def test_membrane_units(text, expected):
    cfg = parse_config(text)
    key = text.split("=")[0].strip().split(".")[1]
    assert getattr(cfg.membrane, key) == expected


@pytest.mark.parametrize(
    "text, canonical, expected",
    [("200 MΩ", "ohm", 200e6), ("200MOhm", "ohm", 200e6), ("99.9 M", "ohm", 99.9e6),
     ("1.5e3 kohm", "ohm", 1.5e6), ("500 µm", "cm", 500e-4), ("1 um", "cm", 1e-4),
     ("-54 mV", "V", -54e-3), ("+48 mV", "V", 48e-3), ("1 nA", "A", 1e-9),
     ("0.5 ms", "s", 0.5e-3), ("20us", "s", 20e-6), (".5 s", "s", 0.5)],
)
def test_parse_quantity(text, canonical, expected):
    assert parse_quantity(text, canonical) == expected


def test_r_vertex_nominal_and_geometry():
    cfg = parse_config("topology.r_vertex = nominal\ngeometry.length = 1000 um")
    assert cfg.topology.r_vertex is None
    assert cfg.geometry == SegmentGeometry(length=1000e-4)
    assert cfg.segment().r_series == pytest.approx(199.8e6, rel=5e-3)


def test_invalid_values_named():
    with pytest.raises(ConfigError, match="geometry.length"):
        parse_config("geometry.length = 0 um")
    with pytest.raises(ConfigError, match="sim.dt|dt"):
        parse_config("sim.dt = 0 s")
    with pytest.raises(ConfigError, match="topology.r_vertex"):
        parse_config("topology.r_vertex = 0 MΩ")
    with pytest.raises(ConfigError, match="topology.out_len"):
        parse_config("topology.out_len = 0")


def test_dump_roundtrip_defaults():
    cfg = ScenarioConfig()
    assert parse_config(cfg.dump()) == cfg
    assert "topology.r_vertex = nominal" in cfg.dump()


finite = dict(allow_nan=False, allow_infinity=False)


@st.composite
def scenarios(draw):
    v_min = draw(st.floats(-0.2, -0.08, **finite))
    v_rest = draw(st.floats(v_min + 1e-3, -0.06, **finite))
    v_trig = draw(st.floats(v_rest + 1e-3, 0.0, **finite))
    v_max = draw(st.floats(v_trig + 1e-3, 0.1, **finite))
    j_k = draw(st.floats(1e-6, 1e-4, **finite))
    membrane = MembraneConstants(
        c_mem=draw(st.floats(1e-7, 1e-5, **finite)),
        g_leak=draw(st.floats(1e-5, 1e-2, **finite)),
        rho_axial=draw(st.floats(1, 500, **finite)),
        j_na=j_k * draw(st.floats(1.01, 20, **finite)),
        j_k=j_k,
        v_rest=v_rest, v_trig=v_trig, v_max=v_max, v_min=v_min,
        rearm_delta=draw(st.floats(0, (v_rest - v_min) * 0.99, **finite)),
    )
    geometry = SegmentGeometry(draw(st.floats(1e-4, 1, **finite)), draw(st.floats(1e-5, 1e-2, **finite)))
    base = ScenarioConfig(membrane=membrane, geometry=geometry,
                          sim=SimConfig(dt=draw(st.floats(1e-8, 1e-5, **finite)),
                                        t_end=draw(st.floats(1e-4, 1.0, **finite)),
                                        record_stride=draw(st.integers(1, 1000)),
                                        method=draw(st.sampled_from(["euler", "rk4"]))))
    return with_overrides(
        base,
        topology=dict(
            branch_len=draw(st.integers(2, 20)),
            out_len=draw(st.integers(1, 10)),
            r_vertex=draw(st.none() | st.floats(1e3, 1e11, **finite)),
            vertex_sources=draw(st.booleans()),
            edge_convention=draw(st.sampled_from(["ladder", "split_half"])),
        ),
        stimulus=dict(
            kind=draw(st.sampled_from(["inject", "force"])),
            amplitude=draw(st.floats(-1e-8, 1e-8, **finite)),
            duration=draw(st.floats(1e-6, 1e-2, **finite)),
            skew=draw(st.floats(0, 1e-2, **finite)),
            inputs=draw(st.sampled_from(["none", "a", "b", "both"])),
        ),
    )


@given(scenarios())
def test_dump_roundtrip(cfg):
    assert parse_config(cfg.dump()) == cfg
    assert parse_config(cfg.dump()).dump() == cfg.dump()
