"""Soliton logic at a dendritic vertex: a switched-source compartmental simulator."""

from .engine import DEFAULT_BACKEND, NumericalError, SimConfig, WaveformSet, simulate
from .logic import (
    GateKind,
    InputDrive,
    RegimeReport,
    TruthTable,
    classify_gate,
    detect_output,
    pulse_width,
    skew_tolerance,
    sweep_vertex_resistance,
    truth_table,
)
from .network import (
    CurrentInjection,
    ForceTrigger,
    MergeParams,
    Topology,
    build_chain,
    build_merge_topology,
    edge_resistance,
    validate,
)
from .segment import (
    MembraneConstants,
    Phase,
    SegmentElectrical,
    SegmentGeometry,
    derive_electrical,
    source_current,
    step_channel_state,
)

__version__ = "0.1.0"
