"""Command-line front end.

    vertexlogic derive      [--config FILE]
    vertexlogic run         [--config FILE] [--out DIR] [--inputs a|b|both|none] [--skew MS]
    vertexlogic truth-table [--config FILE] [--skew MS]
    vertexlogic sweep       [--config FILE] [--out DIR] [--r-range LO:HI] [--step R]

``--sources-off`` silences the vertex on every command that builds the
merge.  Exit status: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Sequence

from .config import ConfigError, ScenarioConfig, parse_config, parse_quantity, with_overrides
from .engine import DEFAULT_BACKEND, NumericalError, simulate
from .logic import classify_gate, sweep_vertex_resistance, truth_table

EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _load(args: argparse.Namespace) -> ScenarioConfig:
    text = ""
    if args.config:
        try:
            text = Path(args.config).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read {args.config}: {exc.strerror}") from None
    cfg = parse_config(text)
    if getattr(args, "sources_off", False):
        cfg = with_overrides(cfg, topology={"vertex_sources": False})
    if getattr(args, "skew", None) is not None:
        cfg = with_overrides(cfg, stimulus={"skew": _time_ms(args.skew)})
    if getattr(args, "inputs", None) is not None:
        cfg = with_overrides(cfg, stimulus={"inputs": args.inputs})
    return cfg


def _time_ms(text: str) -> float:
    try:
        return float(text) * 1e-3
    except ValueError:
        pass
    try:
        return parse_quantity(text, "s")
    except ValueError as exc:
        raise ConfigError(f"--skew: {exc}") from None


def _resistance(text: str, flag: str) -> float:
    try:
        return float(text)
    except ValueError:
        pass
    try:
        return parse_quantity(text, "ohm")
    except ValueError as exc:
        raise ConfigError(f"{flag}: {exc}") from None


def _fmt(value: float, unit: str, scale: float) -> str:
    return f"{value / scale:.6g} {unit}"


def cmd_derive(cfg: ScenarioConfig, out=None) -> None:
    out = out or sys.stdout
    g, m = cfg.geometry, cfg.membrane
    seg = cfg.segment()
    rows = [
        ("length", _fmt(g.length, "um", 1e-4)),
        ("diameter", _fmt(g.diameter, "um", 1e-4)),
        ("c_mem", _fmt(m.c_mem, "uF/cm2", 1e-6)),
        ("g_leak", _fmt(m.g_leak, "mS/cm2", 1e-3)),
        ("rho_axial", _fmt(m.rho_axial, "ohm*cm", 1.0)),
        ("j_na", _fmt(m.j_na, "uA/cm2", 1e-6)),
        ("j_k", _fmt(m.j_k, "uA/cm2", 1e-6)),
        ("", ""),
        ("C", _fmt(seg.cap, "pF", 1e-12)),
        ("R_L", _fmt(seg.r_leak, "Mohm", 1e6)),
        ("R", _fmt(seg.r_series, "Mohm", 1e6)),
        ("I_Na", _fmt(seg.i_na, "nA", 1e-9)),
        ("I_K", _fmt(seg.i_k, "nA", 1e-9)),
        ("V_REST", _fmt(m.v_rest, "mV", 1e-3)),
        ("V_TRIG", _fmt(m.v_trig, "mV", 1e-3)),
        ("V_MAX", _fmt(m.v_max, "mV", 1e-3)),
        ("V_MIN", _fmt(m.v_min, "mV", 1e-3)),
    ]
    for name, value in rows:
        print(f"{name:<10} {value}".rstrip(), file=out)


def cmd_run(cfg: ScenarioConfig, out_dir: Path, out=None) -> tuple[Path, Path]:
    out = out or sys.stdout
    topo = cfg.merge_params().build()
    stimuli = cfg.drive().stimuli(*cfg.stimulus.input_bits, cfg.stimulus.skew)
    w = simulate(topo, stimuli, cfg.sim, cfg.membrane)
    paths = w.write_csv(out_dir)
    probe = topo.labels["output_probe"]
    print(f"wrote {paths[0]} and {paths[1]} ({len(w.events)} events; "
          f"output probe {probe} pulses: {w.pulse_count(probe)})", file=out)
    return paths


def cmd_truth_table(cfg: ScenarioConfig, out=None) -> None:
    out = out or sys.stdout
    topo = cfg.merge_params().build()
    tt = truth_table(topo, cfg.sim, cfg.membrane, cfg.stimulus.skew, drive=cfg.drive())
    r_vertex = cfg.merge_params().resolved_r_vertex
    print(f"r_vertex = {r_vertex / 1e6:.6g} Mohm, vertex sources "
          f"{'on' if cfg.topology.vertex_sources else 'off'}", file=out)
    print(tt.format(), file=out)
    print(f"gate: {classify_gate(tt).name}", file=out)


def cmd_sweep(cfg: ScenarioConfig, r_range: tuple[float, float], step: float,
              out_dir: Path | None, out=None) -> None:
    out = out or sys.stdout
    report = sweep_vertex_resistance(
        cfg.merge_params(), r_range, step, cfg.sim, cfg.membrane,
        skew=cfg.stimulus.skew, drive=cfg.drive(),
    )
    text = report.to_csv()
    if out_dir is None:
        out.write(text)
        return
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "regimes.csv"
    path.write_text(text)
    print(f"wrote {path}", file=out)
    for lo, hi, gate in report.intervals:
        print(f"{lo / 1e6:10.3f} .. {hi / 1e6:10.3f} Mohm  {gate.name}", file=out)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vertexlogic",
        description="Switched-source dendrite simulator: soliton logic at a branch vertex.",
    )
    parser.add_argument("--backend-info", action="store_true",
                        help="print the stepping backend in use and exit")
    sub = parser.add_subparsers(dest="command")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="scenario file (default: built-in defaults)")
    common.add_argument("--print-config", action="store_true",
                        help="echo the normalized configuration before running")

    sub.add_parser("derive", parents=[common], help="print lumped segment parameters")

    vertex = argparse.ArgumentParser(add_help=False)
    vertex.add_argument("--sources-off", action="store_true", help="remove the vertex Na/K sources")
    vertex.add_argument("--skew", metavar="MS", help="delay of input B in ms (or with a unit, e.g. 20us)")

    p_run = sub.add_parser("run", parents=[common, vertex], help="one simulation, CSV output")
    p_run.add_argument("--out", metavar="DIR", default=".", help="output directory (default: .)")
    p_run.add_argument("--inputs", choices=["none", "a", "b", "both"],
                       help="which inputs fire (default from config: a)")

    sub.add_parser("truth-table", parents=[common, vertex], help="four-case truth table and gate")

    p_sweep = sub.add_parser("sweep", parents=[common, vertex], help="classify the gate over r_vertex")
    p_sweep.add_argument("--out", metavar="DIR", help="write regimes.csv here (default: stdout)")
    p_sweep.add_argument("--r-range", metavar="LO:HI", default="10MΩ:400MΩ",
                         help="vertex resistance range; bare numbers are ohms (default 10MΩ:400MΩ)")
    p_sweep.add_argument("--step", metavar="R", default="10MΩ", help="coarse grid step (default 10MΩ)")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.backend_info:
        print(DEFAULT_BACKEND)
        return 0
    if not args.command:
        parser.print_help()
        return EXIT_CONFIG
    try:
        cfg = _load(args)
        if args.print_config:
            sys.stdout.write(cfg.dump())
        if args.command == "derive":
            cmd_derive(cfg)
        elif args.command == "run":
            cmd_run(cfg, Path(args.out))
        elif args.command == "truth-table":
            cmd_truth_table(cfg)
        elif args.command == "sweep":
            lo, sep, hi = args.r_range.partition(":")
            if not sep:
                raise ConfigError(f"--r-range must look like LO:HI, got {args.r_range!r}")
            r_range = (_resistance(lo, "--r-range"), _resistance(hi, "--r-range"))
            if not 0 < r_range[0] <= r_range[1]:
                raise ConfigError(f"--r-range must be positive and ascending, got {args.r_range!r}")
            step = _resistance(args.step, "--step")
            if not step > 0:
                raise ConfigError(f"--step must be positive, got {args.step!r}")
            cmd_sweep(cfg, r_range, step, Path(args.out) if args.out else None)
    except ConfigError as exc:
        print(f"vertexlogic: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"vertexlogic: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return 0


if __name__ == "__main__":
    sys.exit(main())
