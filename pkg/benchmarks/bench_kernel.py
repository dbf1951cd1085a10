"""Compare the compiled and numpy stepping kernels.

    python benchmarks/bench_kernel.py [--repeat N] [--t-end MS]

Times one truth table (four 16-segment runs) at the XOR point with each
available backend, checks that both give identical waveforms, and
extrapolates the cost of a default 10-400 MOhm sweep (~200 truth tables).
"""

import argparse
import statistics
import time

import numpy as np

from vertexlogic.engine import AVAILABLE_BACKENDS, SimConfig
from vertexlogic.logic import truth_table_runs
from vertexlogic.network import MergeParams
from vertexlogic.segment import MembraneConstants, SegmentGeometry, derive_electrical

SWEEP_TABLES = 200


def bench(backend: str, repeat: int, t_end: float):
    mc = MembraneConstants()
    topo = MergeParams(derive_electrical(SegmentGeometry(), mc), r_vertex=211.5625e6).build()
    cfg = SimConfig(t_end=t_end)
    times = []
    runs = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        runs = truth_table_runs(topo, cfg, mc, backend=backend, workers=1)
        times.append(time.perf_counter() - t0)
    return statistics.median(times), runs


def main(argv=None) -> dict:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--t-end", type=float, default=50.0, help="simulated time per run, ms")
    args = ap.parse_args(argv)

    results = {}
    outputs = {}
    for backend in AVAILABLE_BACKENDS:
        results[backend], outputs[backend] = bench(backend, args.repeat, args.t_end * 1e-3)
    print(f"{'backend':<8} {'truth table':>12} {'per run':>10} {'est. sweep':>11}")
    for backend, t in results.items():
        print(f"{backend:<8} {t * 1e3:10.1f} ms {t / 4 * 1e3:7.2f} ms {t * SWEEP_TABLES:9.1f} s")
    if len(results) == 2:
        same = all(np.array_equal(a.voltages, b.voltages) and a.events == b.events
                   for a, b in zip(outputs["cython"], outputs["python"]))
        print(f"speed-up cython/python: {results['python'] / results['cython']:.0f}x; "
              f"identical output: {same}")
    return results


if __name__ == "__main__":
    main()
