"""Discretised dendrite networks: nodes, axial resistors, stimuli.

The merge builder lays out the two-input / one-output vertex with the
numbering used throughout the package (default sizes)::

    input_a  1 - 2 - 3 - 4 - 5 - 6 \\
                                     7 - 8 - 9 - 10   (output chain)
    input_b 11 -12 -13 -14 -15 -16 /

Node 7 is the vertex; node 8 is the output probe.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field, replace
from typing import Literal, Mapping, Sequence, Union

from .segment import InvariantError, SegmentElectrical

EdgeConvention = Literal["ladder", "split_half"]
EDGE_CONVENTIONS: tuple[str, ...] = ("ladder", "split_half")


class TopologyError(ValueError):
    """Raised when a topology fails validation or a lookup is invalid."""


@dataclass(frozen=True)
class Topology:
    """Nodes with their segment values, resistive edges and role labels.

    Construction does not validate; call :func:`validate` (``simulate`` does).
    """

    nodes: tuple[tuple[str, SegmentElectrical], ...]
    edges: tuple[tuple[str, str, float], ...]
    labels: Mapping[str, str] = field(default_factory=dict)

    @property
    def node_ids(self) -> list[str]:
        return [nid for nid, _ in self.nodes]

    def index(self, node: str) -> int:
        for k, (nid, _) in enumerate(self.nodes):
            if nid == node:
                return k
        raise TopologyError(f"unknown node {node!r}")

    def segment(self, node: str) -> SegmentElectrical:
        return self.nodes[self.index(node)][1]

    def resolve(self, node_or_label: str) -> str:
        """Map a role label (``"vertex"``) or a plain node id to a node id."""
        if node_or_label in self.labels:
            return self.labels[node_or_label]
        self.index(node_or_label)
        return node_or_label

    def neighbours(self, node: str) -> list[str]:
        out = []
        for a, b, _ in self.edges:
            if a == node:
                out.append(b)
            elif b == node:
                out.append(a)
        return out


@dataclass(frozen=True)
class ValidationReport:
    problems: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.problems

    def __bool__(self) -> bool:
        return self.ok

    def __str__(self) -> str:
        return "ok" if self.ok else "; ".join(self.problems)


def validate(t: Topology) -> ValidationReport:
    """Check every topology invariant and report all violations found."""
    problems: list[str] = []
    ids = t.node_ids
    known = set(ids)
    if not ids:
        problems.append("empty: topology has no nodes")
    if len(known) != len(ids):
        dupes = sorted({n for n in ids if ids.count(n) > 1})
        problems.append(f"duplicate node ids: {dupes}")

    seen: set[frozenset[str]] = set()
    adjacency: dict[str, set[str]] = {n: set() for n in known}
    for a, b, r in t.edges:
        tag = f"edge {a}-{b}"
        if a not in known or b not in known:
            missing = [n for n in (a, b) if n not in known]
            problems.append(f"{tag}: dangling endpoint(s) {missing}")
            continue
        if a == b:
            problems.append(f"{tag}: self-edge")
            continue
        key = frozenset((a, b))
        if key in seen:
            problems.append(f"{tag}: duplicate edge")
        seen.add(key)
        if not (math.isfinite(r) and r > 0):
            problems.append(f"{tag}: non-positive edge resistance {r!r}")
        adjacency[a].add(b)
        adjacency[b].add(a)

    if ids:
        components = []
        remaining = set(known)
        for start in ids:
            if start not in remaining:
                continue
            comp = {start}
            queue = deque([start])
            while queue:
                for nb in adjacency[queue.popleft()]:
                    if nb not in comp:
                        comp.add(nb)
                        queue.append(nb)
            remaining -= comp
            components.append(comp)
        if len(components) > 1:
            parts = ", ".join(
                "{" + ",".join(sorted(c, key=ids.index)) + "}" for c in components
            )
            problems.append(f"disconnected: {len(components)} components {parts}")

    for role, node in t.labels.items():
        if node not in known:
            problems.append(f"dangling label {role!r} -> {node!r}")
    return ValidationReport(tuple(problems))


def edge_resistance(t: Topology, i: str, j: str) -> float:
    """Resistance of the edge joining ``i`` and ``j`` (either order)."""
    for a, b, r in t.edges:
        if (a, b) == (i, j) or (a, b) == (j, i):
            return r
    raise TopologyError(f"no edge between {i!r} and {j!r}")


def _edge_value(
    upstream: SegmentElectrical, downstream: SegmentElectrical, convention: str
) -> float:
    if convention == "ladder":
        return upstream.r_series
    if convention == "split_half":
        return (upstream.r_series + downstream.r_series) / 2
    raise ValueError(f"unknown edge convention {convention!r}")


def build_merge_topology(
    branch_len: int,
    out_len: int,
    seg: SegmentElectrical,
    r_vertex: float,
    *,
    vertex_sources: bool = True,
    convention: EdgeConvention = "ladder",
) -> Topology:
    """Two input chains merging at one vertex that feeds an output chain.

    Under the ``"ladder"`` convention each segment's series resistor is
    the link toward the output, so ``r_vertex`` sits alone between the
    vertex and the output probe and the input links carry their own
    segments' resistance.  ``"split_half"`` charges every link with the
    mean of its two end segments, so ``r_vertex`` enters all three links
    at the vertex.
    """
    if branch_len < 2:
        raise InvariantError(f"branch_len must be >= 2, got {branch_len}")
    if out_len < 1:
        raise InvariantError(f"out_len must be >= 1, got {out_len}")
    if not (math.isfinite(r_vertex) and r_vertex > 0):
        raise InvariantError(f"r_vertex must be positive, got {r_vertex!r}")
    if convention not in EDGE_CONVENTIONS:
        raise ValueError(f"unknown edge convention {convention!r}")

    vertex_seg = seg.with_series(r_vertex)
    if not vertex_sources:
        vertex_seg = vertex_seg.passive()

    branch_a = [str(k) for k in range(1, branch_len + 1)]
    vertex = str(branch_len + 1)
    output = [str(branch_len + 1 + k) for k in range(1, out_len + 1)]
    first_b = branch_len + out_len + 2
    branch_b = [str(first_b + k) for k in range(branch_len)]

    segs = {n: seg for n in branch_a + output + branch_b}
    segs[vertex] = vertex_seg
    order = sorted(segs, key=int)

    # (upstream, downstream) pairs, oriented toward the output end
    links = []
    for chain in (branch_a, branch_b):
        links += list(zip(chain, chain[1:] + [vertex]))
    links += list(zip([vertex] + output[:-1], output))
    links.sort(key=lambda ab: (int(ab[0]), int(ab[1])))

    edges = tuple(
        (a, b, _edge_value(segs[a], segs[b], convention)) for a, b in links
    )
    labels = {
        "input_a": branch_a[0],
        "input_b": branch_b[0],
        "vertex": vertex,
        "output_probe": output[0],
        "output_end": output[-1],
    }
    return Topology(tuple((n, segs[n]) for n in order), edges, labels)


def build_chain(
    n: int, seg: SegmentElectrical, *, convention: EdgeConvention = "ladder"
) -> Topology:
    """Straight chain of ``n`` identical segments, ids ``"1"`` .. ``str(n)``."""
    if n < 1:
        raise InvariantError(f"chain length must be >= 1, got {n}")
    ids = [str(k) for k in range(1, n + 1)]
    edges = tuple((a, b, _edge_value(seg, seg, convention)) for a, b in zip(ids, ids[1:]))
    labels = {"left": ids[0], "right": ids[-1], "middle": ids[(n - 1) // 2]}
    return Topology(tuple((i, seg) for i in ids), edges, labels)


@dataclass(frozen=True)
class MergeParams:
    """Arguments of :func:`build_merge_topology`, kept for resweeping."""

    seg: SegmentElectrical
    branch_len: int = 6
    out_len: int = 3
    r_vertex: float | None = None
    vertex_sources: bool = True
    convention: EdgeConvention = "ladder"

    @property
    def resolved_r_vertex(self) -> float:
        return self.seg.r_series if self.r_vertex is None else self.r_vertex

    def with_r_vertex(self, r_vertex: float) -> "MergeParams":
        return replace(self, r_vertex=r_vertex)

    def build(self) -> Topology:
        return build_merge_topology(
            self.branch_len,
            self.out_len,
            self.seg,
            self.resolved_r_vertex,
            vertex_sources=self.vertex_sources,
            convention=self.convention,
        )


@dataclass(frozen=True)
class CurrentInjection:
    """Rectangular current pulse into ``target`` (A, s)."""

    target: str
    amplitude: float = 1e-9
    start: float = 0.0
    duration: float = 0.5e-3

    def __post_init__(self) -> None:
        if not (self.duration > 0):
            raise InvariantError(f"injection duration must be positive, got {self.duration!r}")
        if not (self.start >= 0):
            raise InvariantError(f"injection start must be >= 0, got {self.start!r}")
        if not math.isfinite(self.amplitude):
            raise InvariantError(f"injection amplitude must be finite, got {self.amplitude!r}")


@dataclass(frozen=True)
class ForceTrigger:
    """Switch ``target`` into the depolarizing phase at ``time`` if it is resting."""

    target: str
    time: float = 0.0

    def __post_init__(self) -> None:
        if not (self.time >= 0):
            raise InvariantError(f"trigger time must be >= 0, got {self.time!r}")


Stimulus = Union[CurrentInjection, ForceTrigger]


def retarget(stimuli: Sequence[Stimulus], t: Topology) -> list[Stimulus]:
    """Resolve role labels in stimulus targets to node ids."""
    return [replace(s, target=t.resolve(s.target)) for s in stimuli]
