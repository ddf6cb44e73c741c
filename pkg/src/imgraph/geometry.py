"""Dimension-generic graph domain types and geometric primitives.

Everything here operates on normalized coordinates in [0, 1]^d with d in
{2, 3}. Coordinate axis k always corresponds to image array axis k; there
is no x/y swapping anywhere in the package.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "BoundingBox",
    "Node",
    "Edge",
    "SpatialGraph",
    "ValidationReport",
    "box_giou",
    "node_virtual_box",
    "node_box_center_preserving",
    "edge_to_box",
    "validate_graph",
    "center_size_to_corners",
    "corners_to_center_size",
]


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned box given by its two corners, normalized to [0, 1]^d."""

    lo: tuple
    hi: tuple

    def __post_init__(self):
        object.__setattr__(self, "lo", tuple(float(v) for v in self.lo))
        object.__setattr__(self, "hi", tuple(float(v) for v in self.hi))
        if len(self.lo) != len(self.hi):
            raise ValueError("lo and hi must have the same dimensionality")

    @property
    def dim(self) -> int:
        return len(self.lo)

    @property
    def center(self) -> tuple:
        return tuple((l + h) / 2.0 for l, h in zip(self.lo, self.hi))

    @property
    def size(self) -> tuple:
        return tuple(h - l for l, h in zip(self.lo, self.hi))

    def volume(self) -> float:
        v = 1.0
        for l, h in zip(self.lo, self.hi):
            v *= max(0.0, h - l)
        return v


@dataclass(frozen=True)
class Node:
    """Graph node: a bounding box plus a class id (0 = background)."""

    box: BoundingBox
    cls: int = 1

    @property
    def center(self) -> tuple:
        return self.box.center


@dataclass(frozen=True)
class Edge:
    """Directed or undirected edge with a relation class (0 = background)."""

    src: int
    dst: int
    rln: int = 1


@dataclass
class SpatialGraph:
    """A spatial graph: nodes with boxes/classes, labeled edges.

    For undirected graphs the canonical edge order is src < dst.
    """

    nodes: list = field(default_factory=list)
    edges: list = field(default_factory=list)
    directed: bool = False

    @property
    def dim(self) -> int:
        if not self.nodes:
            return 2
        return self.nodes[0].box.dim

    def node_centers(self) -> np.ndarray:
        if not self.nodes:
            return np.zeros((0, self.dim), dtype=np.float64)
        return np.array([n.center for n in self.nodes], dtype=np.float64)

    def edge_index(self) -> np.ndarray:
        if not self.edges:
            return np.zeros((0, 2), dtype=np.int64)
        return np.array([(e.src, e.dst) for e in self.edges], dtype=np.int64)

    def edge_set(self) -> set:
        """Set of edge keys: ordered pairs if directed, sorted pairs otherwise."""
        if self.directed:
            return {(e.src, e.dst) for e in self.edges}
        return {(min(e.src, e.dst), max(e.src, e.dst)) for e in self.edges}

    def degrees(self) -> np.ndarray:
        deg = np.zeros(len(self.nodes), dtype=np.int64)
        for e in self.edges:
            deg[e.src] += 1
            deg[e.dst] += 1
        return deg

    def to_json(self) -> str:
        doc = {
            "directed": self.directed,
            "dim": self.dim,
            "nodes": [
                {
                    "center": list(n.center),
                    "box": [list(n.box.lo), list(n.box.hi)],
                    "cls": int(n.cls),
                }
                for n in self.nodes
            ],
            "edges": [
                {"src": int(e.src), "dst": int(e.dst), "rln": int(e.rln)}
                for e in self.edges
            ],
        }
        return json.dumps(doc, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "SpatialGraph":
        doc = json.loads(text)
        nodes = [
            Node(box=BoundingBox(lo=nd["box"][0], hi=nd["box"][1]), cls=int(nd["cls"]))
            for nd in doc["nodes"]
        ]
        edges = [Edge(int(e["src"]), int(e["dst"]), int(e["rln"])) for e in doc["edges"]]
        return cls(nodes=nodes, edges=edges, directed=bool(doc["directed"]))


@dataclass
class ValidationReport:
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def box_giou(a: BoundingBox, b: BoundingBox) -> float:
    """Generalized IoU between two axis-aligned boxes, in [-1, 1].

    Uses hypervolumes, so the same formula covers 2D and 3D. Degenerate
    (zero-volume) boxes contribute zero volume; two coinciding degenerate
    boxes compare as identical (GIoU 1). The GIoU *loss* used elsewhere
    is 1 - box_giou(a, b).
    """
    if a.dim != b.dim:
        raise ValueError("boxes must have the same dimensionality")
    va, vb = a.volume(), b.volume()
    if va == 0.0 and vb == 0.0 and a.lo == b.lo and a.hi == b.hi:
        return 1.0
    inter = 1.0
    for k in range(a.dim):
        inter *= max(0.0, min(a.hi[k], b.hi[k]) - max(a.lo[k], b.lo[k]))
    union = va + vb - inter
    iou = inter / union if union > 0.0 else 0.0
    enclose = 1.0
    for k in range(a.dim):
        enclose *= max(a.hi[k], b.hi[k]) - min(a.lo[k], b.lo[k])
    penalty = (enclose - union) / enclose if enclose > 0.0 else 0.0
    return iou - penalty


def node_virtual_box(center, half_width: float = 0.1) -> BoundingBox:
    """Box of extent 2*half_width around a point, clipped to [0, 1]^d."""
    lo = tuple(max(0.0, float(c) - half_width) for c in center)
    hi = tuple(min(1.0, float(c) + half_width) for c in center)
    return BoundingBox(lo=lo, hi=hi)


def node_box_center_preserving(center, half_width: float = 0.1) -> BoundingBox:
    """Like node_virtual_box, but shrinks symmetrically near the image border
    so the box center stays exactly on the given point."""
    h = half_width
    for c in center:
        h = min(h, float(c), 1.0 - float(c))
    h = max(h, 0.0)
    lo = tuple(float(c) - h for c in center)
    hi = tuple(float(c) + h for c in center)
    return BoundingBox(lo=lo, hi=hi)


def edge_to_box(g: SpatialGraph, e: Edge, min_width: float = 0.15) -> BoundingBox:
    """Box spanning the two endpoint centers of an edge.

    Axes whose extent falls below min_width are widened symmetrically to
    min_width, then clipped to [0, 1].
    """
    p = np.asarray(g.nodes[e.src].center, dtype=np.float64)
    q = np.asarray(g.nodes[e.dst].center, dtype=np.float64)
    lo = np.minimum(p, q)
    hi = np.maximum(p, q)
    narrow = (hi - lo) < min_width
    mid = (lo + hi) / 2.0
    lo = np.where(narrow, mid - min_width / 2.0, lo)
    hi = np.where(narrow, mid + min_width / 2.0, hi)
    return BoundingBox(lo=tuple(np.clip(lo, 0.0, 1.0)), hi=tuple(np.clip(hi, 0.0, 1.0)))


def validate_graph(g: SpatialGraph) -> ValidationReport:
    """Collect every structural invariant violation of a graph.

    Checks node coordinates and box ordering, edge index ranges,
    self-loops, and duplicate edges (per unordered pair when undirected).
    """
    report = ValidationReport()
    n = len(g.nodes)
    for i, node in enumerate(g.nodes):
        for k in range(node.box.dim):
            if not (0.0 <= node.box.lo[k] <= 1.0 and 0.0 <= node.box.hi[k] <= 1.0):
                report.violations.append(f"node {i}: coordinate outside [0,1] on axis {k}")
            if node.box.lo[k] > node.box.hi[k]:
                report.violations.append(f"node {i}: lo > hi on axis {k}")
        if node.cls < 0:
            report.violations.append(f"node {i}: negative class id")
    seen = set()
    for j, e in enumerate(g.edges):
        if not (0 <= e.src < n) or not (0 <= e.dst < n):
            report.violations.append(f"edge {j}: index out of range ({e.src},{e.dst})")
            continue
        if e.src == e.dst:
            report.violations.append(f"edge {j}: self-loop at node {e.src}")
            continue
        key = (e.src, e.dst) if g.directed else (min(e.src, e.dst), max(e.src, e.dst))
        if key in seen:
            report.violations.append(f"edge {j}: duplicate edge {key}")
        seen.add(key)
        if e.rln < 0:
            report.violations.append(f"edge {j}: negative relation id")
    return report


def center_size_to_corners(cs: np.ndarray) -> np.ndarray:
    """[..., 2d] center-size boxes -> [..., 2d] corner (lo, hi) boxes."""
    cs = np.asarray(cs)
    d = cs.shape[-1] // 2
    c, s = cs[..., :d], cs[..., d:]
    return np.concatenate([c - s / 2.0, c + s / 2.0], axis=-1)


def corners_to_center_size(co: np.ndarray) -> np.ndarray:
    """[..., 2d] corner boxes -> [..., 2d] center-size boxes."""
    co = np.asarray(co)
    d = co.shape[-1] // 2
    lo, hi = co[..., :d], co[..., d:]
    return np.concatenate([(lo + hi) / 2.0, hi - lo], axis=-1)
