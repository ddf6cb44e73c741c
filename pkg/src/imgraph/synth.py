"""Synthetic planar-graph dataset generation and preprocessing.

Produces road-network-like samples: connected planar graphs with
straight non-crossing edges rendered into binary images, plus the
preprocessing used on real map data (degree-2 pruning, overlapping
patch extraction).
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image
from scipy.spatial import Delaunay
from scipy.spatial.qhull import QhullError

from . import kernels
from .geometry import (
    BoundingBox,
    Edge,
    Node,
    SpatialGraph,
    node_box_center_preserving,
    validate_graph,
)

__all__ = [
    "GenConfig",
    "Sample",
    "GenerationError",
    "generate_planar_graph",
    "rasterize",
    "prune_degree2",
    "extract_patches",
    "generate_dataset",
]


class GenerationError(RuntimeError):
    pass


@dataclass
class GenConfig:
    seed: int = 0
    image_size: int = 64
    n_images: int = 16
    node_count_range: tuple = (4, 8)
    edge_keep_prob: float = 0.35
    line_thickness: int = 2
    noise_level: float = 0.0
    split_fractions: tuple = (0.8, 0.1, 0.1)
    prune_angle_deg: float = 160.0
    delta_x: float = 0.2

    def __post_init__(self):
        if self.image_size < 32:
            raise ValueError("image_size must be >= 32")
        if self.node_count_range[0] < 2:
            raise ValueError("node_count_range minimum must be >= 2")


@dataclass
class Sample:
    image: np.ndarray  # [#ch, *spatial], values in [0, 1]
    graph: SpatialGraph


def _connected(n_nodes: int, edge_pairs) -> bool:
    if n_nodes <= 1:
        return True
    adj = [[] for _ in range(n_nodes)]
    for a, b in edge_pairs:
        adj[a].append(b)
        adj[b].append(a)
    seen = [False] * n_nodes
    stack = [0]
    seen[0] = True
    count = 1
    while stack:
        u = stack.pop()
        for v in adj[u]:
            if not seen[v]:
                seen[v] = True
                count += 1
                stack.append(v)
    return count == n_nodes


def generate_planar_graph(cfg: GenConfig, rng: np.random.Generator) -> SpatialGraph:
    """Connected planar graph with non-crossing straight edges.

    Random points in [0.05, 0.95]^2 are triangulated; edges are then
    randomly dropped (keep probability cfg.edge_keep_prob) as long as the
    graph stays connected. All nodes carry class 1, all edges relation 1.
    """
    lo, hi = cfg.node_count_range
    for _ in range(64):
        n = int(rng.integers(lo, hi + 1))
        pts = rng.uniform(0.05, 0.95, size=(n, 2))
        if n == 2:
            pairs = [(0, 1)]
        else:
            try:
                tri = Delaunay(pts)
            except QhullError:
                continue
            pair_set = set()
            for simplex in tri.simplices:
                for i in range(3):
                    a, b = int(simplex[i]), int(simplex[(i + 1) % 3])
                    pair_set.add((min(a, b), max(a, b)))
            pairs = sorted(pair_set)
            order = rng.permutation(len(pairs))
            kept = set(pairs)
            for idx in order:
                e = pairs[int(idx)]
                if rng.random() < cfg.edge_keep_prob:
                    continue
                kept.discard(e)
                if not _connected(n, kept):
                    kept.add(e)
            pairs = sorted(kept)
        nodes = [
            Node(box=node_box_center_preserving(p, cfg.delta_x / 2.0), cls=1) for p in pts
        ]
        edges = [Edge(a, b, 1) for a, b in pairs]
        return SpatialGraph(nodes=nodes, edges=edges, directed=False)
    raise GenerationError(
        f"planar graph generation failed after 64 retries (config seed {cfg.seed})"
    )


def rasterize(g: SpatialGraph, cfg: GenConfig, rng: np.random.Generator | None = None) -> np.ndarray:
    """Render a 2D graph's edges into a binary [1, S, S] image.

    Normalized coordinate c maps to pixel c * (S - 1). Gaussian noise of
    sigma cfg.noise_level is added when an rng is given, then the image
    is clipped back to [0, 1].
    """
    s = cfg.image_size
    img = np.zeros((s, s), dtype=np.float64)
    if g.edges:
        centers = g.node_centers()
        ei = g.edge_index()
        segs = np.concatenate(
            [centers[ei[:, 0]] * (s - 1), centers[ei[:, 1]] * (s - 1)], axis=1
        )
        kernels.rasterize_segments(img, segs, cfg.line_thickness)
    if rng is not None and cfg.noise_level > 0.0:
        img = np.clip(img + rng.normal(0.0, cfg.noise_level, img.shape), 0.0, 1.0)
    return img[None].astype(np.float32)


def _angle_deg(center: np.ndarray, a: np.ndarray, b: np.ndarray) -> float:
    u = a - center
    v = b - center
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        return 0.0
    cos = float(np.dot(u, v) / (nu * nv))
    return math.degrees(math.acos(min(1.0, max(-1.0, cos))))


def prune_degree2(g: SpatialGraph, keep_angle_below_deg: float = 160.0) -> SpatialGraph:
    """Merge away nearly-straight degree-2 nodes.

    A degree-2 node whose incident segments meet at an angle >= the
    threshold (180 deg = perfectly straight) is removed and its edges are
    merged, iterating to a fixpoint. Nodes whose removal would duplicate
    an existing edge are kept. Survivor positions are unchanged.
    """
    centers = g.node_centers()
    alive = [True] * len(g.nodes)
    adj: dict[int, dict[int, int]] = {i: {} for i in range(len(g.nodes))}
    for e in g.edges:
        adj[e.src][e.dst] = e.rln
        adj[e.dst][e.src] = e.rln

    changed = True
    while changed:
        changed = False
        for b in range(len(g.nodes)):
            if not alive[b] or len(adj[b]) != 2:
                continue
            (a, rln_ab), (c, _) = sorted(adj[b].items())
            if a == c or c in adj[a]:
                continue
            if _angle_deg(centers[b], centers[a], centers[c]) < keep_angle_below_deg:
                continue
            del adj[a][b]
            del adj[c][b]
            adj[b].clear()
            adj[a][c] = rln_ab
            adj[c][a] = rln_ab
            alive[b] = False
            changed = True

    remap = {}
    nodes = []
    for i, keep in enumerate(alive):
        if keep:
            remap[i] = len(nodes)
            nodes.append(g.nodes[i])
    seen = set()
    edges = []
    for u in sorted(adj):
        if not alive[u]:
            continue
        for v, rln in sorted(adj[u].items()):
            key = (min(u, v), max(u, v))
            if key in seen:
                continue
            seen.add(key)
            edges.append(Edge(remap[key[0]], remap[key[1]], rln))
    return SpatialGraph(nodes=nodes, edges=edges, directed=g.directed)


def _clip_segment(p: np.ndarray, q: np.ndarray, lo: np.ndarray, hi: np.ndarray):
    """Liang-Barsky clip of segment p->q against an axis-aligned rect.

    Returns (t0, t1) parameters of the retained sub-segment, or None.
    """
    t0, t1 = 0.0, 1.0
    d = q - p
    for k in range(len(p)):
        if abs(d[k]) < 1e-15:
            if p[k] < lo[k] or p[k] > hi[k]:
                return None
        else:
            ta = (lo[k] - p[k]) / d[k]
            tb = (hi[k] - p[k]) / d[k]
            if ta > tb:
                ta, tb = tb, ta
            t0 = max(t0, ta)
            t1 = min(t1, tb)
            if t0 > t1:
                return None
    return t0, t1


def extract_patches(
    img: np.ndarray,
    g: SpatialGraph,
    patch_size: int,
    stride: int,
    delta_x: float = 0.2,
    prune_angle_deg: float = 160.0,
) -> list:
    """Cut an image+graph into overlapping square patches.

    Edges are clipped at each window boundary (inserting boundary nodes
    at the intersection points), coordinates are renormalized to the
    patch frame, degree-2 pruning is re-applied, and patches without
    nodes are discarded.
    """
    if stride > patch_size:
        raise ValueError("stride must be <= patch_size")
    _, h, w = img.shape
    centers = g.node_centers()
    samples = []
    for a in range(0, h - patch_size + 1, stride):
        for b in range(0, w - patch_size + 1, stride):
            lo = np.array([a / (h - 1), b / (w - 1)])
            extent = np.array([(patch_size - 1) / (h - 1), (patch_size - 1) / (w - 1)])
            hi = lo + extent
            node_map = {}
            new_centers = []

            def _add_point(pt):
                key = tuple(np.round(pt, 9))
                if key not in node_map:
                    node_map[key] = len(new_centers)
                    new_centers.append(np.asarray(pt, dtype=np.float64))
                return node_map[key]

            new_edges = []
            for e in g.edges:
                res = _clip_segment(centers[e.src], centers[e.dst], lo, hi)
                if res is None:
                    continue
                t0, t1 = res
                pa = centers[e.src] + t0 * (centers[e.dst] - centers[e.src])
                pb = centers[e.src] + t1 * (centers[e.dst] - centers[e.src])
                if np.linalg.norm(pb - pa) < 1e-12:
                    continue
                ia = _add_point(pa)
                ib = _add_point(pb)
                if ia != ib:
                    new_edges.append((ia, ib, e.rln))
            # isolated nodes inside the window survive the crop too
            for i in range(len(centers)):
                if np.all(centers[i] >= lo - 1e-12) and np.all(centers[i] <= hi + 1e-12):
                    if not any(e.src == i or e.dst == i for e in g.edges):
                        _add_point(centers[i])
            if not new_centers:
                continue
            nodes = []
            for c in new_centers:
                local = np.clip((c - lo) / extent, 0.0, 1.0)
                nodes.append(Node(box=node_box_center_preserving(local, delta_x / 2.0), cls=1))
            seen = set()
            edges = []
            for ia, ib, rln in new_edges:
                key = (min(ia, ib), max(ia, ib))
                if key in seen:
                    continue
                seen.add(key)
                edges.append(Edge(key[0], key[1], rln))
            patch_graph = prune_degree2(
                SpatialGraph(nodes=nodes, edges=edges, directed=g.directed),
                prune_angle_deg,
            )
            if not patch_graph.nodes:
                continue
            crop = img[:, a : a + patch_size, b : b + patch_size]
            samples.append(Sample(image=np.ascontiguousarray(crop), graph=patch_graph))
    return samples


def split_counts(n_images: int, fractions) -> tuple:
    n_train = int(math.floor(fractions[0] * n_images))
    n_val = int(math.floor(fractions[1] * n_images))
    return n_train, n_val, n_images - n_train - n_val


def generate_dataset(cfg: GenConfig, out_dir) -> dict:
    """Generate images + graph JSONs + a split manifest under out_dir.

    Fully reproducible: sample i is derived from SeedSequence(cfg.seed,
    spawn_key=(i,)), and the manifest is serialized with sorted keys.
    """
    out = Path(out_dir)
    (out / "images").mkdir(parents=True, exist_ok=True)
    (out / "graphs").mkdir(parents=True, exist_ok=True)
    n_train, n_val, n_test = split_counts(cfg.n_images, cfg.split_fractions)
    samples = []
    for i in range(cfg.n_images):
        rng = np.random.default_rng(np.random.SeedSequence(entropy=cfg.seed, spawn_key=(i,)))
        g = prune_degree2(generate_planar_graph(cfg, rng), cfg.prune_angle_deg)
        report = validate_graph(g)
        if not report.ok:
            raise GenerationError(f"sample {i}: invalid graph: {report.violations}")
        img = rasterize(g, cfg, rng)
        img_rel = f"images/{i:05d}.png"
        graph_rel = f"graphs/{i:05d}.json"
        arr = np.floor(img[0] * 255.0 + 0.5).astype(np.uint8)
        Image.fromarray(arr, mode="L").save(out / img_rel)
        (out / graph_rel).write_text(g.to_json())
        split = "train" if i < n_train else ("val" if i < n_train + n_val else "test")
        samples.append({"image": img_rel, "graph": graph_rel, "split": split})
    manifest = {"config": asdict(cfg), "samples": samples}
    (out / "manifest.json").write_text(json.dumps(manifest, sort_keys=True, indent=2))
    return manifest


def load_manifest(data_dir) -> dict:
    path = Path(data_dir) / "manifest.json"
    return json.loads(path.read_text())


def load_sample(data_dir, entry: dict) -> Sample:
    data_dir = Path(data_dir)
    img = np.asarray(Image.open(data_dir / entry["image"]), dtype=np.float32) / 255.0
    graph = SpatialGraph.from_json((data_dir / entry["graph"]).read_text())
    return Sample(image=img[None], graph=graph)
