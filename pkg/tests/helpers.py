"""Shared oracles and synthetic instances for the test suite.

Every oracle is an independent, deliberately naive implementation: double
loops, exhaustive enumeration, finite differences. They cannot share bugs
with the library's vectorized code paths, which is the point.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

import eaparse as ea


# --- morphology / boundary oracles ---


def oracle_boundary(labels: np.ndarray) -> np.ndarray:
    h, w = labels.shape
    out = np.zeros((h, w), dtype=np.uint8)
    for r in range(h):
        for c in range(w):
            for dr, dc in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                rr, cc = r + dr, c + dc
                if 0 <= rr < h and 0 <= cc < w and labels[rr, cc] != labels[r, c]:
                    out[r, c] = 1
    return out


def oracle_dilate(mask: np.ndarray, radius: int) -> np.ndarray:
    h, w = mask.shape
    out = np.zeros((h, w), dtype=np.uint8)
    for r in range(h):
        for c in range(w):
            for rr in range(h):
                for cc in range(w):
                    if mask[rr, cc] and (r - rr) ** 2 + (c - cc) ** 2 <= radius * radius:
                        out[r, c] = 1
    return out


def oracle_erode(mask: np.ndarray, radius: int) -> np.ndarray:
    h, w = mask.shape
    out = np.zeros((h, w), dtype=np.uint8)
    for r in range(h):
        for c in range(w):
            ok = True
            for dr in range(-radius, radius + 1):
                for dc in range(-radius, radius + 1):
                    if dr * dr + dc * dc <= radius * radius:
                        rr, cc = r + dr, c + dc
                        if not (0 <= rr < h and 0 <= cc < w and mask[rr, cc]):
                            ok = False
            out[r, c] = 1 if ok else 0
    return out


# --- metric oracles ---


def oracle_jaccard(pred: np.ndarray, gt: np.ndarray, class_id: int):
    inter = 0
    union = 0
    for r in range(pred.shape[0]):
        for c in range(pred.shape[1]):
            p = pred[r, c] == class_id
            g = gt[r, c] == class_id
            inter += int(p and g)
            union += int(p or g)
    if union == 0:
        return None
    return inter / union


def oracle_boundary_f(pred: np.ndarray, gt: np.ndarray, class_id: int, tolerance: int):
    """F via nearest-boundary distances, the O(|Bp| * |Bg|) definition."""
    bp = np.argwhere(oracle_boundary((pred == class_id).astype(np.uint8)) == 1)
    bg = np.argwhere(oracle_boundary((gt == class_id).astype(np.uint8)) == 1)
    if len(bp) == 0 and len(bg) == 0:
        return None
    if len(bp) == 0 or len(bg) == 0:
        return 0.0
    d2 = ((bp[:, None, :] - bg[None, :, :]) ** 2).sum(axis=2)
    t2 = tolerance * tolerance
    precision = int((d2.min(axis=1) <= t2).sum()) / len(bp)
    recall = int((d2.min(axis=0) <= t2).sum()) / len(bg)
    if precision + recall == 0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


# --- min-cut oracle ---


def oracle_min_cut(graph: ea.GridGraph) -> float:
    """Minimum cut by trying all 2^n source/sink partitions."""
    n = graph.source_cap.shape[0]
    bits = ((np.arange(2**n)[:, None] >> np.arange(n)) & 1).astype(bool)
    cut = (~bits * graph.source_cap).sum(axis=1) + (bits * graph.sink_cap).sum(axis=1)
    for (u, v), c in zip(graph.edges.tolist(), graph.edge_cap.tolist()):
        cut = cut + c * (bits[:, u] ^ bits[:, v])
    return float(cut.min())


def cut_value(graph: ea.GridGraph, side: np.ndarray) -> float:
    """Value of one concrete partition (side[i]=1 means source side)."""
    s = side.astype(bool)
    val = float(graph.source_cap[~s].sum() + graph.sink_cap[s].sum())
    for (u, v), c in zip(graph.edges.tolist(), graph.edge_cap.tolist()):
        if s[u] != s[v]:
            val += c
    return val


def random_grid_graph(rng: np.random.Generator, max_nodes: int = 12) -> ea.GridGraph:
    """A small 8-connected grid with dyadic-rational capacities.

    Capacities are multiples of 1/16 so every flow/cut sum is exactly
    representable and oracle comparisons can demand equality, not closeness.
    """
    while True:
        h = int(rng.integers(1, 5))
        w = int(rng.integers(1, 5))
        if h * w <= max_nodes:
            break
    idx = np.arange(h * w).reshape(h, w)
    edges = []
    for dr, dc in ((0, 1), (1, 0), (1, 1), (1, -1)):
        for r in range(h):
            for c in range(w):
                rr, cc = r + dr, c + dc
                if 0 <= rr < h and 0 <= cc < w:
                    edges.append((idx[r, c], idx[rr, cc]))
    edges = np.array(edges, dtype=np.int64) if edges else np.zeros((0, 2), dtype=np.int64)
    return ea.GridGraph(
        source_cap=rng.integers(0, 65, h * w).astype(np.float64) / 16.0,
        sink_cap=rng.integers(0, 65, h * w).astype(np.float64) / 16.0,
        edges=edges,
        edge_cap=rng.integers(0, 33, len(edges)).astype(np.float64) / 16.0,
    )


# --- finite differences ---


def fd_gradient(fn, x: np.ndarray, h: float = 1e-3) -> np.ndarray:
    """Central differences of a scalar function, entry by entry.

    Evaluation points are snapped to the float32 grid (the losses store
    logits as float32) and the quotient divides by the step actually taken,
    so input quantization cannot masquerade as gradient error.
    """
    x = x.astype(np.float32).astype(np.float64).copy()
    grad = np.zeros_like(x)
    flat = x.reshape(-1)
    gflat = grad.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        hi = float(np.float32(orig + h))
        lo = float(np.float32(orig - h))
        flat[i] = hi
        f_plus = fn(x)
        flat[i] = lo
        f_minus = fn(x)
        flat[i] = orig
        gflat[i] = (f_plus - f_minus) / (hi - lo)
    return grad


def max_rel_err(a: np.ndarray, b: np.ndarray) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    denom = np.maximum(np.maximum(np.abs(a), np.abs(b)), 1e-8)
    return float((np.abs(a - b) / denom).max())


# --- synthetic scenes ---

DISK_CENTER = (16, 16)
DISK_RADIUS = 9
FG_COLOR = (210, 40, 35)
BG_COLOR = (20, 30, 200)


def disk_mask(size: int = 32) -> np.ndarray:
    yy, xx = np.mgrid[0:size, 0:size]
    cy, cx = DISK_CENTER
    return ((yy - cy) ** 2 + (xx - cx) ** 2 <= DISK_RADIUS**2).astype(np.uint8)


def disk_scene(size: int = 32, noise_seed=None):
    """Red disk on blue background; returns (image, true_mask, init_with_hole)."""
    disk = disk_mask(size)
    image = np.zeros((size, size, 3), dtype=np.uint8)
    image[:] = BG_COLOR
    image[disk == 1] = FG_COLOR
    if noise_seed is not None:
        rng = np.random.default_rng(noise_seed)
        image = np.clip(
            image.astype(np.int32) + rng.integers(-3, 4, image.shape), 0, 255
        ).astype(np.uint8)
    init = disk.copy()
    init[13:19, 13:19] = 0  # 6x6 hole for the refinement to recover
    return image, disk, init


def _mask_logits(mask: np.ndarray, magnitude: float) -> np.ndarray:
    logits = np.zeros((2,) + mask.shape, dtype=np.float32)
    logits[1] = np.where(mask == 1, magnitude, -magnitude)
    logits[0] = -logits[1]
    return logits


def write_clip(root, n_frames: int = 3, degraded_magnitude: float = 2.0):
    """A tiny on-disk clip for pipeline tests.

    Layout: images/<f>.ppm, gt/<f>.pgm, boxes.jsonl, plus two logit
    directories: ``clean`` predicts the disk confidently, ``degraded``
    predicts it with a 6x6 hole and weaker confidence. Returns the paths.
    """
    root = Path(root)
    for sub in ("images", "gt", "clean", "degraded"):
        (root / sub).mkdir(parents=True, exist_ok=True)
    box = ea.Box(4, 4, 28, 28)
    roi = ea.expand_box(box, 0.2, 32, 32)
    lines = []
    for i in range(n_frames):
        stem = f"{i:03d}"
        image, disk, _ = disk_scene(noise_seed=100 + i)
        ea.write_rgb_image(image, root / "images" / f"{stem}.ppm")
        ea.write_label_map(disk, root / "gt" / f"{stem}.pgm")
        sub = disk[roi.y0 : roi.y1, roi.x0 : roi.x1]
        ea.write_logits(_mask_logits(sub, 4.0), root / "clean" / f"{stem}__0.fplt")
        holed = sub.copy()
        holed[12:18, 12:18] = 0
        ea.write_logits(
            _mask_logits(holed, degraded_magnitude), root / "degraded" / f"{stem}__0.fplt"
        )
        lines.append(json.dumps({"frame": stem, "box": [4, 4, 28, 28]}))
    (root / "boxes.jsonl").write_text("\n".join(lines) + "\n", encoding="utf-8")
    return {
        "images": root / "images",
        "gt": root / "gt",
        "clean": root / "clean",
        "degraded": root / "degraded",
        "boxes": root / "boxes.jsonl",
    }


def read_report(out_dir) -> dict:
    with open(Path(out_dir) / "report.json", "r", encoding="utf-8") as f:
        return json.load(f)
