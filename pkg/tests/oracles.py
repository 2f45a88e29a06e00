"""Independent brute-force oracles the fast implementations are checked against."""

from __future__ import annotations

import itertools

import numpy as np

from groundcheck import BoundingBox


def class_cost(values: np.ndarray) -> float:
    d = values - values.mean()
    return float((d * d).sum())


def brute_jenks_sdcm(sorted_values: np.ndarray, n_classes: int) -> float:
    """Minimal SDCM over all ordered partitions into contiguous classes."""
    n = len(sorted_values)
    best = None
    for breaks in itertools.combinations(range(1, n), n_classes - 1):
        bounds = (0,) + breaks + (n,)
        sdcm = 0.0
        for a, b in zip(bounds, bounds[1:]):
            sdcm = sdcm + class_cost(sorted_values[a:b])
        if best is None or sdcm < best:
            best = sdcm
    return best


def brute_jenks_top_start(sorted_values: np.ndarray, n_classes: int) -> int:
    """Start index of the top class in the SDCM-minimal partition."""
    n = len(sorted_values)
    best = None
    best_start = 0
    for breaks in itertools.combinations(range(1, n), n_classes - 1):
        bounds = (0,) + breaks + (n,)
        sdcm = 0.0
        for a, b in zip(bounds, bounds[1:]):
            sdcm = sdcm + class_cost(sorted_values[a:b])
        if best is None or sdcm < best:
            best = sdcm
            best_start = bounds[-2]
    return best_start


def sa_scan(values: np.ndarray) -> tuple[int, list[int]]:
    """Exhaustive minimal-k scan: smallest top-k outweighing the rest."""
    order = sorted(range(len(values)), key=lambda i: (-values[i], i))
    total = float(sum(values[o] for o in order))
    for k in range(1, len(order) + 1):
        top = float(sum(values[o] for o in order[:k]))
        if top > total - top:
            return k, order[:k]
    return len(order), order


def raster_iou(a: BoundingBox, b: BoundingBox, size: int = 64) -> float:
    """IoU by counting pixels on an integer grid (integer-coordinate boxes)."""
    grid_a = np.zeros((size, size), dtype=bool)
    grid_b = np.zeros((size, size), dtype=bool)
    grid_a[int(a.y): int(a.bottom), int(a.x): int(a.right)] = True
    grid_b[int(b.y): int(b.bottom), int(b.x): int(b.right)] = True
    union = np.logical_or(grid_a, grid_b).sum()
    if union == 0:
        return 0.0
    return float(np.logical_and(grid_a, grid_b).sum() / union)
