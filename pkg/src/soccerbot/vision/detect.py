"""Detectors operating on the downscaled per-class count grids.

Everything here works in cell coordinates (grid of 4x4 pixel blocks) and
hands pixel-space centroids back to the caller for bearing lookup.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .classify import BLOCK, ON_THRESHOLD

EIGHT = np.ones((3, 3), dtype=int)


def cell_center_pixel(col: float, row: float) -> tuple[float, float]:
    """Geometric pixel center of a (possibly fractional) cell coordinate."""
    return col * BLOCK + (BLOCK - 1) / 2.0, row * BLOCK + (BLOCK - 1) / 2.0


def field_boundary(green_counts: np.ndarray, threshold: int = ON_THRESHOLD) -> np.ndarray:
    """Per-column topmost row starting a run of >= 2 green-on cells.

    Columns without green get the sentinel value `rows` (below the grid);
    the result is smoothed with a 5-column median filter.
    """
    on = green_counts >= threshold
    rows = on.shape[0]
    run2 = on[:-1, :] & on[1:, :]
    has = run2.any(axis=0)
    first = np.argmax(run2, axis=0)
    boundary = np.where(has, first, rows)
    return ndimage.median_filter(boundary, size=5, mode="nearest")


def _below_boundary_mask(shape: tuple[int, int], boundary: np.ndarray) -> np.ndarray:
    rows = np.arange(shape[0])[:, None]
    return rows >= boundary[None, :]


@dataclass(frozen=True)
class Blob:
    area: int
    centroid_cell: tuple[float, float]   # (col, row), count-weighted
    centroid_pixel: tuple[float, float]
    bbox: tuple[int, int, int, int]      # row0, row1, col0, col1 inclusive


def _blobs(counts: np.ndarray, mask: np.ndarray, min_area: int) -> list[Blob]:
    labels, n = ndimage.label(mask, structure=EIGHT)
    blobs = []
    for idx in range(1, n + 1):
        sel = labels == idx
        area = int(sel.sum())
        if area < min_area:
            continue
        weights = counts.astype(float) * sel
        total = weights.sum()
        rows, cols = np.nonzero(sel)
        r = float((weights.sum(axis=1) * np.arange(counts.shape[0])).sum() / total)
        c = float((weights.sum(axis=0) * np.arange(counts.shape[1])).sum() / total)
        blobs.append(Blob(
            area=area,
            centroid_cell=(c, r),
            centroid_pixel=cell_center_pixel(c, r),
            bbox=(int(rows.min()), int(rows.max()), int(cols.min()), int(cols.max())),
        ))
    blobs.sort(key=lambda b: -b.area)
    return blobs


def detect_ball(ball_counts: np.ndarray, boundary: np.ndarray,
                threshold: int = ON_THRESHOLD, min_area: int = 4) -> Blob | None:
    """Largest 8-connected ball-class blob below the field boundary."""
    mask = (ball_counts >= threshold) & _below_boundary_mask(ball_counts.shape, boundary)
    blobs = _blobs(ball_counts, mask, min_area)
    return blobs[0] if blobs else None


def ball_radius_cells(area: int) -> float:
    return math.sqrt(area / math.pi)


def detect_goal(goal_counts: np.ndarray, boundary: np.ndarray,
                threshold: int = ON_THRESHOLD, band: int = 5,
                min_ratio: float = 2.0, max_posts: int = 2) -> list[Blob]:
    """Upright goal-class blobs straddling the field boundary band.

    Components must intersect boundary +- band and have height/width >= the
    ratio; at most the two largest are kept, ordered left to right.
    """
    mask = goal_counts >= threshold
    labels, n = ndimage.label(mask, structure=EIGHT)
    posts = []
    for idx in range(1, n + 1):
        sel = labels == idx
        rows, cols = np.nonzero(sel)
        height = rows.max() - rows.min() + 1
        width = cols.max() - cols.min() + 1
        if height / width < min_ratio:
            continue
        near = np.abs(rows - boundary[cols]) <= band
        if not near.any():
            continue
        posts.extend(_blobs(goal_counts, sel, min_area=1))
    posts.sort(key=lambda b: -b.area)
    posts = posts[:max_posts]
    posts.sort(key=lambda b: b.centroid_cell[0])
    return posts


def detect_obstacles(obstacle_counts: np.ndarray, boundary: np.ndarray,
                     threshold: int = ON_THRESHOLD, min_area: int = 4) -> list[Blob]:
    mask = (obstacle_counts >= threshold) & _below_boundary_mask(
        obstacle_counts.shape, boundary)
    return _blobs(obstacle_counts, mask, min_area)


# -- skeleton thinning and line/crossing analysis ---------------------------

def zhang_suen_thin(mask: np.ndarray, max_iter: int = 100) -> np.ndarray:
    """Iterative two-subpass thinning to a 1-cell skeleton."""
    img = mask.astype(bool).copy()
    for _ in range(max_iter):
        changed = False
        for phase in (0, 1):
            p = np.pad(img, 1).astype(np.uint8)
            # neighbors clockwise from north
            p2 = p[:-2, 1:-1]; p3 = p[:-2, 2:]; p4 = p[1:-1, 2:]
            p5 = p[2:, 2:]; p6 = p[2:, 1:-1]; p7 = p[2:, :-2]
            p8 = p[1:-1, :-2]; p9 = p[:-2, :-2]
            ring = [p2, p3, p4, p5, p6, p7, p8, p9]
            b = sum(ring)
            a = sum((ring[i] == 0) & (ring[(i + 1) % 8] == 1) for i in range(8))
            if phase == 0:
                cond = (p2 * p4 * p6 == 0) & (p4 * p6 * p8 == 0)
            else:
                cond = (p2 * p4 * p8 == 0) & (p2 * p6 * p8 == 0)
            delete = img & (b >= 2) & (b <= 6) & (a == 1) & cond
            if delete.any():
                img[delete] = False
                changed = True
        if not changed:
            break
    return img


_RING_OFFSETS = [(-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1), (0, -1), (-1, -1)]


def _branch_runs(skel: np.ndarray) -> np.ndarray:
    """Per skeleton pixel: number of connected runs among its 8 neighbors."""
    p = np.pad(skel, 1).astype(np.uint8)
    ring = [p[1 + dr:p.shape[0] - 1 + dr, 1 + dc:p.shape[1] - 1 + dc]
            for dr, dc in _RING_OFFSETS]
    runs = sum((ring[i] == 1) & (ring[(i + 1) % 8] == 0) for i in range(8))
    return np.where(skel, runs, 0)


@dataclass(frozen=True)
class Crossing:
    cell: tuple[float, float]   # (col, row)
    kind: str                   # "T" or "X"


@dataclass(frozen=True)
class Segment:
    p0: tuple[float, float]     # cell coords (col, row)
    p1: tuple[float, float]
    direction: tuple[float, float]

    @property
    def length(self) -> float:
        return math.hypot(self.p1[0] - self.p0[0], self.p1[1] - self.p0[1])


def _crossings_and_mask(skel: np.ndarray, dedup_radius: int = 2):
    """T/X junctions plus the junction-core mask used for path tracing.

    Candidates are skeleton pixels with >= 3 neighbor runs. Deduplication is
    geodesic: each candidate claims dedup_radius skeleton cells along the
    skeleton, so a junction smeared into two nearby branch points (thick or
    foreshortened strokes share a short collinear run) collapses into one
    cluster. Branches are the connected skeleton stubs around the cluster:
    3 -> T, 4 -> X.
    """
    runs = _branch_runs(skel)
    cand = runs >= 3
    mask = np.zeros_like(skel)
    if not cand.any():
        return [], mask
    grown = cand.copy()
    for _ in range(dedup_radius):
        grown = (ndimage.binary_dilation(grown, structure=EIGHT) & skel) | grown
    labels, n = ndimage.label(grown, structure=EIGHT)
    crossings = []
    for idx in range(1, n + 1):
        core = labels == idx
        ring = ndimage.binary_dilation(core, structure=EIGHT,
                                       iterations=dedup_radius) & skel & ~core
        _, n_branches = ndimage.label(ring, structure=EIGHT)
        if n_branches == 3:
            kind = "T"
        elif n_branches >= 4:
            kind = "X"
        else:
            continue
        rows, cols = np.nonzero(core & cand)
        crossings.append(Crossing(cell=(float(cols.mean()), float(rows.mean())),
                                  kind=kind))
        mask |= core
    return crossings, mask


def find_crossings(skel: np.ndarray, dedup_radius: int = 2) -> list[Crossing]:
    return _crossings_and_mask(skel, dedup_radius)[0]


def _fit_segment(points: list[tuple[int, int]]) -> Segment | None:
    """Total-least-squares line through a skeleton path (PCA direction)."""
    if len(points) < 2:
        return None
    pts = np.array([(c, r) for r, c in points], dtype=float)
    mean = pts.mean(axis=0)
    centered = pts - mean
    _, _, vt = np.linalg.svd(centered, full_matrices=False)
    direction = vt[0]
    t = centered @ direction
    p0 = mean + t.min() * direction
    p1 = mean + t.max() * direction
    if t.max() - t.min() < 1.0:
        return None
    return Segment(p0=(float(p0[0]), float(p0[1])),
                   p1=(float(p1[0]), float(p1[1])),
                   direction=(float(direction[0]), float(direction[1])))


def trace_segments(skel: np.ndarray, junction_mask: np.ndarray) -> list[Segment]:
    """Follow skeleton paths between junctions/endpoints and fit lines."""
    runs = _branch_runs(skel)
    nodes = junction_mask | (runs == 1)  # junction cores and endpoints
    path_pixels = skel & ~junction_mask
    visited = np.zeros_like(skel)
    segments = []

    def neighbors(r, c):
        for dr, dc in _RING_OFFSETS:
            rr, cc = r + dr, c + dc
            if 0 <= rr < skel.shape[0] and 0 <= cc < skel.shape[1] and path_pixels[rr, cc]:
                yield rr, cc

    # Start walks from pixels adjacent to nodes or from endpoints.
    starts = [tuple(p) for p in np.argwhere(path_pixels & (runs == 1))]
    near_junction = ndimage.binary_dilation(junction_mask, structure=EIGHT) & path_pixels
    starts += [tuple(p) for p in np.argwhere(near_junction)]
    for start in starts:
        if visited[start]:
            continue
        path = [start]
        visited[start] = True
        current, prev = start, None
        while True:
            nxt = [n for n in neighbors(*current) if n != prev and not visited[n]]
            if not nxt:
                break
            prev, current = current, nxt[0]
            visited[current] = True
            path.append(current)
        seg = _fit_segment(path)
        if seg is not None:
            segments.append(seg)
    # Isolated loops (no endpoints, no junctions) are rare; sweep leftovers.
    leftovers = np.argwhere(path_pixels & ~visited)
    if len(leftovers):
        for start in map(tuple, leftovers):
            if visited[start]:
                continue
            path = [start]
            visited[start] = True
            current, prev = start, None
            while True:
                nxt = [n for n in neighbors(*current) if n != prev and not visited[n]]
                if not nxt:
                    break
                prev, current = current, nxt[0]
                visited[current] = True
                path.append(current)
            seg = _fit_segment(path)
            if seg is not None:
                segments.append(seg)
    return segments


def _angle_between(d0, d1) -> float:
    dot = abs(d0[0] * d1[0] + d0[1] * d1[1])
    return math.acos(min(1.0, dot))


def _endpoint_gap(a: Segment, b: Segment) -> float:
    return min(math.hypot(pa[0] - pb[0], pa[1] - pb[1])
               for pa in (a.p0, a.p1) for pb in (b.p0, b.p1))


def merge_segments(segments: list[Segment], max_angle_deg: float = 10.0,
                   max_gap_cells: float = 5.0) -> list[Segment]:
    """Merge near-collinear segments whose endpoints nearly touch."""
    max_angle = math.radians(max_angle_deg)
    segments = list(segments)
    merged = True
    while merged:
        merged = False
        for i in range(len(segments)):
            for j in range(i + 1, len(segments)):
                a, b = segments[i], segments[j]
                if (_angle_between(a.direction, b.direction) < max_angle
                        and _endpoint_gap(a, b) < max_gap_cells):
                    pts = [(p[1], p[0]) for p in (a.p0, a.p1, b.p0, b.p1)]
                    seg = _fit_segment([(int(round(r)), int(round(c)))
                                        for r, c in pts])
                    if seg is None:
                        continue
                    segments[i] = seg
                    del segments[j]
                    merged = True
                    break
            if merged:
                break
    return segments


def detect_lines_and_crossings(white_counts: np.ndarray, boundary: np.ndarray,
                               threshold: int = ON_THRESHOLD):
    """White cells below the boundary -> thinned skeleton -> segments + T/X."""
    mask = (white_counts >= threshold) & _below_boundary_mask(
        white_counts.shape, boundary)
    if not mask.any():
        return [], []
    skel = zhang_suen_thin(mask)
    crossings, junction_mask = _crossings_and_mask(skel)
    segments = trace_segments(skel, junction_mask & skel)
    segments = merge_segments(segments)
    return segments, crossings
