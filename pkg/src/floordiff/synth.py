"""Procedural generator of apartment-style vector floor plans.

Boundaries are axis-aligned rectangles with 0-3 rectangular corner notches,
snapped to a 1/256 grid.  Rooms come from recursive axis-aligned guillotine
cuts of the boundary interior, which guarantees the rooms exactly partition
the interior.  Adjacency is shared-wall length above a threshold.

Size and location attributes are snapped to 1/65536 so that the tensor
codecs round-trip bit-exactly (see codecs module docstring).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GenerationExhausted
from .geometry import (
    GRID,
    Adjacency,
    Boundary,
    FloorPlan,
    Rect,
    Room,
    polygon_edges,
    polygon_to_region,
    region_anchor_point,
    region_area,
    shared_edge_length,
    snap_attribute,
)

ENTRANCE_LEN = 16    # grid units
ENTRANCE_DEPTH = 4   # grid units
MIN_CELL_SIDE = 12   # grid units
MIN_CELL_AREA = 0.008


@dataclass(frozen=True)
class GeneratorParams:
    seed: int = 0
    room_count_range: tuple[int, int] = (3, 8)
    notch_count_range: tuple[int, int] = (0, 3)
    adjacency_edge_threshold: float = 0.03
    bedroom_range: tuple[int, int] = (1, 3)
    storage_probability: float = 0.1
    max_attempts: int = 100

    def __post_init__(self):
        if self.room_count_range[0] > self.room_count_range[1]:
            raise ValueError("empty room_count_range")
        if self.notch_count_range[0] > self.notch_count_range[1]:
            raise ValueError("empty notch_count_range")
        if self.adjacency_edge_threshold <= 0.0:
            raise ValueError("adjacency_edge_threshold must be positive")

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "room_count_range": list(self.room_count_range),
            "notch_count_range": list(self.notch_count_range),
            "adjacency_edge_threshold": self.adjacency_edge_threshold,
            "bedroom_range": list(self.bedroom_range),
            "storage_probability": self.storage_probability,
            "max_attempts": self.max_attempts,
        }


@dataclass(frozen=True)
class DatasetSplit:
    train: tuple[int, ...]
    validation: tuple[int, ...]
    test: tuple[int, ...]


def split_dataset(count: int, seed: int, ratios: tuple[float, float, float] = (0.7, 0.15, 0.15)) -> DatasetSplit:
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ValueError("split ratios must sum to 1")
    perm = np.random.default_rng(seed & 0xFFFFFFFFFFFFFFFF).permutation(count)
    n_train = int(count * ratios[0])
    n_val = int(count * ratios[1])
    return DatasetSplit(
        train=tuple(sorted(int(i) for i in perm[:n_train])),
        validation=tuple(sorted(int(i) for i in perm[n_train : n_train + n_val])),
        test=tuple(sorted(int(i) for i in perm[n_train + n_val :])),
    )


# ---------------------------------------------------------------------------
# boundary construction (integer grid coordinates throughout)


def _build_ring(x0, y0, x1, y1, notches):
    """Clockwise ring of a rectangle with corner notches.

    notches: dict corner -> (dw, dh) with corners named TL/TR/BR/BL.
    """
    ring = []
    if "TL" in notches:
        dw, dh = notches["TL"]
        ring.append((x0 + dw, y0))
    else:
        ring.append((x0, y0))
    if "TR" in notches:
        dw, dh = notches["TR"]
        ring += [(x1 - dw, y0), (x1 - dw, y0 + dh), (x1, y0 + dh)]
    else:
        ring.append((x1, y0))
    if "BR" in notches:
        dw, dh = notches["BR"]
        ring += [(x1, y1 - dh), (x1 - dw, y1 - dh), (x1 - dw, y1)]
    else:
        ring.append((x1, y1))
    if "BL" in notches:
        dw, dh = notches["BL"]
        ring += [(x0 + dw, y1), (x0 + dw, y1 - dh), (x0, y1 - dh)]
    else:
        ring.append((x0, y1))
    if "TL" in notches:
        dw, dh = notches["TL"]
        ring += [(x0, y0 + dh), (x0 + dw, y0 + dh)]
    return ring


def _draw_boundary(rng: np.random.Generator, params: GeneratorParams) -> Boundary:
    w = int(rng.integers(140, 226))
    h = int(rng.integers(140, 226))
    x0 = int(rng.integers(4, 256 - w - 3))
    y0 = int(rng.integers(4, 256 - h - 3))
    x1, y1 = x0 + w, y0 + h

    lo, hi = params.notch_count_range
    n_notches = int(rng.integers(lo, hi + 1))
    corners = ["TL", "TR", "BR", "BL"]
    rng.shuffle(corners)
    notches = {}
    for corner in corners[:n_notches]:
        dw = int(rng.integers(w // 6, min(w // 3, w // 2 - 8) + 1))
        dh = int(rng.integers(h // 6, min(h // 3, h // 2 - 8) + 1))
        notches[corner] = (dw, dh)

    ring = _build_ring(x0, y0, x1, y1, notches)

    # entrance on a random sufficiently long edge, depth pointing inward
    n = len(ring)
    eligible = []
    for i in range(n):
        ax, ay = ring[i]
        bx, by = ring[(i + 1) % n]
        length = abs(bx - ax) + abs(by - ay)
        if length >= ENTRANCE_LEN + 4:
            eligible.append(i)
    edge_i = int(eligible[rng.integers(0, len(eligible))])
    ax, ay = ring[edge_i]
    bx, by = ring[(edge_i + 1) % n]
    length = abs(bx - ax) + abs(by - ay)
    dx = (bx - ax) // length if bx != ax else 0
    dy = (by - ay) // length if by != ay else 0
    nx, ny = -dy, dx  # inward normal of a clockwise y-down ring
    off = int(rng.integers(2, length - ENTRANCE_LEN - 1))
    sx, sy = ax + dx * off, ay + dy * off
    ex, ey = sx + dx * ENTRANCE_LEN, sy + dy * ENTRANCE_LEN
    fx, fy = sx + nx * ENTRANCE_DEPTH, sy + ny * ENTRANCE_DEPTH
    gx, gy = ex + nx * ENTRANCE_DEPTH, ey + ny * ENTRANCE_DEPTH
    exs = sorted({sx, ex, fx, gx})
    eys = sorted({sy, ey, fy, gy})
    entrance = (
        (exs[0] * GRID, eys[0] * GRID),
        (exs[1] * GRID, eys[0] * GRID),
        (exs[1] * GRID, eys[1] * GRID),
        (exs[0] * GRID, eys[1] * GRID),
    )
    corners_f = tuple((x * GRID, y * GRID) for x, y in ring)
    return Boundary(corners_f, entrance)


# ---------------------------------------------------------------------------
# guillotine partitioning


def _region_connected(region: list[Rect]) -> bool:
    if not region:
        return False
    seen = {0}
    frontier = [0]
    while frontier:
        i = frontier.pop()
        for j in range(len(region)):
            if j not in seen and shared_edge_length([region[i]], [region[j]]) > 0.0:
                seen.add(j)
                frontier.append(j)
    return len(seen) == len(region)


def _split_region(region: list[Rect], axis: int, c: float) -> tuple[list[Rect], list[Rect]]:
    low, high = [], []
    for r in region:
        if r[axis + 2] <= c:
            low.append(r)
        elif r[axis] >= c:
            high.append(r)
        elif axis == 0:
            low.append((r[0], r[1], c, r[3]))
            high.append((c, r[1], r[2], r[3]))
        else:
            low.append((r[0], r[1], r[2], c))
            high.append((r[0], c, r[2], r[3]))
    return low, high


def _try_split(region: list[Rect], rng: np.random.Generator) -> tuple[list[Rect], list[Rect]] | None:
    x1 = min(r[0] for r in region)
    y1 = min(r[1] for r in region)
    x2 = max(r[2] for r in region)
    y2 = max(r[3] for r in region)
    axes = [0, 1] if (x2 - x1) >= (y2 - y1) else [1, 0]
    min_side = MIN_CELL_SIDE * GRID
    for axis in axes:
        lo = (x1 if axis == 0 else y1) + min_side
        hi = (x2 if axis == 0 else y2) - min_side
        lo_i = int(np.ceil(lo / GRID))
        hi_i = int(np.floor(hi / GRID))
        if hi_i < lo_i:
            continue
        for _ in range(8):
            c = int(rng.integers(lo_i, hi_i + 1)) * GRID
            low, high = _split_region(region, axis, c)
            if not low or not high:
                continue
            if region_area(low) < MIN_CELL_AREA or region_area(high) < MIN_CELL_AREA:
                continue
            if _region_connected(low) and _region_connected(high):
                return low, high
    return None


def _guillotine_cells(base: list[Rect], count: int, rng: np.random.Generator) -> list[list[Rect]] | None:
    cells = [base]
    guard = 0
    while len(cells) < count and guard < 64:
        guard += 1
        order = sorted(range(len(cells)), key=lambda i: -region_area(cells[i]))
        for ci in order:
            split = _try_split(cells[ci], rng)
            if split is not None:
                cells[ci : ci + 1] = [split[0], split[1]]
                break
        else:
            return None
    return cells if len(cells) == count else None


# ---------------------------------------------------------------------------
# category assignment


def _touches_outline(region: list[Rect], edges) -> bool:
    for x1, y1, x2, y2 in region:
        rect_edges = [
            ((x1, y1), (x2, y1)),
            ((x2, y1), (x2, y2)),
            ((x1, y2), (x2, y2)),
            ((x1, y1), (x1, y2)),
        ]
        for (rx1, ry1), (rx2, ry2) in rect_edges:
            for (ax, ay), (bx, by) in edges:
                if ax == bx and rx1 == rx2 and abs(rx1 - ax) < 1e-12:
                    lo = max(min(ay, by), min(ry1, ry2))
                    hi = min(max(ay, by), max(ry1, ry2))
                    if hi - lo > 1e-12:
                        return True
                if ay == by and ry1 == ry2 and abs(ry1 - ay) < 1e-12:
                    lo = max(min(ax, bx), min(rx1, rx2))
                    hi = min(max(ax, bx), max(rx1, rx2))
                    if hi - lo > 1e-12:
                        return True
    return False


def _draw_categories(n_other: int, rng: np.random.Generator, params: GeneratorParams) -> list[int] | None:
    """Category multiset for the non-living rooms (codes 2..6)."""
    cats = [2]  # at least one bedroom
    want_storage = rng.random() < params.storage_probability
    pool = [3, 4, 5] + ([6] if want_storage else [])
    rng.shuffle(pool)
    for c in pool:
        if len(cats) < n_other:
            cats.append(c)
    while len(cats) < n_other and cats.count(2) < params.bedroom_range[1]:
        cats.append(2)
    if len(cats) < n_other and 6 not in cats:
        cats.append(6)
    if len(cats) != n_other:
        return None
    rng.shuffle(cats)
    return cats


# ---------------------------------------------------------------------------
# sample generation


def generate_sample(params: GeneratorParams, index: int) -> FloorPlan:
    """Deterministic for (params.seed, index)."""
    rng = np.random.default_rng([params.seed & 0xFFFFFFFFFFFFFFFF, index])
    boundary = _draw_boundary(rng, params)
    base = polygon_to_region(list(boundary.corners))
    bound_area = region_area(base)
    edges = polygon_edges(list(boundary.corners))
    tau = params.adjacency_edge_threshold

    for _ in range(params.max_attempts):
        n = int(rng.integers(params.room_count_range[0], params.room_count_range[1] + 1))
        cells = _guillotine_cells(base, n, rng)
        if cells is None:
            continue
        order = sorted(range(n), key=lambda i: -region_area(cells[i]))
        living_cell = order[0]
        others = order[1:]
        cats = _draw_categories(n - 1, rng, params)
        if cats is None:
            continue
        assignment = {living_cell: 1}
        if 5 in cats:  # balcony must touch the outline
            touching = [i for i in others if _touches_outline(cells[i], edges)]
            if not touching:
                continue
            balcony_cell = int(touching[rng.integers(0, len(touching))])
            assignment[balcony_cell] = 5
            others = [i for i in others if i != balcony_cell]
            cats.remove(5)
        rest = list(others)
        rng.shuffle(rest)
        for cell_i, cat in zip(rest, cats):
            assignment[cell_i] = cat

        pairs = set()
        for i in range(n):
            for j in range(i + 1, n):
                if shared_edge_length(cells[i], cells[j]) > tau:
                    pairs.add((i, j))
        degree = {i: 0 for i in range(n)}
        for i, j in pairs:
            degree[i] += 1
            degree[j] += 1
        if any(degree[i] == 0 for i in range(n) if i != living_cell):
            continue
        if 2 * degree[living_cell] < (n - 1):
            continue

        rooms = []
        for i in range(n):
            region = tuple(sorted(cells[i]))
            rooms.append(
                Room(
                    category=assignment[i],
                    size=snap_attribute(region_area(cells[i]) / bound_area),
                    location=region_anchor_point(cells[i]),
                    region=region,
                )
            )
        perm = sorted(range(n), key=lambda i: (rooms[i].category, rooms[i].location[1], rooms[i].location[0]))
        inv = {old: new for new, old in enumerate(perm)}
        rooms_sorted = tuple(rooms[i] for i in perm)
        adjacency = Adjacency.from_pairs([(inv[i], inv[j]) for i, j in pairs], n)
        return FloorPlan(boundary, rooms_sorted, adjacency)

    raise GenerationExhausted(
        f"no valid room layout for seed={params.seed} index={index} "
        f"after {params.max_attempts} attempts"
    )


def generate_dataset(params: GeneratorParams, count: int, start: int = 0) -> list[FloorPlan]:
    return [generate_sample(params, i) for i in range(start, start + count)]
