"""Exact tensor codecs between domain objects and normalized stage tensors.

Every tensor lives in [-1, 1]; unit-interval quantities map through
v -> 2v - 1.  Padding rows encode as all -1.  For inputs whose coordinates
and sizes are dyadic rationals (the synthetic generator snaps coordinates to
1/256 and sizes/locations to 1/65536) the affine maps are exact in IEEE-754,
so decode(encode(x)) == x bit-for-bit.

Stage tensor kinds and shapes:
    boundary  8x80   40 augmented corners x 2 coords, identical rows
    entrance  8x8    4 corners x 2 coords, identical rows
    nodes     8x5    [is_room, category, size, x, y] per room row
    adjacency 8x8    +-1 symmetric matrix
    boxes     8x4    [x1, y1, x2, y2] per room row
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidCategory, ShapeMismatch, TooManyRooms
from .geometry import (
    AUGMENTED_CORNERS,
    GRID,
    MAX_ROOMS,
    NUM_CATEGORIES,
    Adjacency,
    Boundary,
    RoomBox,
    RoomNode,
    augment_corners,
    canonical_room_order,
    check_room_node,
    simplify_corners,
)

STAGE_SHAPES: dict[str, tuple[int, int]] = {
    "boundary": (8, 80),
    "entrance": (8, 8),
    "nodes": (8, 5),
    "adjacency": (8, 8),
    "boxes": (8, 4),
}

NORM_EPS = 1e-6

# category c in 1..6 encodes to (c - 1) / 5 * 2 - 1
CATEGORY_GRID = np.array([(c - 1) / 5.0 * 2.0 - 1.0 for c in range(1, NUM_CATEGORIES + 1)])


def to_norm(v):
    """[0, 1] -> [-1, 1]."""
    return 2.0 * np.asarray(v, dtype=np.float64) - 1.0


def from_norm(v):
    """[-1, 1] -> [0, 1]."""
    return (np.asarray(v, dtype=np.float64) + 1.0) / 2.0


def check_stage_tensor(kind: str, values: np.ndarray) -> np.ndarray:
    if kind not in STAGE_SHAPES:
        raise ShapeMismatch(f"unknown stage tensor kind {kind!r}")
    values = np.asarray(values, dtype=np.float64)
    if values.shape != STAGE_SHAPES[kind]:
        raise ShapeMismatch(
            f"{kind} tensor has shape {values.shape}, expected {STAGE_SHAPES[kind]}"
        )
    if not np.isfinite(values).all():
        raise ShapeMismatch(f"{kind} tensor contains non-finite entries")
    return values


def check_encoded_range(values: np.ndarray) -> np.ndarray:
    if np.abs(values).max(initial=0.0) > 1.0 + NORM_EPS:
        raise ShapeMismatch("encoded tensor leaves [-1 - eps, 1 + eps]")
    return values


# ---------------------------------------------------------------------------
# boundary / entrance


def encode_boundary(boundary: Boundary) -> tuple[np.ndarray, np.ndarray]:
    """Boundary and entrance tensors: 8 identical rows of corner coords."""
    pts = augment_corners(boundary)
    row = to_norm(np.asarray(pts, dtype=np.float64).reshape(-1))
    bt = np.tile(row, (8, 1))
    erow = to_norm(np.asarray(boundary.entrance, dtype=np.float64).reshape(-1))
    et = np.tile(erow, (8, 1))
    return check_encoded_range(bt), check_encoded_range(et)


def decode_boundary(boundary_t: np.ndarray, entrance_t: np.ndarray) -> Boundary:
    bt = check_stage_tensor("boundary", boundary_t)
    et = check_stage_tensor("entrance", entrance_t)
    pts = from_norm(bt[0]).reshape(AUGMENTED_CORNERS, 2)
    corners = simplify_corners([(float(x), float(y)) for x, y in pts])
    epts = from_norm(et[0]).reshape(4, 2)
    entrance = tuple((float(x), float(y)) for x, y in epts)
    return Boundary(tuple(corners), entrance)


# ---------------------------------------------------------------------------
# room nodes


def encode_nodes(nodes: list[RoomNode]) -> np.ndarray:
    if len(nodes) > MAX_ROOMS:
        raise TooManyRooms(f"{len(nodes)} rooms exceed the {MAX_ROOMS} limit")
    for n in nodes:
        check_room_node(n)
    out = np.full(STAGE_SHAPES["nodes"], -1.0)
    for i, n in enumerate(canonical_room_order(nodes)):
        out[i, 0] = 1.0
        out[i, 1] = CATEGORY_GRID[n.category - 1]
        out[i, 2] = to_norm(n.size)
        out[i, 3] = to_norm(n.location[0])
        out[i, 4] = to_norm(n.location[1])
    return check_encoded_range(out)


def decode_nodes(values: np.ndarray) -> list[RoomNode]:
    """Threshold is_room at 0, round category to the nearest grid value,
    clamp size and coordinates back into [0, 1]."""
    t = check_stage_tensor("nodes", values)
    nodes = []
    for row in t:
        if row[0] <= 0.0:
            continue
        category = int(np.argmin(np.abs(CATEGORY_GRID - row[1]))) + 1
        size = float(np.clip(from_norm(row[2]), 0.0, 1.0))
        x = float(np.clip(from_norm(row[3]), 0.0, 1.0))
        y = float(np.clip(from_norm(row[4]), 0.0, 1.0))
        nodes.append(RoomNode(category, size, (x, y)))
    return nodes


# ---------------------------------------------------------------------------
# adjacency


def encode_adjacency(adjacency: Adjacency) -> np.ndarray:
    out = np.full(STAGE_SHAPES["adjacency"], -1.0)
    for i, j in adjacency.pairs:
        out[i, j] = 1.0
        out[j, i] = 1.0
    return out


def decode_adjacency(values: np.ndarray, room_count: int = MAX_ROOMS) -> Adjacency:
    """Symmetrize by OR over the threshold-at-0 entries; the diagonal and
    rows beyond room_count are ignored, so the output always satisfies the
    adjacency invariants."""
    t = check_stage_tensor("adjacency", values)
    room_count = int(min(max(room_count, 0), MAX_ROOMS))
    pairs = set()
    for i in range(room_count):
        for j in range(i + 1, room_count):
            if t[i, j] > 0.0 or t[j, i] > 0.0:
                pairs.add((i, j))
    return Adjacency(frozenset(pairs), room_count)


# ---------------------------------------------------------------------------
# room boxes


def encode_boxes(boxes: list[RoomBox]) -> np.ndarray:
    if len(boxes) > MAX_ROOMS:
        raise TooManyRooms(f"{len(boxes)} boxes exceed the {MAX_ROOMS} limit")
    out = np.full(STAGE_SHAPES["boxes"], -1.0)
    for i, b in enumerate(boxes):
        if b.category not in range(1, NUM_CATEGORIES + 1):
            raise InvalidCategory(f"category {b.category} not in 1..{NUM_CATEGORIES}")
        x1, y1, x2, y2 = b.rect
        if not (x1 < x2 and y1 < y2):
            raise ValueError(f"box {b.rect} is not ordered top-left/bottom-right")
        out[i] = to_norm(np.array([x1, y1, x2, y2]))
    return check_encoded_range(out)


def decode_boxes(values: np.ndarray, nodes: list[RoomNode]) -> list[RoomBox]:
    """Rows beyond the paired node list are padding and dropped; degenerate
    rows are repaired by swapping the offending coordinates."""
    t = check_stage_tensor("boxes", values)
    boxes = []
    for i, node in enumerate(nodes[:MAX_ROOMS]):
        x1, y1, x2, y2 = (float(np.clip(from_norm(v), 0.0, 1.0)) for v in t[i])
        if x1 > x2:
            x1, x2 = x2, x1
        if y1 > y2:
            y1, y2 = y2, y1
        if x1 == x2:
            x2 = min(x1 + GRID, 1.0)
            x1 = x2 - GRID
        if y1 == y2:
            y2 = min(y1 + GRID, 1.0)
            y1 = y2 - GRID
        boxes.append(RoomBox(node.category, (x1, y1, x2, y2)))
    return boxes


# ---------------------------------------------------------------------------
# condition blocks derived from the same codecs


def encode_categories(nodes: list[RoomNode]) -> np.ndarray:
    """8-vector of encoded categories in canonical room order, padding -1."""
    out = np.full(MAX_ROOMS, -1.0)
    for i, n in enumerate(canonical_room_order(nodes)[:MAX_ROOMS]):
        out[i] = CATEGORY_GRID[n.category - 1]
    return out


def decode_categories(values: np.ndarray, room_count: int) -> list[int]:
    """First room_count entries rounded to the category grid.  A room count
    is required because padding (-1) coincides with the living-room code."""
    values = np.asarray(values, dtype=np.float64).reshape(-1)
    room_count = int(min(max(room_count, 0), MAX_ROOMS))
    return [
        int(np.argmin(np.abs(CATEGORY_GRID - v))) + 1 for v in values[:room_count]
    ]


def encode_sizes_locations(nodes: list[RoomNode]) -> np.ndarray:
    out = np.full((MAX_ROOMS, 3), -1.0)
    for i, n in enumerate(canonical_room_order(nodes)[:MAX_ROOMS]):
        out[i, 0] = to_norm(n.size)
        out[i, 1] = to_norm(n.location[0])
        out[i, 2] = to_norm(n.location[1])
    return out
