"""Canonical vector floor-plan model and rectilinear geometry operations.

Coordinate convention: the canonical unit square [0,1] x [0,1] with y
increasing downward (image convention).  Boundary rings start at the
topmost-then-leftmost corner and run clockwise on screen, which makes the
shoelace sum positive under this convention.

Room regions are represented as unions of disjoint axis-aligned rectangles
(a single box is a one-rectangle region); all boolean-style area computations
go through an exact coordinate-grid decomposition, never through rasters.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import InvalidCategory, MalformedBoundary, TooManyRooms

Point = tuple[float, float]
Rect = tuple[float, float, float, float]  # x1, y1, x2, y2 with x1 < x2, y1 < y2

CATEGORY_NAMES = {
    1: "living",
    2: "bedroom",
    3: "kitchen",
    4: "bathroom",
    5: "balcony",
    6: "storage",
}
NUM_CATEGORIES = 6
MAX_ROOMS = 8
MAX_BOUNDARY_CORNERS = 40
AUGMENTED_CORNERS = 40
GRID = 1.0 / 256.0  # generator / raster-compatible coordinate resolution


# ---------------------------------------------------------------------------
# rectangle and region primitives


def rect_area(r: Rect) -> float:
    return (r[2] - r[0]) * (r[3] - r[1])


def region_area(region: list[Rect]) -> float:
    return sum(rect_area(r) for r in region)


def rect_intersection(a: Rect, b: Rect) -> Rect | None:
    x1 = max(a[0], b[0])
    y1 = max(a[1], b[1])
    x2 = min(a[2], b[2])
    y2 = min(a[3], b[3])
    if x1 < x2 and y1 < y2:
        return (x1, y1, x2, y2)
    return None


def region_bbox(region: list[Rect]) -> Rect:
    return (
        min(r[0] for r in region),
        min(r[1] for r in region),
        max(r[2] for r in region),
        max(r[3] for r in region),
    )


def point_in_region(p: Point, region: list[Rect]) -> bool:
    """Closed-set membership (edges count as inside)."""
    x, y = p
    return any(r[0] <= x <= r[2] and r[1] <= y <= r[3] for r in region)


def _grid_cells(regions: list[list[Rect]]) -> tuple[list[float], list[float]]:
    xs: set[float] = set()
    ys: set[float] = set()
    for region in regions:
        for x1, y1, x2, y2 in region:
            xs.update((x1, x2))
            ys.update((y1, y2))
    return sorted(xs), sorted(ys)


def _covers(region: list[Rect], cx: float, cy: float) -> bool:
    return any(r[0] <= cx <= r[2] and r[1] <= cy <= r[3] for r in region)


def region_overlap_area(a: list[Rect], b: list[Rect]) -> float:
    total = 0.0
    for ra in a:
        for rb in b:
            hit = rect_intersection(ra, rb)
            if hit is not None:
                total += rect_area(hit)
    return total


def region_intersection(a: list[Rect], b: list[Rect]) -> list[Rect]:
    out = []
    for ra in a:
        for rb in b:
            hit = rect_intersection(ra, rb)
            if hit is not None:
                out.append(hit)
    return out


def region_subtract(a: list[Rect], b: list[Rect]) -> list[Rect]:
    """a minus b via grid decomposition; result rects are disjoint."""
    if not a:
        return []
    if not b:
        return list(a)
    xs, ys = _grid_cells([a, b])
    out = []
    for i in range(len(xs) - 1):
        for j in range(len(ys) - 1):
            cx = (xs[i] + xs[i + 1]) / 2.0
            cy = (ys[j] + ys[j + 1]) / 2.0
            if _covers(a, cx, cy) and not _covers(b, cx, cy):
                out.append((xs[i], ys[j], xs[i + 1], ys[j + 1]))
    return merge_region(out)


def merge_region(cells: list[Rect]) -> list[Rect]:
    """Greedy row-then-column merge of disjoint grid cells into fewer rects."""
    if not cells:
        return []
    # merge horizontally within rows of equal (y1, y2)
    rows: dict[tuple[float, float], list[Rect]] = {}
    for c in cells:
        rows.setdefault((c[1], c[3]), []).append(c)
    strips = []
    for (y1, y2), row in rows.items():
        row.sort()
        cur = list(row[0])
        for r in row[1:]:
            if r[0] == cur[2]:
                cur[2] = r[2]
            else:
                strips.append((cur[0], y1, cur[2], y2))
                cur = list(r)
        strips.append((cur[0], y1, cur[2], y2))
    # merge vertically strips of equal (x1, x2)
    cols: dict[tuple[float, float], list[Rect]] = {}
    for s in strips:
        cols.setdefault((s[0], s[2]), []).append(s)
    merged = []
    for (x1, x2), col in cols.items():
        col.sort(key=lambda r: r[1])
        cur = list(col[0])
        for r in col[1:]:
            if r[1] == cur[3]:
                cur[3] = r[3]
            else:
                merged.append((x1, cur[1], x2, cur[3]))
                cur = list(r)
        merged.append((x1, cur[1], x2, cur[3]))
    merged.sort()
    return merged


def region_overlap_area_exact(a: list[Rect], b: list[Rect]) -> float:
    """Exact |a ∩ b| even when a or b self-overlap, via grid classification."""
    if not a or not b:
        return 0.0
    xs, ys = _grid_cells([a, b])
    total = 0.0
    for i in range(len(xs) - 1):
        for j in range(len(ys) - 1):
            cx = (xs[i] + xs[i + 1]) / 2.0
            cy = (ys[j] + ys[j + 1]) / 2.0
            if _covers(a, cx, cy) and _covers(b, cx, cy):
                total += (xs[i + 1] - xs[i]) * (ys[j + 1] - ys[j])
    return total


def region_area_exact(a: list[Rect]) -> float:
    """Exact area of a possibly self-overlapping rect union."""
    if not a:
        return 0.0
    xs, ys = _grid_cells([a])
    total = 0.0
    for i in range(len(xs) - 1):
        for j in range(len(ys) - 1):
            cx = (xs[i] + xs[i + 1]) / 2.0
            cy = (ys[j] + ys[j + 1]) / 2.0
            if _covers(a, cx, cy):
                total += (xs[i + 1] - xs[i]) * (ys[j + 1] - ys[j])
    return total


def rectilinear_iou(region_a: list[Rect], region_b: list[Rect]) -> float:
    """Exact IoU of two rectangle unions.

    Two empty regions are identical by convention and score 1.0, which keeps
    per-category diversity/coverage well defined for absent categories.
    """
    if not region_a and not region_b:
        return 1.0
    inter = region_overlap_area_exact(region_a, region_b)
    union = region_area_exact(region_a) + region_area_exact(region_b) - inter
    if union <= 0.0:
        return 1.0
    return inter / union


def shared_edge_length(a: list[Rect], b: list[Rect], eps: float = 1e-9) -> float:
    """Total length of wall shared by two interior-disjoint regions."""
    total = 0.0
    for ra in a:
        for rb in b:
            # vertical contact
            if abs(ra[2] - rb[0]) <= eps or abs(ra[0] - rb[2]) <= eps:
                lo = max(ra[1], rb[1])
                hi = min(ra[3], rb[3])
                if hi > lo:
                    total += hi - lo
            # horizontal contact
            if abs(ra[3] - rb[1]) <= eps or abs(ra[1] - rb[3]) <= eps:
                lo = max(ra[0], rb[0])
                hi = min(ra[2], rb[2])
                if hi > lo:
                    total += hi - lo
    return total


def region_centroid(region: list[Rect]) -> Point:
    area = region_area(region)
    if area <= 0.0:
        raise ValueError("centroid of empty region")
    cx = sum(rect_area(r) * (r[0] + r[2]) / 2.0 for r in region) / area
    cy = sum(rect_area(r) * (r[1] + r[3]) / 2.0 for r in region) / area
    return (cx, cy)


ATTR_SNAP = 1.0 / 65536.0


def snap_attribute(v: float) -> float:
    """Snap sizes/locations to 1/65536 so the [-1,1] codecs are exact."""
    return round(v / ATTR_SNAP) * ATTR_SNAP


def region_anchor_point(region: list[Rect]) -> Point:
    """A representative interior point: the snapped centroid when it falls
    inside the region, else the center of the largest rectangle."""
    cx, cy = region_centroid(region)
    p = (snap_attribute(cx), snap_attribute(cy))
    if point_in_region(p, region):
        return p
    largest = max(region, key=rect_area)
    return ((largest[0] + largest[2]) / 2.0, (largest[1] + largest[3]) / 2.0)


# ---------------------------------------------------------------------------
# rectilinear polygons (boundary outlines)


def polygon_area(corners: list[Point]) -> float:
    """Shoelace area; positive for clockwise rings in the y-down convention."""
    s = 0.0
    n = len(corners)
    for i in range(n):
        x1, y1 = corners[i]
        x2, y2 = corners[(i + 1) % n]
        s += x1 * y2 - x2 * y1
    return s / 2.0


def polygon_perimeter(corners: list[Point]) -> float:
    n = len(corners)
    total = 0.0
    for i in range(n):
        x1, y1 = corners[i]
        x2, y2 = corners[(i + 1) % n]
        total += abs(x2 - x1) + abs(y2 - y1)
    return total


def polygon_edges(corners: list[Point]) -> list[tuple[Point, Point]]:
    n = len(corners)
    return [(corners[i], corners[(i + 1) % n]) for i in range(n)]


def point_on_segment(p: Point, a: Point, b: Point, eps: float = 1e-12) -> bool:
    if abs(a[0] - b[0]) <= eps:  # vertical
        return abs(p[0] - a[0]) <= eps and min(a[1], b[1]) - eps <= p[1] <= max(a[1], b[1]) + eps
    if abs(a[1] - b[1]) <= eps:  # horizontal
        return abs(p[1] - a[1]) <= eps and min(a[0], b[0]) - eps <= p[0] <= max(a[0], b[0]) + eps
    return False


def point_in_polygon(p: Point, corners: list[Point]) -> bool:
    """Closed-set containment in a rectilinear polygon (edges included)."""
    for a, b in polygon_edges(corners):
        if point_on_segment(p, a, b):
            return True
    # ray cast along +x; polygon is axis aligned so only vertical edges cross
    x, y = p
    inside = False
    for a, b in polygon_edges(corners):
        if a[0] == b[0] and a[0] > x:
            ylo, yhi = min(a[1], b[1]), max(a[1], b[1])
            if ylo <= y < yhi:
                inside = not inside
    return inside


def polygon_to_region(corners: list[Point]) -> list[Rect]:
    """Decompose the polygon interior into disjoint rectangles."""
    xs = sorted({c[0] for c in corners})
    ys = sorted({c[1] for c in corners})
    cells = []
    for i in range(len(xs) - 1):
        for j in range(len(ys) - 1):
            cx = (xs[i] + xs[i + 1]) / 2.0
            cy = (ys[j] + ys[j + 1]) / 2.0
            if point_in_polygon((cx, cy), corners):
                cells.append((xs[i], ys[j], xs[i + 1], ys[j + 1]))
    return merge_region(cells)


def _segments_cross(a1: Point, a2: Point, b1: Point, b2: Point) -> bool:
    """Improper intersection test for axis-aligned segments (shared single
    endpoints between consecutive edges are handled by the caller)."""
    a_vert = a1[0] == a2[0]
    b_vert = b1[0] == b2[0]
    if a_vert and b_vert:
        if a1[0] != b1[0]:
            return False
        lo = max(min(a1[1], a2[1]), min(b1[1], b2[1]))
        hi = min(max(a1[1], a2[1]), max(b1[1], b2[1]))
        return lo < hi
    if not a_vert and not b_vert:
        if a1[1] != b1[1]:
            return False
        lo = max(min(a1[0], a2[0]), min(b1[0], b2[0]))
        hi = min(max(a1[0], a2[0]), max(b1[0], b2[0]))
        return lo < hi
    if a_vert:
        v1, v2, h1, h2 = a1, a2, b1, b2
    else:
        v1, v2, h1, h2 = b1, b2, a1, a2
    vx = v1[0]
    hy = h1[1]
    x_lo, x_hi = min(h1[0], h2[0]), max(h1[0], h2[0])
    y_lo, y_hi = min(v1[1], v2[1]), max(v1[1], v2[1])
    if not (x_lo <= vx <= x_hi and y_lo <= hy <= y_hi):
        return False
    # touching only at a shared endpoint of both segments is not a crossing
    touches_end = (vx == x_lo or vx == x_hi) and (hy == y_lo or hy == y_hi)
    return not touches_end


# ---------------------------------------------------------------------------
# domain types


@dataclass(frozen=True)
class Boundary:
    """Rectilinear outline plus a 4-corner entrance rectangle on one edge."""

    corners: tuple[Point, ...]
    entrance: tuple[Point, Point, Point, Point]

    @property
    def area(self) -> float:
        return polygon_area(list(self.corners))

    @property
    def perimeter(self) -> float:
        return polygon_perimeter(list(self.corners))

    def region(self) -> list[Rect]:
        return polygon_to_region(list(self.corners))

    def contains(self, p: Point) -> bool:
        return point_in_polygon(p, list(self.corners))


@dataclass(frozen=True)
class RoomNode:
    """Bubble-diagram node: category plus coarse size and placement."""

    category: int
    size: float          # fraction of the boundary interior area, in [0, 1]
    location: Point      # centroid in [0,1]^2

    def sort_key(self) -> tuple[int, float, float]:
        return (self.category, self.location[1], self.location[0])


@dataclass(frozen=True)
class RoomBox:
    category: int
    rect: Rect

    @property
    def top_left(self) -> Point:
        return (self.rect[0], self.rect[1])

    @property
    def bottom_right(self) -> Point:
        return (self.rect[2], self.rect[3])


@dataclass(frozen=True)
class Adjacency:
    """Symmetric room adjacency stored as unordered index pairs (i < j)."""

    pairs: frozenset[tuple[int, int]]
    room_count: int

    @staticmethod
    def from_pairs(pairs, room_count: int) -> "Adjacency":
        norm = frozenset((min(i, j), max(i, j)) for i, j in pairs if i != j)
        return Adjacency(norm, room_count)

    def degree(self, i: int) -> int:
        return sum(1 for a, b in self.pairs if a == i or b == i)

    def connected(self, i: int, j: int) -> bool:
        return (min(i, j), max(i, j)) in self.pairs


@dataclass(frozen=True)
class Room:
    """A realized room: node attributes plus (optionally) its geometry."""

    category: int
    size: float
    location: Point
    region: tuple[Rect, ...] | None = None

    @property
    def node(self) -> RoomNode:
        return RoomNode(self.category, self.size, self.location)

    @property
    def bbox(self) -> Rect:
        if not self.region:
            raise ValueError("room has no geometry")
        return region_bbox(list(self.region))

    @property
    def box(self) -> RoomBox:
        return RoomBox(self.category, self.bbox)

    @property
    def area(self) -> float:
        if not self.region:
            return 0.0
        return region_area(list(self.region))


@dataclass(frozen=True)
class FloorPlan:
    boundary: Boundary
    rooms: tuple[Room, ...]
    adjacency: Adjacency

    @property
    def room_count(self) -> int:
        return len(self.rooms)

    def nodes(self) -> list[RoomNode]:
        return [r.node for r in self.rooms]

    def living_indices(self) -> list[int]:
        return [i for i, r in enumerate(self.rooms) if r.category == 1]

    def category_region(self, category: int) -> list[Rect]:
        out: list[Rect] = []
        for r in self.rooms:
            if r.category == category and r.region:
                out.extend(r.region)
        return out


# ---------------------------------------------------------------------------
# validation helpers


def check_boundary(boundary: Boundary) -> Boundary:
    corners = list(boundary.corners)
    n = len(corners)
    if n < 4:
        raise MalformedBoundary(f"{n} corners, need at least 4")
    if n > MAX_BOUNDARY_CORNERS:
        raise MalformedBoundary(f"{n} corners exceed the {MAX_BOUNDARY_CORNERS} limit")
    for x, y in corners:
        if not (0.0 <= x <= 1.0 and 0.0 <= y <= 1.0):
            raise MalformedBoundary(f"corner ({x}, {y}) outside the unit square")
    edges = polygon_edges(corners)
    for (x1, y1), (x2, y2) in edges:
        dx, dy = x2 - x1, y2 - y1
        if (dx != 0.0) == (dy != 0.0):
            raise MalformedBoundary(f"edge ({x1},{y1})-({x2},{y2}) is not axis-aligned")
    for i in range(n):
        for j in range(i + 1, n):
            if j == i + 1 or (i == 0 and j == n - 1):
                continue  # consecutive edges legitimately share a corner
            if _segments_cross(*edges[i], *edges[j]):
                raise MalformedBoundary("self-intersecting outline")
    if polygon_area(corners) <= 0.0:
        raise MalformedBoundary("ring is not clockwise (y-down) or has zero area")
    start = min(range(n), key=lambda i: (corners[i][1], corners[i][0]))
    if start != 0:
        raise MalformedBoundary("ring must start at the topmost-then-leftmost corner")
    _check_entrance(boundary)
    return boundary


def _check_entrance(boundary: Boundary) -> None:
    pts = list(boundary.entrance)
    if len(pts) != 4:
        raise MalformedBoundary("entrance must have exactly 4 corner points")
    xs = sorted({p[0] for p in pts})
    ys = sorted({p[1] for p in pts})
    if len(xs) != 2 or len(ys) != 2:
        raise MalformedBoundary("entrance is not an axis-aligned rectangle")
    if set(pts) != {(xs[0], ys[0]), (xs[1], ys[0]), (xs[0], ys[1]), (xs[1], ys[1])}:
        raise MalformedBoundary("entrance corners do not form a rectangle")
    w, h = xs[1] - xs[0], ys[1] - ys[0]
    if w == h:
        raise MalformedBoundary("entrance rectangle has no long edge")
    if w > h:
        long_edges = [((xs[0], ys[0]), (xs[1], ys[0])), ((xs[0], ys[1]), (xs[1], ys[1]))]
    else:
        long_edges = [((xs[0], ys[0]), (xs[0], ys[1])), ((xs[1], ys[0]), (xs[1], ys[1]))]
    hosts = 0
    for a, b in polygon_edges(list(boundary.corners)):
        for e1, e2 in long_edges:
            if point_on_segment(e1, a, b) and point_on_segment(e2, a, b):
                hosts += 1
    if hosts != 1:
        raise MalformedBoundary(
            f"entrance long edge must lie on exactly one boundary edge (found {hosts})"
        )


def check_room_node(node: RoomNode) -> RoomNode:
    if node.category not in CATEGORY_NAMES:
        raise InvalidCategory(f"category {node.category} not in 1..{NUM_CATEGORIES}")
    if not (0.0 <= node.size <= 1.0):
        raise ValueError(f"size {node.size} outside [0, 1]")
    x, y = node.location
    if not (0.0 <= x <= 1.0 and 0.0 <= y <= 1.0):
        raise ValueError(f"location ({x}, {y}) outside the unit square")
    return node


def check_rooms(rooms) -> None:
    if len(rooms) > MAX_ROOMS:
        raise TooManyRooms(f"{len(rooms)} rooms exceed the {MAX_ROOMS} limit")
    for r in rooms:
        check_room_node(r if isinstance(r, RoomNode) else r.node)


def check_plan(plan: FloorPlan, require_partition: bool = False, tol: float = 0.01) -> FloorPlan:
    check_boundary(plan.boundary)
    check_rooms(plan.rooms)
    if plan.adjacency.room_count != plan.room_count:
        raise ValueError("adjacency room_count disagrees with rooms")
    for i, j in plan.adjacency.pairs:
        if not (0 <= i < j < plan.room_count):
            raise ValueError(f"adjacency pair ({i}, {j}) out of range")
    for room in plan.rooms:
        if not plan.boundary.contains(room.location):
            raise ValueError(f"room location {room.location} outside the boundary")
    if require_partition:
        regions = [list(r.region or ()) for r in plan.rooms]
        total = sum(region_area(reg) for reg in regions)
        bound = plan.boundary.area
        if abs(total - bound) > tol * bound:
            raise ValueError(f"room areas {total} do not tile boundary area {bound}")
        for i in range(len(regions)):
            for j in range(i + 1, len(regions)):
                if region_overlap_area(regions[i], regions[j]) > 1e-9:
                    raise ValueError(f"rooms {i} and {j} overlap")
    return plan


def canonical_room_order(rooms):
    """Living room first, then ascending category, ties by (y, x) location."""
    return tuple(sorted(rooms, key=lambda r: (r.category, r.location[1], r.location[0])))


# ---------------------------------------------------------------------------
# corner augmentation


def augment_corners(boundary: Boundary) -> list[Point]:
    """Split the current longest edge at its midpoint until 40 corners.

    Ties between equally long edges go to the earliest edge in traversal
    order.  All inserted points lie on the original outline, so area and
    perimeter are unchanged.
    """
    check_boundary(boundary)
    pts = list(boundary.corners)
    while len(pts) < AUGMENTED_CORNERS:
        n = len(pts)
        best_i = 0
        best_len = -1.0
        for i in range(n):
            x1, y1 = pts[i]
            x2, y2 = pts[(i + 1) % n]
            length = abs(x2 - x1) + abs(y2 - y1)
            if length > best_len:
                best_len = length
                best_i = i
        x1, y1 = pts[best_i]
        x2, y2 = pts[(best_i + 1) % n]
        pts.insert(best_i + 1, ((x1 + x2) / 2.0, (y1 + y2) / 2.0))
    return pts


def simplify_corners(pts: list[Point]) -> list[Point]:
    """Drop collinear corners; inverse of midpoint augmentation."""
    out = list(pts)
    changed = True
    while changed and len(out) > 4:
        changed = False
        n = len(out)
        for i in range(n):
            p_prev = out[(i - 1) % n]
            p = out[i]
            p_next = out[(i + 1) % n]
            same_x = p_prev[0] == p[0] == p_next[0]
            same_y = p_prev[1] == p[1] == p_next[1]
            if same_x or same_y:
                out.pop(i)
                changed = True
                break
    return out
