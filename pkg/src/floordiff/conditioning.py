"""Condition blocks fed to the denoisers, and their wire representation.

A trained network has a fixed conditioning configuration: a subset of

    boundary          outline + entrance tensors (the "B" of variant ids)
    room_count        integer 1..8                ("Rn")
    categories        8-vector, encoded scale     ("Rc")
    sizes_locations   8x3, encoded scale          ("Rsl")
    adjacency         8x8, encoded scale          ("Ra" / "adj")
    partial           stage tensor + known mask   ("partial")

Variant ids name a stage and its conditioning, e.g. "nodes/B+Rn+Rc";
"nodes" in a condition list is shorthand for Rn+Rc+Rsl (the blocks derived
from a bubble diagram's nodes).

On the wire (service bodies, request files) conditions are user-level:
corner lists, integer categories, unit-interval sizes and coordinates.
Encoding to tensor space happens here, so clients never touch codecs.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import codecs
from .errors import ConditioningMismatch, ShapeMismatch
from .geometry import MAX_ROOMS, Adjacency, Boundary, FloorPlan, RoomNode

CONDITION_BLOCKS = (
    "boundary",
    "room_count",
    "categories",
    "sizes_locations",
    "adjacency",
    "partial",
)

_TOKEN_TO_BLOCKS = {
    "B": ("boundary",),
    "Rn": ("room_count",),
    "Rc": ("categories",),
    "Rsl": ("sizes_locations",),
    "Ra": ("adjacency",),
    "adj": ("adjacency",),
    "nodes": ("room_count", "categories", "sizes_locations"),
    "partial": ("partial",),
}

_BLOCK_TO_TOKEN = {
    "boundary": "B",
    "room_count": "Rn",
    "categories": "Rc",
    "sizes_locations": "Rsl",
    "adjacency": "Ra",
    "partial": "partial",
}

STAGES = ("nodes", "adjacency", "partition")
STAGE_TENSOR_KIND = {"nodes": "nodes", "adjacency": "adjacency", "partition": "boxes"}


def normalize_blocks(tokens) -> tuple[str, ...]:
    """Expand condition tokens/names into the canonical ordered block tuple."""
    blocks: list[str] = []
    for token in tokens:
        if token in CONDITION_BLOCKS:
            expanded = (token,)
        elif token in _TOKEN_TO_BLOCKS:
            expanded = _TOKEN_TO_BLOCKS[token]
        else:
            raise ConditioningMismatch(f"unknown condition token {token!r}")
        for b in expanded:
            if b not in blocks:
                blocks.append(b)
    return tuple(b for b in CONDITION_BLOCKS if b in blocks)


def blocks_signature(blocks) -> str:
    """Canonical id fragment: the node-derived triple collapses to "nodes"
    and adjacency reads "adj" (registry ids like "partition/B+nodes+adj")."""
    blocks = normalize_blocks(blocks)
    if not blocks:
        return "none"
    node_triple = ("room_count", "categories", "sizes_locations")
    tokens = []
    for b in blocks:
        if b in node_triple:
            if all(x in blocks for x in node_triple):
                if "nodes" not in tokens:
                    tokens.append("nodes")
                continue
            tokens.append(_BLOCK_TO_TOKEN[b])
        elif b == "adjacency":
            tokens.append("adj")
        else:
            tokens.append(_BLOCK_TO_TOKEN[b])
    return "+".join(tokens)


def parse_variant_id(variant_id: str) -> tuple[str, tuple[str, ...]]:
    """"nodes/B+Rn+Rc" -> ("nodes", ("boundary", "room_count", "categories"))."""
    try:
        stage, _, cond = variant_id.partition("/")
    except AttributeError as exc:
        raise ConditioningMismatch(f"bad variant id {variant_id!r}") from exc
    if stage not in STAGES:
        raise ConditioningMismatch(f"unknown stage {stage!r} in variant id {variant_id!r}")
    tokens = [t for t in cond.split("+") if t and t != "none"]
    return stage, normalize_blocks(tokens)


def format_variant_id(stage: str, blocks) -> str:
    return f"{stage}/{blocks_signature(blocks)}"


@dataclass(frozen=True)
class Conditioning:
    """Optional condition blocks in tensor space."""

    boundary: np.ndarray | None = None          # (8, 80)
    entrance: np.ndarray | None = None          # (8, 8)
    room_count: int | None = None               # 1..8
    categories: np.ndarray | None = None        # (8,) encoded
    sizes_locations: np.ndarray | None = None   # (8, 3) encoded
    adjacency: np.ndarray | None = None         # (8, 8) encoded
    partial_values: np.ndarray | None = None    # stage tensor shape
    partial_mask: np.ndarray | None = None      # (8,) rows, or (8, 8) pairs

    def blocks(self) -> tuple[str, ...]:
        present = []
        if self.boundary is not None or self.entrance is not None:
            present.append("boundary")
        if self.room_count is not None:
            present.append("room_count")
        if self.categories is not None:
            present.append("categories")
        if self.sizes_locations is not None:
            present.append("sizes_locations")
        if self.adjacency is not None:
            present.append("adjacency")
        if self.partial_mask is not None:
            present.append("partial")
        return tuple(present)

    def check_against(self, config_blocks, stage: str) -> None:
        """Reject blocks the network was not trained with and require the
        trained blocks to be present (an all-unknown mask stands in for a
        missing partial block)."""
        config_blocks = normalize_blocks(config_blocks)
        present = set(self.blocks())
        extra = present - set(config_blocks)
        if extra:
            raise ConditioningMismatch(
                f"blocks {sorted(extra)} not supported by this network "
                f"(trained with {blocks_signature(config_blocks)})"
            )
        missing = set(config_blocks) - present - {"partial"}
        if missing:
            raise ConditioningMismatch(f"missing required condition blocks {sorted(missing)}")
        if self.boundary is not None:
            codecs.check_stage_tensor("boundary", self.boundary)
        if self.entrance is not None:
            codecs.check_stage_tensor("entrance", self.entrance)
        if self.room_count is not None and not (1 <= int(self.room_count) <= MAX_ROOMS):
            raise ConditioningMismatch(f"room_count {self.room_count} outside 1..{MAX_ROOMS}")
        kind = STAGE_TENSOR_KIND[stage]
        if self.partial_values is not None:
            codecs.check_stage_tensor(kind, self.partial_values)
        if self.partial_mask is not None:
            expected = (8, 8) if kind == "adjacency" else (8,)
            if tuple(np.asarray(self.partial_mask).shape) != expected:
                raise ShapeMismatch(
                    f"partial mask shape {np.asarray(self.partial_mask).shape} "
                    f"!= {expected} for stage {stage}"
                )

    def with_partial(self, values: np.ndarray, mask: np.ndarray) -> "Conditioning":
        return replace(self, partial_values=values, partial_mask=mask)


def stage_tensor_from_plan(plan: FloorPlan, stage: str) -> np.ndarray:
    kind = STAGE_TENSOR_KIND[stage]
    if kind == "nodes":
        return codecs.encode_nodes(plan.nodes())
    if kind == "adjacency":
        return codecs.encode_adjacency(plan.adjacency)
    boxes = [r.box for r in plan.rooms]
    return codecs.encode_boxes(boxes)


def conditioning_from_plan(
    plan: FloorPlan,
    blocks,
    stage: str,
    partial_mask: np.ndarray | None = None,
) -> Conditioning:
    """Teacher-forced conditioning extracted from a ground-truth record."""
    blocks = normalize_blocks(blocks)
    kw: dict = {}
    if "boundary" in blocks:
        bt, et = codecs.encode_boundary(plan.boundary)
        kw["boundary"] = bt
        kw["entrance"] = et
    if "room_count" in blocks:
        kw["room_count"] = plan.room_count
    if "categories" in blocks:
        kw["categories"] = codecs.encode_categories(plan.nodes())
    if "sizes_locations" in blocks:
        kw["sizes_locations"] = codecs.encode_sizes_locations(plan.nodes())
    if "adjacency" in blocks:
        kw["adjacency"] = codecs.encode_adjacency(plan.adjacency)
    if "partial" in blocks and partial_mask is not None:
        kw["partial_values"] = stage_tensor_from_plan(plan, stage)
        kw["partial_mask"] = np.asarray(partial_mask, dtype=np.float64)
    return Conditioning(**kw)


# ---------------------------------------------------------------------------
# wire format (user-level values; encoding happens server-side)


def conditioning_to_record(c: Conditioning, stage: str) -> dict:
    rec: dict = {}
    if c.boundary is not None:
        b = codecs.decode_boundary(c.boundary, c.entrance)
        rec["boundary"] = [list(p) for p in b.corners]
        rec["entrance"] = [list(p) for p in b.entrance]
    if c.room_count is not None:
        rec["room_count"] = int(c.room_count)
    if c.categories is not None:
        count = int(c.room_count) if c.room_count is not None else MAX_ROOMS
        rec["categories"] = codecs.decode_categories(c.categories, count)
    if c.sizes_locations is not None:
        rows = []
        count = int(c.room_count) if c.room_count is not None else MAX_ROOMS
        for row in np.asarray(c.sizes_locations)[:count]:
            s, x, y = (float(np.clip(codecs.from_norm(v), 0.0, 1.0)) for v in row)
            rows.append([s, x, y])
        rec["sizes_locations"] = rows
    if c.adjacency is not None:
        count = int(c.room_count) if c.room_count is not None else MAX_ROOMS
        adj = codecs.decode_adjacency(c.adjacency, count)
        rec["adjacency"] = sorted([i, j] for i, j in adj.pairs)
    if c.partial_mask is not None:
        rec["partial"] = _partial_to_record(c, stage)
    return rec


def _partial_to_record(c: Conditioning, stage: str) -> dict:
    kind = STAGE_TENSOR_KIND[stage]
    mask = np.asarray(c.partial_mask)
    values = np.asarray(c.partial_values)
    if kind == "nodes":
        rooms = []
        nodes = codecs.decode_nodes(np.where(mask[:, None] > 0, values, -1.0))
        known_rows = [i for i in range(8) if mask[i] > 0]
        it = iter(nodes)
        for i in range(8):
            if i in known_rows:
                n = next(it)
                rooms.append({"category": n.category, "size": n.size, "location": list(n.location)})
            else:
                rooms.append(None)
        return {"stage": stage, "rooms": rooms}
    if kind == "adjacency":
        entries = []
        for i in range(8):
            for j in range(i + 1, 8):
                if mask[i, j] > 0:
                    entries.append([i, j, 1 if values[i, j] > 0 else 0])
        return {"stage": stage, "entries": entries}
    boxes = []
    for i in range(8):
        if mask[i] > 0:
            x1, y1, x2, y2 = (float(np.clip(codecs.from_norm(v), 0.0, 1.0)) for v in values[i])
            boxes.append({"row": i, "box": [x1, y1, x2, y2]})
    return {"stage": stage, "boxes": boxes}


def conditioning_from_record(rec: dict, stage: str) -> Conditioning:
    kw: dict = {}
    if "boundary" in rec:
        boundary = Boundary(
            tuple((float(x), float(y)) for x, y in rec["boundary"]),
            tuple((float(x), float(y)) for x, y in rec["entrance"]),
        )
        bt, et = codecs.encode_boundary(boundary)
        kw["boundary"] = bt
        kw["entrance"] = et
    if "room_count" in rec:
        kw["room_count"] = int(rec["room_count"])
    if "categories" in rec:
        cats = [int(c) for c in rec["categories"]]
        vec = np.full(MAX_ROOMS, -1.0)
        for i, cat in enumerate(cats[:MAX_ROOMS]):
            if cat not in range(1, 7):
                raise ConditioningMismatch(f"category {cat} not in 1..6")
            vec[i] = codecs.CATEGORY_GRID[cat - 1]
        kw["categories"] = vec
        kw.setdefault("room_count", len(cats))
    if "sizes_locations" in rec:
        m = np.full((MAX_ROOMS, 3), -1.0)
        for i, row in enumerate(rec["sizes_locations"][:MAX_ROOMS]):
            s, x, y = (float(v) for v in row)
            m[i] = [codecs.to_norm(s), codecs.to_norm(x), codecs.to_norm(y)]
        kw["sizes_locations"] = m
        kw.setdefault("room_count", len(rec["sizes_locations"]))
    if "adjacency" in rec:
        count = kw.get("room_count", MAX_ROOMS)
        adj = Adjacency.from_pairs([(int(i), int(j)) for i, j in rec["adjacency"]], count)
        kw["adjacency"] = codecs.encode_adjacency(adj)
    if "partial" in rec and rec["partial"] is not None:
        values, mask = _partial_from_record(rec["partial"], stage)
        kw["partial_values"] = values
        kw["partial_mask"] = mask
    return Conditioning(**kw)


def _partial_from_record(rec: dict, stage: str) -> tuple[np.ndarray, np.ndarray]:
    kind = STAGE_TENSOR_KIND[stage]
    if kind == "nodes":
        values = np.full((8, 5), -1.0)
        mask = np.zeros(8)
        for i, room in enumerate(rec.get("rooms", [])[:8]):
            if room is None:
                continue
            node = RoomNode(
                int(room["category"]),
                float(room["size"]),
                (float(room["location"][0]), float(room["location"][1])),
            )
            row = codecs.encode_nodes([node])[0]
            values[i] = row
            mask[i] = 1.0
        return values, mask
    if kind == "adjacency":
        values = np.full((8, 8), -1.0)
        mask = np.zeros((8, 8))
        for i, j, v in rec.get("entries", []):
            i, j = int(i), int(j)
            values[i, j] = values[j, i] = 1.0 if v else -1.0
            mask[i, j] = mask[j, i] = 1.0
        return values, mask
    values = np.full((8, 4), -1.0)
    mask = np.zeros(8)
    for entry in rec.get("boxes", []):
        i = int(entry["row"])
        x1, y1, x2, y2 = (float(v) for v in entry["box"])
        values[i] = codecs.to_norm(np.array([x1, y1, x2, y2]))
        mask[i] = 1.0
    return values, mask
