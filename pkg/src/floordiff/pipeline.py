"""Staged sampling (nodes -> adjacency -> partition) and post-processing.

Generation chains the three stage networks, re-encoding each decoded stage
before it conditions the next so downstream networks see clean, quantized
condition values (exactly what they saw in training).  User-given blocks
pass through to the output untouched: a requested room count or category
list is honored exactly, and when count, categories, and sizes+locations
are all given the node stage is fully specified and not sampled at all.

Partial input applies to the request's target stage (to the node stage for
full_plan requests).  It is condition-encoded when the selected network was
trained with a partial block; with clamp_partial the known element groups
are additionally re-imposed after every reverse step by forward noising the
partial values to the current level (inpainting replacement), which makes
known elements decode to the given values exactly.  Clamping also works on
networks without partial conditioning, which is how sessions honor pins.

All stochastic draws come from per-request RNG streams, so results do not
depend on how requests are batched (up to float reduction order inside
batched matmuls).
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, replace

import numpy as np
import torch

from . import codecs
from .conditioning import (
    Conditioning,
    blocks_signature,
    conditioning_from_record,
    conditioning_to_record,
    format_variant_id,
    parse_variant_id,
)
from .diffusion import NoiseSchedule, forward_noise, reverse_step
from .errors import (
    ConditioningMismatch,
    CorruptRecord,
    DegenerateInput,
    MissingCheckpoint,
    NonFiniteOutput,
)
from .geometry import (
    Adjacency,
    Boundary,
    FloorPlan,
    Rect,
    Room,
    RoomBox,
    RoomNode,
    canonical_room_order,
    merge_region,
    polygon_to_region,
    region_anchor_point,
    region_area,
    region_centroid,
    region_intersection,
    region_subtract,
    shared_edge_length,
    snap_attribute,
)
from .model import StageDenoiser, collate_conditions, load_checkpoint

RESULT_SCHEMA = "result/1"
REGISTRY_SCHEMA = "registry/1"
SAMPLE_CHUNK = 128
DEFAULT_SNAP_DELTA = 0.01
DEFAULT_WALL_TAU = 0.03
DEFAULT_SNAPSHOT_TS = (50, 20, 10, 0)  # the intermediate-output step set

TARGETS = ("nodes", "adjacency", "partition", "full_plan")


@dataclass(frozen=True)
class GenerationRequest:
    target: str
    conditioning: Conditioning = field(default_factory=Conditioning)
    seed: int = 0
    variant: str | None = None        # explicit variant id for the target stage
    clamp_partial: bool = False
    snapshot_ts: tuple[int, ...] = ()
    group: str | None = None          # free-form tag echoed in the result

    def __post_init__(self):
        if self.target not in TARGETS:
            raise ValueError(f"unknown generation target {self.target!r}")

    @property
    def partial_stage(self) -> str:
        """Stage the partial block (if any) belongs to."""
        return "nodes" if self.target == "full_plan" else self.target


@dataclass
class PipelineResult:
    target: str
    seed: int
    variants: dict[str, str]
    conditioning_record: dict
    nodes: list[RoomNode] | None = None
    adjacency: Adjacency | None = None
    boxes: list[RoomBox] | None = None
    plan: FloorPlan | None = None
    snapshots: dict[str, dict[int, np.ndarray]] = field(default_factory=dict)
    group: str | None = None


# ---------------------------------------------------------------------------
# variant registry


@dataclass
class RegistryEntry:
    variant_id: str
    checkpoint_path: str
    stage: str
    conditions: tuple[str, ...]


class VariantRegistry:
    """Maps variant ids to trained checkpoints; loads and caches models."""

    def __init__(self, entries: dict[str, RegistryEntry]):
        self.entries = entries
        self._cache: dict[str, tuple[StageDenoiser, NoiseSchedule]] = {}

    @staticmethod
    def from_file(path: str) -> "VariantRegistry":
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        if doc.get("schema") != REGISTRY_SCHEMA:
            raise CorruptRecord(f"{path}: unsupported registry schema {doc.get('schema')!r}")
        base = os.path.dirname(os.path.abspath(path))
        entries = {}
        for variant_id, spec in doc.get("variants", {}).items():
            stage, conditions = parse_variant_id(variant_id)
            ckpt = spec["checkpoint"]
            if not os.path.isabs(ckpt):
                ckpt = os.path.join(base, ckpt)
            if not os.path.exists(ckpt):
                raise MissingCheckpoint(f"{variant_id}: checkpoint {ckpt} does not exist")
            entries[variant_id] = RegistryEntry(variant_id, ckpt, stage, conditions)
        return VariantRegistry(entries)

    @staticmethod
    def write_file(path: str, checkpoints: dict[str, str]) -> None:
        doc = {
            "schema": REGISTRY_SCHEMA,
            "variants": {vid: {"checkpoint": ckpt} for vid, ckpt in sorted(checkpoints.items())},
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")

    def variant_ids(self) -> list[str]:
        return sorted(self.entries)

    def describe(self) -> list[dict]:
        return [
            {
                "variant": e.variant_id,
                "stage": e.stage,
                "conditions": blocks_signature(e.conditions),
            }
            for e in (self.entries[v] for v in self.variant_ids())
        ]

    def has(self, variant_id: str) -> bool:
        return variant_id in self.entries

    def model(self, variant_id: str) -> tuple[StageDenoiser, NoiseSchedule]:
        if variant_id not in self.entries:
            raise MissingCheckpoint(
                f"unknown variant {variant_id!r}; available: "
                f"{', '.join(self.variant_ids()) or 'none'}"
            )
        if variant_id not in self._cache:
            entry = self.entries[variant_id]
            model, schedule, _ = load_checkpoint(entry.checkpoint_path, expected_stage=entry.stage)
            if model.config.conditions != entry.conditions:
                raise ConditioningMismatch(
                    f"{variant_id}: checkpoint trained with "
                    f"{blocks_signature(model.config.conditions)}, registry says "
                    f"{blocks_signature(entry.conditions)}"
                )
            self._cache[variant_id] = (model, schedule)
        return self._cache[variant_id]


def resolve_variant(
    registry: VariantRegistry,
    stage: str,
    blocks,
    has_partial: bool,
    clamp_partial: bool,
    explicit: str | None = None,
) -> str:
    """Pick the variant id for a stage.

    With a partial block present, a partial-trained network is preferred;
    falling back to a plain network is allowed only in clamped mode (the
    pins are then honored by inpainting replacement alone).
    """
    if explicit is not None:
        if not registry.has(explicit):
            raise MissingCheckpoint(
                f"unknown variant {explicit!r}; available: "
                f"{', '.join(registry.variant_ids()) or 'none'}"
            )
        return explicit
    base_blocks = tuple(b for b in blocks if b != "partial")
    plain = format_variant_id(stage, base_blocks)
    if not has_partial:
        if registry.has(plain):
            return plain
        raise MissingCheckpoint(
            f"no checkpoint for {plain!r}; available: "
            f"{', '.join(registry.variant_ids()) or 'none'}"
        )
    with_partial = format_variant_id(stage, base_blocks + ("partial",))
    if registry.has(with_partial):
        return with_partial
    if clamp_partial and registry.has(plain):
        return plain
    raise MissingCheckpoint(
        f"no checkpoint for {with_partial!r}"
        + ("" if clamp_partial else " (partial input without clamping needs a partial-trained network)")
        + f"; available: {', '.join(registry.variant_ids()) or 'none'}"
    )


# ---------------------------------------------------------------------------
# partial input


def apply_partial(
    x: np.ndarray,
    partial_values: np.ndarray,
    mask: np.ndarray,
    t: int,
    schedule: NoiseSchedule,
    rng: np.random.Generator,
) -> np.ndarray:
    """Replace masked element groups with forward-noised partial values at
    level t (t = 0 means the exact values)."""
    eps = rng.standard_normal(x.shape)
    noised = forward_noise(np.asarray(partial_values, dtype=np.float64), t, eps, schedule)
    mask = np.asarray(mask, dtype=np.float64)
    if mask.ndim == 1:
        mask = np.repeat(mask[:, None], x.shape[1], axis=1)
    return np.where(mask > 0, noised, x)


def _strip_partial(cond: Conditioning) -> Conditioning:
    if cond.partial_values is None and cond.partial_mask is None:
        return cond
    return replace(cond, partial_values=None, partial_mask=None)


# ---------------------------------------------------------------------------
# reverse-process sampling


def sample_stage_batch(
    model: StageDenoiser,
    schedule: NoiseSchedule,
    conds: list[Conditioning],
    seeds: list[int],
    snapshot_ts: tuple[int, ...] = (),
    clamp_specs: list[tuple[np.ndarray, np.ndarray] | None] | None = None,
) -> tuple[np.ndarray, list[dict[int, np.ndarray]]]:
    """Run the reverse process for a batch of requests.

    Per-request RNG streams draw x_T, the per-step z, and the clamping
    noise in a fixed order, so each output depends only on its own seed.
    Returns final tensors (clipped to [-1, 1]) and per-request snapshots.
    """
    stage = model.config.stage
    width = model.config.row_width
    n = len(conds)
    if clamp_specs is None:
        clamp_specs = [None] * n
    for c in conds:
        c.check_against(model.config.conditions, stage)
    T = schedule.timesteps
    rngs = [np.random.default_rng([int(s) & 0xFFFFFFFFFFFFFFFF, 977]) for s in seeds]
    x = np.stack([rng.standard_normal((8, width)) for rng in rngs])
    snapshots: list[dict[int, np.ndarray]] = [{} for _ in range(n)]

    def record(t_level: int) -> None:
        if t_level in snapshot_ts:
            for i in range(n):
                snapshots[i][t_level] = np.clip(x[i], -1.0, 1.0)

    cond_batch = collate_conditions(conds, model.config)
    record(T)
    with torch.inference_mode():
        for t in range(T, 0, -1):
            eps_hat = np.empty_like(x)
            for lo in range(0, n, SAMPLE_CHUNK):
                hi = min(lo + SAMPLE_CHUNK, n)
                chunk = torch.as_tensor(x[lo:hi], dtype=torch.float32)
                tt = torch.full((hi - lo,), t, dtype=torch.long)
                sub = {k: v[lo:hi] for k, v in cond_batch.items()}
                try:
                    out = model(chunk, tt, sub)
                except NonFiniteOutput as exc:
                    raise NonFiniteOutput(f"stage {stage}: {exc}") from exc
                eps_hat[lo:hi] = out.numpy().astype(np.float64)
            if t > 1:
                z = np.stack([rng.standard_normal((8, width)) for rng in rngs])
            else:
                z = None
            x = reverse_step(x, eps_hat, t, z, schedule)
            for i, spec in enumerate(clamp_specs):
                if spec is not None:
                    values, mask = spec
                    x[i] = apply_partial(x[i], values, mask, t - 1, schedule, rngs[i])
            record(t - 1)
    x = np.clip(x, -1.0, 1.0)
    return x, snapshots


def sample_stage(
    model: StageDenoiser,
    schedule: NoiseSchedule,
    conditioning: Conditioning,
    seed: int,
    snapshot_ts: tuple[int, ...] = (),
    clamp_partial: bool = False,
) -> tuple[np.ndarray, dict[int, np.ndarray]]:
    """Single-request sampling against one loaded network."""
    clamp_spec = None
    cond = conditioning
    if conditioning.partial_mask is not None:
        if clamp_partial and np.asarray(conditioning.partial_mask).max() > 0:
            clamp_spec = (
                np.asarray(conditioning.partial_values, dtype=np.float64),
                np.asarray(conditioning.partial_mask, dtype=np.float64),
            )
        if "partial" not in model.config.conditions:
            if not clamp_partial:
                raise ConditioningMismatch(
                    "partial input without clamping needs a partial-trained network"
                )
            cond = _strip_partial(conditioning)
    xs, snaps = sample_stage_batch(
        model, schedule, [cond], [seed], snapshot_ts, [clamp_spec]
    )
    return xs[0], snaps[0]


# ---------------------------------------------------------------------------
# node decoding under user-specified blocks


def _decode_nodes_preserving(tensor: np.ndarray, cond: Conditioning) -> list[RoomNode]:
    """Decode sampled nodes, honoring user-given blocks exactly."""
    if cond.room_count is not None:
        count = int(cond.room_count)
        order = np.argsort(-tensor[:, 0], kind="stable")
        rows = sorted(int(i) for i in order[:count])
    else:
        rows = [i for i in range(8) if tensor[i, 0] > 0.0]
        if not rows:
            # an empty bubble is never a usable outcome; keep the row the
            # sampler was most confident about
            rows = [int(np.argmax(tensor[:, 0]))]
    cats_given = None
    if cond.categories is not None:
        cats_given = codecs.decode_categories(cond.categories, len(rows))
    sl_given = None if cond.sizes_locations is None else np.asarray(cond.sizes_locations)
    nodes = []
    for pos, r in enumerate(rows):
        row = tensor[r]
        category = int(np.argmin(np.abs(codecs.CATEGORY_GRID - row[1]))) + 1
        size = float(np.clip(codecs.from_norm(row[2]), 0.0, 1.0))
        x = float(np.clip(codecs.from_norm(row[3]), 0.0, 1.0))
        y = float(np.clip(codecs.from_norm(row[4]), 0.0, 1.0))
        if cats_given is not None and pos < len(cats_given):
            category = cats_given[pos]
        if sl_given is not None and pos < len(sl_given):
            size, x, y = (
                float(np.clip(codecs.from_norm(v), 0.0, 1.0)) for v in sl_given[pos]
            )
        nodes.append(RoomNode(category, size, (x, y)))
    return list(canonical_room_order(nodes))


def _nodes_from_conditioning(cond: Conditioning) -> list[RoomNode] | None:
    """When count, categories, and sizes+locations are all given the node
    stage is fully specified and never sampled."""
    if cond.room_count is None or cond.categories is None or cond.sizes_locations is None:
        return None
    count = int(cond.room_count)
    cats = codecs.decode_categories(cond.categories, count)
    nodes = []
    for i in range(count):
        s, x, y = (
            float(np.clip(codecs.from_norm(v), 0.0, 1.0))
            for v in np.asarray(cond.sizes_locations)[i]
        )
        nodes.append(RoomNode(cats[i], s, (x, y)))
    return list(canonical_room_order(nodes))


# ---------------------------------------------------------------------------
# post-processing: snap, clip, resolve overlaps, fill


def _snap_axis(box_edges: list[tuple[int, int, float]], anchors: list[float], delta: float):
    """Cluster coordinates (diameter <= 2*delta); box edges snap to the
    nearest anchor in their cluster, or to the cluster mean when the cluster
    contains no anchor.  Anchors never move."""
    items = [(v, ("box", bi, side)) for bi, side, v in box_edges]
    items += [(a, ("anchor",)) for a in anchors]
    items.sort(key=lambda it: it[0])
    out: dict[tuple[int, int], float] = {}
    i = 0
    while i < len(items):
        j = i
        start = items[i][0]
        while j < len(items) and items[j][0] - start <= 2.0 * delta + 1e-9:
            j += 1
        cluster = items[i:j]
        cluster_anchors = [v for v, tag in cluster if tag[0] == "anchor"]
        mean = sum(v for v, _ in cluster) / len(cluster)
        for v, tag in cluster:
            if tag[0] != "box":
                continue
            if cluster_anchors:
                target = min(cluster_anchors, key=lambda a: (abs(a - v), a))
            else:
                target = mean
            out[(tag[1], tag[2])] = target
        i = j
    return out


def _snap_boxes(boxes: list[RoomBox], boundary: Boundary, delta: float) -> list[Rect]:
    anchors_x = sorted({p[0] for p in boundary.corners})
    anchors_y = sorted({p[1] for p in boundary.corners})
    x_edges = []
    y_edges = []
    for bi, b in enumerate(boxes):
        x1, y1, x2, y2 = b.rect
        x_edges += [(bi, 0, x1), (bi, 2, x2)]
        y_edges += [(bi, 1, y1), (bi, 3, y2)]
    sx = _snap_axis(x_edges, anchors_x, delta)
    sy = _snap_axis(y_edges, anchors_y, delta)
    return [
        (sx[(bi, 0)], sy[(bi, 1)], sx[(bi, 2)], sy[(bi, 3)])
        for bi in range(len(boxes))
    ]


def postprocess(
    boxes: list[RoomBox],
    boundary: Boundary,
    adjacency: Adjacency | None = None,
    snap_delta: float = DEFAULT_SNAP_DELTA,
    wall_tau: float = DEFAULT_WALL_TAU,
) -> FloorPlan:
    """Convert raw room boxes into a gap-free partition of the boundary.

    1. snap near-coincident box and boundary edge coordinates together
       (boundary coordinates are anchors and never move);
    2. clip each box to the boundary;
    3. resolve overlaps in favor of the earlier-indexed box;
    4. assign every uncovered rectangle to the neighboring room with the
       longest shared wall (ties to the lower room index), repeating as
       regions grow; rooms whose clipped box vanished are reseeded with the
       nearest free rectangle first.

    The result's rooms are rectilinear regions that tile the boundary; its
    adjacency is re-derived from the final shared walls (the bubble-diagram
    adjacency, if any, is kept separately by the caller).
    """
    if not boxes:
        raise DegenerateInput("no boxes to post-process")
    bound_region = polygon_to_region(list(boundary.corners))
    bound_area = region_area(bound_region)
    if not any(region_intersection([b.rect], bound_region) for b in boxes):
        raise DegenerateInput("all boxes fall outside the boundary")

    snapped = _snap_boxes(boxes, boundary, snap_delta)
    regions: list[list[Rect]] = []
    for rect in snapped:
        if rect[0] < rect[2] and rect[1] < rect[3]:
            clipped = region_intersection([rect], bound_region)
        else:
            clipped = []
        for prev in regions:
            if clipped and prev:
                clipped = region_subtract(clipped, prev)
        regions.append(clipped)

    def uncovered_rects() -> list[Rect]:
        taken = [r for reg in regions for r in reg]
        return region_subtract(bound_region, taken)

    # reseed rooms that lost their whole box
    for i, reg in enumerate(regions):
        if reg:
            continue
        free = uncovered_rects()
        if not free:
            continue
        cx = (snapped[i][0] + snapped[i][2]) / 2.0
        cy = (snapped[i][1] + snapped[i][3]) / 2.0
        free.sort(
            key=lambda r: (
                ((r[0] + r[2]) / 2.0 - cx) ** 2 + ((r[1] + r[3]) / 2.0 - cy) ** 2,
                r[1],
                r[0],
            )
        )
        regions[i] = [free[0]]

    # fill remaining gaps: longest shared wall wins, ties to lower index
    pending = sorted(uncovered_rects(), key=lambda r: (r[1], r[0]))
    for _ in range(64):
        if not pending:
            break
        progressed = False
        deferred = []
        for rect in pending:
            shares = [
                shared_edge_length([rect], reg) if reg else 0.0 for reg in regions
            ]
            best = max(shares)
            if best > 1e-9:
                regions[shares.index(best)].append(rect)
                progressed = True
            else:
                deferred.append(rect)
        pending = deferred
        if not progressed:
            break
    for rect in pending:  # corner-contact leftovers: nearest room by centroid
        cx, cy = (rect[0] + rect[2]) / 2.0, (rect[1] + rect[3]) / 2.0
        dists = []
        for reg in regions:
            if not reg:
                dists.append(float("inf"))
                continue
            rx, ry = region_centroid(reg)
            dists.append((rx - cx) ** 2 + (ry - cy) ** 2)
        regions[min(range(len(regions)), key=lambda i: (dists[i], i))].append(rect)

    rooms = []
    for i, reg in enumerate(regions):
        if not reg:
            continue  # boundary was fully covered before this room could seed
        merged = merge_region(sorted(reg))
        rooms.append(
            Room(
                category=boxes[i].category,
                size=snap_attribute(region_area(merged) / bound_area),
                location=region_anchor_point(merged),
                region=tuple(merged),
            )
        )

    n = len(rooms)
    perm = sorted(
        range(n), key=lambda i: (rooms[i].category, rooms[i].location[1], rooms[i].location[0])
    )
    rooms_sorted = tuple(rooms[i] for i in perm)
    pairs = set()
    for a in range(n):
        for b in range(a + 1, n):
            if (
                shared_edge_length(list(rooms_sorted[a].region), list(rooms_sorted[b].region))
                > wall_tau
            ):
                pairs.add((a, b))
    return FloorPlan(boundary, rooms_sorted, Adjacency(frozenset(pairs), n))


# ---------------------------------------------------------------------------
# full staged generation


def _nodes_condition_blocks(nodes: list[RoomNode], base: Conditioning) -> Conditioning:
    return replace(
        base,
        room_count=len(nodes),
        categories=codecs.encode_categories(nodes),
        sizes_locations=codecs.encode_sizes_locations(nodes),
        adjacency=None,
        partial_values=None,
        partial_mask=None,
    )


def _stage_seed(seed: int, stage_index: int) -> int:
    return int(
        np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, stage_index]).generate_state(1)[0]
    )


def _prepare_stage_cond(
    req: GenerationRequest,
    stage: str,
    cond: Conditioning,
    model_conditions: tuple[str, ...],
):
    """Split a request's conditioning into what the network sees and the
    clamp spec for this stage."""
    clamp_spec = None
    if req.partial_stage == stage and cond.partial_mask is not None:
        if req.clamp_partial and np.asarray(cond.partial_mask).max() > 0:
            clamp_spec = (
                np.asarray(cond.partial_values, dtype=np.float64),
                np.asarray(cond.partial_mask, dtype=np.float64),
            )
        if "partial" not in model_conditions:
            cond = _strip_partial(cond)
    elif cond.partial_mask is not None:
        cond = _strip_partial(cond)
    return cond, clamp_spec


def generate_plans(
    registry: VariantRegistry, requests: list[GenerationRequest]
) -> list[PipelineResult]:
    """Batched staged generation; per-request randomness is independent."""
    results = [
        PipelineResult(
            target=req.target,
            seed=req.seed,
            variants={},
            conditioning_record=conditioning_to_record(req.conditioning, req.partial_stage),
            group=req.group,
        )
        for req in requests
    ]

    # -- node stage ---------------------------------------------------------
    nodes_out: list[list[RoomNode] | None] = [None] * len(requests)
    node_jobs: list[tuple[int, str]] = []
    for i, req in enumerate(requests):
        given = _nodes_from_conditioning(req.conditioning)
        if given is not None:
            nodes_out[i] = given
            continue
        has_partial = req.partial_stage == "nodes" and req.conditioning.partial_mask is not None
        blocks = tuple(b for b in req.conditioning.blocks() if b != "partial" or has_partial)
        variant = resolve_variant(
            registry,
            "nodes",
            blocks,
            has_partial,
            req.clamp_partial,
            explicit=req.variant if req.target in ("nodes", "full_plan") else None,
        )
        node_jobs.append((i, variant))
    for variant in sorted({v for _, v in node_jobs}):
        idxs = [i for i, v in node_jobs if v == variant]
        model, schedule = registry.model(variant)
        conds, clamps = [], []
        for i in idxs:
            c, spec = _prepare_stage_cond(
                requests[i], "nodes", requests[i].conditioning, model.config.conditions
            )
            conds.append(c)
            clamps.append(spec)
        seeds = [_stage_seed(requests[i].seed, 0) for i in idxs]
        snaps_wanted = tuple(sorted({t for i in idxs for t in requests[i].snapshot_ts}))
        xs, snaps = sample_stage_batch(
            model, schedule, conds, seeds, snapshot_ts=snaps_wanted, clamp_specs=clamps
        )
        for pos, i in enumerate(idxs):
            nodes_out[i] = _decode_nodes_preserving(xs[pos], requests[i].conditioning)
            results[i].variants["nodes"] = variant
            if requests[i].snapshot_ts:
                results[i].snapshots["nodes"] = {
                    t: snaps[pos][t] for t in requests[i].snapshot_ts if t in snaps[pos]
                }

    for i in range(len(requests)):
        results[i].nodes = nodes_out[i]
    if all(req.target == "nodes" for req in requests):
        return results

    # -- adjacency stage ------------------------------------------------------
    adj_out: list[Adjacency | None] = [None] * len(requests)
    adj_jobs: list[tuple[int, str]] = []
    for i, req in enumerate(requests):
        if req.target == "nodes":
            continue
        nodes = nodes_out[i]
        if not nodes:
            raise DegenerateInput("node stage produced no rooms")
        if req.conditioning.adjacency is not None and req.target != "adjacency":
            adj_out[i] = codecs.decode_adjacency(req.conditioning.adjacency, len(nodes))
            continue
        has_b = "boundary" in req.conditioning.blocks()
        has_partial = req.partial_stage == "adjacency" and req.conditioning.partial_mask is not None
        blocks = ("B", "nodes") if has_b else ("nodes",)
        if has_partial:
            blocks = blocks + ("partial",)
        variant = resolve_variant(
            registry,
            "adjacency",
            blocks,
            has_partial,
            req.clamp_partial,
            explicit=req.variant if req.target == "adjacency" else None,
        )
        adj_jobs.append((i, variant))
    for variant in sorted({v for _, v in adj_jobs}):
        idxs = [i for i, v in adj_jobs if v == variant]
        model, schedule = registry.model(variant)
        conds, clamps = [], []
        for i in idxs:
            base = _nodes_condition_blocks(nodes_out[i], requests[i].conditioning)
            if requests[i].partial_stage == "adjacency":
                base = replace(
                    base,
                    partial_values=requests[i].conditioning.partial_values,
                    partial_mask=requests[i].conditioning.partial_mask,
                )
            c, spec = _prepare_stage_cond(requests[i], "adjacency", base, model.config.conditions)
            conds.append(c)
            clamps.append(spec)
        seeds = [_stage_seed(requests[i].seed, 1) for i in idxs]
        snaps_wanted = tuple(sorted({t for i in idxs for t in requests[i].snapshot_ts}))
        xs, snaps = sample_stage_batch(
            model, schedule, conds, seeds, snapshot_ts=snaps_wanted, clamp_specs=clamps
        )
        for pos, i in enumerate(idxs):
            adj_out[i] = codecs.decode_adjacency(xs[pos], len(nodes_out[i]))
            results[i].variants["adjacency"] = variant
            if requests[i].snapshot_ts:
                results[i].snapshots["adjacency"] = {
                    t: snaps[pos][t] for t in requests[i].snapshot_ts if t in snaps[pos]
                }

    for i, req in enumerate(requests):
        if req.target != "nodes":
            results[i].adjacency = adj_out[i]
    if all(req.target in ("nodes", "adjacency") for req in requests):
        return results

    # -- partition stage --------------------------------------------------------
    part_jobs: list[tuple[int, str]] = []
    for i, req in enumerate(requests):
        if req.target in ("nodes", "adjacency"):
            continue
        has_b = "boundary" in req.conditioning.blocks()
        has_partial = req.partial_stage == "partition" and req.conditioning.partial_mask is not None
        blocks = ("B", "nodes", "adj") if has_b else ("nodes", "adj")
        if has_partial:
            blocks = blocks + ("partial",)
        variant = resolve_variant(
            registry,
            "partition",
            blocks,
            has_partial,
            req.clamp_partial,
            explicit=req.variant if req.target == "partition" else None,
        )
        part_jobs.append((i, variant))
    for variant in sorted({v for _, v in part_jobs}):
        idxs = [i for i, v in part_jobs if v == variant]
        model, schedule = registry.model(variant)
        conds, clamps = [], []
        for i in idxs:
            base = _nodes_condition_blocks(nodes_out[i], requests[i].conditioning)
            base = replace(base, adjacency=codecs.encode_adjacency(adj_out[i]))
            if requests[i].partial_stage == "partition":
                base = replace(
                    base,
                    partial_values=requests[i].conditioning.partial_values,
                    partial_mask=requests[i].conditioning.partial_mask,
                )
            c, spec = _prepare_stage_cond(requests[i], "partition", base, model.config.conditions)
            conds.append(c)
            clamps.append(spec)
        seeds = [_stage_seed(requests[i].seed, 2) for i in idxs]
        snaps_wanted = tuple(sorted({t for i in idxs for t in requests[i].snapshot_ts}))
        xs, snaps = sample_stage_batch(
            model, schedule, conds, seeds, snapshot_ts=snaps_wanted, clamp_specs=clamps
        )
        for pos, i in enumerate(idxs):
            nodes = nodes_out[i]
            boxes = codecs.decode_boxes(xs[pos], nodes)
            results[i].boxes = boxes
            results[i].variants["partition"] = variant
            if requests[i].snapshot_ts:
                results[i].snapshots["partition"] = {
                    t: snaps[pos][t] for t in requests[i].snapshot_ts if t in snaps[pos]
                }
            boundary = _request_boundary(requests[i].conditioning, boxes)
            try:
                results[i].plan = postprocess(boxes, boundary, adj_out[i])
            except DegenerateInput:
                # every sampled box missed the boundary (weak models, or an
                # out-of-distribution bubble); degrade to full-extent boxes
                # so the request still yields a valid partition
                bx1 = min(p[0] for p in boundary.corners)
                by1 = min(p[1] for p in boundary.corners)
                bx2 = max(p[0] for p in boundary.corners)
                by2 = max(p[1] for p in boundary.corners)
                fallback = [RoomBox(b.category, (bx1, by1, bx2, by2)) for b in boxes]
                results[i].plan = postprocess(fallback, boundary, adj_out[i])
    return results


def _request_boundary(cond: Conditioning, boxes: list[RoomBox]) -> Boundary:
    if cond.boundary is not None:
        return codecs.decode_boundary(cond.boundary, cond.entrance)
    # boundary-unconstrained: post-process against the boxes' bounding box
    x1 = min(b.rect[0] for b in boxes)
    y1 = min(b.rect[1] for b in boxes)
    x2 = max(b.rect[2] for b in boxes)
    y2 = max(b.rect[3] for b in boxes)
    snap = 1.0 / 256.0
    x1, y1 = np.floor(x1 / snap) * snap, np.floor(y1 / snap) * snap
    x2, y2 = np.ceil(x2 / snap) * snap, np.ceil(y2 / snap) * snap
    x1, y1 = max(x1, 0.0), max(y1, 0.0)
    x2 = min(max(x2, x1 + 16 * snap), 1.0)
    y2 = min(max(y2, y1 + 16 * snap), 1.0)
    corners = ((x1, y1), (x2, y1), (x2, y2), (x1, y2))
    elen = min(16 * snap, (x2 - x1) / 2)
    entrance = ((x1, y1), (x1 + elen, y1), (x1 + elen, y1 + 4 * snap), (x1, y1 + 4 * snap))
    return Boundary(corners, entrance)


def generate_plan(registry: VariantRegistry, request: GenerationRequest) -> PipelineResult:
    return generate_plans(registry, [request])[0]


# ---------------------------------------------------------------------------
# result records


def result_to_record(result: PipelineResult) -> dict:
    from .interchange import plan_to_record

    rec: dict = {
        "schema": RESULT_SCHEMA,
        "target": result.target,
        "seed": result.seed,
        "variants": result.variants,
        "conditioning": result.conditioning_record,
    }
    if result.group is not None:
        rec["group"] = result.group
    if result.nodes is not None:
        rec["nodes"] = [
            {"category": n.category, "size": n.size, "location": list(n.location)}
            for n in result.nodes
        ]
    if result.adjacency is not None:
        rec["adjacency"] = sorted([i, j] for i, j in result.adjacency.pairs)
        rec["room_count"] = result.adjacency.room_count
    if result.boxes is not None:
        rec["boxes"] = [{"category": b.category, "box": list(b.rect)} for b in result.boxes]
    if result.plan is not None:
        rec["plan"] = plan_to_record(result.plan)
    if result.snapshots:
        rec["snapshots"] = {
            stage: {str(t): v.tolist() for t, v in snaps.items()}
            for stage, snaps in result.snapshots.items()
        }
    return rec


def result_from_record(rec: dict) -> PipelineResult:
    from .interchange import plan_from_record

    if rec.get("schema") != RESULT_SCHEMA:
        raise CorruptRecord(f"unsupported result schema {rec.get('schema')!r}")
    nodes = None
    if "nodes" in rec:
        nodes = [
            RoomNode(
                int(n["category"]),
                float(n["size"]),
                (float(n["location"][0]), float(n["location"][1])),
            )
            for n in rec["nodes"]
        ]
    adjacency = None
    if "adjacency" in rec:
        count = int(rec.get("room_count", len(nodes or [])))
        adjacency = Adjacency.from_pairs([(int(i), int(j)) for i, j in rec["adjacency"]], count)
    boxes = None
    if "boxes" in rec:
        boxes = [
            RoomBox(int(b["category"]), tuple(float(v) for v in b["box"])) for b in rec["boxes"]
        ]
    plan = plan_from_record(rec["plan"]) if rec.get("plan") else None
    snapshots = {}
    for stage, snaps in rec.get("snapshots", {}).items():
        snapshots[stage] = {int(t): np.asarray(v) for t, v in snaps.items()}
    return PipelineResult(
        target=rec["target"],
        seed=int(rec["seed"]),
        variants=dict(rec.get("variants", {})),
        conditioning_record=dict(rec.get("conditioning", {})),
        nodes=nodes,
        adjacency=adjacency,
        boxes=boxes,
        plan=plan,
        snapshots=snapshots,
        group=rec.get("group"),
    )


def request_from_record(rec: dict) -> GenerationRequest:
    target = rec.get("target", "full_plan")
    if target not in TARGETS:
        raise CorruptRecord(f"unknown generation target {target!r}")
    stage_for_cond = "nodes" if target == "full_plan" else target
    cond = conditioning_from_record(rec.get("conditioning", {}), stage_for_cond)
    snapshot_ts = rec.get("snapshot_ts", ())
    if snapshot_ts is True:  # "give me snapshots" without naming steps
        snapshot_ts = DEFAULT_SNAPSHOT_TS
    return GenerationRequest(
        target=target,
        conditioning=cond,
        seed=int(rec.get("seed", 0)),
        variant=rec.get("variant"),
        clamp_partial=bool(rec.get("clamp_partial", False)),
        snapshot_ts=tuple(int(t) for t in snapshot_ts),
        group=rec.get("group"),
    )
