"""Quantitative evaluation suite over vector outputs.

Statistics ratios compare generated-set means to reference-set means for
room count, living-room connectivity, living-room counts and area share.
Condition-compliance MAE measures how strictly outputs honor requested
blocks.  Diversity and coverage are per-category IoU aggregates.  The
Fréchet feature distance is a Gaussian Fréchet distance over hand-crafted
per-plan feature vectors — a declared substitute for Inception-based FID,
NOT comparable to published FID magnitudes.

Adjacency-based statistics use the bubble-diagram adjacency matrix, not
geometric wall sharing.  Compliance MAE units: room count in rooms, R_c and
R_{s,l} on the encoded [-1, 1] tensor scale, R_a on the binary {0,1} scale.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import codecs
from .errors import ShapeMismatch, TooFewSamples, UndefinedRatio
from .geometry import (
    FloorPlan,
    NUM_CATEGORIES,
    Rect,
    rectilinear_iou,
    region_bbox,
)

FEATURE_NAMES = (
    ["room_count"]
    + [f"count_cat{c}" for c in range(1, NUM_CATEGORIES + 1)]
    + [f"area_cat{c}" for c in range(1, NUM_CATEGORIES + 1)]
    + ["adjacency_pairs", "mean_aspect"]
)


# ---------------------------------------------------------------------------
# per-plan measurements


@dataclass(frozen=True)
class PlanStats:
    rooms: int                 # R^n
    living_links: int          # C^l: rooms adjacent to the first living room
    living_link_ratio: float | None  # C^r = C^l / (R^n - L^n)
    living_rooms: int          # L^n
    living_area: float         # L^a: living area fraction


def plan_stats(plan: FloorPlan) -> PlanStats:
    living = plan.living_indices()
    links = 0
    ratio = None
    if living:
        first = living[0]
        links = plan.adjacency.degree(first)
        non_living = plan.room_count - len(living)
        if non_living > 0:
            ratio = links / non_living
    living_area = sum(plan.rooms[i].size for i in living[:1])
    return PlanStats(
        rooms=plan.room_count,
        living_links=links,
        living_link_ratio=ratio,
        living_rooms=len(living),
        living_area=living_area,
    )


@dataclass(frozen=True)
class StatisticsReport:
    rooms_ratio: float            # R^n_avg
    living_links_ratio: float     # C^l_avg
    living_link_ratio_ratio: float  # C^r_avg
    living_rooms_ratio: float     # L^n_avg
    living_area_ratio: float      # L^a_avg

    def to_dict(self) -> dict:
        return {
            "rooms_ratio": self.rooms_ratio,
            "living_links_ratio": self.living_links_ratio,
            "living_link_ratio_ratio": self.living_link_ratio_ratio,
            "living_rooms_ratio": self.living_rooms_ratio,
            "living_area_ratio": self.living_area_ratio,
        }


def _mean_ratio(gen_vals, ref_vals, name: str) -> float:
    gen_vals = [v for v in gen_vals if v is not None]
    ref_vals = [v for v in ref_vals if v is not None]
    if not gen_vals or not ref_vals:
        raise UndefinedRatio(f"{name}: empty sample")
    ref_mean = float(np.mean(ref_vals))
    if ref_mean == 0.0:
        raise UndefinedRatio(f"{name}: reference mean is zero")
    return float(np.mean(gen_vals)) / ref_mean


def plan_statistics(generated: list[FloorPlan], reference: list[FloorPlan]) -> StatisticsReport:
    """Ratios of generated-set means to reference-set means."""
    if not generated or not reference:
        raise UndefinedRatio("empty plan set")
    gen = [plan_stats(p) for p in generated]
    ref = [plan_stats(p) for p in reference]
    return StatisticsReport(
        rooms_ratio=_mean_ratio([s.rooms for s in gen], [s.rooms for s in ref], "rooms"),
        living_links_ratio=_mean_ratio(
            [s.living_links for s in gen], [s.living_links for s in ref], "living_links"
        ),
        living_link_ratio_ratio=_mean_ratio(
            [s.living_link_ratio for s in gen],
            [s.living_link_ratio for s in ref],
            "living_link_ratio",
        ),
        living_rooms_ratio=_mean_ratio(
            [s.living_rooms for s in gen], [s.living_rooms for s in ref], "living_rooms"
        ),
        living_area_ratio=_mean_ratio(
            [s.living_area for s in gen], [s.living_area for s in ref], "living_area"
        ),
    )


# ---------------------------------------------------------------------------
# condition compliance


@dataclass(frozen=True)
class ComplianceReport:
    room_count_mae: float | None
    categories_mae: float | None
    sizes_locations_mae: float | None
    adjacency_mae: float | None
    samples: int

    def to_dict(self) -> dict:
        return {
            "room_count_mae": self.room_count_mae,
            "categories_mae": self.categories_mae,
            "sizes_locations_mae": self.sizes_locations_mae,
            "adjacency_mae": self.adjacency_mae,
            "samples": self.samples,
        }


def _extract_blocks(nodes, adjacency):
    cats = codecs.encode_categories(nodes)
    sl = codecs.encode_sizes_locations(nodes)
    adj = None
    if adjacency is not None:
        adj = (codecs.encode_adjacency(adjacency) > 0).astype(np.float64)
    return cats, sl, adj


def compliance_mae(outputs, conditions) -> ComplianceReport:
    """Mean absolute error between output attributes and requested blocks.

    outputs: list of (nodes, adjacency) pairs or PipelineResult-like objects
    with .nodes/.adjacency; conditions: matching Conditioning objects.
    Blocks absent from a sample's conditioning are skipped.
    """
    if len(outputs) != len(conditions):
        raise ShapeMismatch(f"{len(outputs)} outputs vs {len(conditions)} conditions")
    count_err, cat_err, sl_err, adj_err = [], [], [], []
    for out, cond in zip(outputs, conditions):
        nodes = out.nodes if hasattr(out, "nodes") else out[0]
        adjacency = out.adjacency if hasattr(out, "adjacency") else out[1]
        if callable(nodes):
            nodes = nodes()
        cats, sl, adj = _extract_blocks(nodes, adjacency)
        if cond.room_count is not None:
            count_err.append(abs(len(nodes) - int(cond.room_count)))
        if cond.categories is not None:
            cat_err.append(float(np.abs(cats - np.asarray(cond.categories)).mean()))
        if cond.sizes_locations is not None:
            sl_err.append(float(np.abs(sl - np.asarray(cond.sizes_locations)).mean()))
        if cond.adjacency is not None and adj is not None:
            want = (np.asarray(cond.adjacency) > 0).astype(np.float64)
            adj_err.append(float(np.abs(adj - want).mean()))
    return ComplianceReport(
        room_count_mae=float(np.mean(count_err)) if count_err else None,
        categories_mae=float(np.mean(cat_err)) if cat_err else None,
        sizes_locations_mae=float(np.mean(sl_err)) if sl_err else None,
        adjacency_mae=float(np.mean(adj_err)) if adj_err else None,
        samples=len(outputs),
    )


# ---------------------------------------------------------------------------
# diversity / coverage


def _category_regions(plan: FloorPlan) -> list[list[Rect]]:
    return [plan.category_region(c) for c in range(1, NUM_CATEGORIES + 1)]


def diversity_avg(variant_sets: list[list[FloorPlan]]) -> dict[int, float]:
    """Mean pairwise per-category IoU across K variants, averaged over
    samples.  Lower is more diverse; both-empty categories score 1."""
    if not variant_sets:
        raise TooFewSamples("no samples")
    per_cat: list[list[float]] = [[] for _ in range(NUM_CATEGORIES)]
    for variants in variant_sets:
        if len(variants) < 2:
            raise TooFewSamples("need at least 2 variants per sample")
        regions = [_category_regions(p) for p in variants]
        k = len(variants)
        for c in range(NUM_CATEGORIES):
            ious = [
                rectilinear_iou(regions[i][c], regions[j][c])
                for i in range(k)
                for j in range(i + 1, k)
            ]
            per_cat[c].append(float(np.mean(ious)))
    return {c + 1: float(np.mean(per_cat[c])) for c in range(NUM_CATEGORIES)}


def coverage_avg(generated: list[FloorPlan], references: list[FloorPlan]) -> dict[int, float]:
    """Mean per-category IoU between each generated plan and its paired
    reference (ground truth or retrieved nearest neighbor)."""
    if len(generated) != len(references):
        raise ShapeMismatch(f"{len(generated)} generated vs {len(references)} references")
    if not generated:
        raise TooFewSamples("no samples")
    per_cat: list[list[float]] = [[] for _ in range(NUM_CATEGORIES)]
    for g, r in zip(generated, references):
        gr = _category_regions(g)
        rr = _category_regions(r)
        for c in range(NUM_CATEGORIES):
            per_cat[c].append(rectilinear_iou(gr[c], rr[c]))
    return {c + 1: float(np.mean(per_cat[c])) for c in range(NUM_CATEGORIES)}


# ---------------------------------------------------------------------------
# Fréchet feature distance (FID substitute over declared vector features)


def feature_vector(plan: FloorPlan) -> np.ndarray:
    """15 scalars: room count, 6 per-category counts, 6 per-category area
    fractions, adjacency pair count, mean room bbox aspect ratio."""
    counts = np.zeros(NUM_CATEGORIES)
    areas = np.zeros(NUM_CATEGORIES)
    aspects = []
    for room in plan.rooms:
        counts[room.category - 1] += 1
        areas[room.category - 1] += room.size
        if room.region:
            x1, y1, x2, y2 = region_bbox(list(room.region))
            w = max(x2 - x1, 1.0 / 256.0)
            h = max(y2 - y1, 1.0 / 256.0)
            aspects.append(max(w, h) / min(w, h))
    mean_aspect = float(np.mean(aspects)) if aspects else 1.0
    vec = np.concatenate(
        [[plan.room_count], counts, areas, [len(plan.adjacency.pairs)], [mean_aspect]]
    )
    return vec.astype(np.float64)


def _psd_sqrt(m: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh((m + m.T) / 2.0)
    vals = np.clip(vals, 0.0, None)
    return (vecs * np.sqrt(vals)) @ vecs.T


def frechet_feature_distance(features_a: np.ndarray, features_b: np.ndarray) -> float:
    """Gaussian Fréchet distance ||mu_a - mu_b||^2 +
    Tr(S_a + S_b - 2 (S_a S_b)^{1/2}), matrix root via symmetric
    eigendecomposition with negative eigenvalues clipped at zero."""
    a = np.atleast_2d(np.asarray(features_a, dtype=np.float64))
    b = np.atleast_2d(np.asarray(features_b, dtype=np.float64))
    if a.shape[0] < 16 or b.shape[0] < 16:
        raise TooFewSamples(
            f"need >= 16 samples per set for covariance estimation, got {a.shape[0]} and {b.shape[0]}"
        )
    if a.shape[1] != b.shape[1]:
        raise ShapeMismatch(f"feature widths differ: {a.shape[1]} vs {b.shape[1]}")
    mu_a, mu_b = a.mean(axis=0), b.mean(axis=0)
    cov_a = np.atleast_2d(np.cov(a, rowvar=False))
    cov_b = np.atleast_2d(np.cov(b, rowvar=False))
    sqrt_a = _psd_sqrt(cov_a)
    cross = _psd_sqrt(sqrt_a @ cov_b @ sqrt_a)
    dist = float(np.sum((mu_a - mu_b) ** 2) + np.trace(cov_a + cov_b - 2.0 * cross))
    return max(dist, 0.0)


def frechet_distance_plans(plans_a: list[FloorPlan], plans_b: list[FloorPlan]) -> float:
    return frechet_feature_distance(
        np.stack([feature_vector(p) for p in plans_a]),
        np.stack([feature_vector(p) for p in plans_b]),
    )


# ---------------------------------------------------------------------------
# report rendering


def format_table(title: str, rows: list[tuple[str, object]]) -> str:
    width = max(len(name) for name, _ in rows) + 2
    lines = [title, "-" * len(title)]
    for name, value in rows:
        if isinstance(value, float):
            lines.append(f"{name:<{width}}{value:.4f}")
        else:
            lines.append(f"{name:<{width}}{value}")
    return "\n".join(lines)
