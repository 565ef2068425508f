import json

import numpy as np
import pytest

from floordiff.codecs import encode_nodes
from floordiff.conditioning import conditioning_from_record
from floordiff.diffusion import build_schedule
from floordiff.errors import ConditioningMismatch, DegenerateInput, MissingCheckpoint
from floordiff.geometry import (
    RoomBox,
    RoomNode,
    check_plan,
    region_area,
    region_overlap_area,
)
from floordiff.model import ModelConfig, init_params, save_checkpoint
from floordiff.pipeline import (
    GenerationRequest,
    VariantRegistry,
    apply_partial,
    generate_plan,
    generate_plans,
    postprocess,
    request_from_record,
    resolve_variant,
    result_from_record,
    result_to_record,
    sample_stage,
)

from test_geometry import UNIT_SQUARE, make_boundary

TINY_T = 40


def _write_tiny_checkpoint(path, stage, conditions, seed=0):
    cfg = ModelConfig(stage, conditions, d_model=8, layers=1, heads=2, ff_ratio=2, seed=seed)
    model = init_params(cfg)
    save_checkpoint(str(path), model, build_schedule("linear", TINY_T))


@pytest.fixture(scope="module")
def registry(tmp_path_factory):
    root = tmp_path_factory.mktemp("registry")
    variants = {
        "nodes/B": ("nodes", ("B",)),
        "nodes/B+Rn+Rc": ("nodes", ("B", "Rn", "Rc")),
        "nodes/B+partial": ("nodes", ("B", "partial")),
        "adjacency/B+nodes": ("adjacency", ("B", "nodes")),
        "partition/B+nodes+adj": ("partition", ("B", "nodes", "adj")),
    }
    checkpoints = {}
    for i, (vid, (stage, conds)) in enumerate(sorted(variants.items())):
        name = vid.replace("/", "_").replace("+", "-") + ".ckpt"
        _write_tiny_checkpoint(root / name, stage, conds, seed=i)
        checkpoints[vid] = name
    VariantRegistry.write_file(str(root / "registry.json"), checkpoints)
    return VariantRegistry.from_file(str(root / "registry.json"))


def boundary_conditioning(extra=None):
    rec = {
        "boundary": [list(p) for p in UNIT_SQUARE],
        "entrance": [[0.0, 0.0], [0.0625, 0.0], [0.0625, 0.015625], [0.0, 0.015625]],
    }
    if extra:
        rec.update(extra)
    return conditioning_from_record(rec, "nodes")


class TestApplyPartial:
    def setup_method(self):
        self.schedule = build_schedule("linear", 100)
        self.rng = np.random.default_rng(0)

    def test_zero_mask_unchanged(self):
        x = np.random.default_rng(1).standard_normal((8, 5))
        out = apply_partial(x, np.zeros((8, 5)), np.zeros(8), 50, self.schedule, self.rng)
        assert np.array_equal(out, x)

    def test_full_mask_t0_equals_partial(self):
        x = np.random.default_rng(2).standard_normal((8, 5))
        partial = np.random.default_rng(3).uniform(-1, 1, (8, 5))
        out = apply_partial(x, partial, np.ones(8), 0, self.schedule, self.rng)
        assert np.array_equal(out, partial)

    def test_half_mask_only_masked_rows_change(self):
        x = np.random.default_rng(4).standard_normal((8, 5))
        partial = np.random.default_rng(5).uniform(-1, 1, (8, 5))
        mask = np.array([1, 1, 1, 1, 0, 0, 0, 0], dtype=float)
        out = apply_partial(x, partial, mask, 10, self.schedule, self.rng)
        assert not np.array_equal(out[:4], x[:4])
        assert np.array_equal(out[4:], x[4:])

    def test_adjacency_matrix_mask(self):
        x = np.random.default_rng(6).standard_normal((8, 8))
        partial = np.full((8, 8), 1.0)
        mask = np.zeros((8, 8))
        mask[0, 1] = mask[1, 0] = 1.0
        out = apply_partial(x, partial, mask, 0, self.schedule, self.rng)
        assert out[0, 1] == 1.0 and out[1, 0] == 1.0
        assert np.array_equal(out[2:], x[2:])


class TestPostprocess:
    def test_exact_tiling_unchanged(self):
        b = make_boundary(UNIT_SQUARE)
        boxes = [RoomBox(1, (0.0, 0.0, 0.5, 1.0)), RoomBox(2, (0.5, 0.0, 1.0, 1.0))]
        plan = postprocess(boxes, b)
        assert plan.room_count == 2
        assert plan.rooms[0].region == ((0.0, 0.0, 0.5, 1.0),)
        assert plan.rooms[1].region == ((0.5, 0.0, 1.0, 1.0),)
        check_plan(plan, require_partition=True)

    def test_snap_merges_facing_edges_across_gap(self):
        # left box ends at 0.48, right starts at 0.50; the 0.02 gap is the
        # cluster diameter limit, the shared edge lands at the mean 0.49
        b = make_boundary(UNIT_SQUARE)
        boxes = [RoomBox(1, (0.0, 0.0, 0.48, 1.0)), RoomBox(2, (0.5, 0.0, 1.0, 1.0))]
        plan = postprocess(boxes, b)
        assert plan.rooms[0].region == ((0.0, 0.0, 0.49, 1.0),)
        assert plan.rooms[1].region == ((0.49, 0.0, 1.0, 1.0),)
        check_plan(plan, require_partition=True)

    def test_inner_box_fill_assigns_ring(self):
        b = make_boundary(UNIT_SQUARE)
        plan = postprocess([RoomBox(1, (0.25, 0.25, 0.75, 0.75))], b)
        assert plan.room_count == 1
        assert region_area(list(plan.rooms[0].region)) == pytest.approx(1.0, abs=1e-12)
        check_plan(plan, require_partition=True)

    def test_overlap_resolved_for_earlier_box(self):
        b = make_boundary(UNIT_SQUARE)
        boxes = [RoomBox(1, (0.0, 0.0, 0.625, 1.0)), RoomBox(2, (0.375, 0.0, 1.0, 1.0))]
        plan = postprocess(boxes, b)
        living = plan.rooms[0]
        assert living.category == 1
        assert region_area(list(living.region)) == pytest.approx(0.625, abs=1e-9)
        assert region_overlap_area(list(plan.rooms[0].region), list(plan.rooms[1].region)) == 0.0
        check_plan(plan, require_partition=True)

    def test_degenerate_inputs(self):
        b = make_boundary(UNIT_SQUARE)
        with pytest.raises(DegenerateInput):
            postprocess([], b)
        small = make_boundary(
            [(0.0, 0.0), (0.25, 0.0), (0.25, 0.25), (0.0, 0.25)],
            entrance=((0.0, 0.0), (0.0625, 0.0), (0.0625, 0.015625), (0.0, 0.015625)),
        )
        with pytest.raises(DegenerateInput):
            postprocess([RoomBox(1, (0.5, 0.5, 0.75, 0.75))], small)

    def test_random_boxes_always_partition(self):
        b = make_boundary(UNIT_SQUARE)
        rng = np.random.default_rng(9)
        for trial in range(25):
            n = int(rng.integers(1, 9))
            boxes = []
            for i in range(n):
                x1, y1 = rng.uniform(0, 0.85, 2)
                w, h = rng.uniform(0.1, 0.6, 2)
                boxes.append(
                    RoomBox(int(rng.integers(1, 7)), (x1, y1, min(x1 + w, 1.0), min(y1 + h, 1.0)))
                )
            plan = postprocess(boxes, b)
            total = sum(region_area(list(r.region)) for r in plan.rooms)
            assert total == pytest.approx(1.0, abs=1e-6)
            for i in range(plan.room_count):
                for j in range(i + 1, plan.room_count):
                    assert (
                        region_overlap_area(
                            list(plan.rooms[i].region), list(plan.rooms[j].region)
                        )
                        < 1e-9
                    )

    def test_adjacency_rederived_symmetric(self):
        b = make_boundary(UNIT_SQUARE)
        boxes = [RoomBox(1, (0.0, 0.0, 0.5, 1.0)), RoomBox(2, (0.5, 0.0, 1.0, 1.0))]
        plan = postprocess(boxes, b)
        assert plan.adjacency.connected(0, 1)
        m_pairs = plan.adjacency.pairs
        assert all(i < j for i, j in m_pairs)

    def test_deterministic(self):
        b = make_boundary(UNIT_SQUARE)
        boxes = [RoomBox(2, (0.1, 0.1, 0.55, 0.9)), RoomBox(1, (0.5, 0.05, 0.95, 0.95))]
        a = postprocess(boxes, b)
        c = postprocess(boxes, b)
        assert a == c


class TestSampleStage:
    def test_same_seed_identical(self, registry):
        model, schedule = registry.model("nodes/B")
        cond = boundary_conditioning()
        a, _ = sample_stage(model, schedule, cond, seed=11)
        b, _ = sample_stage(model, schedule, cond, seed=11)
        assert np.array_equal(a, b)
        c, _ = sample_stage(model, schedule, cond, seed=12)
        assert not np.array_equal(a, c)

    def test_output_in_range(self, registry):
        model, schedule = registry.model("nodes/B")
        x, _ = sample_stage(model, schedule, boundary_conditioning(), seed=1)
        assert x.shape == (8, 5)
        assert np.abs(x).max() <= 1.0

    def test_snapshots_returned_in_order(self, registry):
        model, schedule = registry.model("nodes/B")
        ts = (30, 20, 10, 0)
        _, snaps = sample_stage(model, schedule, boundary_conditioning(), seed=2, snapshot_ts=ts)
        assert tuple(snaps) == ts or set(snaps) == set(ts)
        assert all(snaps[t].shape == (8, 5) for t in ts)

    def test_full_clamp_decodes_to_partial_exactly(self, registry):
        model, schedule = registry.model("nodes/B+partial")
        nodes = [
            RoomNode(1, 0.5, (0.5, 0.5)),
            RoomNode(2, 0.25, (0.25, 0.25)),
            RoomNode(3, 0.25, (0.75, 0.75)),
        ]
        values = encode_nodes(nodes)
        mask = np.array([1, 1, 1, 1, 1, 1, 1, 1], dtype=float)
        cond = boundary_conditioning().with_partial(values, mask)
        x, _ = sample_stage(model, schedule, cond, seed=3, clamp_partial=True)
        assert np.array_equal(x, values)

    def test_partial_without_clamp_needs_partial_network(self, registry):
        model, schedule = registry.model("nodes/B")
        cond = boundary_conditioning().with_partial(np.full((8, 5), -1.0), np.ones(8))
        with pytest.raises(ConditioningMismatch):
            sample_stage(model, schedule, cond, seed=4, clamp_partial=False)

    def test_clamped_partial_on_plain_network(self, registry):
        model, schedule = registry.model("nodes/B")
        nodes = [RoomNode(1, 0.5, (0.5, 0.5))]
        values = encode_nodes(nodes)
        mask = np.array([1, 0, 0, 0, 0, 0, 0, 0], dtype=float)
        cond = boundary_conditioning().with_partial(values, mask)
        x, _ = sample_stage(model, schedule, cond, seed=5, clamp_partial=True)
        assert np.array_equal(x[0], values[0])


class TestResolveVariant:
    def test_plain_lookup(self, registry):
        assert resolve_variant(registry, "nodes", ("boundary",), False, False) == "nodes/B"

    def test_partial_prefers_partial_network(self, registry):
        vid = resolve_variant(registry, "nodes", ("boundary", "partial"), True, False)
        assert vid == "nodes/B+partial"

    def test_partial_unclamped_requires_partial_network(self, registry):
        with pytest.raises(MissingCheckpoint):
            resolve_variant(registry, "adjacency", ("B", "nodes", "partial"), True, False)

    def test_unknown_names_available(self, registry):
        with pytest.raises(MissingCheckpoint) as err:
            resolve_variant(registry, "nodes", ("boundary", "adjacency"), False, False)
        assert "nodes/B" in str(err.value)


class TestGeneratePlan:
    def test_room_count_preserved(self, registry):
        cond = boundary_conditioning({"room_count": 5, "categories": [1, 2, 2, 3, 4]})
        req = GenerationRequest(target="full_plan", conditioning=cond, seed=7)
        result = generate_plan(registry, req)
        assert len(result.nodes) == 5
        assert result.plan is not None

    def test_categories_preserved(self, registry):
        cats = [1, 2, 2, 3, 4]
        cond = boundary_conditioning({"room_count": 5, "categories": cats})
        req = GenerationRequest(target="nodes", conditioning=cond, seed=8)
        result = generate_plan(registry, req)
        assert sorted(n.category for n in result.nodes) == sorted(cats)

    def test_full_pipeline_plan_invariants(self, registry):
        req = GenerationRequest(target="full_plan", conditioning=boundary_conditioning(), seed=9)
        result = generate_plan(registry, req)
        assert result.plan is not None
        check_plan(result.plan, require_partition=True, tol=0.01)
        assert result.variants == {
            "nodes": "nodes/B",
            "adjacency": "adjacency/B+nodes",
            "partition": "partition/B+nodes+adj",
        }

    def test_purity(self, registry):
        req = GenerationRequest(target="full_plan", conditioning=boundary_conditioning(), seed=10)
        a = result_to_record(generate_plan(registry, req))
        b = result_to_record(generate_plan(registry, req))
        assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)

    def test_batch_independent_of_composition(self, registry):
        r1 = GenerationRequest(target="nodes", conditioning=boundary_conditioning(), seed=21)
        r2 = GenerationRequest(target="nodes", conditioning=boundary_conditioning(), seed=22)
        ab = generate_plans(registry, [r1, r2])
        ba = generate_plans(registry, [r2, r1])
        assert result_to_record(ab[0]) == result_to_record(ba[1])
        assert result_to_record(ab[1]) == result_to_record(ba[0])

    def test_distinct_seeds_distinct_nodes(self, registry):
        results = generate_plans(
            registry,
            [
                GenerationRequest(target="nodes", conditioning=boundary_conditioning(), seed=s)
                for s in range(5)
            ],
        )
        locs = {tuple(n.location for n in r.nodes) for r in results if r.nodes}
        assert len(locs) > 1

    def test_user_adjacency_skips_adjacency_sampling(self, registry):
        cond = boundary_conditioning(
            {
                "room_count": 3,
                "categories": [1, 2, 3],
                "sizes_locations": [[0.5, 0.5, 0.5], [0.25, 0.25, 0.25], [0.25, 0.75, 0.75]],
                "adjacency": [[0, 1], [0, 2]],
            }
        )
        req = GenerationRequest(target="full_plan", conditioning=cond, seed=11)
        result = generate_plan(registry, req)
        assert "adjacency" not in result.variants  # taken from conditioning
        assert result.adjacency.pairs == frozenset({(0, 1), (0, 2)})
        # fully-specified nodes are not sampled either
        assert "nodes" not in result.variants
        assert [n.category for n in result.nodes] == [1, 2, 3]

    def test_snapshots_for_full_plan_cover_all_sampled_stages(self, registry):
        req = GenerationRequest(
            target="full_plan",
            conditioning=boundary_conditioning(),
            seed=12,
            snapshot_ts=(30, 20, 10, 0),
        )
        result = generate_plan(registry, req)
        assert set(result.snapshots) == {"nodes", "adjacency", "partition"}
        for stage in result.snapshots:
            assert sorted(result.snapshots[stage]) == [0, 10, 20, 30]

    def test_missing_checkpoint_lists_available(self, registry):
        cond = boundary_conditioning({"room_count": 4})
        req = GenerationRequest(target="nodes", conditioning=cond, seed=13)
        with pytest.raises(MissingCheckpoint) as err:
            generate_plan(registry, req)
        assert "nodes/B+Rn" in str(err.value)
        assert "available" in str(err.value)


class TestResultRecords:
    def test_round_trip(self, registry):
        req = GenerationRequest(
            target="full_plan", conditioning=boundary_conditioning(), seed=14,
            snapshot_ts=(10, 0), group="g1",
        )
        result = generate_plan(registry, req)
        rec = result_to_record(result)
        again = result_to_record(result_from_record(rec))
        assert json.dumps(rec, sort_keys=True) == json.dumps(again, sort_keys=True)

    def test_snapshot_default_step_set(self):
        from floordiff.pipeline import DEFAULT_SNAPSHOT_TS

        rec = {
            "target": "nodes",
            "conditioning": {},
            "snapshot_ts": True,
        }
        req = request_from_record(rec)
        assert req.snapshot_ts == DEFAULT_SNAPSHOT_TS == (50, 20, 10, 0)

    def test_request_from_record(self):
        rec = {
            "target": "nodes",
            "seed": 3,
            "conditioning": {
                "boundary": [list(p) for p in UNIT_SQUARE],
                "entrance": [[0.0, 0.0], [0.0625, 0.0], [0.0625, 0.015625], [0.0, 0.015625]],
                "room_count": 4,
            },
            "clamp_partial": True,
            "snapshot_ts": [10, 0],
        }
        req = request_from_record(rec)
        assert req.target == "nodes"
        assert req.seed == 3
        assert req.clamp_partial is True
        assert req.conditioning.room_count == 4
        assert req.snapshot_ts == (10, 0)
