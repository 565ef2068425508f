import numpy as np
import pytest

from floordiff.codecs import encode_categories, encode_sizes_locations
from floordiff.conditioning import Conditioning, conditioning_from_plan
from floordiff.errors import TooFewSamples, UndefinedRatio
from floordiff.geometry import Adjacency, FloorPlan, Room
from floordiff.metrics import (
    compliance_mae,
    coverage_avg,
    diversity_avg,
    feature_vector,
    frechet_distance_plans,
    frechet_feature_distance,
    plan_statistics,
    plan_stats,
)
from floordiff.synth import GeneratorParams, generate_dataset, split_dataset

from test_geometry import UNIT_SQUARE, make_boundary


def demo_plan():
    """living (40%) + 2 bedrooms + kitchen, all adjacent to the living room."""
    boundary = make_boundary(UNIT_SQUARE)
    rooms = (
        Room(1, 0.4, (0.5, 0.5), ((0.25, 0.25, 0.75, 0.9),)),
        Room(2, 0.2, (0.25, 0.25), ((0.0, 0.0, 0.5, 0.25),)),
        Room(2, 0.2, (0.75, 0.25), ((0.5, 0.0, 1.0, 0.25),)),
        Room(3, 0.2, (0.25, 0.75), ((0.0, 0.25, 0.25, 1.0),)),
    )
    adjacency = Adjacency.from_pairs([(0, 1), (0, 2), (0, 3)], 4)
    return FloorPlan(boundary, rooms, adjacency)


@pytest.fixture(scope="module")
def dataset():
    return generate_dataset(GeneratorParams(seed=41), 400)


class TestPlanStatistics:
    def test_hand_enumerated_example(self):
        s = plan_stats(demo_plan())
        assert s.rooms == 4
        assert s.living_links == 3
        assert s.living_link_ratio == pytest.approx(1.0)
        assert s.living_rooms == 1
        assert s.living_area == pytest.approx(0.40)

    def test_identity_ratios(self, dataset):
        report = plan_statistics(dataset, dataset)
        for value in report.to_dict().values():
            assert value == pytest.approx(1.0, abs=1e-12)

    def test_reference_mean_zero_raises(self):
        plan = demo_plan()
        lonely = FloorPlan(
            plan.boundary,
            (Room(2, 0.5, (0.5, 0.5), None), Room(3, 0.5, (0.25, 0.25), None)),
            Adjacency.from_pairs([(0, 1)], 2),
        )
        with pytest.raises(UndefinedRatio):
            plan_statistics([plan], [lonely])  # reference has no living rooms

    def test_generator_is_stationary_across_splits(self):
        # living-area fraction has ~0.39 relative std, so the 10% band needs
        # a few hundred test samples to be a >3-sigma bound
        ds = generate_dataset(GeneratorParams(seed=41), 2000)
        split = split_dataset(len(ds), seed=8)
        train = [ds[i] for i in split.train]
        test = [ds[i] for i in split.test]
        report = plan_statistics(test, train)
        for name, value in report.to_dict().items():
            assert 0.9 <= value <= 1.1, f"{name} ratio {value} outside [0.9, 1.1]"


class TestComplianceMae:
    def test_outputs_copied_from_conditions_zero(self, dataset):
        outputs = [(p.nodes(), p.adjacency) for p in dataset[:20]]
        conds = [
            conditioning_from_plan(p, ("room_count", "categories", "sizes_locations", "adjacency"), "nodes")
            for p in dataset[:20]
        ]
        report = compliance_mae(outputs, conds)
        assert report.room_count_mae == 0.0
        assert report.categories_mae == 0.0
        assert report.sizes_locations_mae == 0.0
        assert report.adjacency_mae == 0.0
        assert report.samples == 20

    def test_off_by_one_room(self):
        plan = demo_plan()
        cond = Conditioning(room_count=5)
        report = compliance_mae([(plan.nodes(), plan.adjacency)], [cond])
        assert report.room_count_mae == 1.0  # |4 - 5|
        assert report.categories_mae is None

    def test_absent_blocks_skipped(self):
        plan = demo_plan()
        report = compliance_mae([(plan.nodes(), plan.adjacency)], [Conditioning()])
        assert report.room_count_mae is None
        assert report.adjacency_mae is None

    def test_category_error_on_encoded_scale(self):
        plan = demo_plan()
        nodes = plan.nodes()
        wrong = [type(n)(3 if i == 3 else n.category, n.size, n.location) for i, n in enumerate(nodes)]
        cond = Conditioning(
            room_count=4,
            categories=encode_categories(nodes),
            sizes_locations=encode_sizes_locations(nodes),
        )
        report = compliance_mae([(wrong, plan.adjacency)], [cond])
        assert report.room_count_mae == 0.0
        assert report.categories_mae == 0.0  # same multiset, canonical order identical
        cond2 = Conditioning(room_count=4, categories=encode_categories(wrong))
        wrong2 = [type(n)(2, n.size, n.location) if i == 3 else n for i, n in enumerate(nodes)]
        report2 = compliance_mae([(wrong2, plan.adjacency)], [cond2])
        # one of eight entries off by one category step (0.4 on the encoded scale)
        assert report2.categories_mae == pytest.approx(0.4 / 8)


class TestDiversity:
    def test_identical_variants_score_one(self, dataset):
        sets = [[p, p, p, p, p] for p in dataset[:10]]
        scores = diversity_avg(sets)
        for c, v in scores.items():
            assert v == pytest.approx(1.0)

    def test_disjoint_living_rooms_score_zero(self):
        b = make_boundary(UNIT_SQUARE)
        left = FloorPlan(
            b, (Room(1, 0.25, (0.25, 0.5), ((0.0, 0.0, 0.5, 1.0),)),), Adjacency(frozenset(), 1)
        )
        right = FloorPlan(
            b, (Room(1, 0.25, (0.75, 0.5), ((0.5, 0.0, 1.0, 1.0),)),), Adjacency(frozenset(), 1)
        )
        scores = diversity_avg([[left, right]])
        assert scores[1] == 0.0
        assert scores[6] == 1.0  # storage absent from both: empty-empty is 1

    def test_scores_in_unit_interval(self, dataset):
        sets = [dataset[i : i + 3] for i in range(0, 30, 3)]
        for v in diversity_avg(sets).values():
            assert 0.0 <= v <= 1.0

    def test_needs_two_variants(self, dataset):
        with pytest.raises(TooFewSamples):
            diversity_avg([[dataset[0]]])


class TestCoverage:
    def test_identity(self, dataset):
        scores = coverage_avg(dataset[:10], dataset[:10])
        for v in scores.values():
            assert v == pytest.approx(1.0)

    def test_in_unit_interval(self, dataset):
        scores = coverage_avg(dataset[:10], dataset[10:20])
        for v in scores.values():
            assert 0.0 <= v <= 1.0


class TestFrechetFeatureDistance:
    def test_identical_sets_zero(self, dataset):
        feats = np.stack([feature_vector(p) for p in dataset[:64]])
        assert frechet_feature_distance(feats, feats) <= 1e-8

    def test_one_dimensional_closed_form(self):
        # 1-D Gaussian Fréchet: (mu_a - mu_b)^2 + (sqrt(va) - sqrt(vb))^2;
        # equal-variance sets with means 0 and 2 give exactly 4
        rng = np.random.default_rng(12)
        base = rng.standard_normal((32, 1))
        base = (base - base.mean()) / base.std(ddof=1)  # unit sample variance
        assert np.var(base, ddof=1) == pytest.approx(1.0)
        assert frechet_feature_distance(base, base + 2.0) == pytest.approx(4.0, abs=1e-9)
        # and with different variances the trace term appears
        va, vb = 1.0, 4.0
        d = frechet_feature_distance(base * np.sqrt(va), base * np.sqrt(vb))
        assert d == pytest.approx((np.sqrt(va) - np.sqrt(vb)) ** 2, abs=1e-9)

    def test_symmetry(self, dataset):
        fa = np.stack([feature_vector(p) for p in dataset[:40]])
        fb = np.stack([feature_vector(p) for p in dataset[40:80]])
        d1 = frechet_feature_distance(fa, fb)
        d2 = frechet_feature_distance(fb, fa)
        # eigendecompositions of near-singular covariances leave ~1e-7 noise
        assert d1 == pytest.approx(d2, rel=1e-4)
        assert d1 >= 0.0

    def test_too_few_samples(self, dataset):
        feats = np.stack([feature_vector(p) for p in dataset[:10]])
        with pytest.raises(TooFewSamples):
            frechet_feature_distance(feats, feats)

    def test_plans_wrapper(self, dataset):
        assert frechet_distance_plans(dataset[:32], dataset[:32]) <= 1e-8

    def test_feature_vector_shape_and_ranges(self, dataset):
        for p in dataset[:20]:
            v = feature_vector(p)
            assert v.shape == (15,)
            assert np.isfinite(v).all()
            assert (v[7:13] >= 0.0).all() and (v[7:13] <= 1.0 + 1e-9).all()
