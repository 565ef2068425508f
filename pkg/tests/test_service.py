import threading

import pytest
from fastapi.testclient import TestClient

from floordiff.diffusion import build_schedule
from floordiff.model import ModelConfig, init_params, save_checkpoint
from floordiff.pipeline import VariantRegistry
from floordiff.service import create_app

from test_geometry import UNIT_SQUARE

ENTRANCE = [[0.0, 0.0], [0.0625, 0.0], [0.0625, 0.015625], [0.0, 0.015625]]


@pytest.fixture(scope="module")
def client(tmp_path_factory):
    root = tmp_path_factory.mktemp("svc-registry")
    specs = {
        "nodes/B": ("nodes", ("B",)),
        "adjacency/B+nodes": ("adjacency", ("B", "nodes")),
        "partition/B+nodes+adj": ("partition", ("B", "nodes", "adj")),
    }
    checkpoints = {}
    for i, (vid, (stage, conds)) in enumerate(sorted(specs.items())):
        cfg = ModelConfig(stage, conds, d_model=8, layers=1, heads=2, ff_ratio=2, seed=i)
        name = vid.replace("/", "_") + ".ckpt"
        save_checkpoint(str(root / name), init_params(cfg), build_schedule("linear", 30))
        checkpoints[vid] = name
    path = str(root / "registry.json")
    VariantRegistry.write_file(path, checkpoints)
    app = create_app(VariantRegistry.from_file(path))
    return TestClient(app, raise_server_exceptions=False)


def body(extra=None, **kw):
    doc = {
        "schema": "floordiff/v1",
        "conditioning": {
            "boundary": [list(p) for p in UNIT_SQUARE],
            "entrance": ENTRANCE,
        },
    }
    if extra:
        doc["conditioning"].update(extra)
    doc.update(kw)
    return doc


class TestBasicEndpoints:
    def test_health(self, client):
        r = client.get("/v1/health")
        assert r.status_code == 200
        assert r.json()["status"] == "ok"

    def test_variants_lists_registry(self, client):
        r = client.get("/v1/variants")
        assert r.status_code == 200
        ids = {v["variant"] for v in r.json()["variants"]}
        assert ids == {"nodes/B", "adjacency/B+nodes", "partition/B+nodes+adj"}

    def test_generate_plan_deterministic(self, client):
        a = client.post("/v1/generate/plan", json=body(seed=5))
        b = client.post("/v1/generate/plan", json=body(seed=5))
        assert a.status_code == 200
        assert a.json() == b.json()
        assert a.json()["seed"] == 5
        assert a.json()["plan"] is not None
        assert a.json()["variants"]["nodes"] == "nodes/B"

    def test_server_assigns_and_echoes_seed(self, client):
        a = client.post("/v1/generate/nodes", json=body())
        b = client.post("/v1/generate/nodes", json=body())
        assert a.status_code == 200
        assert isinstance(a.json()["seed"], int)
        assert a.json()["seed"] != b.json()["seed"]

    def test_malformed_body_400(self, client):
        r = client.post("/v1/generate/plan", content=b"{not json")
        assert r.status_code == 400
        r = client.post("/v1/generate/plan", json={"schema": "bogus/9"})
        assert r.status_code == 400
        r = client.post("/v1/generate/plan", json=body(extra={"categories": "x"}))
        assert r.status_code == 400

    def test_conditioning_mismatch_409(self, client):
        r = client.post("/v1/generate/nodes", json=body(extra={"room_count": 4}))
        assert r.status_code == 409
        assert "available" in r.json()["error"]

    def test_geometric_validation_422(self, client):
        doc = body()
        doc["conditioning"]["boundary"] = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]]
        r = client.post("/v1/generate/plan", json=doc)
        assert r.status_code == 422

    def test_response_resubmits_as_request(self, client):
        first = client.post("/v1/generate/plan", json=body(seed=8)).json()
        plan = first["plan"]
        # plan -> conditions: feed the produced bubble diagram back in
        cond = {
            "boundary": plan["boundary"],
            "entrance": plan["entrance"],
            "room_count": len(plan["rooms"]),
            "categories": [r["category"] for r in plan["rooms"]],
            "sizes_locations": [
                [r["size"], r["location"][0], r["location"][1]] for r in plan["rooms"]
            ],
            "adjacency": plan["adjacency"],
        }
        r = client.post(
            "/v1/generate/plan",
            json={"schema": "floordiff/v1", "conditioning": cond, "seed": 9},
        )
        assert r.status_code == 200
        out = r.json()
        assert [n["category"] for n in out["nodes"]] == sorted(
            r_["category"] for r_ in plan["rooms"]
        )


class TestSessions:
    def test_session_flow_with_pins(self, client):
        r = client.post("/v1/session", json={"schema": "floordiff/v1"})
        assert r.status_code == 200
        sid = r.json()["session"]

        r = client.patch(
            f"/v1/session/{sid}",
            json={
                "schema": "floordiff/v1",
                "boundary": {"corners": [list(p) for p in UNIT_SQUARE], "entrance": ENTRANCE},
                "room_count": 5,
            },
        )
        assert r.status_code == 200

        # nodes stage needs a matching variant: clear room_count (registry
        # only has nodes/B) and pin 2 of 5 rooms instead
        r = client.patch(
            f"/v1/session/{sid}",
            json={"schema": "floordiff/v1", "room_count": None},
        )
        assert r.status_code == 200

        pinned = [
            {"category": 1, "size": 0.5, "location": [0.5, 0.5]},
            {"category": 2, "size": 0.25, "location": [0.25, 0.25]},
            None, None, None,
        ]
        r = client.patch(
            f"/v1/session/{sid}",
            json={
                "schema": "floordiff/v1",
                "pins": {"nodes": {"stage": "nodes", "rooms": pinned}},
            },
        )
        assert r.status_code == 200
        assert "nodes" in r.json()["pins"]

        r1 = client.post(
            f"/v1/session/{sid}/step", json={"schema": "floordiff/v1", "stage": "nodes", "seed": 3}
        )
        assert r1.status_code == 200
        nodes1 = r1.json()["nodes"]
        pinned_set = {(1, 0.5, 0.5, 0.5), (2, 0.25, 0.25, 0.25)}
        got = {(n["category"], n["size"], n["location"][0], n["location"][1]) for n in nodes1}
        assert pinned_set <= got

        r2 = client.post(
            f"/v1/session/{sid}/step", json={"schema": "floordiff/v1", "stage": "nodes", "seed": 4}
        )
        nodes2 = r2.json()["nodes"]
        got2 = {(n["category"], n["size"], n["location"][0], n["location"][1]) for n in nodes2}
        assert pinned_set <= got2
        assert nodes1 != nodes2  # unpinned rows moved

    def test_stage_order_enforced(self, client):
        sid = client.post("/v1/session", json={"schema": "floordiff/v1"}).json()["session"]
        client.patch(
            f"/v1/session/{sid}",
            json={
                "schema": "floordiff/v1",
                "boundary": {"corners": [list(p) for p in UNIT_SQUARE], "entrance": ENTRANCE},
            },
        )
        r = client.post(
            f"/v1/session/{sid}/step", json={"schema": "floordiff/v1", "stage": "adjacency"}
        )
        assert r.status_code == 409

        r = client.post(
            f"/v1/session/{sid}/step", json={"schema": "floordiff/v1", "stage": "nodes", "seed": 1}
        )
        assert r.status_code == 200
        r = client.post(
            f"/v1/session/{sid}/step",
            json={"schema": "floordiff/v1", "stage": "adjacency", "seed": 2},
        )
        assert r.status_code == 200
        r = client.post(
            f"/v1/session/{sid}/step",
            json={"schema": "floordiff/v1", "stage": "partition", "seed": 3},
        )
        assert r.status_code == 200
        assert r.json()["plan"] is not None

    def test_unknown_session_404(self, client):
        r = client.post("/v1/session/nope/step", json={"schema": "floordiff/v1", "stage": "nodes"})
        assert r.status_code == 404

    def test_invalid_boundary_422(self, client):
        sid = client.post("/v1/session", json={"schema": "floordiff/v1"}).json()["session"]
        r = client.patch(
            f"/v1/session/{sid}",
            json={
                "schema": "floordiff/v1",
                "boundary": {
                    "corners": [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]],
                    "entrance": ENTRANCE,
                },
            },
        )
        assert r.status_code == 422

    def test_concurrent_sessions_isolated(self, client):
        sids = []
        for _ in range(2):
            sid = client.post("/v1/session", json={"schema": "floordiff/v1"}).json()["session"]
            client.patch(
                f"/v1/session/{sid}",
                json={
                    "schema": "floordiff/v1",
                    "boundary": {"corners": [list(p) for p in UNIT_SQUARE], "entrance": ENTRANCE},
                },
            )
            sids.append(sid)

        outputs = {sid: [] for sid in sids}
        errors = []

        def worker(sid, seed):
            try:
                for k in range(3):
                    r = client.post(
                        f"/v1/session/{sid}/step",
                        json={"schema": "floordiff/v1", "stage": "nodes", "seed": seed + k},
                    )
                    assert r.status_code == 200
                    outputs[sid].append(r.json())
            except Exception as exc:  # pragma: no cover
                errors.append(exc)

        threads = [
            threading.Thread(target=worker, args=(sids[0], 100)),
            threading.Thread(target=worker, args=(sids[1], 200)),
        ]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert not errors
        # each session saw exactly its own seeds
        assert [o["seed"] for o in outputs[sids[0]]] == [100, 101, 102]
        assert [o["seed"] for o in outputs[sids[1]]] == [200, 201, 202]
        assert all(o["session"] == sids[0] for o in outputs[sids[0]])
        assert all(o["session"] == sids[1] for o in outputs[sids[1]])
