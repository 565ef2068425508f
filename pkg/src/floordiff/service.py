"""HTTP service exposing the generation pipeline.

Endpoints (all bodies are JSON documents carrying a schema field):

    POST /v1/generate/nodes | /v1/generate/adjacency | /v1/generate/partition
        single-stage generation: {"conditioning": {...}, "seed"?, "variant"?,
        "clamp_partial"?, "snapshot_ts"?}
    POST /v1/generate/plan
        full pipeline, same body shape
    POST /v1/session                     create session (optional boundary etc.)
    PATCH /v1/session/{id}               set boundary/conditions, pin/unpin
    POST /v1/session/{id}/step           stage-wise regeneration; pins are
                                         honored exactly (clamped partial)
    GET /v1/variants                     registry listing
    GET /v1/health

Status codes: 400 malformed body, 404 unknown session, 409 conditioning or
variant mismatch, 422 geometric validation failure, 500 with an opaque id.
Responses echo the seed and variant ids so any result is reproducible.
Seeds are server-assigned from a counter unless the client provides one.
"""

from __future__ import annotations

import itertools
import threading
import uuid

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .conditioning import conditioning_from_record
from .errors import (
    ConditioningMismatch,
    DataError,
    MalformedBoundary,
    MissingCheckpoint,
    ModelError,
    ShapeMismatch,
)
from .geometry import Boundary, check_boundary
from .pipeline import (
    GenerationRequest,
    VariantRegistry,
    generate_plan,
    result_to_record,
)

API_SCHEMA = "floordiff/v1"
SESSION_STAGES = ("nodes", "adjacency", "partition")


class _BadRequest(Exception):
    pass


class SessionState:
    def __init__(self, session_id: str, seed_counter):
        self.id = session_id
        self.lock = threading.Lock()
        self.boundary_record: dict | None = None
        self.room_count: int | None = None
        self.categories: list[int] | None = None
        self.pins: dict[str, dict] = {}
        self.stage_results: dict[str, dict] = {}
        self._seed_counter = seed_counter

    def next_seed(self) -> int:
        return next(self._seed_counter)

    def view(self) -> dict:
        return {
            "schema": API_SCHEMA,
            "session": self.id,
            "boundary": self.boundary_record,
            "room_count": self.room_count,
            "categories": self.categories,
            "pins": {s: p for s, p in self.pins.items()},
            "stages_done": sorted(self.stage_results),
        }


def _require(body: dict, key: str, kind) -> object:
    if key not in body:
        raise _BadRequest(f"missing field {key!r}")
    value = body[key]
    if kind is not None and not isinstance(value, kind):
        raise _BadRequest(f"field {key!r} has wrong type")
    return value


def create_app(registry: VariantRegistry, max_in_flight: int = 4) -> FastAPI:
    app = FastAPI(title="floordiff", docs_url=None, redoc_url=None)
    sessions: dict[str, SessionState] = {}
    sessions_lock = threading.Lock()
    seed_counter = itertools.count(1)
    work_slots = threading.Semaphore(max_in_flight)

    def _error(status: int, message: str) -> JSONResponse:
        return JSONResponse({"schema": API_SCHEMA, "error": message}, status_code=status)

    @app.exception_handler(Exception)
    async def _unhandled(request: Request, exc: Exception):
        opaque = uuid.uuid4().hex
        return JSONResponse(
            {"schema": API_SCHEMA, "error": "internal error", "id": opaque},
            status_code=500,
        )

    async def _read_body(request: Request) -> dict:
        try:
            body = await request.json()
        except Exception as exc:
            raise _BadRequest(f"body is not valid JSON: {exc}") from exc
        if not isinstance(body, dict):
            raise _BadRequest("body must be a JSON object")
        schema = body.get("schema", API_SCHEMA)
        if schema != API_SCHEMA:
            raise _BadRequest(f"unsupported schema {schema!r}")
        return body

    def _run_generation(req: GenerationRequest) -> dict:
        with work_slots:
            result = generate_plan(registry, req)
        return result_to_record(result)

    def _generation_request(body: dict, target: str) -> GenerationRequest:
        cond_rec = body.get("conditioning", {})
        if not isinstance(cond_rec, dict):
            raise _BadRequest("conditioning must be an object")
        stage_for_cond = "nodes" if target == "full_plan" else target
        conditioning = conditioning_from_record(cond_rec, stage_for_cond)
        seed = body.get("seed")
        if seed is None:
            seed = next(seed_counter)
        return GenerationRequest(
            target=target,
            conditioning=conditioning,
            seed=int(seed),
            variant=body.get("variant"),
            clamp_partial=bool(body.get("clamp_partial", False)),
            snapshot_ts=tuple(int(t) for t in body.get("snapshot_ts", ())),
        )

    def _handle_generate(body: dict, target: str):
        try:
            req = _generation_request(body, target)
            record = _run_generation(req)
        except _BadRequest as exc:
            return _error(400, str(exc))
        except (ConditioningMismatch, MissingCheckpoint) as exc:
            return _error(409, str(exc))
        except (MalformedBoundary, ShapeMismatch) as exc:
            return _error(422, str(exc))
        except (KeyError, TypeError, ValueError) as exc:
            return _error(400, f"malformed request: {exc}")
        except DataError as exc:
            return _error(422, str(exc))
        record["schema"] = API_SCHEMA
        return JSONResponse(record)

    @app.get("/v1/health")
    async def health():
        return {"schema": API_SCHEMA, "status": "ok", "variants": len(registry.entries)}

    @app.get("/v1/variants")
    async def variants():
        return {"schema": API_SCHEMA, "variants": registry.describe()}

    @app.post("/v1/generate/nodes")
    async def generate_nodes(request: Request):
        try:
            body = await _read_body(request)
        except _BadRequest as exc:
            return _error(400, str(exc))
        return _handle_generate(body, "nodes")

    @app.post("/v1/generate/adjacency")
    async def generate_adjacency(request: Request):
        try:
            body = await _read_body(request)
        except _BadRequest as exc:
            return _error(400, str(exc))
        return _handle_generate(body, "adjacency")

    @app.post("/v1/generate/partition")
    async def generate_partition(request: Request):
        try:
            body = await _read_body(request)
        except _BadRequest as exc:
            return _error(400, str(exc))
        return _handle_generate(body, "partition")

    @app.post("/v1/generate/plan")
    async def generate_full(request: Request):
        try:
            body = await _read_body(request)
        except _BadRequest as exc:
            return _error(400, str(exc))
        return _handle_generate(body, "full_plan")

    # -- sessions -----------------------------------------------------------

    def _get_session(session_id: str) -> SessionState | None:
        with sessions_lock:
            return sessions.get(session_id)

    def _apply_patch(state: SessionState, body: dict):
        if "boundary" in body:
            boundary = body["boundary"]
            if boundary is not None:
                entrance = body.get("entrance") or (boundary or {}).get("entrance")
                if isinstance(boundary, dict):
                    corners = boundary.get("corners")
                    entrance = boundary.get("entrance", entrance)
                else:
                    corners = boundary
                if not corners or entrance is None:
                    raise _BadRequest("boundary needs corners and entrance")
                check_boundary(
                    Boundary(
                        tuple((float(x), float(y)) for x, y in corners),
                        tuple((float(x), float(y)) for x, y in entrance),
                    )
                )
                state.boundary_record = {
                    "corners": [list(map(float, p)) for p in corners],
                    "entrance": [list(map(float, p)) for p in entrance],
                }
            else:
                state.boundary_record = None
            state.stage_results.clear()
        if "room_count" in body:
            state.room_count = None if body["room_count"] is None else int(body["room_count"])
        if "categories" in body:
            cats = body["categories"]
            state.categories = None if cats is None else [int(c) for c in cats]
        for stage, pin in (body.get("pins") or {}).items():
            if stage not in SESSION_STAGES:
                raise _BadRequest(f"unknown pin stage {stage!r}")
            if pin is None:
                state.pins.pop(stage, None)
            else:
                state.pins[stage] = pin
        for stage in body.get("clear_pins") or ():
            state.pins.pop(stage, None)

    def _session_conditioning(state: SessionState, stage: str) -> dict:
        rec: dict = {}
        if state.boundary_record is not None:
            rec["boundary"] = state.boundary_record["corners"]
            rec["entrance"] = state.boundary_record["entrance"]
        if stage == "nodes":
            if state.room_count is not None:
                rec["room_count"] = state.room_count
            if state.categories is not None:
                rec["categories"] = state.categories
        else:
            upstream = state.stage_results.get("nodes")
            if upstream is None:
                raise ConditioningMismatch("run the nodes stage before " + stage)
            rec["room_count"] = len(upstream["nodes"])
            rec["categories"] = [n["category"] for n in upstream["nodes"]]
            rec["sizes_locations"] = [
                [n["size"], n["location"][0], n["location"][1]] for n in upstream["nodes"]
            ]
        if stage == "partition":
            adj = state.stage_results.get("adjacency")
            if adj is None:
                raise ConditioningMismatch("run the adjacency stage before partition")
            rec["adjacency"] = adj["adjacency"]
        if stage in state.pins:
            rec["partial"] = state.pins[stage]
        return rec

    @app.post("/v1/session")
    async def create_session(request: Request):
        try:
            raw = await request.body()
            body = await _read_body(request) if raw else {}
            session_id = uuid.uuid4().hex[:12]
            state = SessionState(session_id, seed_counter)
            if body:
                _apply_patch(state, body)
            with sessions_lock:
                sessions[session_id] = state
            return JSONResponse(state.view())
        except _BadRequest as exc:
            return _error(400, str(exc))
        except MalformedBoundary as exc:
            return _error(422, str(exc))

    @app.patch("/v1/session/{session_id}")
    async def patch_session(session_id: str, request: Request):
        state = _get_session(session_id)
        if state is None:
            return _error(404, f"unknown session {session_id!r}")
        try:
            body = await _read_body(request)
            with state.lock:
                _apply_patch(state, body)
                return JSONResponse(state.view())
        except _BadRequest as exc:
            return _error(400, str(exc))
        except MalformedBoundary as exc:
            return _error(422, str(exc))

    @app.post("/v1/session/{session_id}/step")
    async def step_session(session_id: str, request: Request):
        state = _get_session(session_id)
        if state is None:
            return _error(404, f"unknown session {session_id!r}")
        try:
            body = await _read_body(request)
        except _BadRequest as exc:
            return _error(400, str(exc))
        stage = body.get("stage", "nodes")
        if stage not in SESSION_STAGES:
            return _error(400, f"unknown stage {stage!r}")
        with state.lock:
            try:
                cond_rec = _session_conditioning(state, stage)
                conditioning = conditioning_from_record(cond_rec, stage)
                seed = body.get("seed")
                if seed is None:
                    seed = state.next_seed()
                req = GenerationRequest(
                    target=stage,
                    conditioning=conditioning,
                    seed=int(seed),
                    clamp_partial=True,  # pinned elements must not drift
                )
                record = _run_generation(req)
            except _BadRequest as exc:
                return _error(400, str(exc))
            except (ConditioningMismatch, MissingCheckpoint) as exc:
                return _error(409, str(exc))
            except (MalformedBoundary, ShapeMismatch) as exc:
                return _error(422, str(exc))
            except (KeyError, TypeError, ValueError) as exc:
                return _error(400, f"malformed request: {exc}")
            except (DataError, ModelError) as exc:
                return _error(422, str(exc))
            record["schema"] = API_SCHEMA
            record["session"] = state.id
            state.stage_results[stage] = record
            # regenerating an earlier stage invalidates everything downstream
            for later in SESSION_STAGES[SESSION_STAGES.index(stage) + 1 :]:
                state.stage_results.pop(later, None)
            return JSONResponse(record)

    return app


def run_server(registry_path: str, bind: str = "127.0.0.1:8760") -> None:
    import uvicorn

    registry = VariantRegistry.from_file(registry_path)
    app = create_app(registry)
    host, _, port = bind.partition(":")
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port or 8760), log_level="warning")
