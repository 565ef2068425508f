"""Line-delimited interchange format for vector floor plans.

One JSON object per line, schema ``plan/1``:

    {"schema": "plan/1",
     "boundary": [[x, y], ...],                     # canonical corner ring
     "entrance": [[x, y], [x, y], [x, y], [x, y]],
     "rooms": [{"category": 1..6,
                "size": area fraction,
                "location": [x, y],
                "region": [[x1, y1, x2, y2], ...] | null}],
     "adjacency": [[i, j], ...]}                    # unordered index pairs

Floats are serialized with repr so records round-trip bit-exactly.  This
format is the contract between the dataset, the engine, the metrics, and
the design studio.  A dataset manifest (seed, params, counts) is written to
``<path>.manifest.json`` alongside the data file.
"""

from __future__ import annotations

import json
import os
from typing import Iterable, Iterator

from .errors import CorruptRecord
from .geometry import Adjacency, Boundary, FloorPlan, Room

PLAN_SCHEMA = "plan/1"
MANIFEST_SCHEMA = "dataset-manifest/1"


def plan_to_record(plan: FloorPlan) -> dict:
    return {
        "schema": PLAN_SCHEMA,
        "boundary": [list(p) for p in plan.boundary.corners],
        "entrance": [list(p) for p in plan.boundary.entrance],
        "rooms": [
            {
                "category": room.category,
                "size": room.size,
                "location": list(room.location),
                "region": [list(r) for r in room.region] if room.region else None,
            }
            for room in plan.rooms
        ],
        "adjacency": sorted([i, j] for i, j in plan.adjacency.pairs),
    }


def plan_from_record(record: dict) -> FloorPlan:
    try:
        schema = record.get("schema", PLAN_SCHEMA)
        if schema != PLAN_SCHEMA:
            raise CorruptRecord(f"unsupported plan schema {schema!r}")
        boundary = Boundary(
            tuple((float(x), float(y)) for x, y in record["boundary"]),
            tuple((float(x), float(y)) for x, y in record["entrance"]),
        )
        rooms = []
        for r in record["rooms"]:
            region = r.get("region")
            rooms.append(
                Room(
                    category=int(r["category"]),
                    size=float(r["size"]),
                    location=(float(r["location"][0]), float(r["location"][1])),
                    region=tuple(tuple(map(float, rect)) for rect in region)
                    if region
                    else None,
                )
            )
        adjacency = Adjacency.from_pairs(
            [(int(i), int(j)) for i, j in record["adjacency"]], len(rooms)
        )
        return FloorPlan(boundary, tuple(rooms), adjacency)
    except CorruptRecord:
        raise
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise CorruptRecord(f"bad plan record: {exc}") from exc


def dumps_record(record: dict) -> str:
    return json.dumps(record, separators=(",", ":"), allow_nan=False)


def save_dataset(path: str, plans: Iterable[FloorPlan], manifest: dict | None = None) -> None:
    tmp = path + ".tmp"
    count = 0
    with open(tmp, "w", encoding="utf-8") as fh:
        for plan in plans:
            fh.write(dumps_record(plan_to_record(plan)))
            fh.write("\n")
            count += 1
    os.replace(tmp, path)
    if manifest is not None:
        manifest = dict(manifest)
        manifest.setdefault("schema", MANIFEST_SCHEMA)
        manifest["count"] = count
        manifest["format"] = PLAN_SCHEMA
        with open(path + ".manifest.json", "w", encoding="utf-8") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")


def iter_records(path: str) -> Iterator[dict]:
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                yield json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorruptRecord(str(exc), line_number=lineno) from exc


def load_dataset(path: str) -> list[FloorPlan]:
    plans = []
    for lineno, record in enumerate(iter_records(path), start=1):
        try:
            plans.append(plan_from_record(record))
        except CorruptRecord as exc:
            if exc.line_number is None:
                raise CorruptRecord(str(exc), line_number=lineno) from exc
            raise
    return plans


def load_manifest(path: str) -> dict:
    with open(path + ".manifest.json", "r", encoding="utf-8") as fh:
        return json.load(fh)
