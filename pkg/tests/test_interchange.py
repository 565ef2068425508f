import pytest

from floordiff.errors import CorruptRecord
from floordiff.interchange import (
    dumps_record,
    load_dataset,
    load_manifest,
    plan_from_record,
    plan_to_record,
    save_dataset,
)
from floordiff.synth import GeneratorParams, generate_dataset


def test_save_load_round_trip(tmp_path):
    params = GeneratorParams(seed=21)
    plans = generate_dataset(params, 50)
    path = str(tmp_path / "plans.jsonl")
    save_dataset(path, plans, manifest={"params": params.to_dict(), "seed": params.seed})
    loaded = load_dataset(path)
    assert len(loaded) == 50
    for a, b in zip(plans, loaded):
        assert a == b


def test_manifest(tmp_path):
    params = GeneratorParams(seed=21)
    plans = generate_dataset(params, 5)
    path = str(tmp_path / "plans.jsonl")
    save_dataset(path, plans, manifest={"params": params.to_dict(), "seed": 21})
    manifest = load_manifest(path)
    assert manifest["count"] == 5
    assert manifest["seed"] == 21
    assert manifest["format"] == "plan/1"
    assert manifest["schema"] == "dataset-manifest/1"


def test_corrupt_record_reports_line_number(tmp_path):
    params = GeneratorParams(seed=21)
    plans = generate_dataset(params, 3)
    path = str(tmp_path / "plans.jsonl")
    save_dataset(path, plans)
    with open(path, "a", encoding="utf-8") as fh:
        fh.write("{not json\n")
    with pytest.raises(CorruptRecord) as err:
        load_dataset(path)
    assert err.value.line_number == 4
    assert "line 4" in str(err.value)


def test_bad_field_reports_line_number(tmp_path):
    path = str(tmp_path / "plans.jsonl")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write('{"schema": "plan/1", "boundary": []}\n')
    with pytest.raises(CorruptRecord):
        load_dataset(path)


def test_record_round_trip_exact_floats():
    plan = generate_dataset(GeneratorParams(seed=3), 1)[0]
    rec = plan_to_record(plan)
    again = plan_to_record(plan_from_record(rec))
    assert dumps_record(rec) == dumps_record(again)


def test_unknown_schema_rejected():
    with pytest.raises(CorruptRecord):
        plan_from_record({"schema": "plan/999"})
