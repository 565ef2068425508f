"""Operator command line.

    floordiff gen-data --seed S --count N --out PATH
    floordiff train --stage STAGE --conditions LIST --data PATH --out CKPT
                    [--config PATH]
    floordiff sample --variant ID --request PATH --seed S --out PATH
                     [--registry PATH]
    floordiff eval --metric {stats|mae|diversity|coverage|ffd}
                   --generated PATH [--reference PATH] [--out PATH] [--json]
    floordiff serve --registry PATH --bind HOST:PORT

Exit codes: 0 success, 2 usage error, 3 data error, 4 model error.
Diagnostics go to standard error.  The registry path and bind address can
also come from FLOORDIFF_REGISTRY and FLOORDIFF_BIND.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .conditioning import conditioning_from_record, normalize_blocks
from .errors import DataError, FloorDiffError, ModelError
from .geometry import Adjacency, Boundary, FloorPlan, Room
from .interchange import (
    iter_records,
    load_dataset,
    plan_from_record,
    save_dataset,
)
from .metrics import (
    compliance_mae,
    coverage_avg,
    diversity_avg,
    format_table,
    frechet_distance_plans,
    plan_statistics,
)
from .pipeline import (
    VariantRegistry,
    generate_plan,
    request_from_record,
    result_from_record,
    result_to_record,
)
from .synth import GeneratorParams, generate_dataset
from .training import TrainConfig, train_component, write_log

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_MODEL = 4


def _registry_path(args) -> str:
    path = getattr(args, "registry", None) or os.environ.get("FLOORDIFF_REGISTRY")
    if not path:
        raise DataError("no registry: pass --registry or set FLOORDIFF_REGISTRY")
    return path


# ---------------------------------------------------------------------------
# subcommands


def cmd_gen_data(args) -> int:
    params = GeneratorParams(seed=args.seed)
    plans = generate_dataset(params, args.count)
    save_dataset(args.out, plans, manifest={"params": params.to_dict(), "seed": args.seed})
    print(f"wrote {args.count} plans to {args.out} (+ manifest)", file=sys.stderr)
    return EXIT_OK


def cmd_train(args) -> int:
    plans = load_dataset(args.data)
    cfg = TrainConfig.from_file(args.config) if args.config else TrainConfig()
    conditions = normalize_blocks([t for t in args.conditions.split(",") if t])
    result = train_component(
        plans, args.stage, conditions, cfg, checkpoint_path=args.out
    )
    write_log(args.out + ".log.jsonl", result.log)
    final = result.log[-1]
    print(
        f"trained {args.stage}/{args.conditions} for {cfg.steps} steps; "
        f"final loss {final.loss:.4f} (eps {final.eps_term:.4f})",
        file=sys.stderr,
    )
    return EXIT_OK


def cmd_sample(args) -> int:
    registry = VariantRegistry.from_file(_registry_path(args))
    with open(args.request, "r", encoding="utf-8") as fh:
        rec = json.load(fh)
    if args.variant:
        rec["variant"] = args.variant
    if args.seed is not None:
        rec["seed"] = args.seed
    request = request_from_record(rec)
    result = generate_plan(registry, request)
    out_rec = result_to_record(result)
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(out_rec, fh)
        fh.write("\n")
    print(f"wrote result (seed {result.seed}) to {args.out}", file=sys.stderr)
    return EXIT_OK


def _load_eval_plans(path: str, need_geometry: bool) -> list[FloorPlan]:
    """Plans from a dataset file or a results file (one record per line)."""
    plans = []
    for lineno, rec in enumerate(iter_records(path), start=1):
        schema = rec.get("schema", "")
        if schema.startswith("plan/"):
            plans.append(plan_from_record(rec))
            continue
        result = result_from_record(rec)
        if result.plan is not None:
            plans.append(result.plan)
        elif not need_geometry and result.nodes is not None:
            # bubble-diagram result: statistics/ffd need only rooms+adjacency
            rooms = tuple(
                Room(n.category, n.size, n.location, None) for n in result.nodes
            )
            adjacency = result.adjacency or Adjacency(frozenset(), len(rooms))
            boundary = Boundary(
                ((0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)),
                ((0.0, 0.0), (0.0625, 0.0), (0.0625, 0.015625), (0.0, 0.015625)),
            )
            plans.append(FloorPlan(boundary, rooms, adjacency))
        else:
            raise DataError(f"{path}:{lineno}: record has no plan geometry")
    if not plans:
        raise DataError(f"{path}: no records")
    return plans


def _load_results(path: str):
    return [result_from_record(rec) for rec in iter_records(path)]


def cmd_eval(args) -> int:
    metric = args.metric
    report: dict
    if metric == "stats":
        if not args.reference:
            raise DataError("--reference is required for stats")
        generated = _load_eval_plans(args.generated, need_geometry=False)
        reference = _load_eval_plans(args.reference, need_geometry=False)
        stats = plan_statistics(generated, reference)
        report = {"metric": "stats", **stats.to_dict()}
        table = format_table(
            "statistics ratios (generated mean / reference mean)",
            list(stats.to_dict().items()),
        )
    elif metric == "mae":
        results = _load_results(args.generated)
        outputs, conds = [], []
        for r in results:
            stage = "nodes" if r.target == "full_plan" else r.target
            conds.append(conditioning_from_record(r.conditioning_record, stage))
            nodes = r.nodes
            if r.plan is not None:
                outputs.append((r.plan.nodes(), r.plan.adjacency))
            else:
                outputs.append((nodes or [], r.adjacency))
        mae = compliance_mae(outputs, conds)
        report = {"metric": "mae", **mae.to_dict()}
        table = format_table(
            "condition compliance MAE",
            [(k, v if v is not None else "n/a") for k, v in mae.to_dict().items()],
        )
    elif metric == "diversity":
        results = _load_results(args.generated)
        groups: dict[str, list] = {}
        for r in results:
            if r.plan is None:
                raise DataError("diversity needs post-processed plans")
            key = r.group if r.group is not None else json.dumps(
                r.conditioning_record, sort_keys=True
            )
            groups.setdefault(key, []).append(r.plan)
        scores = diversity_avg(list(groups.values()))
        report = {"metric": "diversity", "per_category": scores, "groups": len(groups)}
        table = format_table(
            "diversity (mean pairwise IoU per category; lower = more diverse)",
            [(f"category_{c}", v) for c, v in scores.items()],
        )
    elif metric == "coverage":
        if not args.reference:
            raise DataError("--reference is required for coverage")
        generated = _load_eval_plans(args.generated, need_geometry=True)
        reference = _load_eval_plans(args.reference, need_geometry=True)
        if len(generated) != len(reference):
            raise DataError(
                f"coverage pairs by position: {len(generated)} generated vs "
                f"{len(reference)} reference plans"
            )
        scores = coverage_avg(generated, reference)
        report = {"metric": "coverage", "per_category": scores}
        table = format_table(
            "coverage (mean IoU against paired references)",
            [(f"category_{c}", v) for c, v in scores.items()],
        )
    elif metric == "ffd":
        if not args.reference:
            raise DataError("--reference is required for ffd")
        generated = _load_eval_plans(args.generated, need_geometry=False)
        reference = _load_eval_plans(args.reference, need_geometry=False)
        value = frechet_distance_plans(generated, reference)
        report = {"metric": "ffd", "distance": value}
        table = format_table(
            "Fréchet feature distance (vector features; not Inception-FID)",
            [("distance", value)],
        )
    else:  # pragma: no cover - argparse restricts choices
        raise DataError(f"unknown metric {metric}")

    if args.json:
        print(json.dumps(report, sort_keys=True))
    else:
        print(table)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(report, fh, sort_keys=True)
            fh.write("\n")
    return EXIT_OK


def cmd_serve(args) -> int:
    from .service import run_server

    bind = args.bind or os.environ.get("FLOORDIFF_BIND") or "127.0.0.1:8760"
    run_server(_registry_path(args), bind)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="floordiff",
        description="vector floor-plan generation: data, training, sampling, evaluation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="generate a synthetic dataset")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_data)

    p = sub.add_parser("train", help="train one stage network")
    p.add_argument("--stage", choices=("nodes", "adjacency", "partition"), required=True)
    p.add_argument("--conditions", required=True, help="comma list, e.g. B,Rn,Rc")
    p.add_argument("--config", help="TrainConfig JSON file")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True, help="checkpoint path")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("sample", help="run generation for a request document")
    p.add_argument("--variant", help="variant id override")
    p.add_argument("--request", required=True, help="GenerationRequest JSON file")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    p.add_argument("--registry")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("eval", help="evaluate generated outputs")
    p.add_argument(
        "--metric", choices=("stats", "mae", "diversity", "coverage", "ffd"), required=True
    )
    p.add_argument("--generated", required=True)
    p.add_argument("--reference")
    p.add_argument("--out", help="write the machine-readable report here")
    p.add_argument("--json", action="store_true", help="print JSON instead of a table")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--registry")
    p.add_argument("--bind", help="HOST:PORT (default 127.0.0.1:8760)")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ModelError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MODEL
    except (DataError, FloorDiffError, OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
