"""Fixture builder for end-to-end tests of service clients.

    python3 -m floordiff.testsupport OUTPUT_DIR

writes freshly-initialized tiny checkpoints for the standard variant lineup
plus a registry.json, then prints the registry path.  Pin fidelity in
sessions comes from clamped partial input, which holds for any parameters,
so e2e tests do not need trained networks.
"""

from __future__ import annotations

import os
import sys

from .diffusion import build_schedule
from .model import ModelConfig, init_params, save_checkpoint
from .pipeline import VariantRegistry

FIXTURE_VARIANTS = {
    "nodes/B": ("nodes", ("B",)),
    "nodes/B+Rn": ("nodes", ("B", "Rn")),
    "nodes/B+Rn+Rc": ("nodes", ("B", "Rn", "Rc")),
    "adjacency/B+nodes": ("adjacency", ("B", "nodes")),
    "partition/B+nodes+adj": ("partition", ("B", "nodes", "adj")),
}


def make_studio_fixture(out_dir: str, timesteps: int = 200) -> str:
    os.makedirs(out_dir, exist_ok=True)
    schedule = build_schedule("linear", timesteps)
    checkpoints = {}
    for i, (vid, (stage, conds)) in enumerate(sorted(FIXTURE_VARIANTS.items())):
        cfg = ModelConfig(
            stage, conds, d_model=16, layers=1, heads=2, ff_ratio=2, seed=100 + i
        )
        name = vid.replace("/", "_").replace("+", "-") + ".ckpt"
        save_checkpoint(os.path.join(out_dir, name), init_params(cfg), schedule)
        checkpoints[vid] = name
    registry_path = os.path.join(out_dir, "registry.json")
    VariantRegistry.write_file(registry_path, checkpoints)
    return registry_path


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    if len(argv) != 1:
        print("usage: python3 -m floordiff.testsupport OUTPUT_DIR", file=sys.stderr)
        return 2
    print(make_studio_fixture(argv[0]))
    return 0


if __name__ == "__main__":
    sys.exit(main())
