"""Training loop for any (stage, conditioning) pair.

Each step draws a batch of ground-truth plans, noises their stage tensors
(forward process), predicts the noise under teacher-forced conditioning
extracted from the same records, estimates x0, builds the incremental-design
alignment target, and applies the combined loss with Adam + decoupled weight
decay.  The learning rate decays by a fixed factor on a fixed interval.

Deterministic end-to-end for a fixed seed and thread count: all stochastic
draws (batch indices, timesteps, noise, alignment blending, partial masks)
come from one numpy Generator; torch is only seeded for parameter init.
"""

from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, field, replace

import numpy as np
import torch

from .conditioning import conditioning_from_plan, stage_tensor_from_plan
from .diffusion import (
    NoiseSchedule,
    build_alignment_target,
    build_schedule,
    element_groups,
    estimate_x0,
    forward_noise,
)
from .errors import DatasetStageMismatch, NonFiniteLoss
from .model import ModelConfig, StageDenoiser, collate_conditions, init_params, save_checkpoint


@dataclass(frozen=True)
class TrainConfig:
    steps: int = 20_000
    batch_size: int = 64
    learning_rate: float = 1e-3
    lr_decay_factor: float = 0.1
    lr_decay_interval: int = 10_000
    timesteps: int = 1000
    schedule: str = "linear"
    beta_start: float = 1e-4
    beta_end: float = 0.02
    loss_weight: float = 1.0
    align_enabled: bool = True
    weight_decay: float = 1e-4
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    seed: int = 0
    checkpoint_interval: int = 0
    log_interval: int = 50

    def __post_init__(self):
        if self.steps < 1 or self.batch_size < 1 or self.lr_decay_interval < 1:
            raise ValueError("steps, batch_size and lr_decay_interval must be positive")
        if self.loss_weight < 0.0:
            raise ValueError("loss_weight must be >= 0")

    def to_dict(self) -> dict:
        return asdict(self)

    @staticmethod
    def from_dict(d: dict) -> "TrainConfig":
        known = {f for f in TrainConfig.__dataclass_fields__}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown train config keys: {sorted(unknown)}")
        return TrainConfig(**d)

    @staticmethod
    def from_file(path: str) -> "TrainConfig":
        with open(path, "r", encoding="utf-8") as fh:
            return TrainConfig.from_dict(json.load(fh))

    def to_file(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def lr_at(step: int, cfg: TrainConfig) -> float:
    """lr0 * factor^(step // interval)."""
    if step < 0:
        raise ValueError("step must be >= 0")
    return cfg.learning_rate * cfg.lr_decay_factor ** (step // cfg.lr_decay_interval)


def sample_timestep(rng: np.random.Generator, timesteps: int) -> int:
    """Uniform over {1..T}."""
    return int(rng.integers(1, timesteps + 1))


@dataclass(frozen=True)
class LogRecord:
    step: int
    loss: float
    eps_term: float
    align_term: float
    lr: float
    wall_time: float

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class TrainResult:
    model: StageDenoiser
    schedule: NoiseSchedule
    model_config: ModelConfig
    train_config: TrainConfig
    log: list[LogRecord] = field(default_factory=list)


def write_log(path: str, log: list[LogRecord]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in log:
            fh.write(json.dumps(rec.to_dict(), sort_keys=True))
            fh.write("\n")


# ---------------------------------------------------------------------------
# dataset preparation


class _StageData:
    """Dataset encoded once up front: stage tensors, element groups, and the
    static condition blocks, all indexable by record."""

    def __init__(self, plans, stage: str, conditions, model_config: ModelConfig):
        if not plans:
            raise DatasetStageMismatch("empty dataset")
        self.stage = stage
        if stage == "partition":
            for i, plan in enumerate(plans):
                if any(r.region is None for r in plan.rooms):
                    raise DatasetStageMismatch(
                        f"record {i} has rooms without geometry; cannot train partition"
                    )
        if stage == "adjacency":
            for i, plan in enumerate(plans):
                if plan.room_count < 2:
                    raise DatasetStageMismatch(f"record {i} has < 2 rooms; no adjacency elements")
        self.x0 = np.stack([stage_tensor_from_plan(p, stage) for p in plans])
        self.room_counts = np.array([p.room_count for p in plans])
        kind = model_config.tensor_kind
        self.groups = [element_groups(kind, p.room_count) for p in plans]
        static_blocks = tuple(b for b in conditions if b != "partial")
        conds = [conditioning_from_plan(p, static_blocks, stage) for p in plans]
        self.static_cond = collate_conditions(conds, replace(model_config, conditions=static_blocks))
        self.has_partial = "partial" in conditions
        self.kind = kind

    def __len__(self):
        return len(self.room_counts)


def _batch_partial(data: _StageData, idx: np.ndarray, rng: np.random.Generator):
    """Random known-subset masks per sample (teacher-forced values)."""
    values = data.x0[idx].astype(np.float64)
    if data.kind == "adjacency":
        masks = np.zeros((len(idx), 8, 8))
    else:
        masks = np.zeros((len(idx), 8))
    for b, i in enumerate(idx):
        groups = data.groups[i]
        n = len(groups)
        known = int(rng.integers(0, n + 1))
        if known == 0:
            continue
        chosen = rng.choice(n, size=known, replace=False)
        for gi in chosen:
            for r, c in groups[gi].entries:
                if data.kind == "adjacency":
                    masks[b, r, c] = 1.0
                else:
                    masks[b, r] = 1.0
    return values, masks


def train_component(
    plans,
    stage: str,
    conditions,
    cfg: TrainConfig,
    model_config: ModelConfig | None = None,
    checkpoint_path: str | None = None,
    on_batch=None,
) -> TrainResult:
    """Train one denoiser; returns the trained model, schedule, and log."""
    if model_config is None:
        model_config = ModelConfig(stage=stage, conditions=tuple(conditions), seed=cfg.seed)
    schedule = build_schedule(cfg.schedule, cfg.timesteps, cfg.beta_start, cfg.beta_end)
    data = _StageData(plans, stage, model_config.conditions, model_config)

    model = init_params(model_config)
    model.train()
    opt = torch.optim.AdamW(
        model.parameters(),
        lr=cfg.learning_rate,
        betas=(cfg.adam_beta1, cfg.adam_beta2),
        weight_decay=cfg.weight_decay,
    )
    rng = np.random.default_rng(cfg.seed & 0xFFFFFFFFFFFFFFFF)
    n = len(data)
    width = model_config.row_width
    log: list[LogRecord] = []
    t0 = time.monotonic()

    for step in range(1, cfg.steps + 1):
        lr = lr_at(step - 1, cfg)
        for group in opt.param_groups:
            group["lr"] = lr

        idx = rng.integers(0, n, size=cfg.batch_size)
        t = rng.integers(1, cfg.timesteps + 1, size=cfg.batch_size)
        eps = rng.standard_normal((cfg.batch_size, 8, width))
        x0 = data.x0[idx]
        x_t = forward_noise(x0, t, eps, schedule)

        cond = {k: v[torch.as_tensor(idx)] for k, v in data.static_cond.items()}
        if data.has_partial:
            pvals, pmask = _batch_partial(data, idx, rng)
            cond["partial_values"] = torch.as_tensor(pvals, dtype=torch.float32)
            cond["partial_mask"] = torch.as_tensor(pmask, dtype=torch.float32)

        x_t_t = torch.as_tensor(x_t, dtype=torch.float32)
        eps_t = torch.as_tensor(eps, dtype=torch.float32)
        eps_hat = model(x_t_t, torch.as_tensor(t), cond)
        eps_term = ((eps_hat - eps_t) ** 2).mean()

        if cfg.align_enabled:
            x_inter = np.stack(
                [
                    build_alignment_target(
                        x0[b], int(t[b]), cfg.timesteps, data.groups[idx[b]], rng
                    ).x_inter
                    for b in range(cfg.batch_size)
                ]
            )
            x_tilde = estimate_x0(x_t_t, eps_hat, t, schedule)
            align_term = ((x_tilde - torch.as_tensor(x_inter, dtype=torch.float32)) ** 2).mean()
            loss = eps_term + cfg.loss_weight * align_term
        else:
            align_term = torch.zeros(())
            loss = eps_term

        if not torch.isfinite(loss):
            raise NonFiniteLoss(
                f"non-finite loss at step {step}: eps={float(eps_term.detach())} "
                f"align={float(align_term.detach())} lr={lr}"
            )

        opt.zero_grad()
        loss.backward()
        opt.step()

        if on_batch is not None:
            on_batch(step=step, indices=idx, t=t, cond=cond, x0=x0)

        if step == 1 or step % cfg.log_interval == 0 or step == cfg.steps:
            log.append(
                LogRecord(
                    step=step,
                    loss=float(loss.detach()),
                    eps_term=float(eps_term.detach()),
                    align_term=float(align_term.detach()),
                    lr=lr,
                    wall_time=time.monotonic() - t0,
                )
            )
        if (
            checkpoint_path
            and cfg.checkpoint_interval > 0
            and step % cfg.checkpoint_interval == 0
        ):
            model.eval()
            save_checkpoint(checkpoint_path, model, schedule, train_steps=step)
            model.train()

    model.eval()
    if checkpoint_path:
        save_checkpoint(checkpoint_path, model, schedule, train_steps=cfg.steps)
    return TrainResult(model, schedule, model_config, cfg, log)


# ---------------------------------------------------------------------------
# alignment ablation harness


def evaluate_x0_mse(
    model: StageDenoiser,
    schedule: NoiseSchedule,
    plans,
    conditions,
    eval_ts=(50, 20, 10),
    seed: int = 0,
) -> dict[int, float]:
    """Mean ||estimate_x0 - x0||^2 at the given timesteps on held-out data."""
    stage = model.config.stage
    data = _StageData(plans, stage, model.config.conditions, model.config)
    cond = {k: v for k, v in data.static_cond.items()}
    if data.has_partial:
        b = len(plans)
        kind = model.config.tensor_kind
        cond["partial_values"] = torch.zeros((b,) + (8, model.config.row_width))
        cond["partial_mask"] = torch.zeros((b, 8, 8) if kind == "adjacency" else (b, 8))
    out = {}
    for t_eval in eval_ts:
        rng = np.random.default_rng([seed & 0xFFFFFFFFFFFFFFFF, t_eval])
        eps = rng.standard_normal(data.x0.shape)
        t = np.full(len(plans), int(t_eval))
        x_t = forward_noise(data.x0, t, eps, schedule)
        with torch.inference_mode():
            eps_hat = model(
                torch.as_tensor(x_t, dtype=torch.float32), torch.as_tensor(t), cond
            )
        x_tilde = estimate_x0(x_t, eps_hat.numpy().astype(np.float64), t, schedule)
        out[int(t_eval)] = float(((x_tilde - data.x0) ** 2).mean())
    return out


def ablation_pair(
    train_plans,
    eval_plans,
    stage: str,
    conditions,
    cfg: TrainConfig,
    eval_ts=(50, 20, 10),
    eval_seed: int = 0,
) -> dict:
    """Train alignment-on and alignment-off twins (identical seeds and data
    order) and report their intermediate x0-estimate errors."""
    results = {}
    for label, enabled in (("aligned", True), ("unaligned", False)):
        run_cfg = replace(cfg, align_enabled=enabled)
        res = train_component(train_plans, stage, conditions, run_cfg)
        series = evaluate_x0_mse(
            res.model, res.schedule, eval_plans, conditions, eval_ts, seed=eval_seed
        )
        results[label] = {
            "align_enabled": enabled,
            "final_loss": res.log[-1].loss,
            "final_eps_term": res.log[-1].eps_term,
            "x0_mse": series,
            "log": [r.to_dict() for r in res.log],
        }
    return results
