"""Transformer noise predictor shared by the three stages.

Tokenization: one token per stage-tensor row (8 stage tokens) prefixed by
condition tokens, all under full self-attention.  A sinusoidal timestep
embedding passed through a 2-layer MLP is added to every token.  Condition
blocks absent from the network's configuration contribute one learned null
token each, so sequence length is fixed per configuration.  Set-like blocks
(categories, sizes+locations, adjacency rows, partial elements) emit one
token per row whose content carries the row identity, making predictions
invariant to condition-token order.

Checkpoints are a single file: one JSON metadata line (config, schedule,
step count, format version) followed by the binary parameter blob; writes
go through a temp file and rename.
"""

from __future__ import annotations

import io
import json
import math
import os
from dataclasses import dataclass

import numpy as np
import torch
import torch.nn as nn

from .codecs import STAGE_SHAPES
from .conditioning import (
    CONDITION_BLOCKS,
    STAGE_TENSOR_KIND,
    STAGES,
    Conditioning,
    normalize_blocks,
)
from .diffusion import NoiseSchedule
from .errors import (
    ConditioningMismatch,
    CorruptCheckpoint,
    NonFiniteOutput,
    VersionMismatch,
)

CHECKPOINT_VERSION = 1


@dataclass(frozen=True)
class ModelConfig:
    stage: str                       # nodes | adjacency | partition
    conditions: tuple[str, ...]      # canonical condition blocks
    d_model: int = 128
    layers: int = 4
    heads: int = 4
    ff_ratio: int = 4
    seed: int = 0

    def __post_init__(self):
        if self.stage not in STAGES:
            raise ConditioningMismatch(f"unknown stage {self.stage!r}")
        object.__setattr__(self, "conditions", normalize_blocks(self.conditions))

    @property
    def tensor_kind(self) -> str:
        return STAGE_TENSOR_KIND[self.stage]

    @property
    def row_width(self) -> int:
        return STAGE_SHAPES[self.tensor_kind][1]

    def to_dict(self) -> dict:
        return {
            "stage": self.stage,
            "conditions": list(self.conditions),
            "d_model": self.d_model,
            "layers": self.layers,
            "heads": self.heads,
            "ff_ratio": self.ff_ratio,
            "seed": self.seed,
        }

    @staticmethod
    def from_dict(d: dict) -> "ModelConfig":
        return ModelConfig(
            stage=d["stage"],
            conditions=tuple(d["conditions"]),
            d_model=int(d["d_model"]),
            layers=int(d["layers"]),
            heads=int(d["heads"]),
            ff_ratio=int(d["ff_ratio"]),
            seed=int(d["seed"]),
        )


def sinusoidal_embedding(t: torch.Tensor, dim: int) -> torch.Tensor:
    if not t.is_floating_point():
        t = t.to(torch.get_default_dtype())
    half = dim // 2
    freqs = torch.exp(
        -math.log(10_000.0)
        * torch.arange(half, dtype=t.dtype, device=t.device)
        / max(half - 1, 1)
    )
    args = t[:, None] * freqs[None, :]
    emb = torch.cat([torch.sin(args), torch.cos(args)], dim=-1)
    if dim % 2:
        emb = torch.nn.functional.pad(emb, (0, 1))
    return emb


class _Block(nn.Module):
    def __init__(self, d: int, heads: int, ff: int):
        super().__init__()
        self.heads = heads
        self.dk = d // heads
        self.norm1 = nn.LayerNorm(d)
        self.qkv = nn.Linear(d, 3 * d)
        self.proj = nn.Linear(d, d)
        self.norm2 = nn.LayerNorm(d)
        self.ff = nn.Sequential(nn.Linear(d, ff), nn.GELU(), nn.Linear(ff, d))

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        B, N, D = x.shape
        q, k, v = self.qkv(self.norm1(x)).chunk(3, dim=-1)
        q = q.view(B, N, self.heads, self.dk).transpose(1, 2)
        k = k.view(B, N, self.heads, self.dk).transpose(1, 2)
        v = v.view(B, N, self.heads, self.dk).transpose(1, 2)
        o = nn.functional.scaled_dot_product_attention(q, k, v)
        o = o.transpose(1, 2).reshape(B, N, D)
        x = x + self.proj(o)
        return x + self.ff(self.norm2(x))


class ConditionEmbedder(nn.Module):
    """Maps a collated condition batch to the prefix token sequence."""

    def __init__(self, config: ModelConfig):
        super().__init__()
        d = config.d_model
        self.config = config
        self.nulls = nn.ParameterDict(
            {
                name: nn.Parameter(torch.randn(d) * 0.02)
                for name in CONDITION_BLOCKS
                if name not in config.conditions
            }
        )
        if "boundary" in config.conditions:
            self.boundary_proj = nn.Linear(STAGE_SHAPES["boundary"][1], d)
            self.entrance_proj = nn.Linear(STAGE_SHAPES["entrance"][1], d)
        if "room_count" in config.conditions:
            self.count_embed = nn.Embedding(9, d)
        if "categories" in config.conditions:
            self.category_proj = nn.Linear(1, d)
            self.category_rows = nn.Parameter(torch.randn(8, d) * 0.02)
        if "sizes_locations" in config.conditions:
            self.sl_proj = nn.Linear(3, d)
            self.sl_rows = nn.Parameter(torch.randn(8, d) * 0.02)
        if "adjacency" in config.conditions:
            self.adj_proj = nn.Linear(8, d)
            self.adj_rows = nn.Parameter(torch.randn(8, d) * 0.02)
        if "partial" in config.conditions:
            kind = config.tensor_kind
            width = STAGE_SHAPES[kind][1]
            in_width = width + 8 if kind == "adjacency" else width + 1
            self.partial_proj = nn.Linear(in_width, d)
            self.partial_rows = nn.Parameter(torch.randn(8, d) * 0.02)

    def forward(self, cond: dict[str, torch.Tensor], batch: int) -> torch.Tensor:
        tokens: list[torch.Tensor] = []
        dtype = next(self.parameters()).dtype
        for name in CONDITION_BLOCKS:
            if name not in self.config.conditions:
                tokens.append(self.nulls[name].to(dtype).expand(batch, 1, -1))
                continue
            if name == "boundary":
                tokens.append(self.boundary_proj(cond["boundary"])[:, None, :])
                tokens.append(self.entrance_proj(cond["entrance"])[:, None, :])
            elif name == "room_count":
                tokens.append(self.count_embed(cond["room_count"])[:, None, :])
            elif name == "categories":
                t = self.category_proj(cond["categories"][..., None])
                tokens.append(t + self.category_rows[None, :, :])
            elif name == "sizes_locations":
                t = self.sl_proj(cond["sizes_locations"])
                tokens.append(t + self.sl_rows[None, :, :])
            elif name == "adjacency":
                t = self.adj_proj(cond["adjacency"])
                tokens.append(t + self.adj_rows[None, :, :])
            elif name == "partial":
                values = cond["partial_values"]
                mask = cond["partial_mask"]
                if self.config.tensor_kind == "adjacency":
                    feats = torch.cat([values * mask, mask], dim=-1)           # (B, 8, 16)
                else:
                    m = mask[..., None]
                    feats = torch.cat([values * m, m], dim=-1)                 # (B, 8, W+1)
                tokens.append(self.partial_proj(feats) + self.partial_rows[None, :, :])
        return torch.cat(tokens, dim=1)


class StageDenoiser(nn.Module):
    """Conditional noise predictor for one stage tensor kind."""

    def __init__(self, config: ModelConfig):
        super().__init__()
        self.config = config
        d = config.d_model
        width = config.row_width
        self.in_proj = nn.Linear(width, d)
        self.stage_rows = nn.Parameter(torch.randn(8, d) * 0.02)
        self.time_mlp = nn.Sequential(nn.Linear(d, 2 * d), nn.SiLU(), nn.Linear(2 * d, d))
        self.conditions = ConditionEmbedder(config)
        self.blocks = nn.ModuleList(
            [_Block(d, config.heads, d * config.ff_ratio) for _ in range(config.layers)]
        )
        self.out_norm = nn.LayerNorm(d)
        self.out_proj = nn.Linear(d, width)

    def forward_tokens(
        self, cond_tokens: torch.Tensor, x: torch.Tensor, t: torch.Tensor
    ) -> torch.Tensor:
        """Run the trunk on a prebuilt condition prefix (token order of the
        prefix is semantically irrelevant under full self-attention)."""
        stage_tokens = self.in_proj(x) + self.stage_rows[None, :, :]
        seq = torch.cat([cond_tokens, stage_tokens], dim=1)
        temb = self.time_mlp(sinusoidal_embedding(t.to(seq.dtype), self.config.d_model))
        seq = seq + temb[:, None, :]
        for block in self.blocks:
            seq = block(seq)
        out = self.out_proj(self.out_norm(seq[:, -8:, :]))
        return out

    def forward(self, x: torch.Tensor, t: torch.Tensor, cond: dict[str, torch.Tensor]) -> torch.Tensor:
        if x.dim() != 3 or tuple(x.shape[1:]) != STAGE_SHAPES[self.config.tensor_kind]:
            raise ConditioningMismatch(
                f"stage tensor batch {tuple(x.shape)} does not match "
                f"{self.config.tensor_kind} {STAGE_SHAPES[self.config.tensor_kind]}"
            )
        cond_tokens = self.conditions(cond, batch=x.shape[0])
        out = self.forward_tokens(cond_tokens, x, t)
        if not torch.isfinite(out).all():
            raise NonFiniteOutput("denoiser produced non-finite values")
        return out


def init_params(config: ModelConfig, seed: int | None = None) -> StageDenoiser:
    """Deterministic parameter initialization."""
    torch.manual_seed(config.seed if seed is None else seed)
    return StageDenoiser(config)


# ---------------------------------------------------------------------------
# batching helpers


def collate_conditions(
    conds: list[Conditioning], config: ModelConfig, dtype=torch.float32
) -> dict[str, torch.Tensor]:
    """Stack per-sample Conditioning objects into the tensor dict the
    embedder consumes.  Every sample must match the config."""
    out: dict[str, torch.Tensor] = {}
    for c in conds:
        c.check_against(config.conditions, config.stage)

    def stack(getter, shape):
        rows = []
        for c in conds:
            v = getter(c)
            rows.append(np.zeros(shape) if v is None else np.asarray(v))
        return torch.as_tensor(np.stack(rows), dtype=dtype)

    if "boundary" in config.conditions:
        out["boundary"] = stack(lambda c: c.boundary[0], (80,))
        out["entrance"] = stack(lambda c: c.entrance[0], (8,))
    if "room_count" in config.conditions:
        out["room_count"] = torch.as_tensor(
            [int(c.room_count) for c in conds], dtype=torch.long
        )
    if "categories" in config.conditions:
        out["categories"] = stack(lambda c: c.categories, (8,))
    if "sizes_locations" in config.conditions:
        out["sizes_locations"] = stack(lambda c: c.sizes_locations, (8, 3))
    if "adjacency" in config.conditions:
        out["adjacency"] = stack(lambda c: c.adjacency, (8, 8))
    if "partial" in config.conditions:
        kind = config.tensor_kind
        vshape = STAGE_SHAPES[kind]
        mshape = (8, 8) if kind == "adjacency" else (8,)
        out["partial_values"] = stack(lambda c: c.partial_values, vshape)
        out["partial_mask"] = stack(lambda c: c.partial_mask, mshape)
    return out


def embed_conditions(model: StageDenoiser, c: Conditioning) -> torch.Tensor:
    """Condition token sequence for a single conditioning, shape (n, d)."""
    cond = collate_conditions([c], model.config, dtype=next(model.parameters()).dtype)
    with torch.inference_mode():
        return model.conditions(cond, batch=1)[0].clone()


def predict_noise(
    model: StageDenoiser, x_t: np.ndarray, t: int, c: Conditioning
) -> np.ndarray:
    """Single-sample numpy-in/numpy-out prediction."""
    cond = collate_conditions([c], model.config)
    x = torch.as_tensor(np.asarray(x_t)[None], dtype=torch.float32)
    with torch.inference_mode():
        out = model(x, torch.as_tensor([t]), cond)
    return out[0].numpy().astype(np.float64)


# ---------------------------------------------------------------------------
# checkpoints


def save_checkpoint(
    path: str,
    model: StageDenoiser,
    schedule: NoiseSchedule,
    train_steps: int = 0,
    extra: dict | None = None,
) -> None:
    header = {
        "format_version": CHECKPOINT_VERSION,
        "config": model.config.to_dict(),
        "schedule": schedule.to_dict(),
        "train_steps": int(train_steps),
    }
    if extra:
        header["extra"] = extra
    blob = io.BytesIO()
    torch.save(model.state_dict(), blob)
    tmp = path + ".tmp"
    with open(tmp, "wb") as fh:
        fh.write(json.dumps(header, sort_keys=True).encode("utf-8"))
        fh.write(b"\n")
        fh.write(blob.getvalue())
        fh.flush()
        os.fsync(fh.fileno())
    os.replace(tmp, path)


def load_checkpoint(
    path: str, expected_stage: str | None = None
) -> tuple[StageDenoiser, NoiseSchedule, dict]:
    with open(path, "rb") as fh:
        raw = fh.read()
    newline = raw.find(b"\n")
    if newline < 0:
        raise CorruptCheckpoint(f"{path}: missing metadata header")
    try:
        header = json.loads(raw[:newline].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CorruptCheckpoint(f"{path}: unreadable metadata header") from exc
    version = header.get("format_version")
    if version != CHECKPOINT_VERSION:
        raise VersionMismatch(f"{path}: checkpoint format {version}, expected {CHECKPOINT_VERSION}")
    try:
        config = ModelConfig.from_dict(header["config"])
        schedule = NoiseSchedule.from_dict(header["schedule"])
        state = torch.load(io.BytesIO(raw[newline + 1 :]), weights_only=True)
    except (KeyError, ValueError, RuntimeError) as exc:
        raise CorruptCheckpoint(f"{path}: {exc}") from exc
    if expected_stage is not None and config.stage != expected_stage:
        raise ConditioningMismatch(
            f"{path}: checkpoint is for stage {config.stage!r}, expected {expected_stage!r}"
        )
    model = StageDenoiser(config)
    try:
        model.load_state_dict(state)
    except RuntimeError as exc:
        raise CorruptCheckpoint(f"{path}: parameter blob does not match config") from exc
    model.eval()
    return model, schedule, header
