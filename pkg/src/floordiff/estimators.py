"""scikit-learn style facade over training and generation.

StageDiffusion wraps one (stage, conditioning) network with fit/sample;
FloorPlanGenerator fits the whole three-stage stack and predicts finished
plans from boundaries.  Both follow the estimator protocol (get_params /
set_params via BaseEstimator, trailing-underscore fitted attributes,
NotFittedError before fit), so they compose with sklearn tooling.
"""

from __future__ import annotations

import os
import tempfile

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from . import codecs
from .conditioning import Conditioning, normalize_blocks
from .geometry import Boundary, FloorPlan
from .model import ModelConfig, save_checkpoint
from .pipeline import (
    GenerationRequest,
    VariantRegistry,
    format_variant_id,
    generate_plans,
    sample_stage,
)
from .training import TrainConfig, train_component


class StageDiffusion(BaseEstimator):
    """One conditional denoiser with an estimator-shaped API.

    fit(X) trains on a sequence of FloorPlan records; sample(X, seed) runs
    the reverse process for a sequence of Conditioning objects and returns
    the sampled stage tensors.
    """

    def __init__(
        self,
        stage="nodes",
        conditions=("B",),
        d_model=128,
        layers=4,
        heads=4,
        ff_ratio=4,
        steps=20_000,
        batch_size=64,
        learning_rate=1e-3,
        lr_decay_interval=10_000,
        timesteps=1000,
        schedule="linear",
        loss_weight=1.0,
        align=True,
        weight_decay=1e-4,
        seed=0,
    ):
        self.stage = stage
        self.conditions = conditions
        self.d_model = d_model
        self.layers = layers
        self.heads = heads
        self.ff_ratio = ff_ratio
        self.steps = steps
        self.batch_size = batch_size
        self.learning_rate = learning_rate
        self.lr_decay_interval = lr_decay_interval
        self.timesteps = timesteps
        self.schedule = schedule
        self.loss_weight = loss_weight
        self.align = align
        self.weight_decay = weight_decay
        self.seed = seed

    def _train_config(self) -> TrainConfig:
        return TrainConfig(
            steps=self.steps,
            batch_size=self.batch_size,
            learning_rate=self.learning_rate,
            lr_decay_interval=self.lr_decay_interval,
            timesteps=self.timesteps,
            schedule=self.schedule,
            loss_weight=self.loss_weight,
            align_enabled=self.align,
            weight_decay=self.weight_decay,
            seed=self.seed,
        )

    def _model_config(self) -> ModelConfig:
        return ModelConfig(
            stage=self.stage,
            conditions=normalize_blocks(self.conditions),
            d_model=self.d_model,
            layers=self.layers,
            heads=self.heads,
            ff_ratio=self.ff_ratio,
            seed=self.seed,
        )

    def fit(self, X, y=None):
        result = train_component(
            list(X), self.stage, normalize_blocks(self.conditions),
            self._train_config(), model_config=self._model_config(),
        )
        self.model_ = result.model
        self.schedule_ = result.schedule
        self.log_ = result.log
        return self

    def _check_fitted(self):
        if not hasattr(self, "model_"):
            raise NotFittedError("call fit before sampling")

    def sample(self, X, seed=0, clamp_partial=False):
        """X: sequence of Conditioning; returns stage tensors (n, 8, w)."""
        self._check_fitted()
        out = []
        for i, cond in enumerate(X):
            x, _ = sample_stage(
                self.model_, self.schedule_, cond,
                seed=int(seed) + i, clamp_partial=clamp_partial,
            )
            out.append(x)
        return np.stack(out)

    def predict(self, X):
        return self.sample(X)

    def save(self, path: str) -> None:
        self._check_fitted()
        save_checkpoint(path, self.model_, self.schedule_, train_steps=self.steps)


class FloorPlanGenerator(BaseEstimator):
    """Three-stage generator: fit on plans, predict plans from boundaries."""

    def __init__(
        self,
        d_model=128,
        layers=4,
        heads=4,
        ff_ratio=4,
        steps=20_000,
        batch_size=64,
        learning_rate=1e-3,
        lr_decay_interval=10_000,
        timesteps=1000,
        loss_weight=1.0,
        align=True,
        seed=0,
    ):
        self.d_model = d_model
        self.layers = layers
        self.heads = heads
        self.ff_ratio = ff_ratio
        self.steps = steps
        self.batch_size = batch_size
        self.learning_rate = learning_rate
        self.lr_decay_interval = lr_decay_interval
        self.timesteps = timesteps
        self.loss_weight = loss_weight
        self.align = align
        self.seed = seed

    _STAGES = (
        ("nodes", ("B",)),
        ("adjacency", ("B", "nodes")),
        ("partition", ("B", "nodes", "adj")),
    )

    def fit(self, X, y=None):
        plans = list(X)
        self._workdir_ = tempfile.mkdtemp(prefix="floordiff-stack-")
        checkpoints = {}
        for stage, conds in self._STAGES:
            est = StageDiffusion(
                stage=stage,
                conditions=conds,
                d_model=self.d_model,
                layers=self.layers,
                heads=self.heads,
                ff_ratio=self.ff_ratio,
                steps=self.steps,
                batch_size=self.batch_size,
                learning_rate=self.learning_rate,
                lr_decay_interval=self.lr_decay_interval,
                timesteps=self.timesteps,
                loss_weight=self.loss_weight,
                align=self.align,
                seed=self.seed,
            )
            est.fit(plans)
            vid = format_variant_id(stage, conds)
            path = os.path.join(self._workdir_, vid.replace("/", "_") + ".ckpt")
            est.save(path)
            checkpoints[vid] = path
        registry_path = os.path.join(self._workdir_, "registry.json")
        VariantRegistry.write_file(registry_path, checkpoints)
        self.registry_ = VariantRegistry.from_file(registry_path)
        return self

    def predict(self, X, seed=0):
        """X: sequence of Boundary; returns post-processed FloorPlan list."""
        if not hasattr(self, "registry_"):
            raise NotFittedError("call fit before predict")
        requests = []
        for i, boundary in enumerate(X):
            bt, et = codecs.encode_boundary(boundary)
            requests.append(
                GenerationRequest(
                    target="full_plan",
                    conditioning=Conditioning(boundary=bt, entrance=et),
                    seed=int(seed) + i,
                )
            )
        results = generate_plans(self.registry_, requests)
        return [r.plan for r in results]

    def sample_variants(self, boundary: Boundary, k: int = 5, seed: int = 0) -> list[FloorPlan]:
        return self.predict([boundary] * k, seed=seed)
