"""Vector-space floor plan generation with staged conditional diffusion."""

from .geometry import (
    Adjacency,
    Boundary,
    FloorPlan,
    Room,
    RoomBox,
    RoomNode,
    augment_corners,
    check_boundary,
    check_plan,
    rectilinear_iou,
)
from .codecs import (
    decode_adjacency,
    decode_boundary,
    decode_boxes,
    decode_nodes,
    encode_adjacency,
    encode_boundary,
    encode_boxes,
    encode_nodes,
)
from .conditioning import Conditioning, conditioning_from_plan
from .diffusion import (
    NoiseSchedule,
    build_alignment_target,
    build_schedule,
    estimate_x0,
    forward_noise,
    reverse_step,
    total_loss,
)
from .errors import FloorDiffError
from .estimators import FloorPlanGenerator, StageDiffusion
from .interchange import load_dataset, save_dataset
from .model import ModelConfig, init_params, load_checkpoint, predict_noise, save_checkpoint
from .pipeline import (
    GenerationRequest,
    PipelineResult,
    VariantRegistry,
    generate_plan,
    generate_plans,
    postprocess,
    sample_stage,
)
from .synth import DatasetSplit, GeneratorParams, generate_dataset, generate_sample, split_dataset
from .training import TrainConfig, ablation_pair, train_component
from .metrics import (
    compliance_mae,
    coverage_avg,
    diversity_avg,
    frechet_feature_distance,
    plan_statistics,
)

__version__ = "0.1.0"

__all__ = [
    "Adjacency",
    "Boundary",
    "Conditioning",
    "DatasetSplit",
    "FloorDiffError",
    "FloorPlan",
    "FloorPlanGenerator",
    "GenerationRequest",
    "GeneratorParams",
    "ModelConfig",
    "NoiseSchedule",
    "PipelineResult",
    "Room",
    "RoomBox",
    "RoomNode",
    "StageDiffusion",
    "TrainConfig",
    "VariantRegistry",
    "ablation_pair",
    "augment_corners",
    "build_alignment_target",
    "build_schedule",
    "check_boundary",
    "check_plan",
    "compliance_mae",
    "conditioning_from_plan",
    "coverage_avg",
    "decode_adjacency",
    "decode_boundary",
    "decode_boxes",
    "decode_nodes",
    "diversity_avg",
    "encode_adjacency",
    "encode_boundary",
    "encode_boxes",
    "encode_nodes",
    "estimate_x0",
    "forward_noise",
    "frechet_feature_distance",
    "generate_dataset",
    "generate_plan",
    "generate_plans",
    "generate_sample",
    "init_params",
    "load_checkpoint",
    "load_dataset",
    "plan_statistics",
    "postprocess",
    "predict_noise",
    "rectilinear_iou",
    "reverse_step",
    "sample_stage",
    "save_checkpoint",
    "save_dataset",
    "split_dataset",
    "total_loss",
    "train_component",
]
