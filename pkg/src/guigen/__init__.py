"""Controllable low-fi GUI generation with a dual-adapter diffusion model."""

from .config import ModelConfig, OracleConfig, TrainConfig, config_hash
from .data import (
    Caption,
    Element,
    ElementClass,
    Wireframe,
    build_dataset,
    encode_caption,
    make_caption,
    rasterize_condition,
    render_gui,
    sample_wireframe,
)
from .diffusion import add_noise, cfg_combine, ddim_step, make_schedule
from .model import ConditionSet, GuiGenModel
from .scanpath import flow_from_order, predict_scanpath, saliency_map
from .softdtw import dtw, sdtw, sdtw_grad, sdtw_normalized, soft_dtw_batch

__all__ = [
    "ModelConfig",
    "OracleConfig",
    "TrainConfig",
    "config_hash",
    "Caption",
    "Element",
    "ElementClass",
    "Wireframe",
    "build_dataset",
    "encode_caption",
    "make_caption",
    "rasterize_condition",
    "render_gui",
    "sample_wireframe",
    "add_noise",
    "cfg_combine",
    "ddim_step",
    "make_schedule",
    "ConditionSet",
    "GuiGenModel",
    "flow_from_order",
    "predict_scanpath",
    "saliency_map",
    "dtw",
    "sdtw",
    "sdtw_grad",
    "sdtw_normalized",
    "soft_dtw_batch",
]

__version__ = "0.1.0"
