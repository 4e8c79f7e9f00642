"""Shared configuration dataclasses and canonical config hashing."""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field


@dataclass(frozen=True)
class OracleConfig:
    """Parameters of the differentiable saliency/scanpath predictor."""

    k_fixations: int = 6
    tau: float = 0.05  # soft-argmax temperature
    inhibition_radius: float = 0.12  # in normalized [0,1] coordinates
    center_sigma: float = 0.25
    w_contrast: float = 0.45
    w_edge: float = 0.35
    w_center: float = 0.20

    def validate(self) -> None:
        if self.k_fixations < 1:
            raise ValueError("k_fixations must be >= 1")
        if self.tau <= 0:
            raise ValueError("tau must be positive")
        if self.inhibition_radius <= 0:
            raise ValueError("inhibition_radius must be positive")


@dataclass(frozen=True)
class ModelConfig:
    """Architecture and diffusion-process constants.

    The denoiser is a small UNet operating directly in pixel space at
    ``resolution``x``resolution``; channel widths are
    ``base_channels * m`` for each entry ``m`` of ``channel_mults``.
    """

    resolution: int = 32
    in_channels: int = 3
    base_channels: int = 64
    channel_mults: tuple[int, ...] = (1, 2, 4)
    temb_dim: int = 128
    token_dim: int = 64  # width of text / flow tokens fed to cross-attention
    attn_heads: int = 2
    vocab_size: int = 64
    caption_len: int = 7
    flow_tokens: int = 8  # M: tokens produced by the flow encoder
    k_fixations: int = 6  # K: scanpath length consumed/produced everywhere
    cond_channels: int = 10  # wireframe condition map channels
    timesteps: int = 1000
    beta_min: float = 1e-4
    beta_max: float = 0.02

    def validate(self) -> None:
        if self.resolution % (2 ** (len(self.channel_mults) - 1)) != 0:
            raise ValueError("resolution must be divisible by the UNet downsampling factor")
        if self.timesteps < 1:
            raise ValueError("timesteps must be >= 1")
        if not (0 < self.beta_min < self.beta_max < 1):
            raise ValueError("betas must satisfy 0 < beta_min < beta_max < 1")


@dataclass(frozen=True)
class TrainConfig:
    """One training stage.

    Stages: 0 trains the text-conditional backbone from scratch; 1 trains the
    wireframe adapter (backbone frozen); 2 trains the flow adapter (backbone
    frozen); 3 finetunes both adapters jointly (backbone frozen).
    """

    stage: int = 0
    steps: int = 2000
    batch_size: int = 16
    lr: float = 1e-4
    weight_decay: float = 0.01
    cond_dropout_p: float = 0.5
    flow_loss_weight: float = 1.0
    sdtw_gamma: float = 0.1
    grad_clip: float = 1.0
    warmup_steps: int = 100  # linear lr ramp; stabilizes zero-init projections
    seed: int = 0
    log_every: int = 50
    deterministic: bool = False  # pin torch to one thread for bit-stable runs

    def validate(self) -> None:
        if self.stage not in (0, 1, 2, 3):
            raise ValueError("stage must be one of 0,1,2,3")
        if self.lr <= 0:
            raise ValueError("lr must be positive")
        if self.steps < 1 or self.batch_size < 1:
            raise ValueError("steps and batch_size must be positive")
        if not 0.0 <= self.cond_dropout_p <= 1.0:
            raise ValueError("cond_dropout_p must be in [0,1]")
        if self.sdtw_gamma <= 0:
            raise ValueError("sdtw_gamma must be positive")
        if self.warmup_steps < 0:
            raise ValueError("warmup_steps must be non-negative")


def config_to_dict(cfg) -> dict:
    d = dataclasses.asdict(cfg)
    # tuples -> lists so the mapping survives a JSON round trip unchanged
    return json.loads(canonical_json(d))


def canonical_json(obj) -> str:
    """Deterministic JSON: sorted keys, no whitespace variance."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def config_hash(cfg: ModelConfig) -> str:
    """sha256 over the canonical JSON form of a ModelConfig."""
    return hashlib.sha256(canonical_json(dataclasses.asdict(cfg)).encode()).hexdigest()


def model_config_from_dict(d: dict) -> ModelConfig:
    kwargs = dict(d)
    if "channel_mults" in kwargs:
        kwargs["channel_mults"] = tuple(kwargs["channel_mults"])
    return ModelConfig(**kwargs)
