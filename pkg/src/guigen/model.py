"""Model composition: backbone + optional adapters + CFG/DDIM sampling.

``ConditionSet`` is the user-facing condition triple; any subset may be None.
Null conditions are still *represented* at the network boundary (null token
ids, all-zero condition map, learned null flow tokens) so classifier-free
guidance and condition dropout use one code path.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch

from .adapters import FlowAdapter, WireframeAdapter
from .config import ModelConfig, config_hash
from .diffusion import (
    NoiseSchedule,
    cfg_combine,
    ddim_step,
    make_schedule,
    sampling_timesteps,
)
from .unet import Denoiser, TextEncoder

NULL_TOKEN_ID = 0  # vocabulary slot reserved for the dropped-text embedding


@dataclass
class ConditionSet:
    """Optional conditioning triple; all fields are host-side numpy values."""

    text: np.ndarray | None = None  # (L,) int64 token ids
    wireframe: np.ndarray | None = None  # (R, R, 10) float32 condition map
    flow: np.ndarray | None = None  # (K, 2) float32 fixation points

    @classmethod
    def null(cls) -> "ConditionSet":
        return cls()

    def replace(self, **kw) -> "ConditionSet":
        d = {"text": self.text, "wireframe": self.wireframe, "flow": self.flow}
        d.update(kw)
        return ConditionSet(**d)


@dataclass
class ConditionBatch:
    text_ids: torch.Tensor  # (B, L) int64
    cmap: torch.Tensor  # (B, 10, R, R) float32
    flow_points: torch.Tensor  # (B, K, 2) float32
    flow_present: torch.Tensor  # (B,) bool

    def __len__(self) -> int:
        return self.text_ids.shape[0]


class GuiGenModel:
    """Denoising backbone plus optional control adapters, with sampling."""

    def __init__(
        self,
        cfg: ModelConfig,
        denoiser: Denoiser,
        text_encoder: TextEncoder,
        wireframe_adapter: WireframeAdapter | None = None,
        flow_adapter: FlowAdapter | None = None,
    ):
        cfg.validate()
        self.cfg = cfg
        self.denoiser = denoiser
        self.text_encoder = text_encoder
        self.wireframe_adapter = wireframe_adapter
        self.flow_adapter = flow_adapter
        self.schedule: NoiseSchedule = make_schedule(cfg.timesteps, cfg.beta_min, cfg.beta_max)

    # -- construction -------------------------------------------------------

    @classmethod
    def build(
        cls,
        cfg: ModelConfig,
        seed: int = 0,
        with_wireframe_adapter: bool = False,
        with_flow_adapter: bool = False,
    ) -> "GuiGenModel":
        torch.manual_seed(seed)
        denoiser = Denoiser(cfg)
        text_encoder = TextEncoder(cfg.vocab_size, cfg.caption_len, cfg.token_dim, cfg.attn_heads)
        model = cls(cfg, denoiser, text_encoder)
        if with_wireframe_adapter:
            model.attach_wireframe_adapter(seed=seed + 1)
        if with_flow_adapter:
            model.attach_flow_adapter(seed=seed + 2)
        return model

    def attach_wireframe_adapter(self, seed: int = 1) -> WireframeAdapter:
        torch.manual_seed(seed)
        adapter = WireframeAdapter(self.cfg)
        adapter.copy_backbone(self.denoiser)
        self.wireframe_adapter = adapter
        return adapter

    def attach_flow_adapter(self, seed: int = 2) -> FlowAdapter:
        torch.manual_seed(seed)
        self.flow_adapter = FlowAdapter(self.cfg)
        return self.flow_adapter

    # -- bookkeeping ---------------------------------------------------------

    @property
    def config_hash(self) -> str:
        return config_hash(self.cfg)

    def components(self) -> dict[str, torch.nn.Module]:
        comps = {"backbone.denoiser": self.denoiser, "backbone.text": self.text_encoder}
        if self.wireframe_adapter is not None:
            comps["adapter.wireframe"] = self.wireframe_adapter
        if self.flow_adapter is not None:
            comps["adapter.flow"] = self.flow_adapter
        return comps

    def modules(self):
        return list(self.components().values())

    def eval_mode(self) -> "GuiGenModel":
        for m in self.modules():
            m.eval()
        return self

    # -- condition handling --------------------------------------------------

    def encode_batch(self, conds: list[ConditionSet]) -> ConditionBatch:
        cfg = self.cfg
        r, k, length = cfg.resolution, cfg.k_fixations, cfg.caption_len
        text_rows, cmap_rows, flow_rows, flow_present = [], [], [], []
        for c in conds:
            if c.text is not None:
                ids = np.asarray(c.text, dtype=np.int64)
                if ids.shape != (length,):
                    raise ValueError(f"text tokens must have shape ({length},)")
                if ids.min() < 0 or ids.max() >= cfg.vocab_size:
                    raise ValueError("text token id outside vocabulary")
                text_rows.append(ids)
            else:
                text_rows.append(np.full(length, NULL_TOKEN_ID, dtype=np.int64))
            if c.wireframe is not None:
                cm = np.asarray(c.wireframe, dtype=np.float32)
                if cm.shape != (r, r, cfg.cond_channels):
                    raise ValueError(f"wireframe map must be ({r},{r},{cfg.cond_channels})")
                cmap_rows.append(np.moveaxis(cm, -1, 0))
            else:
                cmap_rows.append(np.zeros((cfg.cond_channels, r, r), dtype=np.float32))
            if c.flow is not None:
                fl = np.asarray(c.flow, dtype=np.float32)
                if fl.shape != (k, 2):
                    raise ValueError(f"flow must have shape ({k}, 2)")
                flow_rows.append(fl)
                flow_present.append(True)
            else:
                flow_rows.append(np.zeros((k, 2), dtype=np.float32))
                flow_present.append(False)
        # np.stack of moveaxis views keeps channels-last strides; force standard
        # NCHW layout because the CPU group-norm backward kernel for
        # channels-last inputs segfaults in this torch build.
        return ConditionBatch(
            text_ids=torch.from_numpy(np.stack(text_rows)),
            cmap=torch.from_numpy(np.ascontiguousarray(np.stack(cmap_rows))),
            flow_points=torch.from_numpy(np.stack(flow_rows)),
            flow_present=torch.tensor(flow_present, dtype=torch.bool),
        )

    # -- prediction ----------------------------------------------------------

    def predict_eps(self, z: torch.Tensor, t: torch.Tensor, cond: ConditionBatch) -> torch.Tensor:
        tokens = self.text_encoder(cond.text_ids)
        control = None
        if self.wireframe_adapter is not None:
            control = self.wireframe_adapter(z, t, cond.cmap, tokens)
        hook = None
        if self.flow_adapter is not None:
            flow_tokens = self.flow_adapter.tokens(cond.flow_points, cond.flow_present)
            hook = self.flow_adapter.feature_hook(flow_tokens)
        return self.denoiser(z, t, tokens, control=control, feature_hook=hook)

    # -- sampling -------------------------------------------------------------

    def sample(
        self, cond: ConditionSet, steps: int = 50, guidance: float = 4.0, seed: int = 0
    ) -> np.ndarray:
        """One image for one condition set; deterministic in all arguments."""
        return self.sample_batch([cond], [seed], steps=steps, guidance=guidance)[0]

    def sample_batch(
        self,
        conds: list[ConditionSet],
        seeds: list[int],
        steps: int = 50,
        guidance: float = 4.0,
    ) -> np.ndarray:
        """(B, R, R, 3) float32 in [-1, 1]; noise is drawn per-image from its seed."""
        if len(conds) != len(seeds):
            raise ValueError("conds and seeds must have equal length")
        cfg = self.cfg
        ts = sampling_timesteps(cfg.timesteps, steps)
        cond_b = self.encode_batch(conds)
        null_b = self.encode_batch([ConditionSet.null()] * len(conds))

        noise = []
        for s in seeds:
            g = torch.Generator().manual_seed(int(s))
            noise.append(
                torch.randn(cfg.in_channels, cfg.resolution, cfg.resolution, generator=g)
            )
        z = torch.stack(noise)

        with torch.no_grad():
            for i, t in enumerate(ts):
                t_vec = torch.full((z.shape[0],), t, dtype=torch.long)
                eps_c = self.predict_eps(z, t_vec, cond_b)
                eps_u = self.predict_eps(z, t_vec, null_b)
                eps = cfg_combine(eps_u, eps_c, guidance)
                t_prev = ts[i + 1] if i + 1 < len(ts) else 0
                z = ddim_step(z, eps, t, t_prev, self.schedule)
        out = z.clamp(-1.0, 1.0) + 0.0  # + 0.0 canonicalizes any -0.0 bit patterns
        return out.permute(0, 2, 3, 1).contiguous().numpy()
