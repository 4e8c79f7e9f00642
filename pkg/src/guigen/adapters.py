"""Control pathways: wireframe residual adapter and flow cross-attention.

Both adapters share the safe-start property: at initialization their effect on
the denoiser output is exactly zero (zero-weight 1x1 projections on the
wireframe path, zero-weight attention output projections on the flow path), so
attaching fresh adapters never changes what a trained backbone generates.
"""

from __future__ import annotations

import torch
from torch import nn

from .config import ModelConfig
from .unet import (
    ATTENTION_SITES,
    ControlResiduals,
    CrossAttention,
    Denoiser,
    ResidualBlock,
    timestep_embedding,
)


def _zero_conv(channels: int) -> nn.Conv2d:
    conv = nn.Conv2d(channels, channels, 1)
    nn.init.zeros_(conv.weight)
    nn.init.zeros_(conv.bias)
    return conv


class WireframeAdapter(nn.Module):
    """Trainable copy of the denoiser's encoder + middle block.

    Consumes the 10-channel condition raster through a small hint head added
    to the stem features, and emits per-level residuals (via zero-initialized
    1x1 projections) that the frozen decoder adds to its skip inputs.
    """

    def __init__(self, cfg: ModelConfig):
        super().__init__()
        self.cfg = cfg
        chans = [cfg.base_channels * m for m in cfg.channel_mults]
        td = cfg.temb_dim

        self.temb_mlp = nn.Sequential(nn.Linear(td, td), nn.SiLU(), nn.Linear(td, td))
        self.stem = nn.Conv2d(cfg.in_channels, chans[0], 3, padding=1)
        self.hint = nn.Sequential(
            nn.Conv2d(cfg.cond_channels, 16, 3, padding=1),
            nn.SiLU(),
            nn.Conv2d(16, 32, 3, padding=1),
            nn.SiLU(),
            nn.Conv2d(32, chans[0], 3, padding=1),
        )

        self.enc_blocks = nn.ModuleList()
        self.enc_attns = nn.ModuleList()
        self.downs = nn.ModuleList()
        prev = chans[0]
        for i, ch in enumerate(chans):
            self.enc_blocks.append(ResidualBlock(prev, ch, td))
            self.enc_attns.append(CrossAttention(ch, cfg.token_dim, cfg.attn_heads))
            if i < len(chans) - 1:
                self.downs.append(nn.Conv2d(ch, ch, 3, stride=2, padding=1))
            prev = ch
        mid = chans[-1]
        self.mid_block1 = ResidualBlock(mid, mid, td)
        self.mid_attn = CrossAttention(mid, cfg.token_dim, cfg.attn_heads)
        self.mid_block2 = ResidualBlock(mid, mid, td)

        self.zero_skips = nn.ModuleList([_zero_conv(ch) for ch in chans])
        self.zero_mid = _zero_conv(mid)

    def copy_backbone(self, backbone: Denoiser) -> None:
        """Initialize the shared-structure submodules from backbone weights."""
        pairs = [
            (self.temb_mlp, backbone.temb_mlp),
            (self.stem, backbone.stem),
            (self.enc_blocks, backbone.enc_blocks),
            (self.enc_attns, backbone.enc_attns),
            (self.downs, backbone.downs),
            (self.mid_block1, backbone.mid_block1),
            (self.mid_attn, backbone.mid_attn),
            (self.mid_block2, backbone.mid_block2),
        ]
        with torch.no_grad():
            for mine, theirs in pairs:
                mine.load_state_dict(theirs.state_dict())

    def forward(
        self, z: torch.Tensor, t: torch.Tensor, cmap: torch.Tensor, tokens: torch.Tensor
    ) -> ControlResiduals:
        if cmap.shape[1] != self.cfg.cond_channels or cmap.shape[2:] != z.shape[2:]:
            raise ValueError(
                f"condition map must be (B, {self.cfg.cond_channels}, "
                f"{z.shape[2]}, {z.shape[3]}), got {tuple(cmap.shape)}"
            )
        if t.ndim == 0:
            t = t[None].expand(z.shape[0])
        temb = self.temb_mlp(timestep_embedding(t, self.cfg.temb_dim))

        h = self.stem(z) + self.hint(cmap)
        residuals = []
        for i, (block, attn) in enumerate(zip(self.enc_blocks, self.enc_attns)):
            h = block(h, temb)
            h = h + attn(h, tokens)[0]
            residuals.append(self.zero_skips[i](h))
            if i < len(self.downs):
                h = self.downs[i](h)
        h = self.mid_block1(h, temb)
        h = h + self.mid_attn(h, tokens)[0]
        h = self.mid_block2(h, temb)
        return ControlResiduals(skips=residuals, middle=self.zero_mid(h))


class _SelfAttnBlock(nn.Module):
    def __init__(self, dim: int, heads: int):
        super().__init__()
        self.norm1 = nn.LayerNorm(dim)
        self.attn = nn.MultiheadAttention(dim, heads, batch_first=True)
        self.norm2 = nn.LayerNorm(dim)
        self.mlp = nn.Sequential(nn.Linear(dim, 2 * dim), nn.SiLU(), nn.Linear(2 * dim, dim))

    def forward(self, h: torch.Tensor) -> torch.Tensor:
        n = self.norm1(h)
        h = h + self.attn(n, n, n, need_weights=False)[0]
        return h + self.mlp(self.norm2(h))


def flow_crossattend(
    features: torch.Tensor,
    flow_tokens: torch.Tensor,
    attn: CrossAttention,
) -> torch.Tensor:
    """features + CrossAttn(q=features, kv=flow_tokens); zero out-proj = identity."""
    return features + attn(features, flow_tokens)[0]


class FlowAdapter(nn.Module):
    """Order-sensitive flow-token encoder plus cross-attention per site.

    K fixation points are projected, tagged with positional index embeddings,
    self-attended, and mixed into M condition tokens.  Each attention site of
    the denoiser gets its own CrossAttention whose output projection starts at
    zero (one gradient path per channel, unlike a scalar gate), applied through
    the denoiser's feature hook.
    """

    def __init__(self, cfg: ModelConfig):
        super().__init__()
        self.cfg = cfg
        d = cfg.token_dim
        self.point_proj = nn.Linear(2, d)
        self.pos = nn.Parameter(torch.randn(cfg.k_fixations, d) * 0.02)
        self.blocks = nn.ModuleList([_SelfAttnBlock(d, cfg.attn_heads) for _ in range(2)])
        self.mix = nn.Linear(cfg.k_fixations, cfg.flow_tokens)
        self.null_tokens = nn.Parameter(torch.randn(cfg.flow_tokens, d) * 0.02)

        chans = [cfg.base_channels * m for m in cfg.channel_mults]
        site_ch = dict(zip(ATTENTION_SITES, [*chans, chans[-1], *reversed(chans)]))
        self.attns = nn.ModuleDict(
            {site: CrossAttention(ch, d, cfg.attn_heads) for site, ch in site_ch.items()}
        )
        for attn in self.attns.values():
            nn.init.zeros_(attn.proj.weight)
            nn.init.zeros_(attn.proj.bias)

    def encode(self, points: torch.Tensor) -> torch.Tensor:
        """(B, K, 2) fixation points -> (B, M, d) condition tokens."""
        if points.ndim != 3 or points.shape[1:] != (self.cfg.k_fixations, 2):
            raise ValueError(f"expected (B, {self.cfg.k_fixations}, 2) points")
        h = self.point_proj(points) + self.pos[None]
        for blk in self.blocks:
            h = blk(h)
        return self.mix(h.transpose(1, 2)).transpose(1, 2)

    def tokens(self, points: torch.Tensor, present: torch.Tensor) -> torch.Tensor:
        """Encoded tokens where present, learned null tokens elsewhere."""
        enc = self.encode(points)
        null = self.null_tokens[None].expand_as(enc)
        return torch.where(present[:, None, None], enc, null)

    def feature_hook(self, flow_tokens: torch.Tensor):
        """Closure handed to Denoiser.forward; applies the site attention."""

        def hook(site: str, h: torch.Tensor) -> torch.Tensor:
            return flow_crossattend(h, flow_tokens, self.attns[site])

        return hook
