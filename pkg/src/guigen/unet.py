"""Denoiser network: a small pixel-space UNet with per-level cross-attention.

Layout (base 64, multipliers 1/2/4 at 32x32):

    stem -> enc0 @32(64) -> down -> enc1 @16(128) -> down -> enc2 @8(256)
         -> middle @8(256)
         -> dec2 @8(256) -> up -> dec1 @16(128) -> up -> dec0 @32(64) -> head

Each level holds one residual conv block plus one cross-attention reading
condition tokens.  Decoder levels concatenate the matching encoder skip and
fuse with a 1x1 conv.  Two extension points keep control pathways out of this
file: ``control`` adds residual tensors onto the skips/middle, and
``feature_hook(site, h)`` lets an adapter rewrite features after each
cross-attention site ("enc0", "enc1", "enc2", "mid", "dec2", "dec1", "dec0").
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import torch
from torch import nn

from .config import ModelConfig

ATTENTION_SITES = ("enc0", "enc1", "enc2", "mid", "dec2", "dec1", "dec0")


def timestep_embedding(t: torch.Tensor, dim: int) -> torch.Tensor:
    """Sinusoidal embedding of integer timesteps, shape (B, dim)."""
    half = dim // 2
    freqs = torch.exp(
        -math.log(10000.0) * torch.arange(half, dtype=torch.float32, device=t.device) / half
    )
    args = t.float()[:, None] * freqs[None, :]
    return torch.cat([torch.sin(args), torch.cos(args)], dim=-1)


class ResidualBlock(nn.Module):
    def __init__(self, cin: int, cout: int, temb_dim: int):
        super().__init__()
        self.norm = nn.GroupNorm(8, cin)
        self.conv = nn.Conv2d(cin, cout, 3, padding=1)
        self.temb_proj = nn.Linear(temb_dim, cout)
        self.skip = nn.Conv2d(cin, cout, 1) if cin != cout else nn.Identity()

    def forward(self, x: torch.Tensor, temb: torch.Tensor) -> torch.Tensor:
        h = self.conv(torch.nn.functional.silu(self.norm(x)))
        h = h + self.temb_proj(torch.nn.functional.silu(temb))[:, :, None, None]
        return h + self.skip(x)


class CrossAttention(nn.Module):
    """Multi-head attention from spatial features onto condition tokens.

    Returns the residual delta; callers add it (``x + delta``).
    """

    def __init__(self, channels: int, token_dim: int, heads: int = 2):
        super().__init__()
        if channels % heads != 0:
            raise ValueError("channels must divide evenly into heads")
        self.heads = heads
        self.norm = nn.GroupNorm(8, channels)
        self.q = nn.Linear(channels, channels)
        self.k = nn.Linear(token_dim, channels)
        self.v = nn.Linear(token_dim, channels)
        self.proj = nn.Linear(channels, channels)

    def forward(
        self, x: torch.Tensor, tokens: torch.Tensor, need_weights: bool = False
    ):
        b, c, h, w = x.shape
        if tokens.ndim != 3 or tokens.shape[0] != b:
            raise ValueError("tokens must be (B, n_tokens, token_dim)")
        dh = c // self.heads
        q = self.q(self.norm(x).flatten(2).transpose(1, 2))  # (B, HW, C)
        k, v = self.k(tokens), self.v(tokens)  # (B, n, C)

        def split(z):
            return z.reshape(b, -1, self.heads, dh).transpose(1, 2)  # (B, H, L, dh)

        attn = torch.softmax(split(q) @ split(k).transpose(-1, -2) / math.sqrt(dh), dim=-1)
        out = (attn @ split(v)).transpose(1, 2).reshape(b, h * w, c)
        out = self.proj(out).transpose(1, 2).reshape(b, c, h, w)
        return (out, attn) if need_weights else (out, None)


class TextEncoder(nn.Module):
    """Embedding table + 2 self-attention blocks over the closed vocabulary."""

    def __init__(self, vocab_size: int, seq_len: int, dim: int, heads: int = 2):
        super().__init__()
        self.embed = nn.Embedding(vocab_size, dim)
        self.pos = nn.Parameter(torch.zeros(seq_len, dim))
        self.blocks = nn.ModuleList()
        for _ in range(2):
            self.blocks.append(
                nn.ModuleDict(
                    {
                        "norm1": nn.LayerNorm(dim),
                        "attn": nn.MultiheadAttention(dim, heads, batch_first=True),
                        "norm2": nn.LayerNorm(dim),
                        "mlp": nn.Sequential(
                            nn.Linear(dim, 2 * dim), nn.SiLU(), nn.Linear(2 * dim, dim)
                        ),
                    }
                )
            )
        self.norm_out = nn.LayerNorm(dim)

    def forward(self, token_ids: torch.Tensor) -> torch.Tensor:
        h = self.embed(token_ids) + self.pos[None, : token_ids.shape[1]]
        for blk in self.blocks:
            n = blk["norm1"](h)
            h = h + blk["attn"](n, n, n, need_weights=False)[0]
            h = h + blk["mlp"](blk["norm2"](h))
        return self.norm_out(h)


@dataclass
class ControlResiduals:
    """Additive features produced by a control adapter."""

    skips: list[torch.Tensor]  # one per encoder level, matching skip shapes
    middle: torch.Tensor


class Denoiser(nn.Module):
    """Noise-prediction UNet; see module docstring for the level plan."""

    def __init__(self, cfg: ModelConfig):
        super().__init__()
        cfg.validate()
        self.cfg = cfg
        chans = [cfg.base_channels * m for m in cfg.channel_mults]
        self.level_channels = chans
        td = cfg.temb_dim

        self.temb_mlp = nn.Sequential(nn.Linear(td, td), nn.SiLU(), nn.Linear(td, td))
        self.stem = nn.Conv2d(cfg.in_channels, chans[0], 3, padding=1)

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

        self.dec_fuse = nn.ModuleList()
        self.dec_blocks = nn.ModuleList()
        self.dec_attns = nn.ModuleList()
        self.ups = nn.ModuleList()
        prev = mid
        for i in reversed(range(len(chans))):
            ch = chans[i]
            self.dec_fuse.append(nn.Conv2d(prev + ch, ch, 1))
            self.dec_blocks.append(ResidualBlock(ch, ch, td))
            self.dec_attns.append(CrossAttention(ch, cfg.token_dim, cfg.attn_heads))
            if i > 0:
                self.ups.append(nn.Conv2d(ch, chans[i - 1], 3, padding=1))
            prev = chans[i - 1] if i > 0 else ch

        self.head = nn.Sequential(
            nn.GroupNorm(8, chans[0]),
            nn.SiLU(),
            nn.Conv2d(chans[0], cfg.in_channels, 3, padding=1),
        )

    def time_embedding(self, t: torch.Tensor) -> torch.Tensor:
        return self.temb_mlp(timestep_embedding(t, self.cfg.temb_dim))

    def encode(self, z: torch.Tensor, temb: torch.Tensor, tokens: torch.Tensor,
               feature_hook=None):
        """Shared encoder pass; returns (skips, middle feature)."""
        h = self.stem(z)
        skips = []
        for i, (block, attn) in enumerate(zip(self.enc_blocks, self.enc_attns)):
            h = block(h, temb)
            h = h + attn(h, tokens)[0]
            if feature_hook is not None:
                h = feature_hook(f"enc{i}", h)
            skips.append(h)
            if i < len(self.downs):
                h = self.downs[i](h)
        h = self.mid_block1(h, temb)
        h = h + self.mid_attn(h, tokens)[0]
        if feature_hook is not None:
            h = feature_hook("mid", h)
        h = self.mid_block2(h, temb)
        return skips, h

    def forward(
        self,
        z: torch.Tensor,
        t: torch.Tensor,
        tokens: torch.Tensor,
        control: ControlResiduals | None = None,
        feature_hook=None,
    ) -> torch.Tensor:
        if z.ndim != 4 or z.shape[1] != self.cfg.in_channels:
            raise ValueError(f"expected (B, {self.cfg.in_channels}, H, W) input")
        if t.ndim == 0:
            t = t[None].expand(z.shape[0])
        temb = self.time_embedding(t)

        skips, h = self.encode(z, temb, tokens, feature_hook=feature_hook)
        if control is not None:
            if len(control.skips) != len(skips):
                raise ValueError("control residual count mismatch")
            skips = [s + r for s, r in zip(skips, control.skips)]
            h = h + control.middle

        n_levels = len(self.level_channels)
        for d, level in enumerate(reversed(range(n_levels))):
            h = self.dec_fuse[d](torch.cat([h, skips[level]], dim=1))
            h = self.dec_blocks[d](h, temb)
            h = h + self.dec_attns[d](h, tokens)[0]
            if feature_hook is not None:
                h = feature_hook(f"dec{level}", h)
            if level > 0:
                h = self.ups[d](h)
                h = torch.nn.functional.interpolate(h, scale_factor=2, mode="nearest")
        return self.head(h)

    def param_count(self) -> int:
        return sum(p.numel() for p in self.parameters())
