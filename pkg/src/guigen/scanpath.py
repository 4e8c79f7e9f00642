"""Differentiable saliency and scanpath prediction.

A scanpath is an ordered list of K fixation points in normalized [0,1]^2
coordinates (x = column fraction, y = row fraction).  Prediction runs a
classic winner-take-all loop made differentiable: saliency -> soft-argmax ->
inhibition of return -> repeat.  Everything is a smooth function of the input
image, so the same code serves both as ground-truth generator for the dataset
and as the target of a differentiable alignment loss during training.
"""

from __future__ import annotations

import numpy as np
import torch
import torch.nn.functional as F

from .config import OracleConfig

DEFAULT_ORACLE = OracleConfig()

_grid_cache: dict[tuple, tuple[torch.Tensor, torch.Tensor]] = {}


def _coord_grids(h: int, w: int, device, dtype) -> tuple[torch.Tensor, torch.Tensor]:
    """(xs, ys) maps of pixel-center coordinates in [0,1], shape (h, w)."""
    key = (h, w, device, dtype)
    if key not in _grid_cache:
        xs = (torch.arange(w, device=device, dtype=dtype) + 0.5) / w
        ys = (torch.arange(h, device=device, dtype=dtype) + 0.5) / h
        _grid_cache[key] = (xs.expand(h, w).contiguous(), ys[:, None].expand(h, w).contiguous())
    return _grid_cache[key]


def _to_batched(image) -> tuple[torch.Tensor, bool]:
    """Accept (3,H,W) / (B,3,H,W) tensors or (H,W,3) / (B,H,W,3) arrays.

    Floating dtypes are preserved (float64 in -> float64 throughout) so that
    gradients checked against finite differences are not limited by a cast.
    """
    if isinstance(image, np.ndarray):
        arr = np.ascontiguousarray(image)
        if arr.dtype != np.float64:
            arr = arr.astype(np.float32)
        t = torch.from_numpy(arr)
        if t.ndim == 3:
            t = t.permute(2, 0, 1)
        elif t.ndim == 4:
            t = t.permute(0, 3, 1, 2)
    else:
        t = image
        if not torch.is_floating_point(t):
            t = t.float()
    if t.ndim == 3:
        return t[None], True
    if t.ndim == 4:
        return t, False
    raise ValueError("image must have 3 or 4 dimensions")


def saliency_map(image, cfg: OracleConfig = DEFAULT_ORACLE) -> torch.Tensor:
    """Normalized saliency, shape (H, W) or (B, H, W) matching the input."""
    img, squeeze = _to_batched(image)
    if not torch.isfinite(img).all():
        raise ValueError("image contains non-finite values")
    b, _, h, w = img.shape

    padded = F.pad(img, (1, 1, 1, 1), mode="replicate")
    blur = F.avg_pool2d(padded, kernel_size=3, stride=1)
    contrast = (img - blur).abs().mean(dim=1)

    gx = (padded[..., 1:-1, 2:] - padded[..., 1:-1, :-2]) * 0.5
    gy = (padded[..., 2:, 1:-1] - padded[..., :-2, 1:-1]) * 0.5
    edges = torch.sqrt(gx * gx + gy * gy + 1e-12).mean(dim=1)

    xs, ys = _coord_grids(h, w, img.device, img.dtype)
    center = torch.exp(-((xs - 0.5) ** 2 + (ys - 0.5) ** 2) / (2 * cfg.center_sigma**2))

    s = cfg.w_contrast * contrast + cfg.w_edge * edges + cfg.w_center * center
    s = s / s.sum(dim=(1, 2), keepdim=True)
    return s[0] if squeeze else s


def predict_scanpath(image, cfg: OracleConfig = DEFAULT_ORACLE) -> torch.Tensor:
    """Predicted fixation sequence, shape (K, 2) or (B, K, 2); columns (x, y).

    Each fixation is the soft-argmax (expected coordinate under
    ``softmax(s / tau)``) of the current saliency; after each fixation the
    saliency is multiplied by ``1 - exp(-d^2 / (2 r^2))`` to suppress returns.

    The temperature acts on the peak-normalized map (current saliency divided
    by its max): the mass-normalized map scales like 1/(H*W), so a fixed tau
    applied to it directly would flatten the softmax toward uniform as
    resolution grows, collapsing every fixation onto the grid centroid.
    """
    cfg.validate()
    img, squeeze = _to_batched(image)
    s = saliency_map(img, cfg)  # (B, H, W)
    b, h, w = s.shape
    xs, ys = _coord_grids(h, w, s.device, s.dtype)
    r2 = 2.0 * cfg.inhibition_radius**2

    points = []
    for _ in range(cfg.k_fixations):
        peak = s.amax(dim=(1, 2), keepdim=True).clamp_min(1e-12)
        weights = torch.softmax((s / peak).reshape(b, -1) / cfg.tau, dim=1).reshape(b, h, w)
        px = (weights * xs).sum(dim=(1, 2))
        py = (weights * ys).sum(dim=(1, 2))
        points.append(torch.stack((px, py), dim=-1))
        d2 = (xs - px[:, None, None]) ** 2 + (ys - py[:, None, None]) ** 2
        s = s * (1.0 - torch.exp(-d2 / r2))
    path = torch.stack(points, dim=1)
    return path[0] if squeeze else path


def predict_scanpath_np(image, cfg: OracleConfig = DEFAULT_ORACLE) -> np.ndarray:
    """Convenience wrapper returning a float64 (K, 2) array."""
    with torch.no_grad():
        return predict_scanpath(image, cfg).cpu().numpy().astype(np.float64)


def flow_from_order(wireframe, order, k: int = DEFAULT_ORACLE.k_fixations) -> np.ndarray:
    """Scanpath built from element bbox centers in the requested order.

    ``order`` must be distinct valid element indices, 1 <= len(order) <= k;
    the path is padded to length k by repeating the final point.
    """
    n = len(wireframe.elements)
    if not 1 <= len(order) <= k:
        raise ValueError(f"order length must be in [1, {k}]")
    if len(set(order)) != len(order):
        raise ValueError("order must not repeat element indices")
    for idx in order:
        if not isinstance(idx, (int, np.integer)) or not 0 <= idx < n:
            raise ValueError(f"element index {idx!r} out of range [0, {n})")
    pts = []
    for idx in order:
        x0, y0, x1, y1 = wireframe.elements[idx].bbox
        pts.append(((x0 + x1) / 2.0, (y0 + y1) / 2.0))
    while len(pts) < k:
        pts.append(pts[-1])
    return np.asarray(pts, dtype=np.float64)
