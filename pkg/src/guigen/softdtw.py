"""Soft dynamic time warping over 2-D point sequences.

Cost between points is squared Euclidean distance.  The soft variant replaces
the min in the classic DTW recursion with ``softmin_gamma(a) = -gamma *
log(sum(exp(-a/gamma)))``, which makes the alignment cost differentiable in
both sequences.  ``gamma -> 0`` recovers hard DTW exactly.

Two implementations live here:

* a float64 NumPy path (``sdtw`` / ``sdtw_grad``) with an analytic gradient
  computed by the reverse-mode recursion over alignment-weight matrices, and
* a batched PyTorch path (``soft_dtw_batch``) whose gradient comes from
  autograd, used inside training losses.
"""

from __future__ import annotations

import numpy as np
import torch

_BIG = 1e30  # finite stand-in for +inf inside torch graphs (exp(-_BIG/g) == 0.0)


def _as_points(seq, name: str) -> np.ndarray:
    arr = np.asarray(seq, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] == 0 or arr.shape[1] == 0:
        raise ValueError(f"{name} must be a non-empty (length, dim) array")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def pairwise_sq_dists(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """(n, m) matrix of squared Euclidean distances."""
    diff = x[:, None, :] - y[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)


def _softmin3(a: float, b: float, c: float, gamma: float) -> float:
    if gamma == 0.0:
        return min(a, b, c)
    vals = np.array([a, b, c])
    m = vals.min()
    if not np.isfinite(m):
        return m
    return float(m - gamma * np.log(np.exp(-(vals - m) / gamma).sum()))


def _r_matrix(cost: np.ndarray, gamma: float) -> np.ndarray:
    """Accumulated-cost matrix R, padded: R[i, j] aligns x[:i] with y[:j]."""
    n, m = cost.shape
    r = np.full((n + 1, m + 1), np.inf)
    r[0, 0] = 0.0
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            r[i, j] = cost[i - 1, j - 1] + _softmin3(
                r[i - 1, j], r[i, j - 1], r[i - 1, j - 1], gamma
            )
    return r


def sdtw(x, y, gamma: float) -> float:
    """Soft-DTW alignment cost.  ``gamma == 0`` gives classic (hard) DTW."""
    x = _as_points(x, "x")
    y = _as_points(y, "y")
    if x.shape[1] != y.shape[1]:
        raise ValueError("x and y must share the feature dimension")
    if gamma < 0:
        raise ValueError("gamma must be >= 0")
    return float(_r_matrix(pairwise_sq_dists(x, y), gamma)[-1, -1])


def dtw(x, y) -> float:
    """Classic DTW cost (the gamma -> 0 limit of ``sdtw``)."""
    return sdtw(x, y, 0.0)


def sdtw_normalized(x, y, gamma: float) -> float:
    """``sdtw`` divided by the summed sequence lengths, for cross-length comparison."""
    x = _as_points(x, "x")
    y = _as_points(y, "y")
    return sdtw(x, y, gamma) / (x.shape[0] + y.shape[0])


def sdtw_grad(x, y, gamma: float) -> np.ndarray:
    """Analytic gradient of ``sdtw(x, y, gamma)`` with respect to ``x``.

    Uses the reverse recursion over expected-alignment weights: E[i, j] is the
    sensitivity of the total cost to cost[i, j], accumulated bottom-right to
    top-left.  Requires ``gamma > 0`` (the soft cost is not differentiable at
    gamma == 0 where ties occur).
    """
    x = _as_points(x, "x")
    y = _as_points(y, "y")
    if x.shape[1] != y.shape[1]:
        raise ValueError("x and y must share the feature dimension")
    if gamma <= 0:
        raise ValueError("gamma must be > 0 for gradients")

    n, m = x.shape[0], y.shape[0]
    cost = pairwise_sq_dists(x, y)

    # Padded (n+2, m+2) layout so the reverse sweep has uniform neighbours.
    d = np.zeros((n + 2, m + 2))
    d[1 : n + 1, 1 : m + 1] = cost

    r = np.full((n + 2, m + 2), -np.inf)
    r[: n + 1, : m + 1] = _r_matrix(cost, gamma)
    r[n + 1, m + 1] = r[n, m]

    e = np.zeros((n + 2, m + 2))
    e[n + 1, m + 1] = 1.0
    for j in range(m, 0, -1):
        for i in range(n, 0, -1):
            a = np.exp((r[i + 1, j] - r[i, j] - d[i + 1, j]) / gamma)
            b = np.exp((r[i, j + 1] - r[i, j] - d[i, j + 1]) / gamma)
            c = np.exp((r[i + 1, j + 1] - r[i, j] - d[i + 1, j + 1]) / gamma)
            e[i, j] = a * e[i + 1, j] + b * e[i, j + 1] + c * e[i + 1, j + 1]

    align = e[1 : n + 1, 1 : m + 1]  # d(sdtw)/d(cost[i, j])
    # cost[i, j] = ||x_i - y_j||^2  =>  d(cost)/d(x_i) = 2 (x_i - y_j)
    return 2.0 * (align.sum(axis=1)[:, None] * x - align @ y)


def soft_dtw_batch(x: torch.Tensor, y: torch.Tensor, gamma: float) -> torch.Tensor:
    """Batched differentiable soft-DTW: (B, n, d) x (B, m, d) -> (B,)."""
    if x.ndim != 3 or y.ndim != 3:
        raise ValueError("expected (B, length, dim) tensors")
    if x.shape[0] != y.shape[0] or x.shape[2] != y.shape[2]:
        raise ValueError("batch and feature dims must match")
    if gamma <= 0:
        raise ValueError("gamma must be > 0")
    bsz, n, _ = x.shape
    m = y.shape[1]
    cost = ((x[:, :, None, :] - y[:, None, :, :]) ** 2).sum(-1)  # (B, n, m)

    prev = cost.new_full((bsz, m + 1), _BIG)
    prev[:, 0] = 0.0
    for i in range(1, n + 1):
        cur = [cost.new_full((bsz,), _BIG)]
        for j in range(1, m + 1):
            cands = torch.stack((prev[:, j], cur[j - 1], prev[:, j - 1]), dim=-1)
            mn = cands.min(dim=-1, keepdim=True).values
            soft = mn[:, 0] - gamma * torch.log(torch.exp(-(cands - mn) / gamma).sum(-1))
            cur.append(cost[:, i - 1, j - 1] + soft)
        prev = torch.stack(cur, dim=1)
    return prev[:, m]


def soft_dtw_batch_normalized(x: torch.Tensor, y: torch.Tensor, gamma: float) -> torch.Tensor:
    """``soft_dtw_batch`` scaled by 1 / (n + m)."""
    return soft_dtw_batch(x, y, gamma) / (x.shape[1] + y.shape[1])
