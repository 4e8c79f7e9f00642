"""Noise schedule and the closed-form diffusion algebra.

Forward process: z_t = sqrt(abar_t) z0 + sqrt(1 - abar_t) eps.
Deterministic (eta = 0) reverse step:
    x0_hat  = (z_t - sqrt(1 - abar_t) eps_hat) / sqrt(abar_t)
    z_prev  = sqrt(abar_prev) x0_hat + sqrt(1 - abar_prev) eps_hat

``alphabars`` is indexed by t in 0..T with the t = 0 sentinel equal to 1
(no noise), so t_prev = 0 returns x0_hat exactly.  Accumulation happens in
float64; tensor arithmetic stays in the input dtype.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch


@dataclass(frozen=True)
class NoiseSchedule:
    timesteps: int
    beta_min: float
    beta_max: float
    betas: np.ndarray  # (T,) float64, betas[i] is beta_{i+1}
    alphabars: np.ndarray  # (T+1,) float64, alphabars[t] for t in 0..T

    def alphabar(self, t) -> np.ndarray:
        """abar_t for integer t (scalar or array) in [0, T]."""
        t_arr = np.asarray(t)
        if np.any(t_arr < 0) or np.any(t_arr > self.timesteps):
            raise ValueError(f"t out of range [0, {self.timesteps}]")
        return self.alphabars[t_arr]


def make_schedule(timesteps: int, beta_min: float, beta_max: float) -> NoiseSchedule:
    if timesteps < 2:
        raise ValueError("timesteps must be >= 2")
    if not (0.0 < beta_min < beta_max < 1.0):
        raise ValueError("need 0 < beta_min < beta_max < 1")
    betas = np.linspace(beta_min, beta_max, timesteps, dtype=np.float64)
    alphabars = np.concatenate(([1.0], np.cumprod(1.0 - betas)))
    return NoiseSchedule(timesteps, beta_min, beta_max, betas, alphabars)


def _coeffs(schedule: NoiseSchedule, t, like):
    """(sqrt(abar_t), sqrt(1-abar_t)) broadcast against ``like``."""
    ab = schedule.alphabar(t)
    ca, cb = np.sqrt(ab), np.sqrt(1.0 - ab)
    if isinstance(like, torch.Tensor):
        ca = torch.as_tensor(ca, dtype=like.dtype, device=like.device)
        cb = torch.as_tensor(cb, dtype=like.dtype, device=like.device)
        if ca.ndim > 0:  # per-sample t: broadcast over trailing dims
            shape = (-1,) + (1,) * (like.ndim - 1)
            ca, cb = ca.reshape(shape), cb.reshape(shape)
    return ca, cb


def _check_t_in_train_range(schedule: NoiseSchedule, t) -> None:
    t_arr = np.asarray(t)
    if np.any(t_arr < 1) or np.any(t_arr > schedule.timesteps):
        raise ValueError(f"t must be in [1, {schedule.timesteps}]")


def add_noise(z0, t, eps, schedule: NoiseSchedule):
    """Forward-process sample z_t; t may be a scalar or per-sample vector."""
    _check_t_in_train_range(schedule, t)
    ca, cb = _coeffs(schedule, t, z0)
    return ca * z0 + cb * eps


def x0_estimate(z_t, eps_hat, t, schedule: NoiseSchedule):
    """One-step denoised estimate x0_hat from a noise prediction."""
    _check_t_in_train_range(schedule, t)
    ca, cb = _coeffs(schedule, t, z_t)
    return (z_t - cb * eps_hat) / ca


def ddim_step(z_t, eps_hat, t, t_prev, schedule: NoiseSchedule):
    """One deterministic reverse step from t to t_prev (t_prev = 0 -> x0_hat).

    ``t`` and ``t_prev`` may be scalars or per-sample vectors.
    """
    t_arr, tp_arr = np.asarray(t), np.asarray(t_prev)
    if np.any(tp_arr >= t_arr):
        raise ValueError("t_prev must be < t")
    if np.any(tp_arr < 0):
        raise ValueError("t_prev must be >= 0")
    x0 = x0_estimate(z_t, eps_hat, t, schedule)
    ca_p, cb_p = _coeffs(schedule, t_prev, z_t)
    return ca_p * x0 + cb_p * eps_hat


def cfg_combine(eps_uncond, eps_cond, scale: float):
    """Classifier-free guidance: eps_u + scale * (eps_c - eps_u).

    scale 0 and 1 short-circuit to the endpoint predictions so the identities
    hold bit-exactly rather than up to float rounding.
    """
    if hasattr(eps_uncond, "shape") and hasattr(eps_cond, "shape"):
        if tuple(eps_uncond.shape) != tuple(eps_cond.shape):
            raise ValueError("prediction shapes must match")
    if scale == 0.0:
        return eps_uncond
    if scale == 1.0:
        return eps_cond
    return eps_uncond + scale * (eps_cond - eps_uncond)


def sampling_timesteps(timesteps: int, steps: int) -> list[int]:
    """Uniform-stride decreasing timestep subsequence T .. 1."""
    if not 10 <= steps <= timesteps:
        raise ValueError(f"steps must be in [10, {timesteps}]")
    ts = np.unique(np.round(np.linspace(timesteps, 1, steps)).astype(int))[::-1]
    return [int(t) for t in ts]
