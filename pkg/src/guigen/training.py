"""Staged training: CFG denoising loss plus the soft-DTW flow-consistency loss.

Stages:
  0  backbone (denoiser + text encoder) from scratch, text conditioning only
  1  wireframe adapter on (text, wireframe), CFG loss only
  2  flow adapter on (text, flow), CFG loss + flow loss
  3  both adapters jointly on all three conditions, CFG loss + flow loss

The backbone is frozen in stages 1-3 and its parameter bytes are verified
unchanged after every run.  All randomness (batch order, condition dropout,
timesteps, noise) derives from TrainConfig.seed, so runs are reproducible.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch

from .checkpoint import load_checkpoint, read_header, save_checkpoint, state_bytes_sha256
from .config import ModelConfig, OracleConfig, TrainConfig, config_hash
from .data import encode_caption, load_manifest, load_png, rasterize_condition
from .diffusion import NoiseSchedule, add_noise, x0_estimate
from .model import NULL_TOKEN_ID, ConditionBatch, ConditionSet, GuiGenModel
from .scanpath import predict_scanpath
from .softdtw import soft_dtw_batch_normalized

STAGE_MODALITIES = {
    0: ("text",),
    1: ("text", "wireframe"),
    2: ("text", "flow"),
    3: ("text", "wireframe", "flow"),
}


@dataclass
class TrainingSet:
    images: torch.Tensor  # (N, 3, R, R) float32 in [-1, 1]
    text_ids: torch.Tensor  # (N, L) int64
    cmaps: torch.Tensor  # (N, 10, R, R) float32
    flows: torch.Tensor | None  # (N, K, 2) float32, None if scanpaths absent

    def __len__(self) -> int:
        return self.images.shape[0]


def load_training_set(data_dir: Path, model_cfg: ModelConfig) -> TrainingSet:
    root = Path(data_dir)
    manifest = load_manifest(root)
    if manifest.resolution != model_cfg.resolution:
        raise ValueError(
            f"dataset resolution {manifest.resolution} != model {model_cfg.resolution}"
        )
    images, tokens, cmaps, flows = [], [], [], []
    have_flows = all("scanpath_path" in r for r in manifest.records)
    if have_flows and manifest.k_fixations != model_cfg.k_fixations:
        raise ValueError(
            f"dataset k_fixations {manifest.k_fixations} != model {model_cfg.k_fixations}"
        )
    from .data import Wireframe  # local import to keep module load cheap

    for rec in manifest.records:
        img = load_png(root / rec["image_path"])
        images.append(np.moveaxis(img, -1, 0))
        tokens.append(encode_caption(rec["caption"]))
        wf = Wireframe.from_json_dict(json.loads((root / rec["wireframe_path"]).read_text()))
        cmaps.append(np.moveaxis(rasterize_condition(wf, model_cfg.resolution), -1, 0))
        if have_flows:
            sp = json.loads((root / rec["scanpath_path"]).read_text())
            flows.append(np.asarray(sp, dtype=np.float32))
    # np.stack of moveaxis views keeps channels-last strides; force standard
    # NCHW layout because the CPU group-norm backward kernel for channels-last
    # inputs segfaults in this torch build.
    return TrainingSet(
        images=torch.from_numpy(np.ascontiguousarray(np.stack(images))),
        text_ids=torch.from_numpy(np.stack(tokens)),
        cmaps=torch.from_numpy(np.ascontiguousarray(np.stack(cmaps))),
        flows=torch.from_numpy(np.stack(flows)) if have_flows else None,
    )


# -- condition dropout --------------------------------------------------------

def cfg_dropout(cond: ConditionSet, p: float, rng: np.random.Generator) -> ConditionSet:
    """Independently replace each present condition with null, probability p."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must be in [0, 1]")
    out = cond
    if cond.text is not None and rng.random() < p:
        out = out.replace(text=None)
    if cond.wireframe is not None and rng.random() < p:
        out = out.replace(wireframe=None)
    if cond.flow is not None and rng.random() < p:
        out = out.replace(flow=None)
    return out


def dropout_batch(cond: ConditionBatch, p: float, rng: np.random.Generator) -> ConditionBatch:
    """Batched independent per-condition dropout (in place on fresh copies)."""
    b = len(cond)
    text_ids = cond.text_ids.clone()
    cmap = cond.cmap.clone()
    present = cond.flow_present.clone()
    drop_text = torch.from_numpy(rng.random(b) < p)
    drop_wf = torch.from_numpy(rng.random(b) < p)
    drop_flow = torch.from_numpy(rng.random(b) < p)
    text_ids[drop_text] = NULL_TOKEN_ID
    cmap[drop_wf] = 0.0
    present[drop_flow] = False
    return ConditionBatch(text_ids, cmap, cond.flow_points, present)


# -- losses --------------------------------------------------------------------

def loss_cfg(
    denoise_fn,
    images: torch.Tensor,
    cond: ConditionBatch,
    schedule: NoiseSchedule,
    generator: torch.Generator | None = None,
    t: torch.Tensor | None = None,
    eps: torch.Tensor | None = None,
):
    """Noise-prediction MSE at a uniformly drawn timestep.

    Returns (loss, z_t, t, eps_hat) so callers can reuse the prediction.
    """
    b = images.shape[0]
    if t is None:
        t = torch.randint(1, schedule.timesteps + 1, (b,), generator=generator)
    if eps is None:
        eps = torch.randn(images.shape, generator=generator)
    z_t = add_noise(images, t, eps, schedule)
    eps_hat = denoise_fn(z_t, t, cond)
    return ((eps - eps_hat) ** 2).mean(), z_t, t, eps_hat


def loss_flow(
    z_t: torch.Tensor,
    t: torch.Tensor,
    eps_hat: torch.Tensor,
    target_flow: torch.Tensor,
    schedule: NoiseSchedule,
    gamma: float = 0.1,
    oracle: OracleConfig = OracleConfig(),
    mask: torch.Tensor | None = None,
):
    """Soft-DTW between the oracle scanpath of the one-step x0 estimate and
    the target flow, normalized by summed lengths; averaged over ``mask``."""
    if mask is not None:
        if not bool(mask.any()):
            return z_t.new_zeros(())
        z_t, t = z_t[mask], t[mask]
        eps_hat, target_flow = eps_hat[mask], target_flow[mask]
    x0 = x0_estimate(z_t, eps_hat, t, schedule)
    paths = predict_scanpath(x0, oracle)
    return soft_dtw_batch_normalized(paths, target_flow.to(paths.dtype), gamma).mean()


# -- stage orchestration ---------------------------------------------------------

@dataclass
class TrainResult:
    checkpoint_path: Path
    metrics_path: Path
    losses_cfg: list[float] = field(default_factory=list)
    losses_flow: list[float] = field(default_factory=list)
    backbone_hash_before: str = ""
    backbone_hash_after: str = ""


def _merge_checkpoints(paths) -> tuple[ModelConfig, set[str], dict[str, "GuiGenModel"]]:
    """Load checkpoints in order; later files override shared components."""
    from .config import model_config_from_dict

    if not paths:
        raise ValueError("at least one init checkpoint required")
    headers = [read_header(p) for p in paths]
    hashes = {h["config_hash"] for h in headers}
    if len(hashes) != 1:
        raise ValueError(f"init checkpoints disagree on model config: {hashes}")
    cfg = model_config_from_dict(headers[0]["config"])
    sources: dict[str, GuiGenModel] = {}
    models = [load_checkpoint(p)[0] for p in paths]
    for m in models:
        for comp in m.components():
            sources[comp] = m
    return cfg, set(sources), sources


def _assemble_model(stage: int, init_paths, model_cfg: ModelConfig, seed: int) -> GuiGenModel:
    if stage == 0:
        if init_paths:
            model, _ = load_checkpoint(init_paths[0])
            return model
        return GuiGenModel.build(model_cfg, seed=seed)

    cfg, comps, sources = _merge_checkpoints(init_paths)
    if "backbone.denoiser" not in comps or "backbone.text" not in comps:
        raise ValueError("init checkpoints must include a trained backbone")
    need_wf = stage in (1, 3)
    need_flow = stage in (2, 3)
    if stage == 3 and ("adapter.wireframe" not in comps or "adapter.flow" not in comps):
        raise ValueError("stage 3 requires wireframe and flow adapters from stages 1 and 2")

    model = GuiGenModel.build(
        cfg,
        seed=seed,
        with_wireframe_adapter=need_wf or "adapter.wireframe" in comps,
        with_flow_adapter=need_flow or "adapter.flow" in comps,
    )
    own = model.components()
    for comp, src in sources.items():
        if comp in own:
            own[comp].load_state_dict(src.components()[comp].state_dict())
    return model


def _trainable_modules(model: GuiGenModel, stage: int) -> list[torch.nn.Module]:
    if stage == 0:
        return [model.denoiser, model.text_encoder]
    if stage == 1:
        return [model.wireframe_adapter]
    if stage == 2:
        return [model.flow_adapter]
    return [model.wireframe_adapter, model.flow_adapter]


def train_stage(
    cfg: TrainConfig,
    data_dir: Path,
    out_path: Path,
    init_paths=(),
    model_cfg: ModelConfig = ModelConfig(),
    oracle: OracleConfig = OracleConfig(),
) -> TrainResult:
    cfg.validate()
    if cfg.deterministic:
        torch.set_num_threads(1)
    torch.manual_seed(cfg.seed)

    model = _assemble_model(cfg.stage, list(init_paths), model_cfg, cfg.seed)
    model_cfg = model.cfg
    ts = load_training_set(data_dir, model_cfg)
    modalities = STAGE_MODALITIES[cfg.stage]
    if "flow" in modalities and ts.flows is None:
        raise ValueError(f"stage {cfg.stage} needs scanpaths but the dataset has none")

    trainable = _trainable_modules(model, cfg.stage)
    trainable_ids = {id(m) for m in trainable}
    for module in model.modules():
        is_trainable = id(module) in trainable_ids
        module.train(is_trainable)
        for p in module.parameters():
            p.requires_grad_(is_trainable)
    params = [p for m in trainable for p in m.parameters()]
    opt = torch.optim.AdamW(params, lr=cfg.lr, weight_decay=cfg.weight_decay)
    # Linear warmup to the configured lr; the zero-initialized projections get
    # large, poorly-scaled first updates otherwise.
    sched_lr = torch.optim.lr_scheduler.LambdaLR(
        opt, lambda step: min(1.0, (step + 1) / max(1, cfg.warmup_steps))
    )

    backbone_hash = state_bytes_sha256(model.denoiser) + state_bytes_sha256(model.text_encoder)

    g = torch.Generator().manual_seed(cfg.seed)
    rng = np.random.default_rng(cfg.seed)
    schedule = model.schedule
    n = len(ts)
    use_flow_loss = cfg.stage in (2, 3)

    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    metrics_path = Path(str(out_path) + ".metrics.jsonl")
    result = TrainResult(checkpoint_path=out_path, metrics_path=metrics_path,
                         backbone_hash_before=backbone_hash)

    with open(metrics_path, "w") as log:
        for step in range(1, cfg.steps + 1):
            idx = torch.from_numpy(rng.integers(0, n, cfg.batch_size))
            images = ts.images[idx]
            cond = ConditionBatch(
                text_ids=ts.text_ids[idx],
                cmap=ts.cmaps[idx] if "wireframe" in modalities
                else torch.zeros(cfg.batch_size, model_cfg.cond_channels,
                                 model_cfg.resolution, model_cfg.resolution),
                flow_points=ts.flows[idx] if ts.flows is not None
                else torch.zeros(cfg.batch_size, model_cfg.k_fixations, 2),
                flow_present=torch.full((cfg.batch_size,), "flow" in modalities),
            )
            cond = dropout_batch(cond, cfg.cond_dropout_p, rng)

            l_cfg, z_t, t, eps_hat = loss_cfg(
                model.predict_eps, images, cond, schedule, generator=g
            )
            if use_flow_loss:
                l_flow = loss_flow(
                    z_t, t, eps_hat, cond.flow_points, schedule,
                    gamma=cfg.sdtw_gamma, oracle=oracle, mask=cond.flow_present,
                )
                loss = l_cfg + cfg.flow_loss_weight * l_flow
            else:
                l_flow = None
                loss = l_cfg

            opt.zero_grad(set_to_none=True)
            loss.backward()
            torch.nn.utils.clip_grad_norm_(params, cfg.grad_clip)
            opt.step()
            sched_lr.step()

            result.losses_cfg.append(float(l_cfg.detach()))
            if l_flow is not None:
                result.losses_flow.append(float(l_flow.detach()))
            if step % cfg.log_every == 0 or step == cfg.steps:
                log.write(json.dumps({
                    "step": step,
                    "loss_cfg": result.losses_cfg[-1],
                    "loss_flow": result.losses_flow[-1] if l_flow is not None else None,
                }) + "\n")
                log.flush()

    after = state_bytes_sha256(model.denoiser) + state_bytes_sha256(model.text_encoder)
    result.backbone_hash_after = after
    if cfg.stage != 0 and after != backbone_hash:
        raise RuntimeError("backbone parameters changed during adapter training")

    meta = {"stage": cfg.stage, "steps": cfg.steps, "seed": cfg.seed,
            "final_loss_cfg": result.losses_cfg[-1]}
    save_checkpoint(out_path, model, meta=meta)
    return result
