"""Checkpoint archive: [u64 header length][header JSON][flat tensor bytes].

The header maps tensor names to {dtype, shape, offset, nbytes} and carries the
model config, its sha256 hash, and the schedule constants, so a checkpoint is
self-describing.  Tensor names are namespaced by component
(``backbone.denoiser.``, ``backbone.text.``, ``adapter.wireframe.``,
``adapter.flow.``).  Writes are atomic (tmp file + rename) and byte-stable:
the same model state always serializes to the same bytes.
"""

from __future__ import annotations

import hashlib
import json
import os
import struct
from pathlib import Path

import numpy as np
import torch

from .config import config_hash, config_to_dict, model_config_from_dict
from .model import GuiGenModel

FORMAT_VERSION = 1

_DTYPES = {
    "float32": (torch.float32, np.float32),
    "float64": (torch.float64, np.float64),
    "int64": (torch.int64, np.int64),
}
_TORCH_TO_NAME = {t: name for name, (t, _) in _DTYPES.items()}


def _flat_tensors(model: GuiGenModel) -> dict[str, torch.Tensor]:
    out = {}
    for comp_name, module in model.components().items():
        for pname, tensor in module.state_dict().items():
            out[f"{comp_name}.{pname}"] = tensor.detach().cpu().contiguous()
    return out


def save_checkpoint(path: Path, model: GuiGenModel, meta: dict | None = None) -> Path:
    path = Path(path)
    tensors = _flat_tensors(model)
    index = {}
    offset = 0
    for name in sorted(tensors):
        t = tensors[name]
        dtype = _TORCH_TO_NAME[t.dtype]
        nbytes = t.numel() * t.element_size()
        index[name] = {
            "dtype": dtype,
            "shape": list(t.shape),
            "offset": offset,
            "nbytes": nbytes,
        }
        offset += nbytes

    header = {
        "format_version": FORMAT_VERSION,
        "config": config_to_dict(model.cfg),
        "config_hash": config_hash(model.cfg),
        "schedule": {
            "timesteps": model.cfg.timesteps,
            "beta_min": model.cfg.beta_min,
            "beta_max": model.cfg.beta_max,
        },
        "components": sorted(model.components()),
        "tensors": index,
        "meta": meta or {},
    }
    header_bytes = json.dumps(header, sort_keys=True).encode()

    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "wb") as f:
        f.write(struct.pack("<Q", len(header_bytes)))
        f.write(header_bytes)
        for name in sorted(tensors):
            f.write(tensors[name].numpy().tobytes())
    os.replace(tmp, path)
    return path


def read_header(path: Path) -> dict:
    with open(path, "rb") as f:
        (hlen,) = struct.unpack("<Q", f.read(8))
        return json.loads(f.read(hlen).decode())


def header_sha256(path: Path) -> str:
    """sha256 over the raw header JSON bytes; fingerprints the model identity."""
    with open(path, "rb") as f:
        (hlen,) = struct.unpack("<Q", f.read(8))
        return hashlib.sha256(f.read(hlen)).hexdigest()


def load_checkpoint(path: Path) -> tuple[GuiGenModel, dict]:
    path = Path(path)
    with open(path, "rb") as f:
        (hlen,) = struct.unpack("<Q", f.read(8))
        header = json.loads(f.read(hlen).decode())
        payload = f.read()
    if header.get("format_version") != FORMAT_VERSION:
        raise ValueError(f"unsupported checkpoint format: {header.get('format_version')}")

    cfg = model_config_from_dict(header["config"])
    components = set(header["components"])
    model = GuiGenModel.build(
        cfg,
        seed=0,
        with_wireframe_adapter="adapter.wireframe" in components,
        with_flow_adapter="adapter.flow" in components,
    )

    state: dict[str, dict[str, torch.Tensor]] = {name: {} for name in model.components()}
    for full_name, info in header["tensors"].items():
        comp = next(
            (c for c in state if full_name.startswith(c + ".")), None
        )
        if comp is None:
            raise ValueError(f"tensor {full_name!r} has no matching component")
        torch_dtype, np_dtype = _DTYPES[info["dtype"]]
        raw = payload[info["offset"] : info["offset"] + info["nbytes"]]
        arr = np.frombuffer(raw, dtype=np_dtype).reshape(info["shape"]).copy()
        state[comp][full_name[len(comp) + 1 :]] = torch.from_numpy(arr).to(torch_dtype)

    for comp, module in model.components().items():
        module.load_state_dict(state[comp])
    return model.eval_mode(), header


def file_sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def state_bytes_sha256(module: torch.nn.Module) -> str:
    """Order-stable hash of a module's parameter/buffer bytes."""
    h = hashlib.sha256()
    sd = module.state_dict()
    for name in sorted(sd):
        h.update(name.encode())
        h.update(sd[name].detach().cpu().contiguous().numpy().tobytes())
    return h.hexdigest()
