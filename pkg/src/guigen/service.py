"""Gallery HTTP service: generate condition-guided GUI batches, persist them
as PNG + JSON sidecars, and serve them back across restarts.

Every malformed input maps to a 4xx JSON body {"error": <code>, "detail": ...}
rather than an exception; generation holds a process-wide lock so one job is
in flight at a time and per-image seeds keep results request-deterministic.
"""

from __future__ import annotations

import base64
import json
import os
import threading
import uuid
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, StreamingResponse

from .config import OracleConfig
from .data import (
    CATEGORY_BY_CLASS,
    THEME_NAMES,
    VOCAB,
    Wireframe,
    encode_caption,
    image_to_png_bytes,
    rasterize_condition,
)
from .model import ConditionSet
from .scanpath import flow_from_order, predict_scanpath_np

MAX_BATCH = 64


class _BadRequest(Exception):
    def __init__(self, code: str, detail: str, status: int = 400):
        super().__init__(detail)
        self.code, self.detail, self.status = code, detail, status


def _error(exc: _BadRequest) -> JSONResponse:
    return JSONResponse({"error": exc.code, "detail": exc.detail}, status_code=exc.status)


def _atomic_write(path: Path, data: bytes) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(data)
    os.replace(tmp, path)


def _parse_request(body: dict, model) -> tuple[ConditionSet, dict]:
    if not isinstance(body, dict):
        raise _BadRequest("bad_request", "request body must be a JSON object")

    def _int_field(name, default, lo, hi):
        v = body.get(name, default)
        if not isinstance(v, int) or isinstance(v, bool) or not lo <= v <= hi:
            raise _BadRequest("bad_field", f"{name} must be an integer in [{lo}, {hi}]")
        return v

    n = _int_field("n", 16, 1, MAX_BATCH)
    steps = _int_field("steps", 50, 10, model.cfg.timesteps)
    guidance = body.get("guidance", 4.0)
    if not isinstance(guidance, (int, float)) or isinstance(guidance, bool):
        raise _BadRequest("bad_field", "guidance must be a number")
    seed = body.get("seed")
    if seed is None:
        seed = int(np.random.default_rng().integers(2**31))
    elif not isinstance(seed, int) or isinstance(seed, bool):
        raise _BadRequest("bad_field", "seed must be an integer")

    text = wireframe_map = flow = None
    wf = None
    prompt = body.get("prompt")
    if prompt is not None:
        if not isinstance(prompt, str):
            raise _BadRequest("bad_prompt", "prompt must be a string")
        try:
            text = encode_caption(prompt)
        except ValueError as exc:
            raise _BadRequest("bad_prompt", str(exc)) from exc

    if body.get("wireframe") is not None:
        try:
            wf = Wireframe.from_json_dict(body["wireframe"])
            wf.validate()
        except (ValueError, TypeError) as exc:
            raise _BadRequest("bad_wireframe", str(exc)) from exc
        wireframe_map = rasterize_condition(wf, model.cfg.resolution)

    k = model.cfg.k_fixations
    if body.get("flow_points") is not None:
        pts = body["flow_points"]
        ok = (
            isinstance(pts, list)
            and 1 <= len(pts) <= k
            and all(
                isinstance(p, list) and len(p) == 2
                and all(isinstance(v, (int, float)) and not isinstance(v, bool)
                        and 0.0 <= v <= 1.0 for v in p)
                for p in pts
            )
        )
        if not ok:
            raise _BadRequest(
                "bad_flow_points", f"flow_points must be 1..{k} [x, y] pairs in [0, 1]"
            )
        pts = [list(map(float, p)) for p in pts]
        while len(pts) < k:
            pts.append(pts[-1])
        flow = np.asarray(pts, dtype=np.float32)
    elif body.get("flow_order") is not None:
        order = body["flow_order"]
        if wf is None:
            raise _BadRequest("flow_order_requires_wireframe",
                              "flow_order needs a wireframe (or use flow_points)")
        if not isinstance(order, list) or not all(
            isinstance(i, int) and not isinstance(i, bool) for i in order
        ):
            raise _BadRequest("bad_flow_order", "flow_order must be a list of integers")
        bad = [i for i in order if not 0 <= i < len(wf.elements)]
        if bad:
            raise _BadRequest(
                "flow_order_out_of_range",
                f"element indices {bad} outside [0, {len(wf.elements)})",
                status=422,
            )
        try:
            flow = flow_from_order(wf, order, k).astype(np.float32)
        except ValueError as exc:
            raise _BadRequest("bad_flow_order", str(exc)) from exc

    if text is None and wireframe_map is None and flow is None and not body.get("unconditional"):
        raise _BadRequest(
            "missing_conditions",
            "provide at least one of prompt/wireframe/flow_order/flow_points, "
            "or set unconditional: true",
        )

    cond = ConditionSet(text=text, wireframe=wireframe_map, flow=flow)
    echo = {
        "prompt": prompt,
        "wireframe": body.get("wireframe"),
        "flow_order": body.get("flow_order"),
        "flow_points": body.get("flow_points"),
        "unconditional": bool(body.get("unconditional", False)),
        "n": n,
        "steps": steps,
        "guidance": float(guidance),
        "seed": seed,
    }
    return cond, echo


def create_app(
    checkpoint_path: Path | None = None,
    gallery_dir: Path | None = None,
    oracle: OracleConfig = OracleConfig(),
) -> FastAPI:
    app = FastAPI(title="guigen gallery service")
    state = app.state
    state.model = None
    state.header = None
    state.oracle = oracle
    state.lock = threading.Lock()
    state.gallery_root = Path(gallery_dir) if gallery_dir else Path("galleries")
    state.gallery_root.mkdir(parents=True, exist_ok=True)
    state.known_galleries = {
        p.name for p in state.gallery_root.iterdir()
        if p.is_dir() and (p / "request.json").is_file()
    }

    state.model_hash = None
    if checkpoint_path is not None:
        from .checkpoint import header_sha256, load_checkpoint

        state.model, state.header = load_checkpoint(checkpoint_path)
        state.model_hash = header_sha256(checkpoint_path)

    def _make_entry(gid: str, index: int, seed: int, image: np.ndarray) -> dict:
        path = predict_scanpath_np(image, state.oracle)
        png = image_to_png_bytes(image)
        entry = {
            "id": f"{gid}:{index}",
            "index": index,
            "seed": seed,
            "scanpath": [[float(x), float(y)] for x, y in path],
            "png_base64": base64.b64encode(png).decode(),
        }
        gdir = state.gallery_root / gid
        _atomic_write(gdir / f"entry_{index:03d}.png", png)
        sidecar = {k: entry[k] for k in ("id", "index", "seed", "scanpath")}
        _atomic_write(gdir / f"entry_{index:03d}.json",
                      json.dumps(sidecar, sort_keys=True).encode())
        return entry

    def _generate_entries(cond: ConditionSet, echo: dict, gid: str):
        for i in range(echo["n"]):
            seed_i = echo["seed"] + i
            image = state.model.sample(
                cond, steps=echo["steps"], guidance=echo["guidance"], seed=seed_i
            )
            yield _make_entry(gid, i, seed_i, image)

    @app.post("/generate")
    async def generate(request: Request):
        try:
            body = json.loads(await request.body())
        except json.JSONDecodeError:
            return _error(_BadRequest("invalid_json", "request body is not valid JSON"))
        if state.model is None:
            return _error(_BadRequest("model_not_loaded", "no checkpoint loaded", status=409))
        try:
            cond, echo = _parse_request(body, state.model)
        except _BadRequest as exc:
            return _error(exc)

        gid = uuid.uuid4().hex[:12]
        gdir = state.gallery_root / gid
        gdir.mkdir(parents=True, exist_ok=True)
        _atomic_write(gdir / "request.json",
                      json.dumps({"gallery_id": gid, "request": echo}, sort_keys=True).encode())
        state.known_galleries.add(gid)

        if body.get("stream"):
            def lines():
                with state.lock:
                    yield json.dumps(
                        {"gallery_id": gid, "seed": echo["seed"], "n": echo["n"]}
                    ) + "\n"
                    for entry in _generate_entries(cond, echo, gid):
                        yield json.dumps(entry) + "\n"

            return StreamingResponse(lines(), media_type="application/x-ndjson")

        with state.lock:
            entries = list(_generate_entries(cond, echo, gid))
        return {"gallery_id": gid, "seed": echo["seed"], "request": echo, "entries": entries}

    @app.get("/gallery/{gid}")
    def gallery(gid: str):
        gdir = state.gallery_root / gid
        if gid not in state.known_galleries and not (gdir / "request.json").is_file():
            return JSONResponse(
                {"error": "unknown_gallery", "detail": gid}, status_code=404
            )
        meta = json.loads((gdir / "request.json").read_text())
        entries = []
        for sidecar in sorted(gdir.glob("entry_*.json")):
            entry = json.loads(sidecar.read_text())
            png = (gdir / (sidecar.stem + ".png")).read_bytes()
            entry["png_base64"] = base64.b64encode(png).decode()
            entries.append(entry)
        return {
            "gallery_id": gid,
            "seed": meta["request"]["seed"],
            "request": meta["request"],
            "entries": entries,
        }

    @app.get("/health")
    def health():
        if state.model is None:
            return {"status": "no_model", "model_hash": None, "config": None}
        return {
            "status": "ready",
            "model_hash": state.model_hash,
            "config": state.header["config"],
        }

    @app.get("/vocab")
    def vocab():
        return {
            "grammar": "a {theme} {category} page with {k} elements",
            "themes": list(THEME_NAMES),
            "categories": list(CATEGORY_BY_CLASS),
            "counts": list(range(3, 13)),
            "words": list(VOCAB),
        }

    return app


def serve(checkpoint_path, host: str = "127.0.0.1", port: int = 8000, gallery_dir=None):
    import uvicorn

    app = create_app(checkpoint_path, gallery_dir)
    uvicorn.run(app, host=host, port=port, log_level="info")
