"""Command line interface: dataset | train | generate | evaluate | serve.

A --config file (JSON, or TOML when a toml parser is available) supplies
defaults; explicit flags win.  GUIGEN_CKPT provides the checkpoint path when
--ckpt is omitted.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np


def _load_config_file(path: str) -> dict:
    p = Path(path)
    text = p.read_text()
    if p.suffix == ".toml":
        try:
            import tomllib  # Python >= 3.11
        except ModuleNotFoundError:
            try:
                import tomli as tomllib
            except ModuleNotFoundError as exc:
                raise SystemExit(
                    "TOML config requires Python 3.11+ or the 'tomli' package; "
                    "use a JSON config instead"
                ) from exc
        return tomllib.loads(text)
    return json.loads(text)


def _ckpt_or_env(value: str | None) -> Path:
    path = value or os.environ.get("GUIGEN_CKPT")
    if not path:
        raise SystemExit("no checkpoint: pass --ckpt or set GUIGEN_CKPT")
    return Path(path)


def build_parser() -> tuple[argparse.ArgumentParser, dict[str, argparse.ArgumentParser]]:
    parser = argparse.ArgumentParser(prog="guigen", description=__doc__)
    parser.add_argument("--config", help="JSON/TOML file with default option values")
    subparsers: dict[str, argparse.ArgumentParser] = {}
    _add = sub = parser.add_subparsers(dest="command", required=True)

    def add_parser(name, **kw):
        subparsers[name] = _add.add_parser(name, **kw)
        return subparsers[name]

    sub = argparse.Namespace(add_parser=add_parser)

    p = sub.add_parser("dataset", help="generate a synthetic GUI dataset")
    p.add_argument("--n", type=int, default=512)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--resolution", type=int, default=32, choices=(32, 64))

    p = sub.add_parser("train", help="run one training stage")
    p.add_argument("--stage", type=int, required=True, choices=(0, 1, 2, 3))
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--init", nargs="*", default=[],
                   help="input checkpoint(s); later files override shared parts")
    p.add_argument("--steps", type=int, default=2000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--batch", type=int, default=16)
    p.add_argument("--lr", type=float, default=1e-4)
    p.add_argument("--weight-decay", type=float, default=0.01)
    p.add_argument("--cond-dropout", type=float, default=0.5)
    p.add_argument("--flow-weight", type=float, default=1.0)
    p.add_argument("--sdtw-gamma", type=float, default=0.1)
    p.add_argument("--warmup", type=int, default=100,
                   help="linear lr warmup steps")
    p.add_argument("--resolution", type=int, default=32, choices=(32, 64))
    p.add_argument("--deterministic", action="store_true",
                   help="pin to one torch thread for bit-stable runs")

    p = sub.add_parser("generate", help="sample images from a checkpoint")
    p.add_argument("--ckpt")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--prompt")
    p.add_argument("--wireframe", help="wireframe JSON file")
    p.add_argument("--flow-order", help="comma-separated element indices")
    p.add_argument("--flow-points", help="JSON file with [[x,y],...] points")
    p.add_argument("--unconditional", action="store_true")
    p.add_argument("--n", type=int, default=16)
    p.add_argument("--steps", type=int, default=50)
    p.add_argument("--guidance", type=float, default=4.0)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("evaluate", help="run the ablation report on a checkpoint")
    p.add_argument("--ckpt")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--n", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--steps", type=int, default=20)
    p.add_argument("--guidance", type=float, default=4.0)

    p = sub.add_parser("serve", help="start the gallery HTTP service")
    p.add_argument("--ckpt")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--gallery-dir", default="galleries")

    return parser, subparsers


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, subparsers = build_parser()
    pre, _ = parser.parse_known_args(argv)
    if pre.config:
        defaults = _load_config_file(pre.config)
        for sp in subparsers.values():
            known = {a.dest for a in sp._actions}
            sp.set_defaults(**{k: v for k, v in defaults.items() if k in known})
    args = parser.parse_args(argv)

    if args.command == "dataset":
        from .data import build_dataset

        manifest = build_dataset(args.n, args.seed, Path(args.out), resolution=args.resolution)
        print(f"wrote {len(manifest.records)} records to {args.out}")
        return 0

    if args.command == "train":
        from .config import ModelConfig, TrainConfig
        from .training import train_stage

        cfg = TrainConfig(
            stage=args.stage, steps=args.steps, batch_size=args.batch, lr=args.lr,
            weight_decay=args.weight_decay, cond_dropout_p=args.cond_dropout,
            flow_loss_weight=args.flow_weight, sdtw_gamma=args.sdtw_gamma,
            warmup_steps=args.warmup, seed=args.seed,
            deterministic=args.deterministic,
        )
        result = train_stage(
            cfg, Path(args.data), Path(args.out), init_paths=[Path(p) for p in args.init],
            model_cfg=ModelConfig(resolution=args.resolution),
        )
        print(f"stage {args.stage} done: {result.checkpoint_path} "
              f"(final loss_cfg {result.losses_cfg[-1]:.4f})")
        return 0

    if args.command == "generate":
        return _cmd_generate(args)

    if args.command == "evaluate":
        from .evaluation import evaluate_checkpoint

        report = evaluate_checkpoint(
            _ckpt_or_env(args.ckpt), Path(args.data), Path(args.out),
            n=args.n, seed=args.seed, steps=args.steps, guidance=args.guidance,
        )
        print(json.dumps(
            {v["variant"]: {"flow_sdtw": v["flow_sdtw"], "layout_iou": v["layout_iou"]}
             for v in report["variants"]}, indent=2))
        return 0

    if args.command == "serve":
        from .service import serve

        serve(_ckpt_or_env(args.ckpt), host=args.host, port=args.port,
              gallery_dir=Path(args.gallery_dir))
        return 0

    parser.error(f"unknown command {args.command!r}")
    return 2


def _cmd_generate(args) -> int:
    from .checkpoint import load_checkpoint
    from .data import Wireframe, encode_caption, rasterize_condition, save_png
    from .model import ConditionSet
    from .scanpath import flow_from_order, predict_scanpath_np

    model, _ = load_checkpoint(_ckpt_or_env(args.ckpt))
    text = encode_caption(args.prompt) if args.prompt else None
    wf = wireframe_map = flow = None
    if args.wireframe:
        wf = Wireframe.from_json_dict(json.loads(Path(args.wireframe).read_text()))
        wf.validate()
        wireframe_map = rasterize_condition(wf, model.cfg.resolution)
    if args.flow_points:
        pts = json.loads(Path(args.flow_points).read_text())
        while len(pts) < model.cfg.k_fixations:
            pts.append(pts[-1])
        flow = np.asarray(pts, dtype=np.float32)
    elif args.flow_order:
        if wf is None:
            raise SystemExit("--flow-order requires --wireframe")
        order = [int(s) for s in args.flow_order.split(",") if s.strip()]
        flow = flow_from_order(wf, order, model.cfg.k_fixations).astype(np.float32)
    if text is None and wireframe_map is None and flow is None and not args.unconditional:
        raise SystemExit("no conditions given; pass --unconditional to sample freely")

    cond = ConditionSet(text=text, wireframe=wireframe_map, flow=flow)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for i in range(args.n):
        seed_i = args.seed + i
        img = model.sample(cond, steps=args.steps, guidance=args.guidance, seed=seed_i)
        path = predict_scanpath_np(img)
        save_png(img, out / f"im_{i:03d}.png")
        (out / f"im_{i:03d}.json").write_text(json.dumps({
            "seed": seed_i,
            "prompt": args.prompt,
            "steps": args.steps,
            "guidance": args.guidance,
            "scanpath": [[float(x), float(y)] for x, y in path],
        }, sort_keys=True))
    print(f"wrote {args.n} images to {out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
