#!/usr/bin/env python3
"""End-to-end training pipeline: dataset -> stage 0..3 -> effect measurements.

Produces, under --out:
  data/            training set (--n records)
  testdata/        held-out evaluation records
  s0..s3.ckpt      per-stage checkpoints (+ .metrics.jsonl logs)
  summary.json     stage timings, loss trajectories, conditioning-effect stats
"""

from __future__ import annotations

import argparse
import json
import time
from pathlib import Path

from guigen.checkpoint import load_checkpoint
from guigen.config import ModelConfig, TrainConfig
from guigen.data import build_dataset
from guigen.evaluation import (
    load_eval_records,
    paired_flow_scores,
    run_ablation,
    validate_report,
    wireframe_effect,
)
from guigen.training import train_stage


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", required=True)
    ap.add_argument("--n", type=int, default=512)
    ap.add_argument("--n-test", type=int, default=64)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--batch", type=int, default=16)
    ap.add_argument("--steps0", type=int, default=100)
    ap.add_argument("--steps1", type=int, default=2000)
    ap.add_argument("--steps2", type=int, default=1200)
    ap.add_argument("--steps3", type=int, default=800)
    ap.add_argument("--eval-n", type=int, default=50)
    ap.add_argument("--eval-flow-n", type=int, default=128)
    ap.add_argument("--eval-steps", type=int, default=20)
    ap.add_argument("--guidance", type=float, default=4.0)
    ap.add_argument("--deterministic", action="store_true")
    args = ap.parse_args()

    root = Path(args.out)
    root.mkdir(parents=True, exist_ok=True)
    summary: dict = {"args": vars(args), "stages": {}}

    t0 = time.time()
    build_dataset(args.n, args.seed, root / "data")
    build_dataset(args.n_test, args.seed + 10_000, root / "testdata")
    summary["dataset_seconds"] = round(time.time() - t0, 1)
    print(f"datasets built in {summary['dataset_seconds']}s", flush=True)

    def stage(num: int, steps: int, inits: list[str]) -> None:
        cfg = TrainConfig(
            stage=num, steps=steps, batch_size=args.batch, seed=args.seed + num,
            deterministic=args.deterministic,
        )
        t = time.time()
        result = train_stage(
            cfg, root / "data", root / f"s{num}.ckpt",
            init_paths=[root / f"{name}.ckpt" for name in inits],
            model_cfg=ModelConfig(),
        )
        first = result.losses_cfg[:100]
        last = result.losses_cfg[-100:]
        summary["stages"][f"s{num}"] = {
            "steps": steps,
            "seconds": round(time.time() - t, 1),
            "loss_cfg_first100_mean": sum(first) / len(first),
            "loss_cfg_last100_mean": sum(last) / len(last),
        }
        print(f"stage {num}: {summary['stages'][f's{num}']}", flush=True)

    stage(0, args.steps0, [])
    stage(1, args.steps1, ["s0"])
    stage(2, args.steps2, ["s0"])
    stage(3, args.steps3, ["s1", "s2"])

    model, _ = load_checkpoint(root / "s3.ckpt")
    records = load_eval_records(root / "testdata")

    t = time.time()
    summary["wireframe_effect"] = wireframe_effect(
        model, records, n=args.eval_n, seed=args.seed + 500,
        steps=args.eval_steps, guidance=args.guidance,
    )
    summary["wireframe_effect"]["seconds"] = round(time.time() - t, 1)
    print(f"wireframe effect: {summary['wireframe_effect']}", flush=True)

    t = time.time()
    # flow-only conditioning at the paired design's default guidance
    paired = paired_flow_scores(
        model, records, n=args.eval_flow_n, seed=args.seed + 600,
        steps=args.eval_steps,
    )
    summary["flow_effect"] = {k: paired[k] for k in
                              ("n", "matched_mean", "shuffled_mean", "p_value")}
    summary["flow_effect"]["seconds"] = round(time.time() - t, 1)
    print(f"flow effect: {summary['flow_effect']}", flush=True)

    report = run_ablation(model, records, n_per_variant=2, seed=args.seed + 700,
                          steps=args.eval_steps, guidance=args.guidance)
    validate_report(report)
    (root / "ablation.json").write_text(json.dumps(report, indent=2, sort_keys=True))

    (root / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True))
    print(json.dumps(summary, indent=2, sort_keys=True))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
