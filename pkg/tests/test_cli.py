import json

import pytest

from guigen.checkpoint import save_checkpoint
from guigen.cli import main
from guigen.config import ModelConfig
from guigen.data import load_manifest, load_png, sample_wireframe
from guigen.evaluation import validate_report
from guigen.model import GuiGenModel


@pytest.fixture(scope="module")
def cli_ckpt(tmp_path_factory):
    path = tmp_path_factory.mktemp("cli") / "model.ckpt"
    model = GuiGenModel.build(
        ModelConfig(), seed=2, with_wireframe_adapter=True, with_flow_adapter=True
    )
    save_checkpoint(path, model, meta={"stage": 3, "steps": 0})
    return path


def test_dataset_command(tmp_path, capsys):
    out = tmp_path / "ds"
    assert main(["dataset", "--n", "4", "--seed", "3", "--out", str(out)]) == 0
    manifest = load_manifest(out)
    assert len(manifest.records) == 4
    assert "wrote 4 records" in capsys.readouterr().out


def test_generate_command_round_trip(tmp_path, cli_ckpt):
    out = tmp_path / "gen"
    rc = main([
        "generate", "--ckpt", str(cli_ckpt), "--out", str(out),
        "--prompt", "a dark form page with 5 elements",
        "--n", "2", "--steps", "10", "--seed", "11",
    ])
    assert rc == 0
    pngs = sorted(out.glob("im_*.png"))
    sidecars = sorted(out.glob("im_*.json"))
    assert len(pngs) == len(sidecars) == 2
    img = load_png(pngs[0])
    assert img.shape == (32, 32, 3)
    meta = json.loads(sidecars[0].read_text())
    assert meta["seed"] == 11 and len(meta["scanpath"]) == 6


def test_generate_with_wireframe_and_flow_order(tmp_path, cli_ckpt):
    wf_file = tmp_path / "wf.json"
    wf_file.write_text(json.dumps(sample_wireframe(4, "web").to_json_dict()))
    out = tmp_path / "gen"
    rc = main([
        "generate", "--ckpt", str(cli_ckpt), "--out", str(out),
        "--wireframe", str(wf_file), "--flow-order", "0,1",
        "--n", "1", "--steps", "10", "--seed", "0",
    ])
    assert rc == 0
    assert len(list(out.glob("im_*.png"))) == 1


def test_generate_requires_conditions(tmp_path, cli_ckpt):
    with pytest.raises(SystemExit, match="no conditions"):
        main(["generate", "--ckpt", str(cli_ckpt), "--out", str(tmp_path / "x"),
              "--n", "1", "--steps", "10"])


def test_generate_flow_order_requires_wireframe(tmp_path, cli_ckpt):
    with pytest.raises(SystemExit, match="requires --wireframe"):
        main(["generate", "--ckpt", str(cli_ckpt), "--out", str(tmp_path / "x"),
              "--flow-order", "0", "--n", "1", "--steps", "10"])


def test_ckpt_env_var_fallback(tmp_path, cli_ckpt, monkeypatch):
    monkeypatch.setenv("GUIGEN_CKPT", str(cli_ckpt))
    out = tmp_path / "gen"
    rc = main(["generate", "--out", str(out), "--unconditional",
               "--n", "1", "--steps", "10", "--seed", "0"])
    assert rc == 0


def test_missing_ckpt_errors(monkeypatch, tmp_path):
    monkeypatch.delenv("GUIGEN_CKPT", raising=False)
    with pytest.raises(SystemExit, match="no checkpoint"):
        main(["generate", "--out", str(tmp_path / "x"), "--unconditional"])


def test_config_file_defaults_and_flag_override(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"n": 3, "seed": 7}))
    out = tmp_path / "ds"
    rc = main(["--config", str(cfg), "dataset", "--out", str(out)])
    assert rc == 0
    assert len(load_manifest(out).records) == 3  # config default applied

    out2 = tmp_path / "ds2"
    rc = main(["--config", str(cfg), "dataset", "--n", "2", "--out", str(out2)])
    assert rc == 0
    assert len(load_manifest(out2).records) == 2  # explicit flag wins


def test_train_command_smoke(tmp_path, capsys):
    data = tmp_path / "data"
    main(["dataset", "--n", "6", "--seed", "0", "--out", str(data)])
    ckpt = tmp_path / "s0.ckpt"
    rc = main([
        "train", "--stage", "0", "--data", str(data), "--out", str(ckpt),
        "--steps", "3", "--batch", "2", "--seed", "1",
    ])
    assert rc == 0
    assert ckpt.is_file()
    assert ckpt.with_name(ckpt.name + ".metrics.jsonl").is_file()
    assert "stage 0 done" in capsys.readouterr().out


def test_evaluate_command(tmp_path, cli_ckpt):
    data = tmp_path / "data"
    main(["dataset", "--n", "4", "--seed", "1", "--out", str(data)])
    out = tmp_path / "report.json"
    rc = main([
        "evaluate", "--ckpt", str(cli_ckpt), "--data", str(data),
        "--out", str(out), "--n", "2", "--seed", "0", "--steps", "10",
    ])
    assert rc == 0
    report = json.loads(out.read_text())
    validate_report(report)
    assert len(report["variants"]) == 7
