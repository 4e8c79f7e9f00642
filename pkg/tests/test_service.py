import base64
import json

import numpy as np
import pytest
from fastapi.testclient import TestClient

from guigen.checkpoint import header_sha256, save_checkpoint
from guigen.config import ModelConfig
from guigen.data import VOCAB, sample_wireframe
from guigen.model import GuiGenModel
from guigen.service import create_app


@pytest.fixture(scope="module")
def ckpt_path(tmp_path_factory):
    path = tmp_path_factory.mktemp("svc") / "model.ckpt"
    model = GuiGenModel.build(
        ModelConfig(), seed=9, with_wireframe_adapter=True, with_flow_adapter=True
    )
    save_checkpoint(path, model, meta={"stage": 3, "steps": 0})
    return path


@pytest.fixture()
def client(ckpt_path, tmp_path):
    app = create_app(ckpt_path, gallery_dir=tmp_path / "galleries")
    with TestClient(app) as c:
        yield c


def _wf_json(seed: int = 0) -> dict:
    return sample_wireframe(seed, "web").to_json_dict()


def _gen(client, **body):
    defaults = {"prompt": "a dark form page with 5 elements", "n": 2, "steps": 10, "seed": 5}
    defaults.update(body)
    return client.post("/generate", json=defaults)


# -- health ---------------------------------------------------------------------

def test_health_ready_and_hash_recompute(client, ckpt_path):
    r = client.get("/health")
    assert r.status_code == 200
    body = r.json()
    assert body["status"] == "ready"
    assert body["model_hash"] == header_sha256(ckpt_path)
    assert body["config"]["resolution"] == 32


def test_health_no_model(tmp_path):
    app = create_app(None, gallery_dir=tmp_path / "g")
    with TestClient(app) as c:
        body = c.get("/health").json()
    assert body == {"status": "no_model", "model_hash": None, "config": None}


# -- generation ------------------------------------------------------------------

def test_generate_deterministic_bytes(client):
    r1 = _gen(client)
    r2 = _gen(client)
    assert r1.status_code == r2.status_code == 200
    e1, e2 = r1.json()["entries"], r2.json()["entries"]
    assert len(e1) == len(e2) == 2
    for a, b in zip(e1, e2):
        assert a["png_base64"] == b["png_base64"]
        assert a["scanpath"] == b["scanpath"]
        assert a["seed"] == b["seed"]
    assert [e["seed"] for e in e1] == [5, 6]


def test_generate_prompt_only_and_entry_shape(client):
    r = _gen(client, n=1)
    entry = r.json()["entries"][0]
    assert len(entry["scanpath"]) == 6
    assert all(len(p) == 2 and 0 <= p[0] <= 1 and 0 <= p[1] <= 1 for p in entry["scanpath"])
    png = base64.b64decode(entry["png_base64"])
    assert png[:8] == b"\x89PNG\r\n\x1a\n"
    echo = r.json()["request"]
    assert echo["wireframe"] is None and echo["flow_order"] is None


def test_generate_full_conditions(client):
    wf = _wf_json(2)
    r = _gen(client, wireframe=wf, flow_order=[0, 1], n=1)
    assert r.status_code == 200
    ids = [e["id"] for e in r.json()["entries"]]
    assert len(set(ids)) == len(ids)


def test_generate_random_seed_echoed(client):
    r = _gen(client, seed=None)
    body = r.json()
    assert isinstance(body["seed"], int)
    assert body["request"]["seed"] == body["seed"]


def test_streaming_ndjson(client):
    with client.stream(
        "POST",
        "/generate",
        json={"prompt": "a light feed page with 3 elements",
              "n": 2, "steps": 10, "seed": 1, "stream": True},
    ) as r:
        assert r.status_code == 200
        assert r.headers["content-type"].startswith("application/x-ndjson")
        lines = [json.loads(l) for l in r.iter_lines() if l]
    assert lines[0]["n"] == 2 and "gallery_id" in lines[0]
    assert len(lines) == 3
    assert all("png_base64" in e for e in lines[1:])


# -- validation: every malformed input -> 4xx ---------------------------------------

def test_invalid_json_400(client):
    r = client.post("/generate", content=b"{not json")
    assert r.status_code == 400
    assert r.json()["error"] == "invalid_json"


def test_no_conditions_400(client):
    r = client.post("/generate", json={"n": 1, "steps": 10, "seed": 0})
    assert r.status_code == 400
    assert r.json()["error"] == "missing_conditions"


def test_unconditional_flag_allows_empty(client):
    r = client.post("/generate", json={"unconditional": True, "n": 1, "steps": 10, "seed": 0})
    assert r.status_code == 200


def test_unknown_prompt_word_400(client):
    r = _gen(client, prompt="a quantum zebra page")
    assert r.status_code == 400
    assert r.json()["error"] == "bad_prompt"


def test_bad_wireframe_400(client):
    r = _gen(client, wireframe={"elements": [{"cls": "Button", "bbox": [0.1, 0.1, 0.5]}]})
    assert r.status_code == 400
    assert r.json()["error"] == "bad_wireframe"


def test_flow_order_without_wireframe_400(client):
    r = _gen(client, prompt=None, flow_order=[0])
    assert r.status_code == 400
    assert r.json()["error"] == "flow_order_requires_wireframe"


def test_flow_order_out_of_range_422(client):
    wf = _wf_json(1)
    r = _gen(client, wireframe=wf, flow_order=[0, len(wf["elements"])])
    assert r.status_code == 422
    assert r.json()["error"] == "flow_order_out_of_range"


def test_bad_flow_points_400(client):
    r = _gen(client, flow_points=[[0.5, 1.5]])
    assert r.status_code == 400
    assert r.json()["error"] == "bad_flow_points"


@pytest.mark.parametrize("field,value", [("n", 0), ("n", 65), ("n", "four"),
                                         ("steps", 5), ("seed", True)])
def test_bad_numeric_fields_400(client, field, value):
    r = _gen(client, **{field: value})
    assert r.status_code == 400
    assert r.json()["error"] == "bad_field"


def test_no_model_409(tmp_path):
    app = create_app(None, gallery_dir=tmp_path / "g")
    with TestClient(app) as c:
        r = c.post("/generate", json={"unconditional": True, "n": 1, "steps": 10, "seed": 0})
    assert r.status_code == 409
    assert r.json()["error"] == "model_not_loaded"


# -- gallery persistence -----------------------------------------------------------

def test_gallery_fetch_matches_and_repeats(client):
    gen = _gen(client, n=2).json()
    gid = gen["gallery_id"]
    g1 = client.get(f"/gallery/{gid}").json()
    g2 = client.get(f"/gallery/{gid}").json()
    assert g1 == g2
    assert [e["png_base64"] for e in g1["entries"]] == [
        e["png_base64"] for e in gen["entries"]
    ]
    assert g1["request"] == gen["request"]


def test_gallery_unknown_404(client):
    r = client.get("/gallery/doesnotexist")
    assert r.status_code == 404
    assert r.json()["error"] == "unknown_gallery"


def test_gallery_survives_restart(ckpt_path, tmp_path):
    gallery_dir = tmp_path / "galleries"
    app1 = create_app(ckpt_path, gallery_dir=gallery_dir)
    with TestClient(app1) as c1:
        gen = _gen(c1, n=2).json()
        gid = gen["gallery_id"]
        before = c1.get(f"/gallery/{gid}").json()

    app2 = create_app(ckpt_path, gallery_dir=gallery_dir)
    with TestClient(app2) as c2:
        after = c2.get(f"/gallery/{gid}").json()
    assert after == before
    assert not list(gallery_dir.rglob("*.tmp"))


# -- vocab ---------------------------------------------------------------------------

def test_vocab_endpoint(client):
    body = client.get("/vocab").json()
    assert set(body["words"]) == set(VOCAB)
    assert "form" in body["categories"] and "dark" in body["themes"]
    assert "{theme}" in body["grammar"]
