"""HTTP service and CLI tests, exercising the same in-process app the
CLI uses so both interfaces stay on one contract."""

import json

import pytest
import yaml
from fastapi.testclient import TestClient

from wsnloc.cli import main
from wsnloc.experiments import CSV_HEADER, SimConfig
from wsnloc.service import app

SMALL = {
    "area": [60.0, 60.0],
    "node_count": 25,
    "sink_count": 4,
    "grid_resolution": 4.0,
    "reps": 2,
    "seed": 11,
}


@pytest.fixture(scope="module")
def client():
    with TestClient(app) as c:
        yield c


def write_small_config(tmp_path, **extra):
    path = tmp_path / "cfg.yaml"
    path.write_text(yaml.safe_dump({**SMALL, **extra}), encoding="utf-8")
    return str(path)


def test_health(client):
    body = client.get("/health").json()
    assert body["status"] == "ok"


def test_presets_endpoint(client):
    body = client.get("/presets").json()
    assert set(body) == {"fig4", "fig5", "fig6"}
    assert body["fig4"]["values"] == [4, 9, 16, 25, 30, 49, 100]
    assert body["fig5"]["swept_parameter"] == "comm_range"


def test_default_config_endpoint(client):
    body = client.get("/config/default").json()
    assert body["config"]["node_count"] == 85
    assert SimConfig.model_validate(yaml.safe_load(body["yaml"])) == SimConfig()


def test_run_endpoint(client):
    resp = client.post("/run", json={"config": SMALL})
    assert resp.status_code == 200
    body = resp.json()
    assert [r["scheme"] for r in body["records"]] == [
        "centralized",
        "diffusion",
        "bounding_box",
        "hybrid",
    ]
    assert body["csv"].splitlines()[0] == CSV_HEADER
    assert body["stats"]["rounds"] >= 1
    assert body["trace"] is None


def test_run_endpoint_trace(client):
    resp = client.post("/run", json={"config": SMALL, "include_trace": True})
    trace = resp.json()["trace"]
    assert trace and {"round", "node", "role", "power", "energy"} <= set(trace[0])


def test_run_rejects_unknown_config_key(client):
    resp = client.post("/run", json={"config": {**SMALL, "radio_power": 3}})
    assert resp.status_code == 422
    assert "radio_power" in resp.text


def test_sweep_endpoint(client):
    req = {
        "config": {**SMALL, "schemes": ["bounding_box"]},
        "sweep": {"swept_parameter": "node_count", "values": [20, 24]},
    }
    resp = client.post("/sweep", json=req)
    assert resp.status_code == 200
    body = resp.json()
    assert len(body["records"]) == 2 * SMALL["reps"]
    assert body["csv"].count("\n") == 1 + len(body["records"])


def test_sweep_requires_exactly_one_spec(client):
    assert client.post("/sweep", json={"config": SMALL}).status_code == 422
    both = {
        "config": SMALL,
        "preset": "fig4",
        "sweep": {"swept_parameter": "node_count", "values": [20]},
    }
    assert client.post("/sweep", json=both).status_code == 422
    bad = {"config": SMALL, "preset": "fig7"}
    resp = client.post("/sweep", json=bad)
    assert resp.status_code == 422
    assert "fig7" in resp.text


def test_sweep_trace_summaries(client):
    req = {
        "config": {**SMALL, "schemes": ["bounding_box"]},
        "sweep": {"swept_parameter": "node_count", "values": [20]},
        "include_trace": True,
    }
    trace = client.post("/sweep", json=req).json()["trace"]
    assert len(trace) == SMALL["reps"]
    assert {"param", "value", "rep", "seed", "rounds"} <= set(trace[0])


def test_cli_print_default_config(capsys):
    assert main(["--print-default-config"]) == 0
    out = capsys.readouterr().out
    assert SimConfig.model_validate(yaml.safe_load(out)) == SimConfig()


def test_cli_run_stdout(tmp_path, capsys):
    cfg = write_small_config(tmp_path)
    assert main(["run", "--config", cfg]) == 0
    captured = capsys.readouterr()
    assert captured.out.splitlines()[0] == CSV_HEADER
    assert "scheme records" in captured.err


def test_cli_run_files(tmp_path):
    cfg = write_small_config(tmp_path)
    out = tmp_path / "run.csv"
    trace = tmp_path / "run.jsonl"
    code = main(
        ["run", "--config", cfg, "--out", str(out), "--trace", str(trace), "--grid-res", "5"]
    )
    assert code == 0
    lines = out.read_text(encoding="utf-8").splitlines()
    assert lines[0] == CSV_HEADER
    assert len(lines) == 5
    entries = [json.loads(l) for l in trace.read_text(encoding="utf-8").splitlines()]
    assert entries and entries[0]["round"] == 1


def test_cli_sweep_explicit_and_deterministic(tmp_path):
    cfg = write_small_config(tmp_path, schemes=["bounding_box"])
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    argv = ["sweep", "--config", cfg, "--param", "node_count", "--values", "20,24"]
    assert main(argv + ["--out", str(a)]) == 0
    assert main(argv + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert len(a.read_text(encoding="utf-8").splitlines()) == 1 + 2 * SMALL["reps"]


def test_cli_sweep_flag_overrides(tmp_path):
    cfg = write_small_config(tmp_path)
    out = tmp_path / "o.csv"
    argv = [
        "sweep", "--config", cfg, "--param", "node_count", "--values", "20",
        "--schemes", "diffusion,hybrid", "--reps", "1", "--seed", "3", "--out", str(out),
    ]
    assert main(argv) == 0
    lines = out.read_text(encoding="utf-8").splitlines()
    assert len(lines) == 3
    assert lines[1].startswith("diffusion,")
    assert lines[2].startswith("hybrid,")


def test_cli_sweep_spec_conflicts(tmp_path, capsys):
    cfg = write_small_config(tmp_path)
    assert main(["sweep", "--config", cfg]) == 2
    assert main(["sweep", "--config", cfg, "--preset", "fig4", "--param", "node_count"]) == 2
    assert main(["sweep", "--config", cfg, "--param", "node_count"]) == 2
    capsys.readouterr()


def test_cli_unknown_config_key(tmp_path, capsys):
    path = tmp_path / "bad.yaml"
    path.write_text("radio_power: 3\n", encoding="utf-8")
    assert main(["run", "--config", str(path)]) == 1
    assert "radio_power" in capsys.readouterr().err


def test_cli_bad_scheme_name(tmp_path, capsys):
    cfg = write_small_config(tmp_path)
    assert main(["run", "--config", cfg, "--schemes", "sonar"]) == 1
    assert "scheme" in capsys.readouterr().err.lower()
