import json
import threading
import time

import pytest
import uvicorn
from fastapi.testclient import TestClient

from somtissue.cli import main
from somtissue.pipeline import Pipeline, generate_synthetic, parse_config
from somtissue.service import create_app
from somtissue.service.client import ServiceError, TissueClient


@pytest.fixture
def client():
    with TestClient(create_app()) as c:
        yield c


def _events(cfg, n=300, seed=4):
    return [e.to_dict() for e in generate_synthetic(cfg.synth, n, seed)]


def test_session_lifecycle(client, example_doc):
    r = client.post("/sessions", json={"config": example_doc, "seed": 1})
    assert r.status_code == 201
    info = r.json()
    assert (info["width"], info["height"], info["dim"], info["step"]) == (8, 8, 2, 0)
    sid = info["id"]
    assert [s["id"] for s in client.get("/sessions").json()] == [sid]
    assert client.delete(f"/sessions/{sid}").status_code == 204
    assert client.get(f"/sessions/{sid}").status_code == 404
    assert client.get(f"/sessions/{sid}/metrics").status_code == 404


def test_bad_config_is_422(client, example_doc):
    example_doc["tissue"]["width"] = 0
    r = client.post("/sessions", json={"config": example_doc})
    assert r.status_code == 422 and "tissue.width" in r.json()["detail"]


def test_events_endpoint_matches_library(client, example_doc):
    example_doc["gate"]["warmup_steps"] = 100
    cfg = parse_config(example_doc)
    events = _events(cfg)
    expected = [ag.to_dict() for ag in Pipeline(cfg).ingest_all(events)]
    sid = client.post("/sessions", json={"config": example_doc}).json()["id"]
    got = []
    for i in range(0, len(events), 70):
        r = client.post(f"/sessions/{sid}/events", json={"events": events[i:i + 70]})
        assert r.status_code == 200
        got += r.json()["antigens"]
    assert json.dumps(got) == json.dumps(expected)
    m = client.get(f"/sessions/{sid}/metrics").json()
    assert m["events_ingested"] == 300 and m["antigens_emitted"] == len(expected)


def test_ndjson_ingest_counts_bad_lines(client, example_doc):
    sid = client.post("/sessions", json={"config": example_doc}).json()["id"]
    body = '{"ts": 0, "features": [1, 2]}\n{broken\n{"ts": 1, "features": [1]}\n'
    r = client.post(f"/sessions/{sid}/ingest", content=body)
    assert r.json()["ingested"] == 3 and r.json()["skipped"] == 2


def test_receptor_event_over_http(client, example_doc):
    sid = client.post("/sessions", json={"config": example_doc}).json()["id"]
    r = client.post(f"/sessions/{sid}/events", json={"events": [
        {"ts": 1, "source": "ssh", "features": [0.0, 0.0], "raw": {"failed_logins": 9, "port": 22}}]})
    ag = r.json()["antigens"][0]
    assert ag["danger"] == 0.95 and ag["active_receptors"] == ["brute_force", "remote_shell"]
    att = client.get(f"/sessions/{sid}/attention", params={"k": 2}).json()
    assert len(att["hotspots"]) == 2 and 0 < att["priority_share"] <= 1


def test_exports_and_snapshot_resume(client, example_doc):
    example_doc["gate"]["warmup_steps"] = 100
    cfg = parse_config(example_doc)
    events = _events(cfg, 400)
    sid = client.post("/sessions", json={"config": example_doc}).json()["id"]
    first = client.post(f"/sessions/{sid}/events", json={"events": events[:200]}).json()["antigens"]
    grid = client.get(f"/sessions/{sid}/grid").text
    assert grid.splitlines()[0].startswith("row,col,w0,w1") and len(grid.splitlines()) == 65
    assert client.get(f"/sessions/{sid}/field").text.startswith("row,col,level")
    snap = client.get(f"/sessions/{sid}/snapshot").json()
    sid2 = client.post("/sessions", json={"config": example_doc, "snapshot": snap}).json()["id"]
    rest = client.post(f"/sessions/{sid2}/events", json={"events": events[200:]}).json()["antigens"]
    expected = [ag.to_dict() for ag in Pipeline(cfg).ingest_all(events)]
    assert json.dumps(first + rest) == json.dumps(expected)

    snap["payload"]["tissue"]["step"] = 1
    assert client.post("/sessions", json={"config": example_doc, "snapshot": snap}).status_code == 422


def test_thin_client(example_doc):
    tc = TissueClient("http://tissue", client=TestClient(create_app()))
    sid = tc.create_session(example_doc, seed=3)
    res = tc.ingest_lines(sid, ['{"ts": 0, "features": [1, 2]}'])
    assert res["ingested"] == 1
    assert tc.metrics(sid)["events_processed"] == 1
    tc.delete_session(sid)
    with pytest.raises(ServiceError) as err:
        tc.metrics(sid)
    assert err.value.status == 404


@pytest.fixture(scope="module")
def live_server():
    config = uvicorn.Config(create_app(), host="127.0.0.1", port=0, log_level="warning")
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    for _ in range(200):
        if server.started:
            break
        time.sleep(0.025)
    port = server.servers[0].sockets[0].getsockname()[1]
    yield f"http://127.0.0.1:{port}"
    server.should_exit = True
    thread.join(timeout=5)


def test_cli_server_mode_matches_local_run(live_server, example_doc, write_config, tmp_path):
    example_doc["gate"]["warmup_steps"] = 300
    cfg = write_config(example_doc)
    stream = tmp_path / "e.jsonl"
    assert main(["synth", "--config", str(cfg), "--n", "2500", "--out", str(stream)]) == 0
    with stream.open("a") as fh:
        fh.write("garbage line\n")
    outputs = {}
    for mode in ("local", "remote"):
        d = tmp_path / mode
        d.mkdir()
        args = ["run", "--config", str(cfg), "--input", str(stream), "--out", str(d / "ag.jsonl"),
                "--metrics", str(d / "m.json"), "--grid-dump", str(d / "g.csv"),
                "--field-dump", str(d / "f.csv"), "--snapshot-out", str(d / "s.json")]
        if mode == "remote":
            args += ["--server", live_server]
        assert main(args) == 0
        outputs[mode] = {n: (d / n).read_bytes() for n in ("ag.jsonl", "g.csv", "f.csv", "s.json")}
        outputs[mode]["m"] = json.loads((d / "m.json").read_text())
    assert outputs["local"] == outputs["remote"]
    assert outputs["local"]["m"]["events_skipped"] == 1


def test_cli_server_unreachable(example_doc, write_config, tmp_path):
    stream = tmp_path / "e.jsonl"
    stream.write_text("")
    rc = main(["run", "--config", str(write_config(example_doc)), "--input", str(stream),
               "--out", str(tmp_path / "o"), "--server", "http://127.0.0.1:9"])
    assert rc == 3
