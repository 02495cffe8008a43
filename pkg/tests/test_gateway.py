"""REST and websocket gateway over a live range."""
import time

import pytest
from fastapi.testclient import TestClient

from sgcr.compile import compile_range, load_bundle_files
from sgcr.gateway import create_app
from sgcr.samples import build_substation_bundle


@pytest.fixture(scope="module")
def spec():
    return compile_range(load_bundle_files(build_substation_bundle()))


@pytest.fixture()
def client(spec):
    app = create_app(spec, tick_ms=10.0, realtime=True)
    with TestClient(app) as tc:
        yield tc


def _wait_for(predicate, timeout=5.0):
    deadline = time.monotonic() + timeout
    while time.monotonic() < deadline:
        value = predicate()
        if value:
            return value
        time.sleep(0.01)
    raise AssertionError("condition not met within timeout")


def test_points_listing(client):
    body = _wait_for(lambda: (lambda b: b if b["tick"] >= 2 else None)(
        client.get("/points").json()))
    names = [p["name"] for p in body["points"]]
    assert names == ["S1.bus66.vm", "S1.cb0.pos", "S1.cbA.pos",
                     "S1.feederA.i"]
    by_name = {p["name"]: p for p in body["points"]}
    assert by_name["S1.bus66.vm"]["value"] == pytest.approx(1.0, abs=0.05)
    assert by_name["S1.cb0.pos"]["value"] is True
    assert by_name["S1.cb0.pos"]["writable"] is True
    assert by_name["S1.feederA.i"]["writable"] is False


def test_single_point_and_missing(client):
    _wait_for(lambda: client.get("/points").json()["tick"] >= 1)
    assert client.get("/points/S1.cb0.pos").json()["name"] == "S1.cb0.pos"
    assert client.get("/points/nope").status_code == 404


def test_command_round_trip(client):
    _wait_for(lambda: client.get("/points").json()["tick"] >= 1)
    resp = client.post("/points/S1.cb0.pos/command",
                       json={"value": False, "operator_id": "op7"})
    assert resp.status_code == 200
    assert resp.json()["ok"] is True
    _wait_for(lambda: client.get("/points/S1.cb0.pos").json()["value"]
              is False)
    service = client.app.state.service
    writes = [e for e in service.kernel.store.audit_log()
              if e.path == "S1_CB0.pos" and e.actor == "scada"]
    assert writes and writes[-1].value is False
    assert service.command_log[-1]["operator_id"] == "op7"


def test_command_rejections(client):
    _wait_for(lambda: client.get("/points").json()["tick"] >= 1)
    read_only = client.post("/points/S1.bus66.vm/command",
                            json={"value": 2.0})
    assert read_only.status_code == 403
    assert read_only.json()["error"] == "NotWritable"
    assert client.post("/points/nope/command",
                       json={"value": True}).status_code == 404
    assert client.post("/points/S1.cb0.pos/command",
                       json={}).status_code == 422


def test_command_unreachable_device(client):
    _wait_for(lambda: client.get("/points").json()["tick"] >= 1)
    service = client.app.state.service
    cable = service.kernel.emulator.topology.links_of("S1_IED0")[0].cable
    service.kernel.emulator.drop_link(cable)
    resp = client.post("/points/S1.cb0.pos/command", json={"value": False})
    assert resp.status_code == 502
    assert resp.json()["error"] == "IedUnreachable"


def test_stream_sends_every_tick_and_tracks_commands(client):
    _wait_for(lambda: client.get("/points").json()["tick"] >= 1)
    with client.websocket_connect("/stream") as ws:
        first = ws.receive_json()
        assert set(first) == {"tick", "updates"}
        # first broadcast to a fresh service carries the full point set;
        # later subscribers may join mid-run and see only deltas
        client.post("/points/S1.cbA.pos/command", json={"value": False})
        seen = {}
        for _ in range(200):
            msg = ws.receive_json()
            for update in msg["updates"]:
                seen[update["point"]] = update["value"]
            if seen.get("S1.cbA.pos") is False:
                break
        assert seen.get("S1.cbA.pos") is False


def test_model_document(client):
    body = client.get("/model").json()
    assert body["power"]["layer"] == "power"
    assert body["cyber"]["layer"] == "cyber"
    assert {p["name"] for p in body["points"]} == {
        "S1.bus66.vm", "S1.feederA.i", "S1.cb0.pos", "S1.cbA.pos"}


def test_model_points_name_their_switch(client):
    body = client.get("/model").json()
    by_name = {p["name"]: p for p in body["points"]}
    switch_ids = {s["id"] for s in body["power"]["switches"]}
    assert by_name["S1.cb0.pos"]["switch"] in switch_ids
    assert by_name["S1.cbA.pos"]["switch"] in switch_ids
    assert by_name["S1.cb0.pos"]["switch"] != by_name["S1.cbA.pos"]["switch"]
    assert by_name["S1.bus66.vm"]["switch"] is None
    assert by_name["S1.feederA.i"]["switch"] is None
