"""Operate the range through the SCADA gateway's REST and stream APIs.

The gateway runs the kernel on a background thread and exposes named
points over HTTP plus a WebSocket tick stream.  Operator commands do not
touch the store directly: the gateway sends a write request frame over
the emulated network to the owning device, which applies it and answers.

`sgcr serve <bundle-dir>` hosts the same app with uvicorn; here the test
client drives it in-process.
"""

import time

from fastapi.testclient import TestClient

from sgcr.compile import compile_range, load_bundle_files
from sgcr.gateway import create_app
from sgcr.samples import build_three_substation_bundle

spec = compile_range(load_bundle_files(build_three_substation_bundle()))
app = create_app(spec, tick_ms=10.0, realtime=True)

with TestClient(app) as client:
    time.sleep(0.1)  # let a few ticks elapse

    listing = client.get("/points").json()
    print(f"tick {listing['tick']}, {len(listing['points'])} SCADA points:")
    for point in listing["points"][:6]:
        mark = "rw" if point["writable"] else "ro"
        print(f"  [{mark}] {point['name']:16s} = {point['value']}")

    # -- command round trip -----------------------------------------------------
    before = client.get("/points/S1.tie.pos").json()
    reply = client.post("/points/S1.tie.pos/command",
                        json={"value": False, "operator_id": "trainee1"})
    print(f"\nopen tie command: {reply.json()}")

    time.sleep(0.1)
    after = client.get("/points/S1.tie.pos").json()
    print(f"S1.tie.pos: {before['value']} -> {after['value']}")

    # The partner station mirrors the opening on its own (interlock).
    deadline = time.time() + 2.0
    while time.time() < deadline:
        partner = client.get("/points/S2.tie.pos").json()
        if partner["value"] is False:
            break
        time.sleep(0.02)
    print(f"S2.tie.pos mirrored by interlock: {partner['value'] is False}")

    # -- rejected commands --------------------------------------------------------
    nack = client.post("/points/S1.bus66.vm/command", json={"value": 2.0})
    print(f"\nwrite to a measurement: {nack.status_code} {nack.json()}")

    # -- live stream ----------------------------------------------------------------
    with client.websocket_connect("/stream") as ws:
        msg = ws.receive_json()
        print(f"\nstream message: tick {msg['tick']}, "
              f"{len(msg['updates'])} updates")

    service = app.state.service
    print(f"\ngateway issued {len(service.command_log)} command(s), "
          f"all as network frames, none as store writes")
