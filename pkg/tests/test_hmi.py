"""Operator service: auth, snapshots, command acks, the audit trail."""

from __future__ import annotations

import itertools

import pytest
from fastapi.testclient import TestClient
from starlette.websockets import WebSocketDisconnect

from sepsim.hmi.service import LiveSimulation, create_app
from sepsim.world import SimWorld

pytestmark = pytest.mark.filterwarnings("ignore::DeprecationWarning")

# Fast pace so sim time visibly moves during the short wall windows the
# test client holds a connection open.
PACE = 40.0


@pytest.fixture
def sim():
    live = LiveSimulation(SimWorld(seed=1), pace=PACE)
    yield live
    live.stop()


@pytest.fixture
def client(sim):
    with TestClient(create_app(sim, token="")) as c:
        yield c


@pytest.fixture
def secured(sim):
    with TestClient(create_app(sim, token="hunter2")) as c:
        yield c


def recv_until(ws, wanted: str, limit: int = 80) -> dict:
    for _ in range(limit):
        msg = ws.receive_json()
        if msg["type"] == wanted:
            return msg
    raise AssertionError(f"no {wanted!r} message within {limit} frames")


def send_command(ws, kind: str, args: dict | None = None, cid=itertools.count()) -> dict:
    command_id = f"c{next(cid)}"
    ws.send_json({"type": "command", "command_id": command_id, "kind": kind,
                  "args": args or {}})
    ack = recv_until(ws, "ack")
    assert ack["command_id"] == command_id
    return ack


def test_health_is_open(secured):
    res = secured.get("/health")
    assert res.status_code == 200
    body = res.json()
    assert body["status"] == "ok"
    assert body["sim_time"] >= 0.0


def test_state_requires_token(secured):
    assert secured.get("/state").status_code == 401
    assert secured.get("/state", headers={"Authorization": "Bearer wrong"}).status_code == 401


def test_state_with_token_both_ways(secured, sim):
    for _ in range(200):
        if sim.latest is not None:
            break
        secured.get("/health")
    res = secured.get("/state", headers={"Authorization": "Bearer hunter2"})
    assert res.status_code == 200
    assert res.json()["time_s"] >= 0.0
    assert secured.get("/state", params={"token": "hunter2"}).status_code == 200


def test_state_before_first_snapshot_is_404(sim):
    # No context manager, so startup never runs and nothing publishes.
    client = TestClient(create_app(sim, token=""))
    assert client.get("/state").status_code == 404


def test_websocket_rejects_bad_token(secured):
    with pytest.raises(WebSocketDisconnect) as exc:
        with secured.websocket_connect("/ws?token=wrong"):
            pass
    assert exc.value.code == 4401


def test_snapshot_stream_shape_and_motion(client):
    with client.websocket_connect("/ws") as ws:
        first = recv_until(ws, "snapshot")["snapshot"]
        assert {"time_s", "water_level_pct", "pump_running", "safety_latched",
                "network", "valves"} <= set(first)
        later = recv_until(ws, "snapshot")["snapshot"]
        assert later["time_s"] > first["time_s"]


def test_command_accepted_and_applied(client, sim):
    with client.websocket_connect("/ws") as ws:
        ack = send_command(ws, "set_setpoint", {"loop": "water", "percent": 45.0})
        assert ack["status"] == "accepted"
        assert sim.world.controller.water_pid.setpoint == 45.0


def test_out_of_range_setpoint_rejected(client):
    with client.websocket_connect("/ws") as ws:
        ack = send_command(ws, "set_setpoint", {"loop": "water", "percent": 90.0})
        assert ack["status"] == "rejected"
        assert "outside (0, 80.0)" in ack["reason"]


def test_unknown_kind_rejected_without_touching_the_sim(client):
    with client.websocket_connect("/ws") as ws:
        ack = send_command(ws, "make_coffee")
        assert ack["status"] == "rejected"
        assert "unknown command kind" in ack["reason"]


def test_malformed_message_gets_error_frame(client):
    with client.websocket_connect("/ws") as ws:
        ws.send_json({"type": "telemetry"})
        assert recv_until(ws, "error")["reason"] == "expected a command message"
        ws.send_json({"type": "command", "kind": "stop_pump"})
        assert "command_id" in recv_until(ws, "error")["reason"]


def test_emergency_stop_latches_and_locks_out_start(client):
    with client.websocket_connect("/ws") as ws:
        ack = send_command(ws, "emergency_stop")
        assert ack["status"] == "accepted"
        for _ in range(40):
            snap = recv_until(ws, "snapshot")["snapshot"]
            if snap["safety_latched"]:
                break
        assert snap["safety_latched"]
        assert not snap["pump_running"]
        assert snap["trip_reason"] == "emergency stop from operator"

        ack = send_command(ws, "start_pump")
        assert ack["status"] == "rejected"
        assert "latch" in ack["reason"]

        ack = send_command(ws, "reset_latch")
        assert ack["status"] == "accepted"
        ack = send_command(ws, "start_pump")
        assert ack["status"] == "accepted"


def test_audit_trail_records_every_submission(client, sim):
    with client.websocket_connect("/ws") as ws:
        send_command(ws, "set_valve", {"valve": "V3", "percent": 60.0})
        send_command(ws, "set_valve", {"valve": "V9", "percent": 60.0})
        send_command(ws, "make_coffee")
    assert len(sim.audit) == 3
    accepted = [entry["accepted"] for entry in sim.audit]
    assert accepted == [True, False, False]
    for entry in sim.audit:
        assert {"sim_time", "command_id", "kind", "args", "accepted", "reason"} <= set(entry)
        assert entry["sim_time"] >= 0.0


def test_jam_commands_flow_through(client, sim):
    with client.websocket_connect("/ws") as ws:
        ack = send_command(ws, "start_jam", {"channels": [14, 15], "intensity": 0.5})
        assert ack["status"] == "accepted"
        assert len(sim.world.mesh.env.jams) == 1
        ack = send_command(ws, "stop_jam")
        assert ack["status"] == "accepted"
