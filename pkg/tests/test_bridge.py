"""Websocket bridge: sessions, message handling, stepped-mode equivalence."""

from __future__ import annotations

import json
import math

import pytest
from fastapi.testclient import TestClient

from telesteer.bridge import PROTOCOL_VERSION, create_app
from telesteer.scenarios import scenario_from_dict
from telesteer.simulate import SimEngine


def scenario_dict(obstacles=((12.0, -2.2, 0.0, 4.6, 1.8),), duration=1.0) -> dict:
    return {
        "version": 1,
        "name": "bridge_probe",
        "duration_s": duration,
        "speed_mps": 3.0,
        "start": {"x_m": 0.0, "y_m": 0.0, "heading_deg": 0.0},
        "vehicle": {"l_f_m": 1.3, "l_r_m": 1.5, "l_f_bumper_m": 2.1, "width_m": 1.8},
        "gains": {"gamma1": 0.0, "gamma2": 0.75, "gamma3": 0.25},
        "field": {"order": 4, "alpha": 1.0, "slope_exp": 1.0},
        "path_m": [[-2.0, 0.0], [70.0, 0.0]],
        "obstacles": [
            {"x_m": o[0], "y_m": o[1], "heading_deg": o[2], "length_m": o[3], "width_m": o[4]}
            for o in obstacles
        ],
    }


@pytest.fixture()
def client():
    app = create_app(realtime=False)
    with TestClient(app) as c:
        yield c


def open_session(client, mode="sim", assisted=True, scenario=None) -> str:
    body = {"mode": mode, "assisted": assisted}
    body["scenario"] = scenario if scenario is not None else scenario_dict()
    resp = client.post("/session", json=body)
    assert resp.status_code == 200, resp.text
    return resp.json()["session"]


def test_health_and_scenario_listing(client):
    health = client.get("/health").json()
    assert health["status"] == "ok"
    assert health["version"] == PROTOCOL_VERSION
    assert health["sessions"] == 0
    listed = client.get("/scenarios").json()["builtin"]
    assert "parking_lot" in listed and "lane_change" in listed


def test_invalid_scenario_is_rejected_without_allocation(client):
    resp = client.post("/session", json={"scenario": "no_such_scenario"})
    assert resp.status_code == 400
    resp = client.post("/session", json={"scenario": {"version": 1}})
    assert resp.status_code == 400
    resp = client.post("/session", json={"scenario": 7})
    assert resp.status_code == 400
    resp = client.post("/session", json={"scenario": "parking_lot", "mode": "warp"})
    assert resp.status_code == 400
    assert client.get("/health").json()["sessions"] == 0


def test_hello_carries_geometry(client):
    sid = open_session(client)
    with client.websocket_connect(f"/ws/{sid}") as ws:
        hello = ws.receive_json()
    assert hello["type"] == "hello"
    assert hello["version"] == PROTOCOL_VERSION
    assert hello["session"] == sid
    assert hello["scenario"] == "bridge_probe"
    assert hello["t_s"] == 0.05
    assert hello["alpha"] == 1.0
    assert hello["delta_limit"] == pytest.approx(math.radians(35.0))
    assert len(hello["path"]) == 2
    assert len(hello["obstacles"]) == 1
    obstacle = hello["obstacles"][0]
    assert len(obstacle["outline"]) == 4
    assert len(obstacle["bound"]) == 96
    assert hello["vehicle"]["width"] == 1.8
    assert hello["start"] == {"x": 0.0, "y": 0.0, "heading": 0.0}


def test_stepped_run_matches_batch_engine_exactly(client):
    spec = scenario_dict()
    sid = open_session(client, mode="sim", assisted=True, scenario=spec)
    reference = SimEngine(scenario_from_dict(spec), assisted=True)

    with client.websocket_connect(f"/ws/{sid}") as ws:
        ws.receive_json()  # hello
        ws.send_json({"type": "start"})
        ws.send_json({"type": "step", "n": 20})
        for i in range(20):
            state = ws.receive_json()
            record = reference.tick()
            assert state["type"] == "state"
            assert state["tick"] == i
            # float-for-float equality: same engine code drives both
            assert state["x"] == record.x
            assert state["y"] == record.y
            assert state["heading"] == record.heading
            assert state["delta_applied"] == record.delta_applied
            assert state["delta_ref"] == record.delta_ref
            assert state["p_fl"] == record.p_fl
            assert state["p_fr"] == record.p_fr


def test_steer_clamp_hold_and_normalized(client):
    sid = open_session(client, mode="live", assisted=False)
    lim = math.radians(35.0)
    with client.websocket_connect(f"/ws/{sid}") as ws:
        ws.receive_json()
        ws.send_json({"type": "start"})
        ws.send_json({"type": "steer", "delta_ref": 10.0})  # far beyond the wheel
        ws.send_json({"type": "step"})
        state = ws.receive_json()
        assert state["delta_ref"] == pytest.approx(lim)
        # zero-order hold: no new steer message, the value stays
        ws.send_json({"type": "step"})
        assert ws.receive_json()["delta_ref"] == pytest.approx(lim)
        # normalized stick position maps onto the wheel range
        ws.send_json({"type": "steer", "normalized": -0.5, "client_ts": 123.5})
        ws.send_json({"type": "step"})
        state = ws.receive_json()
        assert state["delta_ref"] == pytest.approx(-0.5 * lim)
        assert state["client_ts"] == 123.5
        # a steer message without a position is answered, not crashed on
        ws.send_json({"type": "steer"})
        err = ws.receive_json()
        assert err["type"] == "error"


def test_intervention_flag(client):
    sid = open_session(client, mode="live", assisted=False, scenario=scenario_dict(obstacles=()))
    with client.websocket_connect(f"/ws/{sid}") as ws:
        ws.receive_json()
        ws.send_json({"type": "start"})
        ws.send_json({"type": "step"})
        state = ws.receive_json()
        assert state["intervention"] is False  # zero steer, zero applied
        ws.send_json({"type": "steer", "delta_ref": 0.6})
        ws.send_json({"type": "step"})
        state = ws.receive_json()
        # the wheel cannot jump 0.6 rad in one tick: big gap, flagged
        assert state["intervention"] is True


def test_step_discipline(client):
    sid = open_session(client)
    with client.websocket_connect(f"/ws/{sid}") as ws:
        ws.receive_json()
        ws.send_json({"type": "step"})
        err = ws.receive_json()
        assert err["type"] == "error" and "start" in err["message"]
        ws.send_json({"type": "start"})
        ws.send_json({"type": "step", "n": 2})
        assert ws.receive_json()["tick"] == 0
        assert ws.receive_json()["tick"] == 1
        ws.send_json({"type": "stop"})
        ws.send_json({"type": "step"})
        assert ws.receive_json()["type"] == "error"


def test_step_rejected_in_realtime_mode():
    app = create_app(realtime=True)
    with TestClient(app) as client:
        sid = open_session(client)
        with client.websocket_connect(f"/ws/{sid}") as ws:
            ws.receive_json()
            ws.send_json({"type": "step"})
            err = ws.receive_json()
            assert err["type"] == "error"
            assert "stepped" in err["message"]


def test_sessions_are_independent(client):
    sid_a = open_session(client)
    sid_b = open_session(client)
    assert sid_a != sid_b
    assert client.get("/health").json()["sessions"] == 2
    with client.websocket_connect(f"/ws/{sid_a}") as wa:
        with client.websocket_connect(f"/ws/{sid_b}") as wb:
            wa.receive_json()
            wb.receive_json()
            wa.send_json({"type": "start"})
            wb.send_json({"type": "start"})
            wa.send_json({"type": "step", "n": 3})
            last = [wa.receive_json() for _ in range(3)][-1]
            wb.send_json({"type": "step"})
            other = wb.receive_json()
    assert last["tick"] == 2
    assert other["tick"] == 0
    assert last["x"] != other["x"]


def test_reset_restarts_from_scratch(client):
    sid = open_session(client)
    with client.websocket_connect(f"/ws/{sid}") as ws:
        ws.receive_json()
        ws.send_json({"type": "start"})
        ws.send_json({"type": "step", "n": 3})
        first_run = [ws.receive_json() for _ in range(3)]
        ws.send_json({"type": "reset"})
        ws.send_json({"type": "start"})
        ws.send_json({"type": "step"})
        again = ws.receive_json()
    assert again["tick"] == 0
    assert again["x"] == first_run[0]["x"]


def test_set_speed_clamped_and_applied(client):
    sid = open_session(client)
    manager = client.app.state.manager
    with client.websocket_connect(f"/ws/{sid}") as ws:
        ws.receive_json()
        ws.send_json({"type": "set_speed", "v": 100.0})
        ws.send_json({"type": "start"})
        ws.send_json({"type": "step"})
        ws.receive_json()
    assert manager.get(sid).engine.v == 30.0  # hard ceiling


def test_malformed_and_unknown_messages(client):
    sid = open_session(client)
    with client.websocket_connect(f"/ws/{sid}") as ws:
        ws.receive_json()
        ws.send_text("this is not json")
        assert ws.receive_json()["message"] == "malformed message"
        ws.send_text(json.dumps([1, 2, 3]))
        assert ws.receive_json()["message"] == "malformed message"
        ws.send_json({"type": "warp"})
        assert "unknown type" in ws.receive_json()["message"]


def test_delete_session(client):
    sid = open_session(client)
    assert client.get("/health").json()["sessions"] == 1
    resp = client.delete(f"/session/{sid}")
    assert resp.status_code == 200
    assert client.get("/health").json()["sessions"] == 0
    assert client.delete(f"/session/{sid}").status_code == 404
    # connecting to a closed session is refused
    with pytest.raises(Exception):
        with client.websocket_connect(f"/ws/{sid}") as ws:
            ws.receive_json()
