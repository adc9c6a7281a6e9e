import json

import pytest
from fastapi.testclient import TestClient

from residua.service import create_app

from support import REQUEST_POLICY

LOG1 = [
    '{"timepoint": 1}', '{"timepoint": 3}', '{"timepoint": 7}',
    '{"fact": {"pred": "req", "args": ["Alice", "mr"], "at": 3}}',
]
LOG2 = [
    '{"timepoint": 11}',
    '{"fact": {"pred": "inrole", "args": ["Bob", "records"], "at": 11}}',
    '{"fact": {"pred": "send", "args": ["Bob", "Alice", "M"], "at": 11}}',
]
PENDING = ["contains(M, Alice, mr, 11)", "~ftr(Alice, mr, 3)", "~ftr(Alice, mr, 7)"]


@pytest.fixture
def client(tmp_path):
    app = create_app(root=tmp_path)
    return TestClient(app)


def _create(client):
    response = client.post("/sessions", json={"policy": REQUEST_POLICY})
    assert response.status_code == 201
    return response.json()


def _drive_to_iteration_two(client):
    report = _create(client)
    sid = report["session"]
    assert client.post(f"/sessions/{sid}/logs", json={"lines": LOG1}).status_code == 200
    assert client.post(f"/sessions/{sid}/iterate").status_code == 200
    assert client.post(f"/sessions/{sid}/logs", json={"lines": LOG2}).status_code == 200
    report = client.post(f"/sessions/{sid}/iterate").json()
    return sid, report


def test_session_lifecycle_over_http(client):
    sid, report = _drive_to_iteration_two(client)
    assert [p["atom"] for p in report["pending"]] == PENDING

    residual = client.get(f"/sessions/{sid}/residual").json()
    assert residual["text"] == report["residual"]["text"]

    pending = client.get(f"/sessions/{sid}/pending").json()
    assert [p["atom"] for p in pending] == PENDING

    out = client.post(f"/sessions/{sid}/assertions", json={
        "atom": PENDING[0], "value": "tt", "justification": "payload verified"})
    assert out.status_code == 200
    assert [p["atom"] for p in out.json()["pending"]] == PENDING[1:]

    full = client.get(f"/sessions/{sid}/report").json()
    assert full == out.json()


def test_create_rejects_broken_policies(client):
    response = client.post("/sessions", json={"policy": "G nonsense("})
    assert response.status_code == 422
    response = client.post("/sessions", json={
        "policy": "objective tagged/4 mode(in={1}, out={2,3});\n"
                  "G forall m, q, t . (tagged(m, q, t)) => top"})
    assert response.status_code == 422
    assert "well-moded" in response.json()["detail"]


def test_ingest_errors_are_4xx(client):
    sid = _create(client)["session"]
    response = client.post(f"/sessions/{sid}/logs", json={"lines": ["not json"]})
    assert response.status_code == 422
    assert "line 1" in response.json()["detail"]


def test_assertion_errors_are_4xx(client):
    sid, _ = _drive_to_iteration_two(client)
    response = client.post(f"/sessions/{sid}/assertions", json={
        "atom": PENDING[0], "value": "tt", "justification": ""})
    assert response.status_code == 422
    response = client.post(f"/sessions/{sid}/assertions", json={
        "atom": "contains(M, Alice, mr, 99)", "value": "tt", "justification": "x"})
    assert response.status_code == 422
    assert "not pending" in response.json()["detail"]


def test_unknown_session_is_404(client):
    assert client.get("/sessions/zzz/report").status_code == 404
    assert client.post("/sessions/zzz/iterate").status_code == 404


def test_sessions_persist_across_app_instances(tmp_path):
    app = create_app(root=tmp_path)
    with TestClient(app) as client:
        sid, report = _drive_to_iteration_two(client)
    fresh = TestClient(create_app(root=tmp_path))
    again = fresh.get(f"/sessions/{sid}/report").json()
    assert again == report


def test_write_lock_conflicts_signal_retry(client):
    sid = _create(client)["session"]
    store = client.app.state.store
    lock = store.lock_for(sid)
    assert lock.acquire(blocking=False)
    try:
        response = client.post(f"/sessions/{sid}/iterate")
        assert response.status_code == 409
        assert "retry" in response.json()["detail"]
    finally:
        lock.release()
    assert client.post(f"/sessions/{sid}/iterate").status_code == 200


def test_static_token_enforced(tmp_path):
    app = create_app(root=tmp_path, token="sesame")
    client = TestClient(app)
    assert client.post("/sessions", json={"policy": REQUEST_POLICY}).status_code == 401
    ok = client.post("/sessions", json={"policy": REQUEST_POLICY},
                     headers={"Authorization": "Bearer sesame"})
    assert ok.status_code == 201


def test_api_report_equals_cli_report(tmp_path):
    """The two front doors must describe a session identically."""
    from residua.session import session_load, session_report

    app = create_app(root=tmp_path)
    client = TestClient(app)
    sid, api_report = _drive_to_iteration_two(client)
    cli_view = session_report(session_load(tmp_path / sid))
    assert json.dumps(api_report, sort_keys=True) == json.dumps(cli_view, sort_keys=True)
