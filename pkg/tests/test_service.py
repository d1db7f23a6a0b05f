import json
import socket
import time

import pytest
from fastapi.testclient import TestClient

from vigil.engine import CalibrationConfig
from vigil.ingest import ReplaySpec, alternating_session, preset, synthesize, write_recording
from vigil.records import SessionMeta, load_session
from vigil.service import (
    DEFAULT_LIVE_BUFFER,
    DEFAULT_SESSION_CAP,
    SessionRuntime,
    create_app,
)
from vigil.spectral import EpochConfig

SYNTH_BODY = {
    "source": {"kind": "synthetic", "config": alternating_session().to_dict()},
    "mode": "instructed",
}


@pytest.fixture()
def client(tmp_path):
    app = create_app(data_dir=str(tmp_path), session_cap=4)
    with TestClient(app) as c:
        yield c


def network_body(port=0):
    return {"source": {"kind": "network", "listen": f"127.0.0.1:{port}"}, "mode": "natural"}


def wait_until(predicate, timeout=15.0):
    deadline = time.monotonic() + timeout
    while time.monotonic() < deadline:
        if predicate():
            return True
        time.sleep(0.01)
    return False


def wait_ended(client, sid):
    assert wait_until(lambda: client.get(f"/sessions/{sid}").json()["ended"])
    return client.get(f"/sessions/{sid}").json()


class Producer:
    """Feeds a session's network listener and lets tests sync on the sample clock."""

    def __init__(self, client, sid, port):
        self.client = client
        self.sid = sid
        self.conn = socket.create_connection(("127.0.0.1", port), timeout=5)

    def send_range(self, j_start, j_stop, fs=256):
        lines = []
        for j in range(j_start, j_stop):
            lines.append('{"t":%r,"uv":%r}' % (j / fs, 0.0))
        self.conn.sendall(("\n".join(lines) + "\n").encode())

    def send_samples(self, samples):
        lines = ['{"t":%r,"uv":%r}' % (s.t, s.uv) for s in samples]
        self.conn.sendall(("\n".join(lines) + "\n").encode())

    def wait_consumed(self, t):
        assert wait_until(
            lambda: self.client.get(f"/sessions/{self.sid}").json()["latest_t"] >= t
        )

    def close(self):
        self.conn.close()


def start_network_session(client, body_extra=None):
    body = network_body()
    if body_extra:
        body.update(body_extra)
    # pick a free port first so the producer knows where to connect
    probe = socket.socket()
    probe.bind(("127.0.0.1", 0))
    port = probe.getsockname()[1]
    probe.close()
    body["source"]["listen"] = f"127.0.0.1:{port}"
    meta = client.post("/sessions", json=body).json()
    producer = Producer(client, meta["session_id"], port)
    return meta, producer


class TestStartSession:
    def test_synthetic_defaults(self, client):
        resp = client.post("/sessions", json=SYNTH_BODY)
        assert resp.status_code == 201
        meta = resp.json()
        assert meta["mode"] == "instructed"
        assert meta["session_id"]
        # phase snapshot is calibrating (the unpaced run may already be past it)
        assert meta["phase"]["phase"] in ("calibrating", "monitoring")
        wait_ended(client, meta["session_id"])

    def test_missing_source(self, client):
        resp = client.post("/sessions", json={})
        assert resp.status_code == 400
        assert "source" in resp.json()["detail"]

    def test_invalid_band_names_field(self, client):
        body = dict(SYNTH_BODY)
        body["epoch"] = {"band_lo_hz": 8.0, "band_hi_hz": 4.0}
        resp = client.post("/sessions", json=body)
        assert resp.status_code == 400
        assert "band" in resp.json()["detail"]

    def test_missing_replay_file(self, client):
        body = {"source": {"kind": "replay", "path": "/nope/missing.csv"}}
        resp = client.post("/sessions", json=body)
        assert resp.status_code == 400
        assert "missing.csv" in resp.json()["detail"]

    def test_capacity_cap(self, tmp_path):
        app = create_app(data_dir=str(tmp_path), session_cap=2)
        with TestClient(app) as client:
            metas = []
            for _ in range(2):
                meta, producer = start_network_session(client)
                metas.append((meta, producer))
            resp = client.post("/sessions", json=network_body())
            assert resp.status_code == 409
            assert "capacity" in resp.json()["detail"]
            for meta, producer in metas:
                client.post(f"/sessions/{meta['session_id']}/stop")
                producer.close()

    def test_unknown_session_404(self, client):
        assert client.get("/sessions/zzz").status_code == 404


class TestTags:
    def test_tag_on_fresh_session(self, client):
        meta, producer = start_network_session(client)
        sid = meta["session_id"]
        resp = client.post(f"/sessions/{sid}/tags", json={"status": "closed"})
        assert resp.status_code == 200
        assert resp.json() == {"type": "tag", "t": 0.0, "status": "closed"}
        client.post(f"/sessions/{sid}/stop")
        producer.close()

    def test_tag_unknown_session(self, client):
        resp = client.post("/sessions/nope/tags", json={"status": "open"})
        assert resp.status_code == 404

    def test_equal_timestamp_conflict(self, client):
        meta, producer = start_network_session(client)
        sid = meta["session_id"]
        assert client.post(f"/sessions/{sid}/tags", json={"status": "closed"}).status_code == 200
        resp = client.post(f"/sessions/{sid}/tags", json={"status": "open"})
        assert resp.status_code == 409
        client.post(f"/sessions/{sid}/stop")
        producer.close()

    def test_tag_after_end_conflict(self, client):
        meta, producer = start_network_session(client)
        sid = meta["session_id"]
        client.post(f"/sessions/{sid}/stop")
        producer.close()
        resp = client.post(f"/sessions/{sid}/tags", json={"status": "open"})
        assert resp.status_code == 409

    def test_bad_status(self, client):
        meta, producer = start_network_session(client)
        sid = meta["session_id"]
        resp = client.post(f"/sessions/{sid}/tags", json={"status": "sideways"})
        assert resp.status_code == 400
        client.post(f"/sessions/{sid}/stop")
        producer.close()


class TestStop:
    def test_full_synthetic_session_has_30_verdicts(self, client):
        meta = client.post("/sessions", json=SYNTH_BODY).json()
        final = wait_ended(client, meta["session_id"])
        assert final["verdict_count"] == 30

    def test_stop_during_calibration(self, client):
        meta, producer = start_network_session(client)
        sid = meta["session_id"]
        resp = client.post(f"/sessions/{sid}/stop")
        assert resp.status_code == 200
        final = resp.json()
        assert final["ended"] is True
        assert final["verdict_count"] == 0
        producer.close()

    def test_double_stop_conflict(self, client):
        meta, producer = start_network_session(client)
        sid = meta["session_id"]
        assert client.post(f"/sessions/{sid}/stop").status_code == 200
        assert client.post(f"/sessions/{sid}/stop").status_code == 409
        producer.close()

    def test_stop_unknown_404(self, client):
        assert client.post("/sessions/none/stop").status_code == 404


class TestPersistence:
    def test_sealed_file_is_complete(self, client, tmp_path):
        meta = client.post("/sessions", json=SYNTH_BODY).json()
        sid = meta["session_id"]
        wait_ended(client, sid)
        record = load_session(str(tmp_path / f"{sid}.jsonl"))
        kinds = [e["type"] for e in record.events]
        assert kinds.count("baseline") == 1
        assert kinds.count("epoch") == 30
        assert kinds.count("ended") == 1
        assert kinds[-1] == "ended"
        assert record.ended["reason"] == "end-of-stream"
        indices = [e["index"] for e in record.verdicts]
        assert indices == sorted(indices)
        # no phase records are persisted
        assert "phase" not in kinds

    def test_network_session_records_raw_by_default(self, client, tmp_path):
        meta, producer = start_network_session(client)
        sid = meta["session_id"]
        producer.send_range(0, 10)
        producer.wait_consumed(9 / 256)
        client.post(f"/sessions/{sid}/stop")
        producer.close()
        raw = (tmp_path / f"{sid}.csv").read_text().splitlines()
        assert raw[0] == "t,uv"
        assert len(raw) == 11

    def test_stream_error_seals_with_reason(self, client, tmp_path):
        meta, producer = start_network_session(client)
        sid = meta["session_id"]
        producer.send_samples([])
        producer.conn.sendall(b'{"t":1.0,"uv":0.0}\n{"t":0.5,"uv":0.0}\n')
        final = wait_ended(client, sid)
        record = load_session(str(tmp_path / f"{sid}.jsonl"))
        assert record.ended["reason"].startswith("stream-error")
        producer.close()

    def test_skip_count_surfaces(self, client):
        meta, producer = start_network_session(client)
        sid = meta["session_id"]
        producer.conn.sendall(b'{"t":0.0,"uv":1.0}\ngarbage\n{"t":0.5,"uv":1.0}\n')
        producer.wait_consumed(0.5)
        final = client.post(f"/sessions/{sid}/stop").json()
        assert final["skip_count"] == 1
        producer.close()


class TestReport:
    def test_report_requires_ended(self, client):
        meta, producer = start_network_session(client)
        sid = meta["session_id"]
        assert client.get(f"/sessions/{sid}/report").status_code == 409
        client.post(f"/sessions/{sid}/stop")
        producer.close()

    def test_report_requires_tags(self, client):
        meta = client.post("/sessions", json=SYNTH_BODY).json()
        sid = meta["session_id"]
        wait_ended(client, sid)
        resp = client.get(f"/sessions/{sid}/report")
        assert resp.status_code == 409
        assert "tag" in resp.json()["detail"]

    def test_perfect_separation_session(self, client):
        """Feed the clean alternating preset over the network, tagging each
        segment boundary at its exact sample time."""
        meta, producer = start_network_session(client)
        sid = meta["session_id"]
        samples = list(synthesize(alternating_session()))
        fs = 256
        boundaries = [0.0, 30.0, 60.0, 90.0, 120.0, 150.0]
        statuses = ["closed", "open", "closed", "open", "closed", "open"]
        start = 0
        for boundary, status in zip(boundaries, statuses):
            j = int(boundary * fs)
            if j > start:
                producer.send_samples(samples[start:j])
                start = j
            producer.wait_consumed(max((j - 1), 0) / fs)
            resp = client.post(f"/sessions/{sid}/tags", json={"status": status})
            assert resp.status_code == 200
        producer.send_samples(samples[start:])
        producer.wait_consumed(samples[-1].t)
        client.post(f"/sessions/{sid}/stop")
        producer.close()
        resp = client.get(f"/sessions/{sid}/report")
        assert resp.status_code == 200
        body = resp.json()
        assert body["report"]["n_epochs"] == 30
        assert body["report"]["accuracy"] == 1.0
        norm = body["confusion"]["normalized"]
        assert norm["open"]["open"] == 1.0
        assert norm["closed"]["closed"] == 1.0
        assert norm["open"]["closed"] == 0.0


class TestLiveStream:
    def test_unknown_session_ws(self, client):
        with client.websocket_connect("/sessions/nope/live") as ws:
            frame = json.loads(ws.receive_text())
            assert frame["error"] == "not-found"

    def test_first_event_is_calibrating_phase(self, client):
        meta, producer = start_network_session(client)
        sid = meta["session_id"]
        with client.websocket_connect(f"/sessions/{sid}/live") as ws:
            frame = json.loads(ws.receive_text())
            assert frame == {"type": "phase", "phase": "calibrating", "completed": 0}
        client.post(f"/sessions/{sid}/stop")
        producer.close()

    def test_two_subscribers_identical_sequences(self, client):
        meta, producer = start_network_session(client)
        sid = meta["session_id"]
        with client.websocket_connect(f"/sessions/{sid}/live") as ws1:
            with client.websocket_connect(f"/sessions/{sid}/live") as ws2:
                # read the phase snapshots first so both are registered
                first1 = json.loads(ws1.receive_text())
                first2 = json.loads(ws2.receive_text())
                assert first1 == first2
                producer.send_range(0, 2 * 1280)
                producer.wait_consumed((2 * 1280 - 1) / 256)
                client.post(f"/sessions/{sid}/tags", json={"status": "open"})
                client.post(f"/sessions/{sid}/stop")

                def drain(ws):
                    frames = []
                    while True:
                        frame = json.loads(ws.receive_text())
                        frames.append(frame)
                        if frame["type"] == "ended":
                            return frames

                assert drain(ws1) == drain(ws2)
        producer.close()

    def test_epoch_frames_stream_in_order(self, client):
        meta = client.post("/sessions", json=SYNTH_BODY).json()
        sid = meta["session_id"]
        wait_ended(client, sid)
        # subscribing after the end still yields the ended frame
        with client.websocket_connect(f"/sessions/{sid}/live") as ws:
            frame = json.loads(ws.receive_text())
            assert frame["type"] == "ended"
            assert frame["verdict_count"] == 30


class TestSubscriberOverflow:
    def test_default_buffer_size(self):
        assert DEFAULT_LIVE_BUFFER == 1024

    def test_slow_subscriber_disconnected(self, tmp_path):
        meta = SessionMeta(
            session_id="overflow",
            source=ReplaySpec(path="unused.csv"),
            epoch_cfg=EpochConfig(),
            calib_cfg=CalibrationConfig(),
            mode="natural",
        )
        runtime = SessionRuntime(meta, str(tmp_path), live_buffer=8)
        sub, ended = runtime.subscribe()
        assert ended is None
        # the phase snapshot occupies one slot; fill the rest and overflow
        for i in range(7):
            runtime.emit({"type": "tag", "t": float(i), "status": "open"}, persist=False)
        assert not sub.overflowed
        runtime.emit({"type": "tag", "t": 99.0, "status": "open"}, persist=False)
        assert sub.overflowed
        assert sub not in runtime.subscribers
        runtime.seal("requested")
