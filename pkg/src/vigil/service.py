"""Session orchestration service: HTTP control, WebSocket fan-out, persistence.

One pipeline thread per session (source -> epochs -> classification); the
HTTP layer only touches the shared registry and per-session state under its
lock.  Live subscribers get bounded queues: a subscriber that stalls past
the buffer is disconnected instead of stalling the pipeline.
"""

from __future__ import annotations

import logging
import os
import queue
import threading
import uuid
from datetime import datetime, timezone

from fastapi import FastAPI, HTTPException, WebSocket, WebSocketDisconnect
from fastapi.middleware.cors import CORSMiddleware
from starlette.concurrency import run_in_threadpool

from . import ingest, records
from .errors import ConfigError, StreamError, VigilError
from .pipeline import SessionPipeline, phase_frame
from .records import SessionMeta, calib_cfg_from_dict, epoch_cfg_from_dict

log = logging.getLogger(__name__)

DEFAULT_DATA_DIR = "./data"
DEFAULT_SESSION_CAP = 16
DEFAULT_LIVE_BUFFER = 1024


def data_dir_from_env(explicit: str | None = None) -> str:
    return explicit or os.environ.get("VIGIL_DATA_DIR") or DEFAULT_DATA_DIR


class LiveSubscriber:
    def __init__(self, buffer_size: int):
        self.queue: queue.Queue = queue.Queue(maxsize=buffer_size)
        self.overflowed = False


class SessionRuntime:
    """All mutable state of one live session; ``lock`` guards everything."""

    def __init__(self, meta: SessionMeta, data_dir: str, live_buffer: int):
        self.meta = meta
        self.lock = threading.RLock()
        self.live_buffer = live_buffer
        self.pipeline = SessionPipeline(meta.epoch_cfg, meta.calib_cfg)
        self.subscribers: list[LiveSubscriber] = []
        self.stop_event = threading.Event()
        self.ended = False
        self.ended_frame: dict | None = None
        self.last_tag_t: float | None = None
        self.tag_count = 0
        self.listener: ingest.NetworkListener | None = None
        self.thread: threading.Thread | None = None
        self.path = os.path.join(data_dir, f"{meta.session_id}.jsonl")
        self.raw_path = os.path.join(data_dir, f"{meta.session_id}.csv")
        self._file = open(self.path, "w", newline="\n")
        self._file.write(records.dump_record(records.meta_record(meta)) + "\n")
        self._file.flush()
        self._raw_file = None
        if meta.record_raw:
            self._raw_file = open(self.raw_path, "w", newline="\n")
            self._raw_file.write(ingest.CSV_HEADER + "\n")

    # -- event emission (call with or without the lock held; RLock) --------

    def emit(self, frame: dict, persist: bool) -> None:
        with self.lock:
            if persist and not self._file.closed:
                self._file.write(records.dump_record(frame) + "\n")
                self._file.flush()
            for sub in list(self.subscribers):
                try:
                    sub.queue.put_nowait(frame)
                except queue.Full:
                    sub.overflowed = True
                    self.subscribers.remove(sub)

    def subscribe(self) -> tuple[LiveSubscriber, dict | None]:
        """Register a live subscriber; first delivered event is a snapshot of
        the current phase (or the ended frame if the session is over)."""
        with self.lock:
            sub = LiveSubscriber(self.live_buffer)
            if self.ended:
                return sub, self.ended_frame
            sub.queue.put_nowait(phase_frame(self.pipeline.phase))
            self.subscribers.append(sub)
            return sub, None

    def unsubscribe(self, sub: LiveSubscriber) -> None:
        with self.lock:
            if sub in self.subscribers:
                self.subscribers.remove(sub)

    # -- pipeline thread ----------------------------------------------------

    def run(self, source) -> None:
        reason = "end-of-stream"
        try:
            for s in source:
                if self.stop_event.is_set():
                    reason = "requested"
                    break
                if self._raw_file is not None:
                    self._raw_file.write(f"{s.t!r},{s.uv!r}\n")
                for frame in self.pipeline.process(s.t, s.uv):
                    self.emit(frame, persist=frame["type"] != "phase")
            else:
                for frame in self.pipeline.finish():
                    self.emit(frame, persist=frame["type"] != "phase")
            if self.stop_event.is_set():
                reason = "requested"
        except StreamError as exc:
            if self.stop_event.is_set():
                reason = "requested"
            else:
                log.warning("session %s stream error: %s", self.meta.session_id, exc)
                reason = f"stream-error: {exc}"
        except Exception as exc:  # seal the file no matter what
            if self.stop_event.is_set():
                reason = "requested"
            else:
                log.exception("session %s pipeline failed", self.meta.session_id)
                reason = f"error: {exc}"
        finally:
            self.seal(reason)

    def seal(self, reason: str) -> None:
        with self.lock:
            if self.ended:
                return
            self.ended = True
            skip = self.listener.skip_count if self.listener is not None else 0
            self.meta.skip_count = skip
            frame = records.ended_record(reason, self.pipeline.verdict_count, skip)
            self.ended_frame = frame
            self.emit(frame, persist=True)
            self._file.close()
            if self._raw_file is not None:
                self._raw_file.close()

    def request_stop(self) -> None:
        self.stop_event.set()
        if self.listener is not None:
            self.listener.close()

    def phase_dict(self) -> dict:
        frame = phase_frame(self.pipeline.phase)
        frame.pop("type")
        return frame


class Registry:
    def __init__(self, data_dir: str, session_cap: int, live_buffer: int):
        self.data_dir = data_dir
        self.session_cap = session_cap
        self.live_buffer = live_buffer
        self.lock = threading.Lock()
        self.sessions: dict[str, SessionRuntime] = {}
        os.makedirs(data_dir, exist_ok=True)

    def live_count(self) -> int:
        return sum(1 for r in self.sessions.values() if not r.ended)

    def get(self, session_id: str) -> SessionRuntime:
        runtime = self.sessions.get(session_id)
        if runtime is None:
            raise HTTPException(404, detail=f"unknown session {session_id!r}")
        return runtime

    def new_session_id(self) -> str:
        while True:
            sid = uuid.uuid4().hex[:12]
            if sid not in self.sessions and not os.path.exists(
                os.path.join(self.data_dir, f"{sid}.jsonl")
            ):
                return sid


def _open_source(runtime: SessionRuntime):
    spec = runtime.meta.source
    if isinstance(spec, ingest.ReplaySpec):
        return ingest.replay(spec.path, spec.speed, stop=runtime.stop_event)
    if isinstance(spec, ingest.SyntheticSpec):
        return ingest.paced(
            ingest.synthesize(spec.config), spec.speed, stop=runtime.stop_event
        )
    return runtime.listener  # bound before the runtime was created


def create_app(
    data_dir: str | None = None,
    session_cap: int = DEFAULT_SESSION_CAP,
    live_buffer: int = DEFAULT_LIVE_BUFFER,
) -> FastAPI:
    app = FastAPI(title="vigil")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    registry = Registry(data_dir_from_env(data_dir), session_cap, live_buffer)
    app.state.registry = registry

    def meta_response(runtime: SessionRuntime) -> dict:
        rec = records.meta_record(runtime.meta)
        rec.pop("type")
        rec["phase"] = runtime.phase_dict()
        rec["ended"] = runtime.ended
        rec["verdict_count"] = runtime.pipeline.verdict_count
        rec["tag_count"] = runtime.tag_count
        rec["skip_count"] = runtime.meta.skip_count
        rec["latest_t"] = runtime.pipeline.latest_t
        return rec

    @app.post("/sessions", status_code=201)
    def start_session(body: dict):
        if "source" not in body:
            raise HTTPException(400, detail="source: required")
        try:
            source_spec = ingest.source_spec_from_dict(body["source"])
            epoch_cfg = epoch_cfg_from_dict(body.get("epoch", {}))
            calib_cfg = calib_cfg_from_dict(body.get("calibration", {}))
            mode = body.get("mode", "natural")
            if isinstance(source_spec, ingest.ReplaySpec) and not os.path.exists(
                source_spec.path
            ):
                raise HTTPException(400, detail=f"source: no such recording {source_spec.path!r}")
            record_raw = body.get("record_raw")
            if record_raw is None:
                record_raw = isinstance(source_spec, ingest.NetworkSpec)
            with registry.lock:
                if registry.live_count() >= registry.session_cap:
                    raise HTTPException(
                        409, detail=f"capacity: {registry.session_cap} live sessions already running"
                    )
                # bind the network source first so source errors never leave
                # a half-created session behind
                listener = None
                if isinstance(source_spec, ingest.NetworkSpec):
                    try:
                        listener = ingest.NetworkListener(source_spec.listen)
                    except OSError as exc:
                        raise HTTPException(400, detail=f"source: {exc}") from exc
                meta = SessionMeta(
                    session_id=registry.new_session_id(),
                    source=source_spec,
                    epoch_cfg=epoch_cfg,
                    calib_cfg=calib_cfg,
                    mode=mode,
                    created_at=datetime.now(timezone.utc).isoformat(timespec="seconds"),
                    record_raw=bool(record_raw),
                )
                runtime = SessionRuntime(meta, registry.data_dir, registry.live_buffer)
                runtime.listener = listener
                registry.sessions[meta.session_id] = runtime
            runtime.thread = threading.Thread(
                target=runtime.run, args=(_open_source(runtime),), daemon=True,
                name=f"vigil-{meta.session_id}",
            )
            runtime.thread.start()
            return meta_response(runtime)
        except ConfigError as exc:
            raise HTTPException(400, detail=str(exc)) from exc

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        return meta_response(registry.get(session_id))

    @app.post("/sessions/{session_id}/tags")
    def record_tag(session_id: str, body: dict):
        runtime = registry.get(session_id)
        status = body.get("status")
        if status not in ("open", "closed"):
            raise HTTPException(400, detail='status: must be "open" or "closed"')
        with runtime.lock:
            if runtime.ended:
                raise HTTPException(409, detail="session already ended")
            t = runtime.pipeline.latest_t
            if runtime.last_tag_t is not None and t <= runtime.last_tag_t:
                raise HTTPException(
                    409, detail=f"tag time {t} not after previous tag {runtime.last_tag_t}"
                )
            runtime.last_tag_t = t
            runtime.tag_count += 1
            frame = records.tag_record(t, status)
            runtime.emit(frame, persist=True)
        return frame

    @app.post("/sessions/{session_id}/stop")
    def stop_session(session_id: str):
        runtime = registry.get(session_id)
        with runtime.lock:
            if runtime.ended:
                raise HTTPException(409, detail="session already ended")
        runtime.request_stop()
        if runtime.thread is not None:
            runtime.thread.join(timeout=30)
        if not runtime.ended:  # pipeline stuck; seal defensively
            runtime.seal("requested")
        return meta_response(runtime)

    @app.get("/sessions/{session_id}/report")
    def get_report(session_id: str):
        runtime = registry.get(session_id)
        if not runtime.ended:
            raise HTTPException(409, detail="session still running")
        record = records.load_session(runtime.path)
        if not record.tags:
            raise HTTPException(409, detail="session has no eye-status tags")
        try:
            report, conf = records.session_scores(record)
        except (ValueError, VigilError) as exc:
            raise HTTPException(409, detail=str(exc)) from exc
        norm = conf.normalized
        return {
            "report": {
                "session_id": report.session_id,
                "mode": report.mode,
                "n_epochs": report.n_epochs,
                "n_correct": report.n_correct,
                "accuracy": report.accuracy,
            },
            "confusion": {
                "counts": {
                    est.value: {act.value: conf.counts[est][act] for act in conf.counts[est]}
                    for est in conf.counts
                },
                "normalized": {
                    est.value: {act.value: norm[est][act] for act in norm[est]}
                    for est in norm
                },
            },
        }

    @app.websocket("/sessions/{session_id}/live")
    async def live(ws: WebSocket, session_id: str):
        await ws.accept()
        runtime = registry.sessions.get(session_id)
        if runtime is None:
            await ws.send_text(records.dump_record({"type": "error", "error": "not-found"}))
            await ws.close(code=1008)
            return
        sub, ended_frame = runtime.subscribe()
        if ended_frame is not None:
            await ws.send_text(records.dump_record(ended_frame))
            await ws.close()
            return
        try:
            while True:
                try:
                    frame = await run_in_threadpool(sub.queue.get, True, 0.25)
                except queue.Empty:
                    if sub.overflowed:
                        await ws.close(code=1011, reason="overflow")
                        return
                    continue
                await ws.send_text(records.dump_record(frame))
                if frame["type"] == "ended":
                    await ws.close()
                    return
        except WebSocketDisconnect:
            pass
        finally:
            runtime.unsubscribe(sub)

    return app
