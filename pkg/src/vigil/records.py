"""Append-only session record files: one JSON record per line.

Layout: a ``meta`` record first, then baseline / epoch / tag records as they
happen, and a final ``ended`` record once the session is sealed.  Record
shapes mirror the live-stream frames, so a persisted session replays
bit-identically (wall-clock metadata aside).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

from .engine import CalibrationConfig, EpochVerdict, VigilanceState
from .errors import ConfigError, SessionLoadError
from .evaluation import (
    ConfusionMatrix,
    EyeStatus,
    EyeStatusTag,
    SessionReport,
    accuracy,
    confusion,
    label_epochs,
)
from .ingest import SourceSpec, SyntheticSpec, source_spec_from_dict, source_spec_to_dict
from .spectral import EpochConfig, WindowFn

MODES = ("instructed", "natural")

EVENT_TYPES = ("baseline", "epoch", "tag", "ended")


@dataclass
class SessionMeta:
    session_id: str
    source: SourceSpec
    epoch_cfg: EpochConfig
    calib_cfg: CalibrationConfig
    mode: str
    created_at: Optional[str] = None  # ISO timestamp; None for offline analysis
    record_raw: bool = False
    skip_count: int = 0

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError("mode", f"must be one of {MODES}, got {self.mode!r}")

    @property
    def seed(self) -> Optional[int]:
        if isinstance(self.source, SyntheticSpec):
            return self.source.config.seed
        return None


def epoch_cfg_to_dict(cfg: EpochConfig) -> dict:
    return {
        "sample_rate_hz": cfg.sample_rate_hz,
        "epoch_seconds": cfg.epoch_seconds,
        "window_fn": cfg.window_fn.value,
        "band_lo_hz": cfg.band_lo_hz,
        "band_hi_hz": cfg.band_hi_hz,
    }


def epoch_cfg_from_dict(d: dict) -> EpochConfig:
    return EpochConfig(
        sample_rate_hz=int(d.get("sample_rate_hz", 256)),
        epoch_seconds=int(d.get("epoch_seconds", 5)),
        window_fn=WindowFn.parse(d.get("window_fn", "rect")),
        band_lo_hz=float(d.get("band_lo_hz", 4.0)),
        band_hi_hz=float(d.get("band_hi_hz", 8.0)),
    )


def calib_cfg_to_dict(cfg: CalibrationConfig) -> dict:
    return {"baseline_epoch_count": cfg.baseline_epoch_count, "scaling": cfg.scaling}


def calib_cfg_from_dict(d: dict) -> CalibrationConfig:
    return CalibrationConfig(
        baseline_epoch_count=int(d.get("baseline_epoch_count", 6)),
        scaling=float(d.get("scaling", 1.1)),
    )


def meta_record(meta: SessionMeta) -> dict:
    return {
        "type": "meta",
        "session_id": meta.session_id,
        "created_at": meta.created_at,
        "mode": meta.mode,
        "source": source_spec_to_dict(meta.source),
        "epoch": epoch_cfg_to_dict(meta.epoch_cfg),
        "calibration": calib_cfg_to_dict(meta.calib_cfg),
        "seed": meta.seed,
        "record_raw": meta.record_raw,
    }


def meta_from_record(rec: dict) -> SessionMeta:
    return SessionMeta(
        session_id=rec["session_id"],
        source=source_spec_from_dict(rec["source"]),
        epoch_cfg=epoch_cfg_from_dict(rec["epoch"]),
        calib_cfg=calib_cfg_from_dict(rec["calibration"]),
        mode=rec["mode"],
        created_at=rec.get("created_at"),
        record_raw=bool(rec.get("record_raw", False)),
        skip_count=int(rec.get("skip_count", 0)),
    )


def tag_record(t: float, status: str) -> dict:
    return {"type": "tag", "t": t, "status": status}


def ended_record(reason: str, verdict_count: int, skip_count: int = 0) -> dict:
    rec = {"type": "ended", "reason": reason, "verdict_count": verdict_count}
    if skip_count:
        rec["skip_count"] = skip_count
    return rec


def dump_record(rec: dict) -> str:
    return json.dumps(rec, separators=(",", ":"))


@dataclass
class SessionRecord:
    meta: SessionMeta
    events: list[dict]

    @property
    def verdicts(self) -> list[dict]:
        return [e for e in self.events if e["type"] == "epoch"]

    @property
    def tags(self) -> list[dict]:
        return [e for e in self.events if e["type"] == "tag"]

    @property
    def baseline(self) -> Optional[dict]:
        for e in self.events:
            if e["type"] == "baseline":
                return e
        return None

    @property
    def ended(self) -> Optional[dict]:
        for e in self.events:
            if e["type"] == "ended":
                return e
        return None


def write_session(path: str, meta: SessionMeta, events: list[dict]) -> None:
    with open(path, "w", newline="\n") as f:
        f.write(dump_record(meta_record(meta)) + "\n")
        for e in events:
            f.write(dump_record(e) + "\n")


def verdict_from_record(rec: dict) -> EpochVerdict:
    state = rec.get("state")
    return EpochVerdict(
        epoch_index=int(rec["index"]),
        theta_bp=float(rec["theta_bp"]),
        threshold=float(rec["threshold"]),
        state=VigilanceState(state) if state is not None else None,
        valid=bool(rec["valid"]),
    )


def tag_from_record(rec: dict) -> EyeStatusTag:
    return EyeStatusTag(t=float(rec["t"]), status=EyeStatus.parse(rec["status"]))


def session_scores(record: SessionRecord) -> tuple[SessionReport, ConfusionMatrix]:
    """Score one persisted session: label its valid verdicts with its tags."""
    verdicts = [verdict_from_record(r) for r in record.verdicts]
    tags = [tag_from_record(r) for r in record.tags]
    labeled = label_epochs(tags, verdicts, record.meta.epoch_cfg)
    if not labeled:
        raise ValueError("session has no labeled monitored epochs")
    conf = confusion(labeled)
    n_correct = (
        conf.counts[EyeStatus.CLOSED][EyeStatus.CLOSED]
        + conf.counts[EyeStatus.OPEN][EyeStatus.OPEN]
    )
    report = SessionReport(
        session_id=record.meta.session_id,
        mode=record.meta.mode,
        n_epochs=len(labeled),
        n_correct=n_correct,
        accuracy=accuracy(labeled),
    )
    return report, conf


def load_session(path: str) -> SessionRecord:
    """Parse a session record file; raises SessionLoadError naming the
    offending record number on any malformed or truncated content."""
    meta: Optional[SessionMeta] = None
    events: list[dict] = []
    with open(path) as f:
        lineno = 0
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SessionLoadError(path, lineno, f"invalid JSON: {exc}") from exc
            if not isinstance(rec, dict) or "type" not in rec:
                raise SessionLoadError(path, lineno, "record has no type field")
            if lineno == 1:
                if rec["type"] != "meta":
                    raise SessionLoadError(path, 1, "first record must be meta")
                try:
                    meta = meta_from_record(rec)
                except (KeyError, ConfigError) as exc:
                    raise SessionLoadError(path, 1, f"bad meta record: {exc}") from exc
                continue
            if rec["type"] == "meta":
                raise SessionLoadError(path, lineno, "duplicate meta record")
            if rec["type"] not in EVENT_TYPES:
                raise SessionLoadError(path, lineno, f"unknown record type {rec['type']!r}")
            events.append(rec)
    if meta is None:
        raise SessionLoadError(path, 1, "missing meta record (empty file?)")
    return SessionRecord(meta=meta, events=events)
