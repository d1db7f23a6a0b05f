"""Sample stream sources: recorded-file replay, synthetic generation, network.

All sources yield ``Sample`` tuples with strictly increasing timestamps and
finite microvolt values.  Synthetic streams are a pure function of their
config: the noise generator is numpy's default PCG64 seeded from the config,
so two runs of the same build produce bit-identical streams.
"""

from __future__ import annotations

import json
import math
import socket
import time
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional

import numpy as np

from .errors import ConfigError, RecordingParseError, StreamError
from .spectral import Sample

CSV_HEADER = "t,uv"


@dataclass(frozen=True)
class ToneComponent:
    """One sinusoidal component of a synthetic segment."""

    freq_hz: float
    amplitude_uv: float
    phase_rad: float = 0.0


@dataclass(frozen=True)
class Segment:
    """A stretch of synthetic signal; ``eye_status`` labels it for auto-tagging
    ("open" / "closed" / None)."""

    duration_s: float
    components: tuple[ToneComponent, ...] = ()
    noise_sigma_uv: float = 0.0
    eye_status: Optional[str] = None


@dataclass(frozen=True)
class SyntheticConfig:
    sample_rate_hz: int = 256
    seed: int = 0
    segments: tuple[Segment, ...] = ()

    def __post_init__(self):
        if self.sample_rate_hz <= 0:
            raise ConfigError("sample_rate_hz", "must be positive")
        if not self.segments or self.total_duration_s <= 0:
            raise ConfigError("segments", "total duration must be positive")
        for seg in self.segments:
            if seg.noise_sigma_uv < 0:
                raise ConfigError("noise_sigma_uv", "must be >= 0")
            if seg.eye_status not in (None, "open", "closed"):
                raise ConfigError("eye_status", f"unknown status {seg.eye_status!r}")
            for comp in seg.components:
                if not comp.freq_hz < self.sample_rate_hz / 2:
                    raise ConfigError(
                        "freq_hz", f"{comp.freq_hz} Hz is not below Nyquist"
                    )

    @property
    def total_duration_s(self) -> float:
        return sum(seg.duration_s for seg in self.segments)

    def eye_status_tags(self) -> list[tuple[float, str]]:
        """(time, status) at each labeled segment start, deduplicated."""
        tags: list[tuple[float, str]] = []
        t = 0.0
        for seg in self.segments:
            if seg.eye_status is not None and (not tags or tags[-1][1] != seg.eye_status):
                tags.append((t, seg.eye_status))
            t += seg.duration_s
        return tags

    def to_dict(self) -> dict:
        return {
            "sample_rate_hz": self.sample_rate_hz,
            "seed": self.seed,
            "segments": [
                {
                    "duration_s": seg.duration_s,
                    "components": [
                        {
                            "freq_hz": c.freq_hz,
                            "amplitude_uv": c.amplitude_uv,
                            "phase_rad": c.phase_rad,
                        }
                        for c in seg.components
                    ],
                    "noise_sigma_uv": seg.noise_sigma_uv,
                    "eye_status": seg.eye_status,
                }
                for seg in self.segments
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SyntheticConfig":
        try:
            segments = tuple(
                Segment(
                    duration_s=float(seg["duration_s"]),
                    components=tuple(
                        ToneComponent(
                            freq_hz=float(c["freq_hz"]),
                            amplitude_uv=float(c["amplitude_uv"]),
                            phase_rad=float(c.get("phase_rad", 0.0)),
                        )
                        for c in seg.get("components", [])
                    ),
                    noise_sigma_uv=float(seg.get("noise_sigma_uv", 0.0)),
                    eye_status=seg.get("eye_status"),
                )
                for seg in d["segments"]
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError("segments", f"malformed synthetic config: {exc}") from exc
        return cls(
            sample_rate_hz=int(d.get("sample_rate_hz", 256)),
            seed=int(d.get("seed", 0)),
            segments=segments,
        )


def synthesize(cfg: SyntheticConfig) -> Iterator[Sample]:
    """Deterministic synthetic stream: sample j is at t = j/fs and sums the
    segment's sinusoids plus seeded Gaussian noise."""
    fs = cfg.sample_rate_hz
    rng = np.random.default_rng(cfg.seed)
    j = 0
    for seg in cfg.segments:
        # segment boundary at the first sample index not before the boundary
        n = int(round(seg.duration_s * fs))
        t = (j + np.arange(n)) / fs
        uv = np.zeros(n)
        for comp in seg.components:
            uv += comp.amplitude_uv * np.sin(
                2.0 * np.pi * comp.freq_hz * t + comp.phase_rad
            )
        if seg.noise_sigma_uv > 0:
            uv += rng.normal(0.0, seg.noise_sigma_uv, n)
        for tt, vv in zip(t.tolist(), uv.tolist()):
            yield Sample(tt, vv)
        j += n


def write_recording(path: str, samples: Iterable[Sample]) -> int:
    """Persist a stream as CSV (header ``t,uv``, LF endings).  Floats are
    written with repr so a replay reproduces them bit-exactly."""
    count = 0
    with open(path, "w", newline="\n") as f:
        f.write(CSV_HEADER + "\n")
        for s in samples:
            f.write(f"{s.t!r},{s.uv!r}\n")
            count += 1
    return count


def _parse_recording(path: str) -> Iterator[Sample]:
    last_t = None
    with open(path) as f:
        header = f.readline()
        if header.strip() != CSV_HEADER:
            raise RecordingParseError(path, 1, f"expected header {CSV_HEADER!r}")
        for lineno, line in enumerate(f, start=2):
            try:
                # float() tolerates the trailing newline, so no strip needed
                t_str, uv_str = line.split(",")
                t, uv = float(t_str), float(uv_str)
            except ValueError as exc:
                if not line.strip():
                    continue
                raise RecordingParseError(path, lineno, f"bad row {line.strip()!r}") from exc
            if not (math.isfinite(t) and math.isfinite(uv)):
                raise RecordingParseError(path, lineno, f"non-finite value at line {lineno}")
            if last_t is not None and t <= last_t:
                raise StreamError(
                    f"{path}:{lineno}: non-monotone timestamp {t} after {last_t}"
                )
            last_t = t
            yield Sample(t, uv)


def replay(path: str, speed: float = 0.0, stop=None) -> Iterator[Sample]:
    """Replay a recording; ``speed`` > 0 paces emission at that multiple of
    real time, 0 streams as fast as possible.  ``stop`` is an optional
    threading.Event checked while pacing."""
    if speed < 0:
        raise ConfigError("speed", "must be >= 0")
    if speed == 0:
        return _parse_recording(path)
    return paced(_parse_recording(path), speed, stop)


def paced(samples: Iterable[Sample], speed: float, stop=None) -> Iterator[Sample]:
    """Pace any stream to ``speed`` x real time (0 = unpaced)."""
    if speed == 0:
        yield from samples
        return
    wall_start = time.monotonic()
    t0 = None
    for s in samples:
        if t0 is None:
            t0 = s.t
        target = wall_start + (s.t - t0) / speed
        while True:
            delay = target - time.monotonic()
            if delay <= 0:
                break
            if stop is not None and stop.is_set():
                return
            time.sleep(min(delay, 0.05))
        yield s


class NetworkListener:
    """Accept one producer connection and stream its newline-delimited
    ``{"t": ..., "uv": ...}`` records.

    Unparseable lines are skipped and counted (lossy links corrupt lines);
    a timestamp regression means a broken producer and aborts the stream.
    """

    def __init__(self, address: str):
        host, _, port = address.rpartition(":")
        if not port.isdigit():
            raise ConfigError("listen", f"expected host:port, got {address!r}")
        self.skip_count = 0
        self._server = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        self._server.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        self._server.bind((host or "127.0.0.1", int(port)))
        self._server.listen(1)
        self._conn: Optional[socket.socket] = None
        self._closed = False

    @property
    def port(self) -> int:
        return self._server.getsockname()[1]

    def close(self):
        self._closed = True
        if self._conn is not None:
            try:
                self._conn.shutdown(socket.SHUT_RDWR)
            except OSError:
                pass
            self._conn.close()
        self._server.close()

    def __iter__(self) -> Iterator[Sample]:
        try:
            self._conn, _ = self._server.accept()
        except OSError:
            return  # closed while waiting
        last_t = None
        try:
            with self._conn, self._conn.makefile("r", encoding="utf-8") as reader:
                for line in reader:
                    if self._closed:
                        return
                    line = line.strip()
                    if not line:
                        continue
                    try:
                        rec = json.loads(line)
                        t, uv = float(rec["t"]), float(rec["uv"])
                        if not (math.isfinite(t) and math.isfinite(uv)):
                            raise ValueError("non-finite")
                    except (ValueError, KeyError, TypeError):
                        self.skip_count += 1
                        continue
                    if last_t is not None and t <= last_t:
                        raise StreamError(
                            f"producer sent non-monotone timestamp {t} after {last_t}"
                        )
                    last_t = t
                    yield Sample(t, uv)
        except (OSError, ValueError):
            if not self._closed:
                raise


# --- source specs (what a session is configured with) ---------------------


@dataclass(frozen=True)
class ReplaySpec:
    path: str
    speed: float = 0.0
    kind: str = field(default="replay", init=False)


@dataclass(frozen=True)
class SyntheticSpec:
    config: SyntheticConfig
    speed: float = 0.0  # 0 = unpaced; >0 paces for live demos
    kind: str = field(default="synthetic", init=False)


@dataclass(frozen=True)
class NetworkSpec:
    listen: str
    kind: str = field(default="network", init=False)


SourceSpec = ReplaySpec | SyntheticSpec | NetworkSpec


def source_spec_to_dict(spec: SourceSpec) -> dict:
    if isinstance(spec, ReplaySpec):
        return {"kind": "replay", "path": spec.path, "speed": spec.speed}
    if isinstance(spec, SyntheticSpec):
        return {"kind": "synthetic", "config": spec.config.to_dict(), "speed": spec.speed}
    return {"kind": "network", "listen": spec.listen}


def source_spec_from_dict(d: dict) -> SourceSpec:
    kind = d.get("kind")
    if kind == "replay":
        if "path" not in d:
            raise ConfigError("source.path", "replay source needs a path")
        return ReplaySpec(path=str(d["path"]), speed=float(d.get("speed", 0.0)))
    if kind == "synthetic":
        if "config" not in d:
            raise ConfigError("source.config", "synthetic source needs a config")
        return SyntheticSpec(
            config=SyntheticConfig.from_dict(d["config"]),
            speed=float(d.get("speed", 0.0)),
        )
    if kind == "network":
        if "listen" not in d:
            raise ConfigError("source.listen", "network source needs a listen address")
        return NetworkSpec(listen=str(d["listen"]))
    raise ConfigError("source.kind", f"unknown source kind {kind!r}")


# --- presets ---------------------------------------------------------------


def alternating_session(
    amplitude_uv: float = 10.0,
    noise_sigma_uv: float = 0.0,
    seed: int = 7,
    theta_hz: float = 6.0,
    segment_s: float = 30.0,
    n_segments: int = 6,
    open_gain: float = 2.0,
    sample_rate_hz: int = 256,
) -> SyntheticConfig:
    """Eyes-closed baseline then alternating open/closed segments.

    "closed" carries theta amplitude a, "open" carries open_gain * a, so a
    correctly calibrated threshold (scaling 1.1) separates them cleanly.
    These are verification presets, not physiological models.
    """
    segments = []
    for i in range(n_segments):
        is_open = i % 2 == 1
        segments.append(
            Segment(
                duration_s=segment_s,
                components=(
                    ToneComponent(
                        freq_hz=theta_hz,
                        amplitude_uv=amplitude_uv * (open_gain if is_open else 1.0),
                    ),
                ),
                noise_sigma_uv=noise_sigma_uv,
                eye_status="open" if is_open else "closed",
            )
        )
    return SyntheticConfig(sample_rate_hz=sample_rate_hz, seed=seed, segments=tuple(segments))


def preset(name: str, seed: int | None = None) -> SyntheticConfig:
    """Named synthetic presets for the CLI and demos."""
    builders = {
        "clean": lambda s: alternating_session(noise_sigma_uv=0.0, seed=s),
        "noisy": lambda s: alternating_session(noise_sigma_uv=2.5, seed=s),
    }
    if name not in builders:
        raise ConfigError("preset", f"unknown preset {name!r} (have: {sorted(builders)})")
    return builders[name](7 if seed is None else seed)
