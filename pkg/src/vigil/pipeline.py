"""The single classification pipeline both the CLI and the service run.

samples -> tumbling epochs -> theta band power -> calibration/classification,
emitting wire-shaped event dicts.  Keeping one code path is what makes
offline analysis reproduce a live session's verdicts exactly.
"""

from __future__ import annotations

from typing import Iterable, Optional

from .engine import BaselineProfile, CalibrationConfig, EpochVerdict, SessionTracker
from .spectral import Epoch, EpochAssembler, EpochConfig, Sample, band_power, periodogram


def phase_frame(phase) -> dict:
    frame = {"type": "phase", "phase": phase.name}
    if phase.completed is not None:
        frame["completed"] = phase.completed
    return frame


def baseline_frame(profile: BaselineProfile) -> dict:
    frame = {
        "type": "baseline",
        "mean_theta_bp": profile.mean_theta_bp,
        "scaling": profile.scaling,
        "threshold": profile.threshold,
    }
    if profile.degenerate:
        frame["degenerate"] = True
    return frame


def epoch_frame(v: EpochVerdict) -> dict:
    return {
        "type": "epoch",
        "index": v.epoch_index,
        "theta_bp": v.theta_bp,
        "threshold": v.threshold,
        "state": v.state.value if v.state is not None else None,
        "valid": v.valid,
    }


class SessionPipeline:
    """Stateful per-session pipeline; feed samples, collect event frames.

    Strictly sequential: one producer per instance.  ``latest_t`` tracks the
    sample clock for tag timestamping.
    """

    def __init__(self, epoch_cfg: EpochConfig, calib_cfg: CalibrationConfig):
        self.epoch_cfg = epoch_cfg
        self.calib_cfg = calib_cfg
        self._assembler = EpochAssembler(epoch_cfg)
        self._tracker = SessionTracker(calib_cfg)
        self._phase = self._tracker.start()
        self.latest_t = 0.0
        self.verdict_count = 0

    def initial_events(self) -> list[dict]:
        return [phase_frame(self._phase)]

    def process(self, t: float, uv: float) -> list[dict]:
        self.latest_t = t
        events: list[dict] = []
        for epoch in self._assembler.push(t, uv):
            events.extend(self._step(epoch))
        return events

    def finish(self) -> list[dict]:
        events: list[dict] = []
        for epoch in self._assembler.finish():
            events.extend(self._step(epoch))
        return events

    def _step(self, epoch: Epoch) -> list[dict]:
        if epoch.valid:
            spectrum = periodogram(epoch, self.epoch_cfg)
            bp = band_power(
                spectrum, self.epoch_cfg.band_lo_hz, self.epoch_cfg.band_hi_hz
            ).power
        else:
            bp = 0.0
        result = self._tracker.step(epoch.index, bp, epoch.valid)
        events = []
        if result.profile is not None:
            events.append(baseline_frame(result.profile))
        if result.verdict is not None:
            events.append(epoch_frame(result.verdict))
            self.verdict_count += 1
        if result.phase != self._phase:
            events.append(phase_frame(result.phase))
            self._phase = result.phase
        return events

    @property
    def phase(self):
        return self._phase

    @property
    def profile(self) -> Optional[BaselineProfile]:
        return self._tracker.profile


def run_offline(
    samples: Iterable[Sample],
    epoch_cfg: EpochConfig,
    calib_cfg: CalibrationConfig,
) -> list[dict]:
    """Run the pipeline over a whole stream and return all event frames."""
    pipe = SessionPipeline(epoch_cfg, calib_cfg)
    events = pipe.initial_events()
    for s in samples:
        events.extend(pipe.process(s.t, s.uv))
    events.extend(pipe.finish())
    return events
