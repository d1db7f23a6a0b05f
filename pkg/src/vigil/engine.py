"""Baseline calibration and threshold classification.

A session has two active phases: during calibration the subject keeps their
eyes closed and the mean theta band power over the first K valid epochs
becomes the personal baseline; every later epoch is classified against
scaling * baseline.  Band power strictly above the threshold means vigilant.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .errors import CalibrationError, ConfigError, ProtocolError


@dataclass(frozen=True)
class CalibrationConfig:
    baseline_epoch_count: int = 6
    scaling: float = 1.1

    def __post_init__(self):
        if not isinstance(self.baseline_epoch_count, int) or self.baseline_epoch_count < 1:
            raise ConfigError("baseline_epoch_count", "must be a positive integer")
        if not self.scaling > 0:
            raise ConfigError("scaling", "must be > 0")


@dataclass(frozen=True)
class BaselineProfile:
    """Eyes-closed reference power and the threshold derived from it.

    ``threshold`` is always computed from the other two fields; it cannot be
    set independently.
    """

    mean_theta_bp: float
    scaling: float
    threshold: float = field(init=False)

    def __post_init__(self):
        if self.mean_theta_bp < 0:
            raise CalibrationError(f"negative mean band power: {self.mean_theta_bp}")
        object.__setattr__(self, "threshold", self.scaling * self.mean_theta_bp)

    @property
    def degenerate(self) -> bool:
        """A zero baseline is allowed but worth flagging: everything nonzero
        will classify vigilant."""
        return self.mean_theta_bp == 0.0


class VigilanceState(enum.Enum):
    VIGILANT = "vigilant"
    NONVIGILANT = "nonvigilant"


@dataclass(frozen=True)
class EpochVerdict:
    """Per-epoch classification; invalid epochs carry no state."""

    epoch_index: int
    theta_bp: float
    threshold: float
    state: Optional[VigilanceState]
    valid: bool


@dataclass(frozen=True)
class SessionPhase:
    """Idle -> Calibrating(completed) -> Monitoring, never backwards."""

    name: str  # "idle" | "calibrating" | "monitoring"
    completed: Optional[int] = None  # valid calibration epochs so far

    @classmethod
    def idle(cls) -> "SessionPhase":
        return cls("idle")

    @classmethod
    def calibrating(cls, completed: int) -> "SessionPhase":
        return cls("calibrating", completed)

    @classmethod
    def monitoring(cls) -> "SessionPhase":
        return cls("monitoring")


def calibrate(theta_powers: Sequence[float], cfg: CalibrationConfig) -> BaselineProfile:
    """Average K eyes-closed theta band powers into a baseline profile."""
    if len(theta_powers) != cfg.baseline_epoch_count:
        raise ValueError(
            f"expected {cfg.baseline_epoch_count} baseline powers, got {len(theta_powers)}"
        )
    mean = sum(theta_powers) / len(theta_powers)
    return BaselineProfile(mean_theta_bp=mean, scaling=cfg.scaling)


def classify(theta_bp: float, profile: BaselineProfile) -> VigilanceState:
    """Strictly above threshold => vigilant; at or below => non-vigilant."""
    if theta_bp > profile.threshold:
        return VigilanceState.VIGILANT
    return VigilanceState.NONVIGILANT


@dataclass
class StepResult:
    phase: SessionPhase
    verdict: Optional[EpochVerdict] = None
    profile: Optional[BaselineProfile] = None


class SessionTracker:
    """Per-session phase state machine; consumes epoch band powers in order.

    One tracker per session, strictly sequential.  An invalid epoch during
    calibration restarts the whole baseline (a short contaminated baseline
    would poison the entire session); during monitoring it yields a flagged
    verdict with no state.
    """

    def __init__(self, cfg: CalibrationConfig):
        self.cfg = cfg
        self.phase = SessionPhase.idle()
        self.profile: Optional[BaselineProfile] = None
        self._powers: list[float] = []

    def start(self) -> SessionPhase:
        if self.phase.name != "idle":
            raise ProtocolError("session already started")
        self.phase = SessionPhase.calibrating(0)
        return self.phase

    def step(self, epoch_index: int, theta_bp: float, valid: bool) -> StepResult:
        """Consume one epoch's theta band power; returns the new phase plus
        the verdict and/or freshly calibrated profile it produced."""
        if self.phase.name == "idle":
            raise ProtocolError("epoch received before session start")

        if not valid:
            verdict = EpochVerdict(
                epoch_index=epoch_index,
                theta_bp=0.0,
                threshold=self.profile.threshold if self.profile else 0.0,
                state=None,
                valid=False,
            )
            if self.phase.name == "calibrating":
                self._powers.clear()
                self.phase = SessionPhase.calibrating(0)
            return StepResult(phase=self.phase, verdict=verdict)

        if self.phase.name == "calibrating":
            self._powers.append(theta_bp)
            if len(self._powers) == self.cfg.baseline_epoch_count:
                self.profile = calibrate(self._powers, self.cfg)
                self._powers.clear()
                self.phase = SessionPhase.monitoring()
                return StepResult(phase=self.phase, profile=self.profile)
            self.phase = SessionPhase.calibrating(len(self._powers))
            return StepResult(phase=self.phase)

        verdict = EpochVerdict(
            epoch_index=epoch_index,
            theta_bp=theta_bp,
            threshold=self.profile.threshold,
            state=classify(theta_bp, self.profile),
            valid=True,
        )
        return StepResult(phase=self.phase, verdict=verdict)
