"""Deterministic spectral math: epoch framing, DFT periodogram, band power.

Conventions (fixed so results are comparable across runs and machines):

* Epochs are tumbling (non-overlapping) windows anchored at t=0; epoch k
  covers [k*T, (k+1)*T) and holds exactly N = sample_rate * T samples.
* The mean is always subtracted before the DFT, so electrode offset cannot
  leak into the low bins.
* The PSD is the one-sided periodogram: psd[k] = c_k * |X[k]|^2 / (fs*n*W)
  with c_k = 2 for interior bins, 1 for DC and Nyquist, and W the mean of
  the squared window coefficients (1 for the rectangular window).  With
  this scaling sum(psd)*df equals the variance of the mean-removed,
  window-compensated input.
* All math is float64.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Iterator, NamedTuple

import numpy as np

from .errors import ConfigError, StreamError


class Sample(NamedTuple):
    """One reading from the frontal channel: time in seconds, amplitude in microvolts."""

    t: float
    uv: float


class WindowFn(enum.Enum):
    RECTANGULAR = "rect"
    HANN = "hann"

    @classmethod
    def parse(cls, name: str) -> "WindowFn":
        for fn in cls:
            if fn.value == name:
                return fn
        raise ConfigError("window", f"unknown window {name!r} (expected rect or hann)")


@dataclass(frozen=True)
class EpochConfig:
    """Epoch framing and band parameters."""

    sample_rate_hz: int = 256
    epoch_seconds: int = 5
    window_fn: WindowFn = WindowFn.RECTANGULAR
    band_lo_hz: float = 4.0
    band_hi_hz: float = 8.0

    def __post_init__(self):
        if not isinstance(self.sample_rate_hz, int) or self.sample_rate_hz <= 0:
            raise ConfigError("sample_rate_hz", "must be a positive integer")
        if not isinstance(self.epoch_seconds, int) or not 2 <= self.epoch_seconds <= 10:
            raise ConfigError("epoch_seconds", "must be an integer between 2 and 10 seconds")
        if self.samples_per_epoch < 2:
            raise ConfigError("epoch_seconds", "epoch must contain at least 2 samples")
        if not 0 <= self.band_lo_hz < self.band_hi_hz <= self.nyquist_hz:
            raise ConfigError(
                "band",
                f"need 0 <= lo < hi <= Nyquist ({self.nyquist_hz} Hz), "
                f"got {self.band_lo_hz}:{self.band_hi_hz}",
            )

    @property
    def samples_per_epoch(self) -> int:
        return self.sample_rate_hz * self.epoch_seconds

    @property
    def nyquist_hz(self) -> float:
        return self.sample_rate_hz / 2.0


@dataclass
class Epoch:
    """One fixed-length analysis window.

    ``valid`` is False when the window was short or contained a timing gap;
    invalid epochs carry whatever samples arrived and must not be fed to the
    spectral estimators.
    """

    index: int
    start_t: float
    samples: np.ndarray
    valid: bool = True


@dataclass
class Spectrum:
    """One-sided PSD; bin k is frequency k * sample_rate / n, units uV^2/Hz."""

    n: int
    sample_rate_hz: int
    psd: np.ndarray

    @property
    def delta_f(self) -> float:
        return self.sample_rate_hz / self.n

    def total_power(self) -> float:
        """Integral of the PSD over all bins, in uV^2."""
        return float(np.sum(self.psd) * self.delta_f)


@dataclass(frozen=True)
class BandPower:
    lo_hz: float
    hi_hz: float
    power: float


# A dropped sample produces a 2/fs step, which is still tolerated; anything
# beyond that marks the epoch invalid.
GAP_FACTOR = 2.0


class EpochAssembler:
    """Stateful tumbling-window framer: push samples, collect finished epochs.

    Single-producer: exactly one stream feeds an assembler.  Epochs are
    emitted as soon as they are decidable: a full window emits on its N-th
    sample; a short (gapped) window emits, flagged invalid, when the first
    sample beyond its end arrives.  A partial window at end-of-stream is
    discarded.
    """

    def __init__(self, cfg: EpochConfig):
        self.cfg = cfg
        self._n = cfg.samples_per_epoch
        self._t_window = float(cfg.epoch_seconds)
        self._max_dt = GAP_FACTOR / cfg.sample_rate_hz * (1.0 + 1e-12)
        self._index = 0
        self._boundary = self._t_window
        self._buf_t: list[float] = []
        self._buf_uv: list[float] = []
        self._last_t: float | None = None

    def push(self, t: float, uv: float) -> list[Epoch]:
        """Add one sample; return every epoch finalized by it (possibly none)."""
        last_t = self._last_t
        if last_t is not None and t <= last_t:
            raise StreamError(f"non-monotone timestamp: {t} after {last_t}")
        if t < 0:
            raise StreamError(f"negative timestamp: {t}")
        if not math.isfinite(uv):
            raise StreamError(f"non-finite sample value at t={t}")
        self._last_t = t

        out: list[Epoch] = []
        while t >= self._boundary:
            out.append(self._finalize())
        self._buf_t.append(t)
        self._buf_uv.append(uv)
        if len(self._buf_uv) == self._n:
            out.append(self._finalize())
        return out

    def finish(self) -> list[Epoch]:
        """End of stream: a partial tail window is discarded."""
        self._buf_t.clear()
        self._buf_uv.clear()
        return []

    def _finalize(self) -> Epoch:
        t_arr = np.asarray(self._buf_t)
        samples = np.asarray(self._buf_uv, dtype=np.float64)
        valid = len(samples) == self._n
        if valid and len(t_arr) > 1:
            valid = float(np.max(np.diff(t_arr))) <= self._max_dt
        epoch = Epoch(
            index=self._index,
            start_t=self._index * self._t_window,
            samples=samples,
            valid=valid,
        )
        self._index += 1
        self._boundary = (self._index + 1) * self._t_window
        self._buf_t.clear()
        self._buf_uv.clear()
        return epoch


def assemble_epochs(samples: Iterable[Sample], cfg: EpochConfig) -> Iterator[Epoch]:
    """Frame an ordered sample stream into tumbling epochs."""
    assembler = EpochAssembler(cfg)
    for s in samples:
        yield from assembler.push(s.t, s.uv)
    yield from assembler.finish()


def remove_dc(epoch: Epoch) -> Epoch:
    """Subtract the arithmetic mean; done twice so the residual mean is ~0 even
    for large offsets."""
    x = epoch.samples - epoch.samples.mean()
    x -= x.mean()
    return Epoch(epoch.index, epoch.start_t, x, epoch.valid)


def dft(samples: np.ndarray) -> np.ndarray:
    """Full complex DFT, X[k] = sum_j x[j] * exp(-2*pi*i*j*k/n)."""
    x = np.asarray(samples, dtype=np.float64)
    if x.size < 2:
        raise ValueError("dft needs at least 2 samples")
    return np.fft.fft(x)


def window_coefficients(fn: WindowFn, n: int) -> np.ndarray:
    if fn is WindowFn.RECTANGULAR:
        return np.ones(n)
    # periodic Hann, the spectral-estimation variant
    return 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(n) / n)


def periodogram(epoch: Epoch, cfg: EpochConfig) -> Spectrum:
    """One-sided periodogram PSD of one epoch (mean removed internally)."""
    x = remove_dc(epoch).samples
    n = x.size
    w = window_coefficients(cfg.window_fn, n)
    w_power = float(np.mean(w * w))
    spec = np.fft.rfft(x * w)
    psd = (spec.real**2 + spec.imag**2) / (cfg.sample_rate_hz * n * w_power)
    psd[1:] *= 2.0
    if n % 2 == 0:
        psd[-1] /= 2.0
    return Spectrum(n=n, sample_rate_hz=cfg.sample_rate_hz, psd=psd)


def band_power(spec: Spectrum, lo_hz: float, hi_hz: float) -> BandPower:
    """Cumulate psd*df over every bin whose frequency lies in [lo_hz, hi_hz]."""
    nyquist = spec.sample_rate_hz / 2.0
    if not 0 <= lo_hz < hi_hz <= nyquist:
        raise ValueError(f"band {lo_hz}:{hi_hz} outside [0, {nyquist}] or empty")
    # bin k has frequency k*fs/n; a tiny guard absorbs float error at the edges
    k_lo = int(np.ceil(lo_hz * spec.n / spec.sample_rate_hz - 1e-9))
    k_hi = int(np.floor(hi_hz * spec.n / spec.sample_rate_hz + 1e-9))
    k_lo = max(k_lo, 0)
    k_hi = min(k_hi, len(spec.psd) - 1)
    power = float(np.sum(spec.psd[k_lo : k_hi + 1]) * spec.delta_f)
    return BandPower(lo_hz=lo_hz, hi_hz=hi_hz, power=power)
