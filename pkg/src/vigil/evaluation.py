"""Score predicted vigilance against tagged eye status.

Ground truth: eyes open corresponds to vigilant, eyes closed to non-vigilant.
The confusion matrix is indexed [estimated][actual] and normalized per actual
class, so each actual-class column sums to 1: the off-diagonal cell in the
"closed" column is the fraction of actually-closed epochs estimated open.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from typing import Optional, Sequence

from scipy.special import betainc

from .engine import EpochVerdict, VigilanceState
from .errors import DegenerateDataError, LabelingError, RecordingParseError
from .spectral import EpochConfig

TAGS_HEADER = "t,status"


class EyeStatus(enum.Enum):
    OPEN = "open"
    CLOSED = "closed"

    @classmethod
    def parse(cls, name: str) -> "EyeStatus":
        for st in cls:
            if st.value == name:
                return st
        raise ValueError(f"unknown eye status {name!r}")


@dataclass(frozen=True)
class EyeStatusTag:
    t: float
    status: EyeStatus


@dataclass(frozen=True)
class LabeledEpoch:
    epoch_index: int
    actual: EyeStatus
    predicted: VigilanceState


@dataclass(frozen=True)
class SessionReport:
    session_id: str
    mode: str  # "instructed" | "natural"
    n_epochs: int
    n_correct: int
    accuracy: float


@dataclass(frozen=True)
class ConfusionMatrix:
    """counts[estimated][actual]; normalized columns (per actual class) sum to 1."""

    counts: dict[EyeStatus, dict[EyeStatus, int]]

    @property
    def normalized(self) -> dict[EyeStatus, dict[EyeStatus, float]]:
        norm: dict[EyeStatus, dict[EyeStatus, float]] = {
            est: {} for est in EyeStatus
        }
        for actual in EyeStatus:
            column_total = sum(self.counts[est][actual] for est in EyeStatus)
            for est in EyeStatus:
                norm[est][actual] = (
                    self.counts[est][actual] / column_total if column_total else 0.0
                )
        return norm


@dataclass(frozen=True)
class TTestResult:
    t_statistic: float
    df: int
    p_two_tailed: float


_PREDICTED_AS_EYE = {
    VigilanceState.VIGILANT: EyeStatus.OPEN,
    VigilanceState.NONVIGILANT: EyeStatus.CLOSED,
}


def label_epochs(
    tags: Sequence[EyeStatusTag],
    verdicts: Sequence[EpochVerdict],
    cfg: EpochConfig,
) -> list[LabeledEpoch]:
    """Attach the majority eye status of each valid epoch's time span.

    An exact 50/50 split takes the status just left of the epoch midpoint,
    i.e. the earlier-starting one.  Requires a tag at or before the first
    epoch being labeled.
    """
    usable = [v for v in verdicts if v.valid and v.state is not None]
    if not usable:
        return []
    ordered = sorted(tags, key=lambda tag: tag.t)
    span = float(cfg.epoch_seconds)
    first_start = min(v.epoch_index for v in usable) * span
    if not ordered or ordered[0].t > first_start:
        raise LabelingError(
            f"no eye-status tag at or before the first epoch (t={first_start})"
        )

    def status_before(t: float) -> EyeStatus:
        status = ordered[0].status
        for tag in ordered:
            if tag.t < t:
                status = tag.status
            else:
                break
        return status

    labeled = []
    for v in usable:
        start = v.epoch_index * span
        end = start + span
        coverage = {EyeStatus.OPEN: 0.0, EyeStatus.CLOSED: 0.0}
        # walk the tag step function across [start, end)
        cursor = start
        current = ordered[0].status
        for tag in ordered:
            if tag.t <= start:
                current = tag.status
                continue
            if tag.t >= end:
                break
            coverage[current] += tag.t - cursor
            cursor = tag.t
            current = tag.status
        coverage[current] += end - cursor
        if coverage[EyeStatus.OPEN] > coverage[EyeStatus.CLOSED]:
            actual = EyeStatus.OPEN
        elif coverage[EyeStatus.CLOSED] > coverage[EyeStatus.OPEN]:
            actual = EyeStatus.CLOSED
        else:
            actual = status_before((start + end) / 2.0)
        labeled.append(LabeledEpoch(v.epoch_index, actual, v.state))
    return labeled


def accuracy(labeled: Sequence[LabeledEpoch]) -> float:
    """Fraction of epochs where the predicted state matches the eye status."""
    if not labeled:
        raise ValueError("cannot compute accuracy of an empty epoch list")
    correct = sum(1 for ep in labeled if _PREDICTED_AS_EYE[ep.predicted] == ep.actual)
    return correct / len(labeled)


def confusion(labeled: Sequence[LabeledEpoch]) -> ConfusionMatrix:
    counts = {est: {act: 0 for act in EyeStatus} for est in EyeStatus}
    for ep in labeled:
        counts[_PREDICTED_AS_EYE[ep.predicted]][ep.actual] += 1
    return ConfusionMatrix(counts=counts)


def summarize(values: Sequence[float]) -> tuple[float, float]:
    """Arithmetic mean and sample standard deviation (n-1 denominator).

    Uses exact summation, so the result is independent of input order.
    """
    n = len(values)
    if n < 2:
        raise ValueError("need at least 2 values for a sample standard deviation")
    mean = math.fsum(values) / n
    var = math.fsum((v - mean) ** 2 for v in values) / (n - 1)
    return mean, math.sqrt(var)


def paired_t_test(a: Sequence[float], b: Sequence[float]) -> TTestResult:
    """Two-tailed paired t-test on the elementwise differences b - a.

    The tail probability comes from the regularized incomplete beta function:
    p = I_{df/(df+t^2)}(df/2, 1/2).
    """
    if len(a) != len(b):
        raise ValueError(f"length mismatch: {len(a)} vs {len(b)}")
    n = len(a)
    if n < 2:
        raise ValueError("need at least 2 pairs")
    d = [y - x for x, y in zip(a, b)]
    mean = math.fsum(d) / n
    var = math.fsum((v - mean) ** 2 for v in d) / (n - 1)
    if var == 0.0:
        raise DegenerateDataError("all paired differences are identical")
    t = mean / math.sqrt(var / n)
    df = n - 1
    p = float(betainc(df / 2.0, 0.5, df / (df + t * t)))
    return TTestResult(t_statistic=t, df=df, p_two_tailed=p)


# --- rendering ---------------------------------------------------------------


def percent(fraction: float) -> str:
    """Render a fraction as a percentage, 2 decimals, half-up."""
    q = Decimal(repr(fraction * 100.0)).quantize(Decimal("0.01"), rounding=ROUND_HALF_UP)
    return f"{q}%"


def render_report(
    reports: Sequence[SessionReport],
    matrices: Sequence[ConfusionMatrix] = (),
    matrix_titles: Optional[Sequence[str]] = None,
) -> tuple[str, str]:
    """Column-aligned text tables plus a CSV export of the per-session rows.

    The Average/STD footer is computed over all listed accuracies.
    """
    rows = [("session_id", "mode", "epochs", "correct", "accuracy")]
    for r in reports:
        rows.append((r.session_id, r.mode, str(r.n_epochs), str(r.n_correct), percent(r.accuracy)))
    if reports:
        accs = [r.accuracy for r in reports]
        avg = math.fsum(accs) / len(accs)
        std = summarize(accs)[1] if len(accs) >= 2 else 0.0
        rows.append(("Average", "", "", "", percent(avg)))
        rows.append(("STD", "", "", "", percent(std)))
    else:
        rows.append(("Average", "", "", "", "n/a"))
        rows.append(("STD", "", "", "", "n/a"))

    widths = [max(len(row[i]) for row in rows) for i in range(len(rows[0]))]
    lines = ["Session Wise Accuracy"]
    for row in rows:
        lines.append("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip())

    titles = list(matrix_titles or [])
    for i, m in enumerate(matrices):
        title = titles[i] if i < len(titles) else f"Confusion matrix {i + 1}"
        lines.append("")
        lines.append(f"{title} (estimated rows x actual columns, % per actual class)")
        norm = m.normalized
        lines.append(f"{'':>10}  {'closed':>8}  {'open':>8}")
        for est in (EyeStatus.CLOSED, EyeStatus.OPEN):
            cells = [
                percent(norm[est][act]) for act in (EyeStatus.CLOSED, EyeStatus.OPEN)
            ]
            lines.append(f"{est.value:>10}  {cells[0]:>8}  {cells[1]:>8}")

    csv_lines = ["session_id,mode,n_epochs,n_correct,accuracy"]
    for r in reports:
        csv_lines.append(
            f"{r.session_id},{r.mode},{r.n_epochs},{r.n_correct},{r.accuracy:.6f}"
        )
    return "\n".join(lines) + "\n", "\n".join(csv_lines) + "\n"


# --- tag file IO -------------------------------------------------------------


def read_tags(path: str) -> list[EyeStatusTag]:
    """Tag CSV: header ``t,status``; status is lowercase open/closed."""
    tags: list[EyeStatusTag] = []
    last_t = None
    with open(path) as f:
        header = f.readline()
        if header.strip() != TAGS_HEADER:
            raise RecordingParseError(path, 1, f"expected header {TAGS_HEADER!r}")
        for lineno, line in enumerate(f, start=2):
            line = line.strip()
            if not line:
                continue
            try:
                t_str, status_str = line.split(",")
                tag = EyeStatusTag(t=float(t_str), status=EyeStatus.parse(status_str))
            except ValueError as exc:
                raise RecordingParseError(path, lineno, f"bad row {line!r}") from exc
            if last_t is not None and tag.t <= last_t:
                raise RecordingParseError(
                    path, lineno, f"tag times must be strictly increasing, got {tag.t}"
                )
            last_t = tag.t
            tags.append(tag)
    return tags


def write_tags(path: str, tags: Sequence[EyeStatusTag]) -> None:
    with open(path, "w", newline="\n") as f:
        f.write(TAGS_HEADER + "\n")
        for tag in tags:
            f.write(f"{tag.t!r},{tag.status.value}\n")
