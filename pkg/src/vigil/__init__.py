"""Vigilance monitoring from single-channel frontal EEG theta band power."""

from .engine import (
    BaselineProfile,
    CalibrationConfig,
    EpochVerdict,
    SessionPhase,
    SessionTracker,
    VigilanceState,
    calibrate,
    classify,
)
from .evaluation import (
    ConfusionMatrix,
    EyeStatus,
    EyeStatusTag,
    LabeledEpoch,
    SessionReport,
    TTestResult,
    accuracy,
    confusion,
    label_epochs,
    paired_t_test,
    render_report,
    summarize,
)
from .ingest import (
    NetworkListener,
    ReplaySpec,
    Segment,
    SyntheticConfig,
    SyntheticSpec,
    NetworkSpec,
    ToneComponent,
    alternating_session,
    preset,
    replay,
    synthesize,
    write_recording,
)
from .pipeline import SessionPipeline, run_offline
from .spectral import (
    BandPower,
    Epoch,
    EpochAssembler,
    EpochConfig,
    Sample,
    Spectrum,
    WindowFn,
    assemble_epochs,
    band_power,
    dft,
    periodogram,
    remove_dc,
)

__version__ = "0.1.0"
