"""Exception types shared across the pipeline."""


class VigilError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(VigilError):
    """A configuration value violates its invariants.

    ``field`` names the offending field so callers (CLI, HTTP layer) can
    point at it in their error responses.
    """

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


class StreamError(VigilError):
    """The sample stream violated its contract (e.g. non-monotone time)."""


class RecordingParseError(VigilError):
    """A recording or tag CSV file failed to parse.

    ``line`` is the 1-based line number of the offending row.
    """

    def __init__(self, path: str, line: int, message: str):
        super().__init__(f"{path}:{line}: {message}")
        self.path = path
        self.line = line


class ProtocolError(VigilError):
    """An operation arrived in a session state that forbids it."""


class CalibrationError(VigilError):
    """Baseline calibration received unusable input."""


class LabelingError(VigilError):
    """Eye-status tags cannot cover the epochs being labeled."""


class DegenerateDataError(VigilError):
    """A statistic is undefined for the given data (e.g. zero variance)."""


class SessionLoadError(VigilError):
    """A persisted session file is malformed.

    ``line`` is the 1-based record number where loading failed.
    """

    def __init__(self, path: str, line: int, message: str):
        super().__init__(f"{path}: record {line}: {message}")
        self.path = path
        self.line = line
