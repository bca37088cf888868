"""Exception hierarchy shared by all model components."""


class GpmError(Exception):
    """Base class for all errors raised by this package."""


class FormatError(GpmError):
    """An input file could not be parsed (includes line/field context)."""


class SpecValidationError(GpmError):
    """A device spec violates an invariant; names the device and field."""

    def __init__(self, device: str, field: str, message: str):
        self.device = device
        self.field = field
        super().__init__(f"device {device!r}, field {field!r}: {message}")


class IngestError(GpmError):
    """A calibration dataset row is malformed, duplicated, or has an unknown unit."""


class AbsentRecordError(GpmError):
    """No calibration record exists for the requested key; callers decide fallback."""


class UnsupportedDtypeError(GpmError):
    """The device has no peak (or no hardware path) for the requested data type."""


class UnsupportedInstructionError(GpmError):
    """The instruction does not lower to a tensor-core path on this architecture."""


class FeatureUnsupportedError(GpmError):
    """The device lacks the hardware feature (e.g. distributed shared memory)."""


class OutOfMemoryPrediction(GpmError):
    """Model weights do not fit in device memory."""


class UsageError(GpmError):
    """Invalid workload spec or CLI arguments (exit code 2)."""


class ConfigurationError(GpmError):
    """Missing/invalid tolerances or an unusable data directory (exit code 2)."""
