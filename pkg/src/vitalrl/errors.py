"""Exception hierarchy shared across the package."""


class VitalRLError(Exception):
    """Base class for all package errors."""


class InvalidMeasurementError(VitalRLError, ValueError):
    """A reading is non-finite or otherwise unusable."""


class InvalidCategoryError(VitalRLError, ValueError):
    """A categorical reading (sedation) has an unknown label."""


class DomainError(VitalRLError, ValueError):
    """An argument lies outside its mathematical domain."""


class ConfigurationError(VitalRLError):
    """Inconsistent environment or run configuration."""


class EpisodeCompleteError(VitalRLError):
    """step() was called on a finished episode."""


class ShapeError(VitalRLError, ValueError):
    pass


class NumericalFailureError(VitalRLError, ArithmeticError):
    """Training produced NaN or inf; parameters were rolled back."""


class TrainingAborted(NumericalFailureError):
    def __init__(self, episode, agent, subject, cause):
        self.episode = episode
        self.agent = agent
        self.subject = subject
        super().__init__(
            f"numerical failure in episode {episode} "
            f"(agent={agent}, subject={subject}): {cause}"
        )


class ModelParseError(VitalRLError, ValueError):
    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}")


class UnsupportedVersionError(ModelParseError):
    pass


class SchemaError(VitalRLError, ValueError):
    """CSV header does not match the ingestion schema."""


class UnrecoverableGapError(VitalRLError, ValueError):
    """A vital's first value is missing so carry-forward has nothing to carry."""


class CsvParseError(VitalRLError, ValueError):
    def __init__(self, row, column, message):
        self.row = row
        self.column = column
        super().__init__(f"row {row}, column {column!r}: {message}")


class SpecError(VitalRLError, ValueError):
    """Invalid synthesizer specification."""


class SweepError(VitalRLError):
    def __init__(self, param, value, cause):
        self.param = param
        self.value = value
        self.cause = cause
        super().__init__(f"sweep {param}={value!r} failed: {cause}")
