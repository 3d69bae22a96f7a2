"""Exception hierarchy. One class per failure mode so callers can catch precisely."""


class UniadcError(Exception):
    """Base class for all library errors."""


class InvalidResolutionError(UniadcError):
    pass


class EmptyMaskError(UniadcError):
    """Foreground intersection annihilated every region despite retries."""


class BackendFailureError(UniadcError):
    pass


class PasteOutOfBoundsError(UniadcError):
    """No valid paste location found within the retry budget."""


class EncoderFailureError(UniadcError):
    pass


class ShapeMismatchError(UniadcError):
    pass


class EmptyBatchError(UniadcError):
    pass


class DimensionMismatchError(UniadcError):
    pass


class NonFiniteLossError(UniadcError):
    def __init__(self, step: int, value: float):
        super().__init__(f"non-finite loss {value!r} at step {step}")
        self.step = step
        self.value = value


class SingleClassError(UniadcError):
    pass


class NoRegionsError(UniadcError):
    pass


class EmptySetError(UniadcError):
    pass


class NoAnomaliesError(UniadcError):
    pass


class UnknownShapeNameError(UniadcError):
    pass


class UnknownSizeNameError(UniadcError):
    pass


class DuplicateCategoryError(UniadcError):
    pass


class InsufficientSamplesError(UniadcError):
    pass


class DatasetValidationError(UniadcError):
    """Aggregates every problem found while indexing a dataset root."""

    def __init__(self, problems: list[str]):
        super().__init__("dataset validation failed:\n" + "\n".join(f"  - {p}" for p in problems))
        self.problems = list(problems)


class ConfigError(UniadcError):
    pass
