"""Exception types shared across the package."""


class TsudaError(Exception):
    """Base class for all package errors."""


class ShapeMismatch(TsudaError):
    """Operand shapes are incompatible for the requested operation."""


class NotScalar(TsudaError):
    """Backward was requested from a tensor with more than one element."""


class BadConfig(TsudaError):
    """A configuration value violates its documented constraints."""


class FormatError(TsudaError):
    """A binary file has a bad magic number, version, or truncated payload."""


class MetaMismatch(TsudaError):
    """Stored sample shapes disagree with the dataset metadata."""


class LabelOutOfRange(TsudaError):
    """A class label falls outside [0, num_classes)."""


class OutOfRange(TsudaError):
    """A probability or similar bounded value is outside its valid range."""


class ClassMismatch(TsudaError):
    """A triplet violates its class constraints (positive != anchor class)."""


class NoPrototypes(TsudaError):
    """The prototype bank has no initialized class prototype yet."""


class EmptyDataset(TsudaError):
    """An operation that needs samples received an empty dataset."""


class MissingLabels(TsudaError):
    """Labels are required but absent from the dataset."""


class TooLarge(TsudaError):
    """Input exceeds the size bound of an exhaustive-enumeration routine."""


class Empty(TsudaError):
    """A sequence argument has zero length."""
