class CrackEvalError(Exception):
    """Base class for data errors raised by this package."""


class MaskFormatError(CrackEvalError, ValueError):
    pass


class ShapeMismatchError(CrackEvalError, ValueError):
    pass


class EmptyPointSetError(CrackEvalError, ValueError):
    pass


class IngestionError(CrackEvalError):
    pass


class PairingError(CrackEvalError):
    pass


class PlacementError(CrackEvalError):
    pass
