"""Exception hierarchy shared by every module."""


class DmcaError(Exception):
    """Base class for all library errors."""


class InvalidData(DmcaError, ValueError):
    pass


class ShapeError(DmcaError, ValueError):
    pass


class DimensionError(DmcaError, ValueError):
    pass


class NumericalError(DmcaError, ArithmeticError):
    pass


class SizeError(DmcaError, ValueError):
    pass


class EmptyPairing(DmcaError, ValueError):
    pass


class FormatError(DmcaError, ValueError):
    pass


class ManifestError(DmcaError, ValueError):
    pass


class SplitError(DmcaError, ValueError):
    pass


class TrainError(DmcaError, ValueError):
    pass


class DataError(DmcaError, ValueError):
    pass
