class SMPIError(Exception):
    """Base class for all library errors."""


class ZeroNormal(SMPIError):
    pass


class DegeneratePlane(SMPIError):
    pass


class NonPositiveDepth(SMPIError):
    pass


class DimensionMismatch(SMPIError):
    pass


class NonMonotoneDepths(SMPIError):
    pass


class DegenerateFit(SMPIError):
    pass


class EmptyScene(SMPIError):
    pass


class UnknownScene(SMPIError):
    pass


class EmptyInput(SMPIError):
    pass


class EmptyMask(SMPIError):
    pass


class ImageTooSmall(SMPIError):
    pass


class NoOverlap(SMPIError):
    pass


class VersionMismatch(SMPIError):
    pass


class CorruptManifest(SMPIError):
    pass


class MissingLayer(SMPIError):
    pass


class UnsupportedFormat(SMPIError):
    pass


class ParseError(SMPIError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line
