class BreathSplatError(Exception):
    """Base class for every error raised by breathsplat."""


class DomainError(BreathSplatError, ValueError):
    """A scalar argument lies outside its mathematical domain."""


class DegenerateFaceError(BreathSplatError, ValueError):
    pass


class EmptyMeshError(BreathSplatError, ValueError):
    pass


class MeshFormatError(BreathSplatError, ValueError):
    pass


class NoOverlapError(BreathSplatError, ValueError):
    """Two contours or depth maps share no comparable element."""


class AnchoringError(BreathSplatError, ValueError):
    """A Gaussian cloud does not fit the mesh it is rendered with."""


class ShapeError(BreathSplatError, ValueError):
    pass


class SizeError(BreathSplatError, ValueError):
    pass


class LengthError(BreathSplatError, ValueError):
    pass


class InsufficientDepthError(BreathSplatError, ValueError):
    pass


class NonFiniteGradientError(BreathSplatError, ArithmeticError):
    pass


class UndefinedCorrelationError(BreathSplatError, ArithmeticError):
    pass


class SpecError(BreathSplatError, ValueError):
    pass


class TrajectoryTooShortError(BreathSplatError, ValueError):
    pass


class DatasetError(BreathSplatError, OSError):
    pass


class CoverageError(BreathSplatError, ValueError):
    """Reconstruction outputs do not cover every dataset frame."""


class ConfigError(BreathSplatError, ValueError):
    def __init__(self, message: str, key: str | None = None):
        super().__init__(message)
        self.key = key


class FrameIndexError(BreathSplatError, IndexError):
    pass
