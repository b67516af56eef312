"""Exception types with stable meanings across the library and the CLI."""


class StereoCalError(Exception):
    """Base class for all library errors."""


class InvalidArgumentError(StereoCalError, ValueError):
    """An argument violates a documented precondition."""


class BehindCameraError(StereoCalError):
    """A 3D point with non-positive depth cannot be projected."""


class DegenerateOrientationError(StereoCalError):
    """Rotation too close to gimbal lock for a unique Euler decomposition."""


class NumericFailureError(StereoCalError):
    """An iterative numeric routine failed to converge."""


class InvalidRigError(StereoCalError):
    """Stereo rig geometry is degenerate (e.g. zero baseline)."""


class SceneRangeError(StereoCalError):
    """Synthetic scene produces disparities outside the matcher range."""


class FileFormatError(StereoCalError):
    """A persisted file (calibration, image, pair list) is malformed."""


class UndefinedRatioError(StereoCalError, ZeroDivisionError):
    """Score ratio requested against a zero reference score."""


class OptimizationError(StereoCalError):
    """Score evaluation failed during optimization.

    Carries the trace accumulated up to the failure in ``trace``.
    """

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace
