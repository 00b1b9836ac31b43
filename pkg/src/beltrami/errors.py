"""Exception types shared across the package."""


class BeltramiError(Exception):
    """Base class for all package errors."""


class ParameterError(BeltramiError, ValueError):
    """Invalid argument value (unsupported order, bad tolerance, ...)."""


class GeometryError(BeltramiError):
    """Invalid generating curve (self-intersection, bad vertex data, ...)."""


class AxisSeparationError(GeometryError):
    """Curve touches or crosses the rotation axis (r <= 0 somewhere)."""


class NonSmoothPointError(GeometryError):
    """Differential data requested at a curve breakpoint."""


class MeshError(BeltramiError):
    """Panel mesh inconsistent with the problem (missing breakpoint, wrong length)."""


class RefinementError(MeshError):
    """Dyadic refinement target is not a panel boundary."""


class ExtrapolationError(BeltramiError):
    """Interpolation requested outside the panel."""


class DegenerateSplitError(BeltramiError):
    """Panel split point coincides with a panel endpoint."""


class WellPosednessError(BeltramiError):
    """ODE problem is under- or over-determined (q = 0 without a constraint, ...)."""


class SolverError(BeltramiError):
    """Linear solver failed to converge."""


class SolvabilityError(BeltramiError):
    """Right-hand side violates the range condition (non-zero surface mean)."""


class DegenerateReferenceError(BeltramiError):
    """Relative error requested against a zero reference field."""


class ConfigError(BeltramiError):
    """Malformed experiment configuration."""


class HarnessError(BeltramiError):
    """Cross-validation failure inside an experiment driver."""
