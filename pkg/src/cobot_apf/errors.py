"""Exception types shared across the package."""


class CobotApfError(Exception):
    """Base class for package errors."""


class ValidationError(CobotApfError):
    """A config value violates a documented constraint (names field + rule)."""


class ParseError(CobotApfError):
    """A config file could not be parsed; carries line/column when known."""

    def __init__(self, message, line=None, column=None):
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)
        self.line = line
        self.column = column


class DegenerateGeometry(CobotApfError):
    """Robot and obstacle positions coincide; no direction is defined."""


class NumericalFailure(CobotApfError):
    """A linear solve failed or produced non-finite values."""


class JointLimitViolation(CobotApfError):
    """Integration drove a joint outside its configured limits."""

    def __init__(self, joint_index, value, limits, t):
        super().__init__(
            f"joint {joint_index + 1} hit {value:.4f} rad outside "
            f"[{limits[0]:.4f}, {limits[1]:.4f}] at t={t:.3f} s"
        )
        self.joint_index = joint_index
        self.value = value
        self.limits = limits
        self.t = t


class EmptyLog(CobotApfError):
    """Metrics requested on a log with no records."""
