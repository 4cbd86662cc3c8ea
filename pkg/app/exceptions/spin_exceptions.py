from typing import Any


class SpinTomoException(Exception):
    def __init__(
        self,
        code: int = 10000,
        message: str = "spintomo exception",
        exit_code: int = 1,
        data: Any = None,
    ) -> None:
        super().__init__(message)
        self.code = code  # Business error code
        self.message = message
        self.exit_code = exit_code  # Process exit code used by the CLI
        self.data = data  # Optional additional data


# Usage / validation errors (exit 1)
class ValidationError(SpinTomoException):
    def __init__(self, message: str = "Validation error", data: Any = None):
        super().__init__(code=1001, message=message, exit_code=1, data=data)


class DimensionMismatchError(SpinTomoException):
    def __init__(self, message: str = "Dimension mismatch", data: Any = None):
        super().__init__(code=1002, message=message, exit_code=1, data=data)


class NotTripodError(SpinTomoException):
    def __init__(self, triple_product: float, message: str = None):
        super().__init__(
            code=1003,
            message=message or f"Axes are coplanar: triple product {triple_product:.3e}",
            exit_code=1,
            data={"triple_product": triple_product},
        )


class HoldoutInQuorumError(SpinTomoException):
    def __init__(self, angle: float, axis_index: int):
        super().__init__(
            code=1004,
            message=f"Holdout axis coincides with quorum axis {axis_index} (angular distance {angle:.3e})",
            exit_code=1,
            data={"angle": angle, "axis_index": axis_index},
        )


class NotOddParityError(SpinTomoException):
    def __init__(self, violation: float):
        super().__init__(
            code=1005,
            message=f"Wave function is not odd: max |psi(x) + psi(-x)| = {violation:.3e}",
            exit_code=1,
            data={"violation": violation},
        )


# Injectivity errors (exit 2)
class NotInjectiveError(SpinTomoException):
    def __init__(self, rank: int, dimension: int):
        nullity = dimension - rank
        super().__init__(
            code=2001,
            message=f"Measurement map is not injective: rank {rank} of {dimension}, null space dimension {nullity}",
            exit_code=2,
            data={"rank": rank, "null_space_dimension": nullity},
        )
        self.rank = rank
        self.null_space_dimension = nullity


class NoInjectiveConfigurationError(SpinTomoException):
    def __init__(self, message: str = "No injective axis configuration found", data: Any = None):
        super().__init__(code=2002, message=message, exit_code=2, data=data)


# Data consistency errors (exit 3)
class InconsistentDataError(SpinTomoException):
    def __init__(self, message: str = "Intensity data are inconsistent", data: Any = None):
        super().__init__(code=3001, message=message, exit_code=3, data=data)


class NoMatchError(SpinTomoException):
    def __init__(self, message: str = "No partner candidate matches the third-axis intensities", data: Any = None):
        super().__init__(code=3002, message=message, exit_code=3, data=data)


# Non-generic input / solver errors (exit 4)
class ZeroAmplitudeError(SpinTomoException):
    def __init__(self, m_values: list):
        labels = ", ".join(m_values)
        super().__init__(
            code=4001,
            message=f"State is not generic: zero amplitude at m = {labels}",
            exit_code=4,
            data={"m": m_values},
        )
        self.m_values = m_values


class NoConvergenceError(SpinTomoException):
    def __init__(self, residual: float, seeds: int):
        super().__init__(
            code=4002,
            message=f"Phase search did not converge: best residual {residual:.3e} after {seeds} seeds",
            exit_code=4,
            data={"residual": residual, "seeds": seeds},
        )


class AmbiguousError(SpinTomoException):
    def __init__(self, matches: int):
        super().__init__(
            code=4003,
            message=f"{matches} partner candidates match the third-axis intensities",
            exit_code=4,
            data={"matches": matches},
        )
        self.matches = matches


# I/O errors (exit 5)
class SpinFileError(SpinTomoException):
    def __init__(self, message: str = "File error", data: Any = None):
        super().__init__(code=5001, message=message, exit_code=5, data=data)
