# utils/errors.py


class HyersLabError(Exception):
    """Base class for every error raised by hyers-lab services."""


class ConfigurationError(HyersLabError, ValueError):
    """Invalid scenario, flag combination or function/control spec."""


class ArityError(ConfigurationError):
    """A tuple does not have the length the spec expects."""

    def __init__(self, expected: int, got: int, what: str = "tuple"):
        super().__init__(f"{what} must have length {expected}, got {got}")
        self.expected = expected
        self.got = got


class DivergentSeriesError(HyersLabError):
    """The stabilizer series does not converge for the requested mode."""


class ThresholdError(HyersLabError):
    """r = 1 was requested where only r != 1 is meaningful."""

    def __init__(self, message: str = ""):
        super().__init__(
            message
            or "r = 1 is the stability threshold: no stability constant exists. "
            "Run `hyers-lab threshold` for the counterexamples."
        )


class ContractViolationError(HyersLabError):
    """An inequality the caller promised was observed to fail."""


class HypothesisViolationError(ContractViolationError):
    """Sampled |D_n g(z)| exceeded phi(z)."""

    def __init__(self, z, defect_value: float, control_value: float):
        coords = [[float(v) for v in p] for p in z]
        super().__init__(
            f"defect hypothesis violated at z={coords}: "
            f"|D_n g(z)| = {abs(defect_value):.6g} > phi(z) = {control_value:.6g}"
        )
        self.z = coords
        self.defect_value = defect_value
        self.control_value = control_value


class CoordinateRangeError(HyersLabError, OverflowError):
    """Dyadic rescaling pushed a coordinate out of the safe range."""


class WitnessNotFoundError(HyersLabError):
    """Neither the analytic witness nor the dyadic scan broke the bound."""
