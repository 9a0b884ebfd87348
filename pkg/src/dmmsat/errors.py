"""Exception types raised across the package."""


class DmmSatError(Exception):
    """Base class for all package errors."""


class InfeasibleBalance(DmmSatError, ValueError):
    """No mix of 3- and 4-occurrence variables fills the literal slots."""

    def __init__(self, n, rho_xor, detail=""):
        self.n = n
        self.rho_xor = rho_xor
        msg = f"no 3/4 occurrence balance for n={n}, rho_xor={rho_xor}"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


class LengthMismatch(DmmSatError, ValueError):
    """Assignment length differs from the formula's variable count."""


class TooLarge(DmmSatError, ValueError):
    """Formula too large for exhaustive enumeration."""


class ParseError(DmmSatError, ValueError):
    """Malformed input text. ``lineno`` is 1-based, or None if unknown."""

    def __init__(self, message, lineno=None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


class HeaderMismatch(ParseError):
    """Declared header counts disagree with the body."""


class NonFiniteState(DmmSatError, FloatingPointError):
    """Integration produced NaN or Inf; usually dt is too large."""

    def __init__(self, step):
        self.step = step
        super().__init__(f"non-finite state after step {step}")


class InsufficientData(DmmSatError, ValueError):
    """Too few aggregated points to fit a scaling model."""
