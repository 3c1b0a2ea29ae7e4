"""Exception types shared across the package."""


class PrevoptError(Exception):
    """Base class for all package errors."""


class DivergentMGF(PrevoptError):
    """The claim moment-generating function is infinite at the requested argument."""

    def __init__(self, a, limit):
        self.a = a
        self.limit = limit
        super().__init__(f"mgf diverges at a={a!r} (finite only for a < {limit!r})")


class PreconditionError(PrevoptError, ValueError):
    """An operation was called outside its documented domain."""


class NotApplicable(PrevoptError):
    """A method was requested whose hypotheses do not hold."""


class NoAdmissibleBeta(PrevoptError):
    """The beta scan found no point with gate value below one half."""

    def __init__(self, phi, scan):
        self.phi = phi
        self.scan = scan
        super().__init__(
            f"no admissible beta for Phi={phi!r}; minimum over scan is "
            f"{scan.min_value!r} at beta={scan.argmin_beta!r}"
        )


class NonfiniteSample(PrevoptError):
    """A Monte Carlo sample produced a non-finite value."""


class NonfiniteIntegral(PrevoptError):
    """A quadrature against the claim law returned a non-finite value."""


class ContractError(PrevoptError, ValueError):
    """An insurance contract violates the reimbursement constraint."""


class ConfigError(PrevoptError):
    """Configuration file could not be parsed or validated."""

    def __init__(self, message, line=None, path=None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where = f"{path}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}" if where else message)
