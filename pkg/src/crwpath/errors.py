"""Exception hierarchy.

Every error raised on purpose by the package derives from :class:`CRWError`,
so callers (the CLI in particular) can map families of errors to exit codes.
"""


class CRWError(Exception):
    """Base class for all package errors."""


class ValidationError(CRWError, ValueError):
    """Model parameters are not admissible.

    ``vertex`` is the offending vertex index when one can be named.
    """

    def __init__(self, message, vertex=None):
        if vertex is not None:
            message = f"vertex {vertex}: {message}"
        super().__init__(message)
        self.vertex = vertex


class OutOfRange(ValidationError):
    pass


class DegenerateCoin(ValidationError):
    pass


class NonIsospectral(ValidationError):
    pass


class DimensionMismatch(CRWError, ValueError):
    pass


class NotAProbabilityState(CRWError, ValueError):
    pass


class ParseError(CRWError):
    """A configuration file could not be read or decoded."""


class NumericalError(CRWError, ArithmeticError):
    pass


class Overflow(NumericalError):
    def __init__(self, message, vertex=None):
        if vertex is not None:
            message = f"vertex {vertex}: {message}"
        super().__init__(message)
        self.vertex = vertex


class ConvergenceFailure(NumericalError):
    pass


class NearDegenerate(NumericalError):
    """Two eigenvalues that must be distinct are closer than the gap tolerance."""


class InconsistentLemma(NumericalError):
    """The inner-product test and the eigenvalue test for linear dependence disagree."""


class ComplexRoots(NumericalError):
    def __init__(self, lam, nu2, discriminant):
        super().__init__(
            f"eigenvalue map has complex roots for lambda={lam:.15g}, "
            f"nu2={nu2:.15g} (discriminant {discriminant:.6g})"
        )
        self.lam = lam
        self.nu2 = nu2
        self.discriminant = discriminant


class AssumptionViolated(CRWError):
    """Some Jacobi eigenvalue lies inside the forbidden band for nu2 < 0.

    ``report`` is the :class:`~crwpath.spectral.AssumptionReport` that failed.
    """

    def __init__(self, report):
        bad = ", ".join(f"{lam:.15g}" for lam in report.offending)
        super().__init__(
            f"|lambda| must exceed {report.threshold:.15g} for nu2={report.nu2:.15g}; "
            f"offending lambda: {bad}"
        )
        self.report = report
