"""Exception hierarchy.

Numerical failures derive from :class:`NumericalError` (CLI exit code 1);
malformed input derives from :class:`InputError` (CLI exit code 2).
"""


class NumericalError(ArithmeticError):
    pass


class InputError(ValueError):
    pass


class RankDeficient(NumericalError):
    pass


class ZeroVector(NumericalError):
    pass


class NoConvergence(NumericalError):
    pass


class SingularPencil(NumericalError):
    pass


class SingularMatrix(NumericalError):
    pass


class SingularReduction(NumericalError):
    pass


class SingularCompression(NumericalError):
    pass


class DefectiveEigenvalue(NumericalError):
    pass


class DegenerateDenominator(NumericalError):
    pass


class DerivativeVanishes(NumericalError):
    pass


class OutOfRegion(NumericalError):
    pass


class BadDelta(InputError):
    pass


class ManifestError(InputError):
    """Problem-file parse failure; carries the path and line number when known."""

    def __init__(self, message, path=None, line=None):
        self.message = message
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        super().__init__(where + message)
