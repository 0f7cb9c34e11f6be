"""Exception hierarchy.

Every error carries an optional ``field`` path so the CLI can point at the
offending scenario entry. The CLI maps error families to exit codes.
"""


class BpsoscError(Exception):
    exit_code = 2

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field

    def __str__(self):
        msg = super().__str__()
        if self.field:
            return f"{msg} (at {self.field})"
        return msg


class ValidationError(BpsoscError, ValueError):
    """Invalid input data (bad shape, bad value, unsupported combination)."""


class DimensionError(ValidationError):
    pass


class DomainError(ValidationError):
    pass


class OutOfRangeError(ValidationError):
    pass


class DegenerateCentralChargeError(ValidationError):
    pass


class SupportPropertyError(ValidationError):
    pass


class BranchRequiredError(ValidationError):
    pass


class UnsupportedStructureError(ValidationError):
    pass


class InvalidSubsetError(ValidationError):
    pass


class InvalidOscillatorError(ValidationError):
    pass


class PoleError(ValidationError):
    pass


class UnsupportedRegionError(ValidationError):
    pass


class SingularArgumentError(ValidationError):
    pass


class NumericalError(BpsoscError, ArithmeticError):
    exit_code = 3


class StiffnessError(NumericalError):
    pass


class DivergenceError(NumericalError):
    def __init__(self, message, field=None, diagnostic=None):
        super().__init__(message, field)
        self.diagnostic = diagnostic


class StepError(NumericalError):
    pass


class SectorError(BpsoscError, ValueError):
    exit_code = 4


class RayCollisionError(SectorError):
    pass


class BranchError(SectorError):
    pass


class OutOfSectorError(SectorError):
    pass
