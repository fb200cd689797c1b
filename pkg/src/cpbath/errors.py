"""Exception hierarchy for cpbath."""


class CPBathError(Exception):
    """Base class for all package errors."""


class DimensionMismatch(CPBathError, ValueError):
    pass


class PivotTooSmall(CPBathError, ValueError):
    """The chosen chart pivot amplitude is (numerically) zero."""


class SingularDamping(CPBathError, ArithmeticError):
    """The linear system resolving the Markovian damping term is singular."""


class StepSizeUnderflow(CPBathError, ArithmeticError):
    """The adaptive integrator could not satisfy its tolerances."""


class InvalidSpec(CPBathError, ValueError):
    pass


class TooFewSamples(CPBathError, ValueError):
    pass


class ConfigParse(CPBathError, ValueError):
    pass


class EmptySweep(CPBathError, ValueError):
    pass
