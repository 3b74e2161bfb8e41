"""Exception hierarchy.

Every error carries a short machine-readable ``code`` used by the command
line front end when it reports failures as JSON on stderr.
"""


class SliceCalcError(Exception):
    code = "error"
    exit_status = 1


class UnsupportedAlgebraError(SliceCalcError):
    code = "unsupported-algebra"
    exit_status = 10


class DimensionError(SliceCalcError, ValueError):
    code = "dimension"
    exit_status = 11


class InvalidStructureError(SliceCalcError, ValueError):
    code = "invalid-structure"
    exit_status = 12


class DomainError(SliceCalcError, ValueError):
    code = "domain"
    exit_status = 13


class SingularPairError(SliceCalcError, ArithmeticError):
    code = "singular-pair"
    exit_status = 14


class KernelViolationError(SliceCalcError, ValueError):
    code = "kernel-violation"
    exit_status = 15


class InvalidProbeError(SliceCalcError, ValueError):
    code = "invalid-probe"
    exit_status = 16


class BranchCutError(SliceCalcError, ValueError):
    code = "branch-cut"
    exit_status = 17


class DivergenceError(SliceCalcError, ValueError):
    code = "divergence"
    exit_status = 18


class StepSizeError(SliceCalcError, ValueError):
    code = "step-size"
    exit_status = 19


class RadiusError(SliceCalcError, ValueError):
    code = "radius"
    exit_status = 20


class ConvergenceDomainError(SliceCalcError, ValueError):
    code = "convergence-domain"
    exit_status = 21


class InvalidInputError(SliceCalcError, ValueError):
    code = "invalid-input"
    exit_status = 22


class InvariantFailure(SliceCalcError):
    code = "invariant-failed"
    exit_status = 23


class ConsistencyWarning(UserWarning):
    """Input data disagree where the theory says they must coincide."""
