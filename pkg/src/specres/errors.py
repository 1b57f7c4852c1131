"""Exception and warning types raised across the toolkit."""


class SpecresError(Exception):
    """Base class for recoverable domain errors."""

    code = "domain_error"


class MismatchedCardinality(SpecresError):
    code = "mismatched_cardinality"


class PreconditionViolation(SpecresError):
    code = "precondition_violation"


class InsufficientMeasurements(SpecresError):
    code = "insufficient_measurements"


class PencilSingular(SpecresError):
    code = "pencil_singular"


class RegimeViolation(SpecresError):
    code = "regime_violation"


class InfeasibleParameters(SpecresError):
    code = "infeasible_parameters"


class SeparationInfeasible(SpecresError):
    code = "separation_infeasible"


class OracleRegimeViolation(SpecresError):
    code = "oracle_regime_violation"


class NoiseBudgetExceeded(SpecresError):
    code = "noise_budget_exceeded"


class RankDeficient(SpecresError):
    code = "rank_deficient"


class Singular(SpecresError):
    code = "singular"


class ConvergenceFailure(SpecresError):
    code = "convergence_failure"


class RankDeficientWarning(RuntimeWarning):
    pass


class ZeroEigenvalue(RuntimeWarning):
    pass
