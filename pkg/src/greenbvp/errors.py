"""Exception hierarchy shared by all modules."""


class GreenError(Exception):
    """Base class for every error raised by greenbvp."""


class InvalidDomain(GreenError, ValueError):
    pass


class Unsupported(GreenError, NotImplementedError):
    pass


class SingularEvaluation(GreenError, ValueError):
    pass


class PointOnBoundary(GreenError, ValueError):
    pass


class ShapeMismatch(GreenError, ValueError):
    pass


class IllPosed(GreenError):
    """The boundary-response system cannot produce a Green function.

    Carries the one-norm condition estimate of the offending matrix.
    """

    def __init__(self, message, condition_estimate=float("inf")):
        super().__init__(message)
        self.condition_estimate = condition_estimate


class SingularMatrix(IllPosed):
    pass


class SingularBlock(GreenError, ValueError):
    def __init__(self, which, message=None):
        super().__init__(message or f"block inversion failed: {which} is singular")
        self.which = which


class StageSingular(IllPosed):
    def __init__(self, stage, condition_estimate=float("inf")):
        super().__init__(
            f"stage {stage} kernel g_{stage} is not invertible on the data it must act on "
            f"(condition estimate {condition_estimate:.3e}); try permuting the condition list",
            condition_estimate,
        )
        self.stage = stage


class EigenvalueParameters(GreenError, ValueError):
    pass


class SingularSystem(GreenError, ValueError):
    pass


class ConfigError(GreenError, ValueError):
    pass
