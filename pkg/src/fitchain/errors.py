"""Exception hierarchy.

Every error carries a machine-readable ``code`` so the CLI can report it as
structured JSON. Validation problems subclass :class:`ValidationError` (CLI exit
code 2); everything else is a runtime failure (exit code 1).
"""


class FitChainError(Exception):
    code = "FitChainError"

    def to_dict(self):
        return {"error": self.code, "message": str(self)}


class ValidationError(FitChainError, ValueError):
    code = "ValidationError"


class BranchCountTooSmall(ValidationError):
    code = "BranchCountTooSmall"


class LengthsNotStrictlyIncreasing(ValidationError):
    code = "LengthsNotStrictlyIncreasing"


class TrunkNotMaximal(ValidationError):
    code = "TrunkNotMaximal"


class WeightsInvalid(ValidationError):
    code = "WeightsInvalid"


class EpsilonOutOfRange(ValidationError):
    code = "EpsilonOutOfRange"


class UnknownState(ValidationError):
    code = "UnknownState"


class DimensionMismatch(ValidationError):
    code = "DimensionMismatch"


class NotClassA(ValidationError):
    code = "NotClassA"


class NotClassB(ValidationError):
    code = "NotClassB"


class WindowTooWide(ValidationError):
    code = "WindowTooWide"


class KTooSmall(ValidationError):
    code = "KTooSmall"


class LTooSmall(ValidationError):
    code = "LTooSmall"


class NotIrreducible(FitChainError):
    code = "NotIrreducible"


class SolveFailed(FitChainError):
    code = "SolveFailed"


class StateSpaceTooLarge(FitChainError):
    code = "StateSpaceTooLarge"


class TooLarge(FitChainError):
    code = "TooLarge"


class ToleranceUnreachable(FitChainError):
    code = "ToleranceUnreachable"
