"""Exception hierarchy.

The CLI maps each family to an exit code: ``ValidationFailure`` -> 1,
``AssumptionError`` -> 2, ``InputError`` -> 3.
"""


class CtmcError(Exception):
    """Base class for every error raised by this package."""


class InputError(CtmcError, ValueError):
    """Malformed input text or documents."""


class ValidationFailure(CtmcError, ValueError):
    """A model violates a standing assumption checked before reduction."""


class AssumptionError(CtmcError, ValueError):
    """A reduction stage cannot proceed because its hypothesis fails."""


class ExprSyntaxError(InputError):
    def __init__(self, message, position, expected=None, text=None):
        self.reason = message
        self.position = position
        self.expected = expected
        self.text = text
        detail = f"{message} at position {position}"
        if expected:
            detail += f" (expected {expected})"
        super().__init__(detail)


class ZeroDenominator(InputError, ZeroDivisionError):
    pass


class FormatError(InputError):
    pass


class DuplicateState(FormatError):
    pass


class UnknownStateInRateKey(FormatError):
    pass


class LabelMismatch(InputError):
    pass


class PoleAtLambda(ValidationFailure):
    pass


class EventuallyNegative(ValidationFailure):
    pass


class NegativeRate(ValidationFailure):
    def __init__(self, pair, lam, value):
        self.pair = pair
        self.lam = lam
        self.value = value
        super().__init__(f"rate {pair[0]}->{pair[1]} is {value!r} at lambda={lam!r}")


class EmptySlowSpace(ValidationFailure):
    pass


class ZeroSlowExitRate(ValidationFailure):
    pass


class ReducedChainUndefined(AssumptionError):
    pass


class SingularSystem(AssumptionError):
    pass


class NotIrreducible(AssumptionError):
    pass


class NotSingularlyPerturbed(AssumptionError):
    def __init__(self, keys, reason="rates are not affine in lambda"):
        self.keys = list(keys)
        super().__init__(f"{reason}: {', '.join(self.keys)}")


class FastRecurrentClass(AssumptionError):
    def __init__(self, members):
        self.members = list(members)
        super().__init__(
            "fast states form a recurrent class of the lambda-scaled part: "
            + ", ".join(map(str, self.members))
        )


class PathBudgetExceeded(CtmcError, RuntimeError):
    pass


class NonFiniteResult(CtmcError, ArithmeticError):
    pass
