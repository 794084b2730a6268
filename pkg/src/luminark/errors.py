"""Exception types raised by Luminark.

Every error derives from ``LuminarkError`` which is itself a ``ValueError``,
so callers that only care about invalid input can keep catching ``ValueError``.
"""


class LuminarkError(ValueError):
    """Base class for all Luminark errors."""


class LayoutError(LuminarkError):
    """Image dimensions do not fit the patch grid, or disagree with a key/threshold."""


class WatermarkKeyError(LuminarkError):
    """Key contents are inconsistent or a key file could not be parsed."""


class IntervalError(LuminarkError):
    """The tau sampling interval is empty or leaves (0, 1)."""


class UnachievableFprError(LuminarkError):
    """The requested false-positive rate is below 2**-N for the given patch count."""

    def __init__(self, n: int, target_fpr: float):
        self.n = n
        self.target_fpr = target_fpr
        super().__init__(
            f"Target fpr {target_fpr:g} is unachievable with {n} patches (smallest attainable p-value is 2^-{n})"
        )


class ParameterError(LuminarkError):
    """A numeric parameter is outside its valid range."""
