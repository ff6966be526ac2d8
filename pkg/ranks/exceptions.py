"""
Error hierarchy for the rank engine.

Commands catch ``RankEngineError`` subclasses raised by bad user input and
turn them into usage errors; everything else is a correctness failure.
"""


class RankEngineError(Exception):
    """Base class for every engine error."""


class ShapeError(RankEngineError, ValueError):
    """Malformed or degenerate shape text."""


class WidthExceeded(ShapeError):
    """Column count above the one-word row limit."""

    def __init__(self, cols, limit=64):
        self.cols = cols
        self.limit = limit
        super().__init__(f"k={cols} exceeds the {limit}-column limit")


class BudgetExceeded(RankEngineError):
    def __init__(self, states, max_states, what="states"):
        self.states = states
        self.max_states = max_states
        super().__init__(
            f"{states:,} {what} exceeds budget of {max_states:,} "
            "(raise --max-states or pass --force)"
        )


class ChecksumViolation(RankEngineError):
    """Sum of rank counts differs from the number of parameter assignments."""

    def __init__(self, shape, total, expected):
        self.shape = shape
        self.total = total
        self.expected = expected
        super().__init__(
            f"checksum violation for {shape}: sum of counts {total} != {expected}"
        )


class CacheCorrupt(RankEngineError):
    def __init__(self, path, line_number, reason, shape=None):
        self.path = path
        self.line_number = line_number
        self.shape = shape
        label = f" (shape {shape})" if shape else ""
        super().__init__(f"corrupt cache record {path}:{line_number}{label}: {reason}")


class ExtensionError(RankEngineError, ValueError):
    """Invalid free-row extension request."""


class RegistryError(RankEngineError):
    """Encoding error in the family data file or an unknown family id."""

    def __init__(self, message, line_number=None):
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)


class OutOfValidity(RankEngineError):
    def __init__(self, family, k, l, i):
        self.family = family
        self.k = k
        self.l = l
        self.i = i
        where = f"k={k}" if l is None else f"k={k}, l={l}"
        what = "no rank" if i is None else f"rank {i}"
        super().__init__(f"{family}: {what} is not covered at {where}")


class NegativeCount(RankEngineError):
    def __init__(self, family, i, value):
        self.family = family
        self.i = i
        self.value = value
        super().__init__(f"{family}: rank {i} evaluated to negative count {value}")


class NoRuleApplies(RankEngineError):
    def __init__(self, i, detail=""):
        self.i = i
        super().__init__(f"no reduction rule applies to rank {i}{detail}")


class DivisibilityViolation(RankEngineError):
    def __init__(self, shape, remainder, shift):
        self.shape = shape
        self.remainder = remainder
        self.shift = shift
        super().__init__(
            f"solution count for {shape} is not an integer: "
            f"remainder {remainder} modulo 2^{shift}"
        )
