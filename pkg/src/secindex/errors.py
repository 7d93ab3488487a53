"""Shared exception types.

The CLI maps these onto exit codes: bad input is exit 1, a violated
internal invariant is exit 2.
"""


class InputError(ValueError):
    """Malformed or out-of-range user input (graphs, cases, CLI arguments)."""


class CaseParseError(InputError):
    """A case or instance file could not be parsed."""


class SizeLimitError(InputError):
    """A brute-force guard refused an instance that is too large."""


class CapacityOverflowError(InputError):
    """Total capacity would leave the signed 64-bit range."""


class InvariantError(RuntimeError):
    """An internal consistency check failed; indicates a bug, not bad input."""


class EstimationError(RuntimeError):
    """State estimation hit singular normal equations."""
