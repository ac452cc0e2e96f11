"""Exception hierarchy shared across the toolkit.

Each class maps to a distinct process exit code in the command-line
interface, so scripted callers can tell input problems from numerical
failures.
"""


class ToolkitError(Exception):
    """Base class for all puboanneal errors."""


class SizeLimitError(ToolkitError):
    """Problem exceeds a hard size limit (qubit count, brute-force width)."""


class FormatError(ToolkitError):
    """Malformed input file (DIMACS, JSON polynomial, circuit text)."""


class ConvergenceError(ToolkitError):
    """Iterative eigensolver failed to reach the required residual."""


class GenerationError(ToolkitError):
    """Instance generation exhausted its attempt budget."""


class NormalizationError(ToolkitError):
    """Requested normalization has an empty coefficient class."""
