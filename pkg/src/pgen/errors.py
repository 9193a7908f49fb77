"""Exception types shared across the package.

Each class maps to a process exit code so the command-line layer can
translate failures uniformly: usage problems exit 2, resource-limit
refusals exit 3, malformed data exits 4.
"""


class PgenError(Exception):
    """Base class for errors raised by this package."""

    exit_code = 1


class UsageError(PgenError):
    """Invalid parameters or configuration (exit code 2)."""

    exit_code = 2


class ResourceLimitError(PgenError):
    """Request exceeds a configured memory/length/work cap (exit code 3)."""

    exit_code = 3


class DataFormatError(PgenError):
    """Malformed or out-of-contract input data (exit code 4)."""

    exit_code = 4
