"""
Errors Module

This module defines the exception hierarchy shared by the kernelization toolkit.
Every error is a ValueError so callers that only care about bad input can catch
that, while the command-line front end maps the subclasses to exit codes.
"""


class KernelsmithError(ValueError):
    """Base class for all toolkit errors."""


class DimensionMismatchError(KernelsmithError):
    """Raised when two vectors (or a vector and a spec) disagree on dimension."""

    def __init__(self, expected, actual, what="vector"):
        self.expected = expected
        self.actual = actual
        super().__init__(f"{what} dimension mismatch: expected {expected}, got {actual}")


class ParameterError(KernelsmithError):
    """Raised for out-of-range parameters such as eps, delta, N or r."""


class LatticeError(KernelsmithError):
    """Raised when a lattice basis is not linearly independent."""


class InfeasibleEnumerationError(KernelsmithError):
    """Raised when an exhaustive enumeration would exceed the configured cap."""

    def __init__(self, count, cap, what="test vectors"):
        self.count = count
        self.cap = cap
        super().__init__(
            f"Enumerating {what} needs {count} items, above the enumeration cap {cap}"
        )


class CapExceededError(KernelsmithError):
    """Raised when an instance is too large for a brute-force oracle."""

    def __init__(self, cap_name, limit, actual):
        self.cap_name = cap_name
        self.limit = limit
        self.actual = actual
        super().__init__(
            f"Instance exceeds oracle cap {cap_name}={limit} (got {actual}); "
            f"try a smaller instance or raise KERNELSMITH_{cap_name.upper()}"
        )


class ValidationError(KernelsmithError):
    """Raised for malformed problem instances."""


class InfeasibleSolutionError(KernelsmithError):
    """Raised when a solution violates a problem constraint."""

    def __init__(self, constraint, detail=""):
        self.constraint = constraint
        message = f"Infeasible solution: violates '{constraint}'"
        if detail:
            message += f" ({detail})"
        super().__init__(message)


class EmptyFamilyError(KernelsmithError):
    """Raised when a max or min is taken over an empty index family."""


class StructureMismatchError(KernelsmithError):
    """Raised when two instances compared by verify_kernel differ in structure."""


class ReductionError(KernelsmithError):
    """Raised when a reduced vector fails its own post-checks."""


class InstanceFormatError(KernelsmithError):
    """Raised when an instance file cannot be parsed."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)
