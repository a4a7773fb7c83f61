"""
errors.py - Exception types shared across the toolkit

WHAT THIS FILE DOES:
Every package raises one of these instead of a bare ValueError, so the
command-line front end can tell a usage mistake (exit code 2) from a
problem that is simply too big to enumerate (exit code 3).

LEARNING MOMENT: Exception Hierarchies
Catching `PolarError` catches everything this project raises on purpose.
Catching `CapacityError` catches only "too large" failures. Subclassing
ValueError keeps the usual Python meaning for bad arguments.
"""


class PolarError(Exception):
    """Base class for every error raised by this project."""
    pass


class GF2Error(PolarError, ValueError):
    """Dimension mismatch or empty solution set in GF(2) linear algebra."""
    pass


class UnsupportedWidthError(GF2Error):
    """Symbol width outside the range the subgroup lattice supports."""
    pass


class KernelError(PolarError, ValueError):
    """Invalid kernel matrix or code decomposition."""
    pass


class LayoutError(PolarError, ValueError):
    """Unknown scheme, bad recursion depth or wrong block length."""
    pass


class ChannelError(PolarError, ValueError):
    """Invalid channel table or unknown output letter."""
    pass


class CapacityError(PolarError):
    """A size or enumeration cap from config.py was exceeded."""
    pass
