"""
Exceptions raised by the protocol library.

Everything derives from MPCError, which is a ValueError so callers that
already catch ValueError keep working.
"""


class MPCError(ValueError):
    """Base class for all protocol-library errors."""

    exit_code = 1


class CausalityViolation(MPCError):
    """A party read a value it never received, or used it before delivery."""


class ProtocolError(MPCError):
    """A protocol was invoked with operands that break its preconditions."""


class KeyRangeError(MPCError):
    """A key was requested from an empty range."""


class DomainError(MPCError):
    """Exponential protocol input outside the supported domain."""


class BudgetExceeded(MPCError):
    """Exhaustive enumeration would exceed its configured budget."""

    exit_code = 3


class CircuitParseError(MPCError):
    """Netlist text could not be parsed into a valid circuit."""

    def __init__(self, line_no, message):
        self.line_no = line_no
        super().__init__(f"line {line_no}: {message}")


class UsageError(MPCError):
    """Command-line arguments that parse but do not fit the command."""

    exit_code = 2


class AuditFailure(MPCError):
    """At least one audited protocol failed its verdicts."""

    exit_code = 4
