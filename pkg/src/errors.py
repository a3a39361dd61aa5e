"""
Errors Module

Exception hierarchy shared by the parsers, the weaving runtime, the simulated
middleware and the command-line entry point.
"""

from typing import Optional


class AspectIoTError(Exception):
    """Base class for every error raised by this package."""


class ManifestError(AspectIoTError):
    """
    A concern manifest violates its invariants.

    Attributes:
        line: 1-based line number of the offending declaration, if known
    """

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(f"{prefix}{message}")


class ManifestSyntaxError(ManifestError):
    """
    A manifest line does not follow the grammar.

    Attributes:
        line: 1-based line number
        column: 1-based column inside the line
    """

    def __init__(self, message: str, line: int, column: int):
        self.column = column
        super().__init__(f"column {column}: {message}", line=line)


class PointcutSyntaxError(AspectIoTError):
    """
    A pointcut expression cannot be parsed.

    Attributes:
        position: 0-based character offset into the expression text
    """

    def __init__(self, message: str, position: int):
        self.position = position
        super().__init__(f"{message} at position {position}")


class RegistryError(AspectIoTError):
    """Duplicate or unknown operation in an operation registry."""


class WeaveError(AspectIoTError):
    """Aspects cannot be woven (for example, duplicate aspect names)."""


class ProceedError(AspectIoTError):
    """An Around advice called proceed more than once."""


class AdviceError(AspectIoTError):
    """
    An advice body failed.

    Attributes:
        aspect: name of the aspect owning the failing advice
        phase: advice phase name
    """

    def __init__(self, aspect: str, phase: str, cause: BaseException):
        self.aspect = aspect
        self.phase = phase
        super().__init__(f"{phase} advice of aspect {aspect} failed: {cause}")


class GuardError(AspectIoTError):
    """The synchronization guard protocol was violated."""


class ProtocolError(AspectIoTError):
    """A middleware operation was called outside its protocol preconditions."""


class ScenarioError(AspectIoTError):
    """
    A scenario script is invalid.

    Attributes:
        line: 1-based line number of the offending statement
    """

    def __init__(self, message: str, line: int):
        self.line = line
        super().__init__(f"line {line}: {message}")


class ReportError(AspectIoTError):
    """A cohesion report cannot be computed or rendered."""


class VerificationError(AspectIoTError):
    """
    A demo verification step failed.

    Attributes:
        check: name of the failing verification
    """

    def __init__(self, check: str, message: str):
        self.check = check
        super().__init__(f"verification '{check}' failed: {message}")


class UsageError(AspectIoTError):
    """Invalid command-line usage."""
