"""
Pointcut Models

Join points and the pointcut expression tree that selects them.
"""

import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Union

from .manifest import is_identifier

GLOB_WILDCARD = "*"
_IDENTIFIER_RUN = "[A-Za-z0-9_.-]*"


@dataclass(frozen=True)
class JoinPoint:
    """
    Execution of a registered middleware operation.

    Attributes:
        module_name: Module owning the operation
        op_name: Operation name
        kind: Always "execution"
        args_summary: Opaque argument description for traces
    """
    module_name: str
    op_name: str
    kind: str = "execution"
    args_summary: str = ""

    def __post_init__(self):
        if not is_identifier(self.module_name) or not is_identifier(self.op_name):
            raise ValueError(f"invalid join point {self.module_name}.{self.op_name}")

    @property
    def signature(self) -> str:
        return f"{self.module_name}.{self.op_name}"


@lru_cache(maxsize=512)
def _compile_glob(glob: str) -> "re.Pattern":
    parts = [_IDENTIFIER_RUN if ch == GLOB_WILDCARD else re.escape(ch) for ch in glob]
    return re.compile("".join(parts))


def glob_match(glob: str, name: str) -> bool:
    """
    Match a name against a glob where ``*`` spans any run of identifier characters.

    Args:
        glob: Pattern made of identifier characters and ``*``
        name: Identifier to test

    Returns:
        True when the whole name matches
    """
    return _compile_glob(glob).fullmatch(name) is not None


@dataclass(frozen=True)
class Execution:
    """Leaf selecting executions whose module and operation match the globs."""
    module_glob: str
    op_glob: str

    def matches(self, join_point: JoinPoint) -> bool:
        return (glob_match(self.module_glob, join_point.module_name)
                and glob_match(self.op_glob, join_point.op_name))

    def __str__(self) -> str:
        return f"execution({self.module_glob}.{self.op_glob})"


@dataclass(frozen=True)
class And:
    left: "PointcutExpr"
    right: "PointcutExpr"

    def matches(self, join_point: JoinPoint) -> bool:
        return self.left.matches(join_point) and self.right.matches(join_point)

    def __str__(self) -> str:
        return f"({self.left} && {self.right})"


@dataclass(frozen=True)
class Or:
    left: "PointcutExpr"
    right: "PointcutExpr"

    def matches(self, join_point: JoinPoint) -> bool:
        return self.left.matches(join_point) or self.right.matches(join_point)

    def __str__(self) -> str:
        return f"({self.left} || {self.right})"


@dataclass(frozen=True)
class Not:
    operand: "PointcutExpr"

    def matches(self, join_point: JoinPoint) -> bool:
        return not self.operand.matches(join_point)

    def __str__(self) -> str:
        return f"!{self.operand}"


PointcutExpr = Union[Execution, And, Or, Not]


def matches(pointcut: PointcutExpr, join_point: JoinPoint) -> bool:
    """
    Evaluate a pointcut against a join point.

    Args:
        pointcut: Expression tree
        join_point: Candidate join point

    Returns:
        True when the join point is selected
    """
    return pointcut.matches(join_point)


def format_pointcut(pointcut: PointcutExpr) -> str:
    """Print a pointcut in fully parenthesised form that reparses to the same tree."""
    return str(pointcut)
