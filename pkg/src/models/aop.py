"""
Aspect Models

Advice, aspects and the weave report produced when aspects are composed
with registered operations.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Dict, List, Tuple

from .manifest import ConcernTag, is_identifier
from .pointcut import PointcutExpr


class AdvicePhase(Enum):
    BEFORE = "before"
    AFTER = "after"
    AROUND = "around"


class BuildMode(Enum):
    """How cross-cutting behavior is composed with the core operations."""

    TANGLED = "tangled"
    WOVEN = "woven"


@dataclass(frozen=True)
class Advice:
    """
    Behavior attached at matched join points.

    Before bodies are called as ``body(invocation)``; After bodies as
    ``body(invocation, result)``; Around bodies as ``body(invocation)`` and
    must return the result, calling ``invocation.proceed()`` at most once.

    Attributes:
        phase: When the body runs relative to the rest of the chain
        body: Callable implementing the advice
        owner: Name of the owning aspect
    """
    phase: AdvicePhase
    body: Callable[..., Any]
    owner: str


@dataclass(frozen=True)
class Aspect:
    """
    One cross-cutting concern as pointcut/advice pairs.

    Attributes:
        name: Aspect identifier
        concern_tag: The single concern the aspect encapsulates
        precedence: Lower values wrap outside higher ones
        advice_list: (pointcut, advice) pairs in declaration order
    """
    name: str
    concern_tag: ConcernTag
    precedence: int
    advice_list: Tuple[Tuple[PointcutExpr, Advice], ...] = field(default_factory=tuple)

    def __post_init__(self):
        if not is_identifier(self.name):
            raise ValueError(f"invalid aspect name {self.name!r}")
        for _, advice in self.advice_list:
            if advice.owner != self.name:
                raise ValueError(f"advice owned by {advice.owner} listed in aspect {self.name}")


@dataclass(frozen=True)
class AttachedAdvice:
    """
    One advice attached to one operation, as listed in a weave report.

    Attributes:
        aspect_name: Owning aspect
        phase: Advice phase
        precedence: Aspect precedence
        rank: Position in the operation's chain, 0 = outermost
    """
    aspect_name: str
    phase: AdvicePhase
    precedence: int
    rank: int


@dataclass
class WeaveReport:
    """
    Attached advice per operation, in chain order.

    Attributes:
        attachments: (module, op) -> attached advice, outermost first
    """
    attachments: Dict[Tuple[str, str], List[AttachedAdvice]] = field(default_factory=dict)

    def for_operation(self, module_name: str, op_name: str) -> List[AttachedAdvice]:
        return list(self.attachments.get((module_name, op_name), []))

    def aspect_names_for(self, module_name: str, op_name: str) -> List[str]:
        """Distinct aspect names attached to an operation, outermost first."""
        names: List[str] = []
        for attached in self.attachments.get((module_name, op_name), []):
            if attached.aspect_name not in names:
                names.append(attached.aspect_name)
        return names

    def operations_advised_by(self, aspect_name: str) -> List[Tuple[str, str]]:
        return [key for key, attached in self.attachments.items()
                if any(a.aspect_name == aspect_name for a in attached)]

    def rows(self) -> List[Tuple[str, str, str, str, int, int]]:
        """Flat (module, op, aspect, phase, precedence, rank) rows for display."""
        rows = []
        for (module_name, op_name), attached in self.attachments.items():
            for a in attached:
                rows.append((module_name, op_name, a.aspect_name, a.phase.value, a.precedence, a.rank))
        return rows


@dataclass(frozen=True)
class AdviceExecution:
    """Record of one advice body execution kept by the runtime."""
    aspect_name: str
    phase: AdvicePhase
    module_name: str
    op_name: str
