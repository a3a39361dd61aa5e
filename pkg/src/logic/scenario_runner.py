"""
Scenario Runner Module

Installs scenario actions into a world, runs a scenario against a build of
the middleware and compares the resulting traces.
"""

from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Union

from ..errors import ProtocolError
from ..models.aop import BuildMode
from ..models.scenario import ActionVerb, Scenario, ScenarioAction
from ..models.settings import SimulationSettings
from ..models.trace import TraceEvent
from ..utils.logging_utils import get_logger
from .middleware import Middleware, build_middleware
from .transport import SimWorld, TraceSink

logger = get_logger(__name__)

SCENARIO_MODULE = "scenario"


def _perform(middleware: Middleware, action: ScenarioAction):
    node = middleware.node(action.actor.name)
    world = middleware.world
    try:
        if action.verb is ActionVerb.HANDSHAKE:
            middleware.call("Handshaking", "initiate", node, action.peer)
        elif action.verb is ActionVerb.SEND:
            middleware.call("DataTransfer", "send_reading", node, action.peer, action.sensor_id, action.payload)
        elif action.verb is ActionVerb.READ:
            value = middleware.call("DataTransfer", "get_reading", node, action.peer, action.sensor_id)
            node.reads.append((world.clock, action.peer.name, action.sensor_id, value))
        else:
            middleware.call("DataTransfer", "put_reading", node, action.sensor_id, action.payload)
    except ProtocolError as exc:
        world.emit(node.name, "rejected", SCENARIO_MODULE, action.verb.value,
                   detail={"line": action.line, "reason": str(exc)})


def schedule(middleware: Middleware, scenario: Scenario) -> SimWorld:
    """
    Install the scenario's actions as callbacks at their ticks.

    Actions beyond the run limit are not installed. Failed actions are
    traced as ``rejected`` and never abort the run.

    Returns:
        The prepared world
    """
    world = middleware.world
    for action in scenario.actions:
        if action.at_tick > scenario.run_limit:
            continue
        world.schedule(action.at_tick, lambda action=action: _perform(middleware, action))
    return world


@dataclass
class SimulationResult:
    """
    Outcome of one scenario run.

    Attributes:
        scenario: The scenario that ran
        mode: Build mode
        middleware: The middleware, with its world and devices
    """
    scenario: Scenario
    mode: BuildMode
    middleware: Middleware

    @property
    def world(self) -> SimWorld:
        return self.middleware.world

    @property
    def trace(self) -> List[TraceEvent]:
        return self.world.trace

    def event_counts(self) -> Dict[str, int]:
        return dict(Counter(event.kind for event in self.trace))

    def summary(self) -> str:
        counts = self.event_counts()
        return (f"{self.mode.value}: {len(self.trace)} events, final tick {self.world.clock}, "
                f"{counts.get('session_established', 0)} established, {counts.get('delivered', 0)} delivered, "
                f"{counts.get('transfer_failed', 0)} transfer_failed, {counts.get('rejected', 0)} rejected")


def run_scenario(scenario: Scenario, mode: BuildMode, settings: Optional[SimulationSettings] = None,
                 trace_sink: Optional[TraceSink] = None) -> SimulationResult:
    """
    Build the middleware in the given mode, run the scenario and return the result.

    Args:
        scenario: Parsed scenario
        mode: BuildMode.TANGLED or BuildMode.WOVEN
        settings: Protocol constants
        trace_sink: Called with every event as it is emitted

    Returns:
        SimulationResult
    """
    world = SimWorld(scenario.link, trace_sink)
    middleware = build_middleware(world, mode, tuple(d.name for d in scenario.devices),
                                  scenario.shared_key, settings)
    schedule(middleware, scenario)
    world.run_until(scenario.run_limit)
    result = SimulationResult(scenario, mode, middleware)
    logger.info(result.summary())
    return result


def render_trace(events: Iterable[TraceEvent]) -> str:
    """JSONL text of a trace, one event per line."""
    return "".join(event.to_json() + "\n" for event in events)


def write_trace(events: Iterable[TraceEvent], path: Union[str, Path]):
    Path(path).write_text(render_trace(events), encoding="utf-8")


def strip_source(events: Iterable[TraceEvent]) -> List[Dict[str, Any]]:
    return [event.to_dict(include_source=False) for event in events]


def first_divergence(left: Sequence[TraceEvent], right: Sequence[TraceEvent]) -> Optional[int]:
    """
    Index of the first event that differs once ``source`` is ignored.

    Returns:
        None when the traces are equivalent
    """
    left_plain, right_plain = strip_source(left), strip_source(right)
    for index, (a, b) in enumerate(zip(left_plain, right_plain)):
        if a != b:
            return index
    if len(left_plain) != len(right_plain):
        return min(len(left_plain), len(right_plain))
    return None


def traces_equivalent(left: Sequence[TraceEvent], right: Sequence[TraceEvent]) -> bool:
    return first_divergence(left, right) is None
