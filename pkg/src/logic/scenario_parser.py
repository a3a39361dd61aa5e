"""
Scenario Parser Module

Parses ``.scn`` scenario scripts::

    devices <name> <name>
    link delay=<int> drop=<real> seed=<int>
    key <hex-or-int>
    at <tick> <device> handshake <device>
    at <tick> <device> put <sensor> <payload>
    at <tick> <device> send <device> <sensor> <payload>
    at <tick> <device> read <device> <sensor>
    run <tick>

One statement per line, ``#`` starts a comment. Payloads are quoted UTF-8
strings (``\\"`` and ``\\\\`` escapes) or ``0x``-prefixed hex.
"""

import re
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

from ..errors import ScenarioError
from ..models.manifest import is_identifier
from ..models.protocol import DeviceId, UINT64_MASK
from ..models.scenario import (
    DEFAULT_RUN_LIMIT,
    DEFAULT_SHARED_KEY,
    ActionVerb,
    LinkConfig,
    Scenario,
    ScenarioAction,
)
from ..utils.logging_utils import get_logger

logger = get_logger(__name__)

SCENARIO_EXTENSION = ".scn"

_TOKEN_RE = re.compile(r'\s*(?:(?P<comment>#.*)|(?P<quoted>"(?:[^"\\]|\\.)*")|(?P<word>[^\s"#]+)|(?P<bad>\S))')
_ESCAPE_RE = re.compile(r"\\(.)")
_LINK_KEYS = ("delay", "drop", "seed")

Token = Tuple[str, str]


def tokenize_line(line: str, line_no: int) -> List[Token]:
    """
    Split one line into ("word" | "quoted", text) tokens, dropping comments.

    Raises:
        ScenarioError: on an unterminated string
    """
    tokens: List[Token] = []
    pos = 0
    while pos < len(line):
        match = _TOKEN_RE.match(line, pos)
        if not match or match.end() == pos:
            break
        pos = match.end()
        if match.group("comment") is not None:
            break
        if match.group("bad") is not None:
            raise ScenarioError("unterminated string", line_no)
        if match.group("quoted") is not None:
            tokens.append(("quoted", _ESCAPE_RE.sub(r"\1", match.group("quoted")[1:-1])))
        else:
            tokens.append(("word", match.group("word")))
    return tokens


def _parse_int(text: str, what: str, line_no: int) -> int:
    for base in (0, 10):
        try:
            return int(text, base)
        except ValueError:
            continue
    raise ScenarioError(f"invalid {what} {text!r}", line_no)


def _parse_tick(text: str, line_no: int) -> int:
    tick = _parse_int(text, "tick", line_no)
    if tick < 0:
        raise ScenarioError(f"negative tick {tick}", line_no)
    return tick


def _parse_payload(token: Token, line_no: int) -> bytes:
    kind, text = token
    if kind == "quoted":
        return text.encode("utf-8")
    if text.lower().startswith("0x"):
        try:
            return bytes.fromhex(text[2:])
        except ValueError:
            raise ScenarioError(f"invalid hex payload {text!r}", line_no) from None
    raise ScenarioError("payload must be a quoted string or 0x-prefixed hex", line_no)


def _word(token: Token, what: str, line_no: int) -> str:
    kind, text = token
    if kind != "word" or not is_identifier(text):
        raise ScenarioError(f"expected {what}, found {text!r}", line_no)
    return text


class ScenarioParser:
    """Parser state for one script."""

    def __init__(self):
        self.devices: Optional[Tuple[str, str]] = None
        self.link = LinkConfig()
        self.shared_key = DEFAULT_SHARED_KEY
        self.run_limit = DEFAULT_RUN_LIMIT
        self.actions: List[ScenarioAction] = []
        self._device_refs: List[Tuple[str, int]] = []

    def parse(self, text: str) -> Scenario:
        """
        Parse a complete script.

        Args:
            text: Script source

        Returns:
            Scenario with defaults applied and actions sorted by (tick, file order)

        Raises:
            ScenarioError: with the line of the offending statement
        """
        lines = text.splitlines()
        for line_no, line in enumerate(lines, 1):
            tokens = tokenize_line(line, line_no)
            if tokens:
                self._statement(tokens, line_no)

        if self.devices is None:
            raise ScenarioError("missing 'devices' statement", max(len(lines), 1))
        for name, line_no in self._device_refs:
            if name not in self.devices:
                raise ScenarioError(f"undeclared device {name}", line_no)

        actions = sorted(self.actions, key=lambda action: action.at_tick)
        return Scenario(
            devices=tuple(DeviceId(name) for name in self.devices),
            link=self.link,
            shared_key=self.shared_key,
            actions=tuple(actions),
            run_limit=self.run_limit,
        )

    def _statement(self, tokens: List[Token], line_no: int):
        keyword = tokens[0][1]
        args = tokens[1:]
        if keyword == "devices":
            self._devices(args, line_no)
        elif keyword == "link":
            self._link(args, line_no)
        elif keyword == "key":
            self._key(args, line_no)
        elif keyword == "at":
            self._action(args, line_no)
        elif keyword == "run":
            if len(args) != 1:
                raise ScenarioError("expected 'run <tick>'", line_no)
            self.run_limit = _parse_tick(args[0][1], line_no)
        else:
            raise ScenarioError(f"unknown statement {keyword!r}", line_no)

    def _devices(self, args: List[Token], line_no: int):
        if self.devices is not None:
            raise ScenarioError("devices already declared", line_no)
        if len(args) != 2:
            raise ScenarioError("exactly two devices are required", line_no)
        first, second = (_word(token, "device name", line_no) for token in args)
        if first == second:
            raise ScenarioError(f"device {first} declared twice", line_no)
        self.devices = (first, second)

    def _link(self, args: List[Token], line_no: int):
        values: Dict[str, str] = {}
        for kind, text in args:
            name, sep, value = text.partition("=")
            if kind != "word" or not sep or name not in _LINK_KEYS:
                raise ScenarioError(f"expected delay=, drop= or seed=, found {text!r}", line_no)
            values[name] = value
        try:
            delay = _parse_int(values["delay"], "delay", line_no) if "delay" in values else self.link.delay_ticks
            drop = float(values["drop"]) if "drop" in values else self.link.drop_probability
            seed = _parse_int(values["seed"], "seed", line_no) if "seed" in values else self.link.seed
            self.link = LinkConfig(delay, drop, seed)
        except ValueError as exc:
            raise ScenarioError(f"invalid link: {exc}", line_no) from None

    def _key(self, args: List[Token], line_no: int):
        if len(args) != 1:
            raise ScenarioError("expected 'key <hex-or-int>'", line_no)
        key = _parse_int(args[0][1], "key", line_no)
        if not 0 <= key <= UINT64_MASK:
            raise ScenarioError("key must fit in 64 bits", line_no)
        self.shared_key = key

    def _action(self, args: List[Token], line_no: int):
        if len(args) < 3:
            raise ScenarioError("expected 'at <tick> <device> <verb> ...'", line_no)
        tick = _parse_tick(args[0][1], line_no)
        actor = _word(args[1], "device name", line_no)
        try:
            verb = ActionVerb(args[2][1])
        except ValueError:
            raise ScenarioError(f"unknown action {args[2][1]!r}", line_no) from None
        rest = args[3:]
        self._device_refs.append((actor, line_no))

        expected = {ActionVerb.HANDSHAKE: 1, ActionVerb.PUT: 2, ActionVerb.SEND: 3, ActionVerb.READ: 2}[verb]
        if len(rest) != expected:
            raise ScenarioError(f"'{verb.value}' takes {expected} arguments, found {len(rest)}", line_no)

        peer: Optional[DeviceId] = None
        sensor_id = ""
        payload = b""
        if verb is ActionVerb.PUT:
            sensor_id = _word(rest[0], "sensor id", line_no)
            payload = _parse_payload(rest[1], line_no)
        else:
            peer_name = _word(rest[0], "device name", line_no)
            self._device_refs.append((peer_name, line_no))
            peer = DeviceId(peer_name)
            if verb is not ActionVerb.HANDSHAKE:
                sensor_id = _word(rest[1], "sensor id", line_no)
            if verb is ActionVerb.SEND:
                payload = _parse_payload(rest[2], line_no)

        self.actions.append(ScenarioAction(tick, DeviceId(actor), verb, peer, sensor_id, payload, line_no))


def parse_scenario(text: str) -> Scenario:
    """Parse scenario text (see module docstring for the grammar)."""
    return ScenarioParser().parse(text)


def load_scenario(path: Union[str, Path]) -> Scenario:
    """
    Read and parse a scenario file.

    Raises:
        ScenarioError: on grammar violations
        OSError: when the file cannot be read
    """
    scenario = parse_scenario(Path(path).read_text(encoding="utf-8"))
    logger.info("loaded scenario %s with %d actions", path, len(scenario.actions))
    return scenario
