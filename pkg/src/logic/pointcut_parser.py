"""
Pointcut Parser Module

Recursive-descent parser for pointcut expressions::

    expr   := term ("||" term)*
    term   := factor ("&&" factor)*
    factor := "!" factor | "(" expr ")" | "execution(" glob "." glob ")"

``!`` binds tighter than ``&&``, which binds tighter than ``||``; binary
operators are left-associative. Whitespace between tokens is ignored.
"""

import re
from dataclasses import dataclass
from typing import List

from ..errors import PointcutSyntaxError
from ..models.pointcut import And, Execution, Not, Or, PointcutExpr

_TOKEN_RE = re.compile(
    r"(?P<OR>\|\|)|(?P<AND>&&)|(?P<NOT>!)|(?P<LPAREN>\()|(?P<RPAREN>\))|(?P<DOT>\.)"
    r"|(?P<GLOB>[A-Za-z0-9_*-]+)"
)
_WHITESPACE_RE = re.compile(r"\s+")
_GLOB_START_RE = re.compile(r"[A-Za-z_*]")


@dataclass(frozen=True)
class Token:
    kind: str
    value: str
    position: int


def tokenize(text: str) -> List[Token]:
    """
    Split pointcut text into tokens.

    Args:
        text: Pointcut source

    Returns:
        Tokens followed by an EOF token

    Raises:
        PointcutSyntaxError: on a character outside the token set
    """
    tokens = []
    pos = 0
    while pos < len(text):
        space = _WHITESPACE_RE.match(text, pos)
        if space:
            pos = space.end()
            continue
        match = _TOKEN_RE.match(text, pos)
        if not match:
            raise PointcutSyntaxError(f"unexpected character {text[pos]!r}", pos)
        tokens.append(Token(match.lastgroup, match.group(0), pos))
        pos = match.end()
    tokens.append(Token("EOF", "", len(text)))
    return tokens


class PointcutParser:
    """Parser over a token list; one instance per expression."""

    def __init__(self, text: str):
        self.text = text
        self.tokens = tokenize(text)
        self.index = 0

    @property
    def current(self) -> Token:
        return self.tokens[self.index]

    def _advance(self) -> Token:
        token = self.tokens[self.index]
        self.index += 1
        return token

    def _expect(self, kind: str, description: str) -> Token:
        token = self.current
        if token.kind != kind:
            found = token.value or "end of input"
            raise PointcutSyntaxError(f"expected {description}, found {found!r}", token.position)
        return self._advance()

    def parse(self) -> PointcutExpr:
        """
        Parse the whole text as one expression.

        Returns:
            Pointcut expression tree

        Raises:
            PointcutSyntaxError: with the offending position
        """
        if self.current.kind == "EOF":
            raise PointcutSyntaxError("empty pointcut expression", 0)
        expr = self._parse_expr()
        if self.current.kind != "EOF":
            raise PointcutSyntaxError(f"unexpected {self.current.value!r}", self.current.position)
        return expr

    def _parse_expr(self) -> PointcutExpr:
        left = self._parse_term()
        while self.current.kind == "OR":
            self._advance()
            left = Or(left, self._parse_term())
        return left

    def _parse_term(self) -> PointcutExpr:
        left = self._parse_factor()
        while self.current.kind == "AND":
            self._advance()
            left = And(left, self._parse_factor())
        return left

    def _parse_factor(self) -> PointcutExpr:
        token = self.current
        if token.kind == "NOT":
            self._advance()
            return Not(self._parse_factor())
        if token.kind == "LPAREN":
            self._advance()
            expr = self._parse_expr()
            self._expect("RPAREN", "')'")
            return expr
        if token.kind == "GLOB" and token.value == "execution":
            self._advance()
            self._expect("LPAREN", "'(' after execution")
            module_glob = self._parse_glob("module glob")
            self._expect("DOT", "'.' between module and operation globs")
            op_glob = self._parse_glob("operation glob")
            self._expect("RPAREN", "')'")
            return Execution(module_glob, op_glob)
        found = token.value or "end of input"
        raise PointcutSyntaxError(f"expected pointcut, found {found!r}", token.position)

    def _parse_glob(self, description: str) -> str:
        token = self.current
        if token.kind != "GLOB":
            raise PointcutSyntaxError(f"empty {description}", token.position)
        if not _GLOB_START_RE.match(token.value):
            raise PointcutSyntaxError(f"{description} must start with a letter, '_' or '*'", token.position)
        return self._advance().value


def parse_pointcut(text: str) -> PointcutExpr:
    """
    Parse a pointcut expression.

    Args:
        text: Pointcut source, e.g. ``execution(DataTransfer.read*)``

    Returns:
        Expression tree
    """
    return PointcutParser(text).parse()
