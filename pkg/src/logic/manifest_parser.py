"""
Manifest Parser Module

Reads and writes concern manifests (``.cm`` files).

Grammar, one statement per line::

    version <label>              (optional, first statement only)
    class  <name>: tag, tag, ...
    aspect <name>: tag, ...
    # comment
"""

import re
from pathlib import Path
from typing import List, Optional, Tuple, Union

from ..errors import ManifestError, ManifestSyntaxError
from ..models.manifest import (
    IDENTIFIER_PATTERN,
    ConcernManifest,
    ConcernTag,
    ModuleDecl,
    ModuleKind,
)
from ..utils.logging_utils import get_logger

logger = get_logger(__name__)

MANIFEST_EXTENSION = ".cm"

_IDENT_RE = re.compile(IDENTIFIER_PATTERN)
_KIND_RE = re.compile(r"(class|aspect)(?=[ \t])")
_VERSION_RE = re.compile(r"^\s*version(?:[ \t]+(?P<label>.*?))?\s*$")


def _skip_spaces(line: str, pos: int) -> int:
    while pos < len(line) and line[pos] in " \t":
        pos += 1
    return pos


class ManifestParser:
    """
    Line-oriented parser for the concern manifest grammar.

    Keeps the declarations read so far so that duplicate module names can be
    reported against the line that repeats them.
    """

    def __init__(self, default_label: str = ""):
        """
        Initialize the parser.

        Args:
            default_label: Version label used when the text has no version line
        """
        self.default_label = default_label
        self.version_label: Optional[str] = None
        self.modules: List[ModuleDecl] = []
        self._module_names = set()

    def parse(self, text: str) -> ConcernManifest:
        """
        Parse manifest text.

        Args:
            text: Manifest source

        Returns:
            ConcernManifest with declarations in file order

        Raises:
            ManifestSyntaxError: on grammar violations, with line and column
            ManifestError: when no module is declared
        """
        statements = 0
        for line_no, raw_line in enumerate(text.split("\n"), 1):
            line = raw_line.rstrip("\r")
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue

            version_match = _VERSION_RE.match(line)
            if version_match:
                if statements > 0:
                    raise ManifestSyntaxError(
                        "version must be the first statement", line_no, line.index("version") + 1
                    )
                label = version_match.group("label")
                if not label:
                    raise ManifestSyntaxError("missing version label", line_no, len(line) + 1)
                self.version_label = label
            else:
                self._add_module(self._parse_declaration(line, line_no), line, line_no)
            statements += 1

        if not self.modules:
            raise ManifestError("manifest declares no modules")

        label = self.version_label if self.version_label is not None else self.default_label
        logger.debug("parsed manifest %r with %d modules", label, len(self.modules))
        return ConcernManifest(version_label=label, modules=tuple(self.modules))

    def _parse_declaration(self, line: str, line_no: int) -> ModuleDecl:
        """
        Parse a single ``kind name: tags`` declaration line.

        Args:
            line: The line without its terminator
            line_no: 1-based line number for error reporting

        Returns:
            The parsed ModuleDecl
        """
        pos = _skip_spaces(line, 0)
        kind_match = _KIND_RE.match(line, pos)
        if not kind_match:
            raise ManifestSyntaxError("expected 'class' or 'aspect'", line_no, pos + 1)
        kind = ModuleKind(kind_match.group(1))

        pos = _skip_spaces(line, kind_match.end())
        name_match = _IDENT_RE.match(line, pos)
        if not name_match:
            raise ManifestSyntaxError("expected module name", line_no, pos + 1)
        name = name_match.group(0)

        pos = _skip_spaces(line, name_match.end())
        if pos >= len(line) or line[pos] != ":":
            raise ManifestSyntaxError("expected ':' after module name", line_no, pos + 1)
        pos += 1

        tags: List[Tuple[str, int]] = []
        while True:
            pos = _skip_spaces(line, pos)
            tag_match = _IDENT_RE.match(line, pos)
            if not tag_match:
                message = "empty tag list" if not tags else "expected tag"
                raise ManifestSyntaxError(message, line_no, pos + 1)
            tag_name = tag_match.group(0)
            if any(existing == tag_name for existing, _ in tags):
                raise ManifestSyntaxError(
                    f"duplicate tag {tag_name!r} in module {name}", line_no, pos + 1
                )
            tags.append((tag_name, pos + 1))
            pos = _skip_spaces(line, tag_match.end())
            if pos >= len(line):
                break
            if line[pos] != ",":
                raise ManifestSyntaxError(f"unexpected character {line[pos]!r}", line_no, pos + 1)
            pos += 1

        return ModuleDecl(name=name, kind=kind, tags=tuple(ConcernTag(t) for t, _ in tags))

    def _add_module(self, decl: ModuleDecl, line: str, line_no: int):
        if decl.name in self._module_names:
            column = line.index(decl.name, _skip_spaces(line, 0) + len(decl.kind.value)) + 1
            raise ManifestSyntaxError(f"duplicate module name {decl.name!r}", line_no, column)
        self._module_names.add(decl.name)
        self.modules.append(decl)


def parse_manifest(text: str, default_label: str = "") -> ConcernManifest:
    """
    Parse manifest text into a ConcernManifest.

    Args:
        text: Manifest source
        default_label: Version label when the text carries no version line

    Returns:
        Parsed manifest
    """
    return ManifestParser(default_label=default_label).parse(text)


def write_manifest(manifest: ConcernManifest) -> str:
    """
    Serialize a manifest to its canonical text form.

    One declaration per line, tags separated by comma-space, stored order kept.
    A non-empty version label is written as the first line.

    Args:
        manifest: Valid manifest

    Returns:
        Canonical manifest text ending with a newline
    """
    lines = []
    if manifest.version_label:
        lines.append(f"version {manifest.version_label}")
    for decl in manifest.modules:
        lines.append(f"{decl.kind.value} {decl.name}: {', '.join(decl.tag_names)}")
    return "\n".join(lines) + "\n"


def load_manifest(path: Union[str, Path]) -> ConcernManifest:
    """
    Load a manifest file; the file stem is the default version label.

    Args:
        path: Path to a ``.cm`` file

    Returns:
        Parsed manifest

    Raises:
        ManifestError: when the file cannot be read or parsed
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ManifestError(f"cannot read {path}: {exc}") from exc
    return parse_manifest(text, default_label=path.stem)


def save_manifest(manifest: ConcernManifest, path: Union[str, Path]) -> Path:
    """
    Write a manifest in canonical form.

    Args:
        manifest: Manifest to write
        path: Destination file

    Returns:
        The written path
    """
    path = Path(path)
    path.write_text(write_manifest(manifest), encoding="utf-8", newline="\n")
    return path
