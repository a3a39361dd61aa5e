"""
Concern Manifest Models

Data structures describing the modules of one build version and the
functionality (concern) tags each module declares. The metrics engine consumes
nothing else.
"""

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Tuple

from ..errors import ManifestError

IDENTIFIER_PATTERN = r"[A-Za-z_][A-Za-z0-9_.-]*"
_IDENTIFIER_RE = re.compile(rf"^{IDENTIFIER_PATTERN}$")


def is_identifier(text: str) -> bool:
    """Return True when ``text`` matches the identifier grammar."""
    return bool(_IDENTIFIER_RE.match(text))


class ModuleKind(Enum):
    """Kind of an encapsulated modular entity."""

    CLASS = "class"
    ASPECT = "aspect"


@dataclass(frozen=True)
class ConcernTag:
    """
    One functionality, as counted by f(·).

    Attributes:
        name: Identifier naming the functionality
    """
    name: str

    def __post_init__(self):
        if not self.name or not is_identifier(self.name):
            raise ManifestError(f"invalid concern tag {self.name!r}")

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class ModuleDecl:
    """
    Declaration of a class or aspect module and its functionality tags.

    Attributes:
        name: Module identifier
        kind: ModuleKind.CLASS or ModuleKind.ASPECT
        tags: Ordered, duplicate-free tags; f(module) = len(tags)
    """
    name: str
    kind: ModuleKind
    tags: Tuple[ConcernTag, ...]

    def __post_init__(self):
        if not is_identifier(self.name):
            raise ManifestError(f"invalid module name {self.name!r}")
        if not self.tags:
            raise ManifestError(f"module {self.name} declares no tags")
        seen = set()
        for tag in self.tags:
            if tag.name in seen:
                raise ManifestError(f"duplicate tag {tag.name!r} in module {self.name}")
            seen.add(tag.name)

    @classmethod
    def of(cls, kind: ModuleKind, name: str, *tag_names: str) -> "ModuleDecl":
        """Convenience constructor from plain tag names."""
        return cls(name=name, kind=kind, tags=tuple(ConcernTag(t) for t in tag_names))

    @property
    def tag_names(self) -> List[str]:
        """Tag names in declaration order."""
        return [tag.name for tag in self.tags]

    @property
    def is_aspect(self) -> bool:
        return self.kind is ModuleKind.ASPECT


def functionality_count(decl: ModuleDecl) -> int:
    """
    Number of functionalities defined in a module, f(·).

    Args:
        decl: A valid module declaration

    Returns:
        Count of declared tags (always at least 1)
    """
    return len(decl.tags)


@dataclass(frozen=True)
class ConcernManifest:
    """
    All modules of one build version.

    Attributes:
        version_label: Free label for the version (e.g. "iot-java")
        modules: Declarations in stored order
    """
    version_label: str
    modules: Tuple[ModuleDecl, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if not self.modules:
            raise ManifestError("manifest declares no modules")
        names = set()
        for decl in self.modules:
            if decl.name in names:
                raise ManifestError(f"duplicate module name {decl.name!r}")
            names.add(decl.name)

    @property
    def class_modules(self) -> List[ModuleDecl]:
        return [d for d in self.modules if d.kind is ModuleKind.CLASS]

    @property
    def aspect_modules(self) -> List[ModuleDecl]:
        return [d for d in self.modules if d.kind is ModuleKind.ASPECT]

    @property
    def class_count(self) -> int:
        """p (tangled version) or q (woven version)."""
        return len(self.class_modules)

    @property
    def aspect_count(self) -> int:
        """r, the number of aspects."""
        return len(self.aspect_modules)

    def get(self, name: str) -> ModuleDecl:
        """
        Look up a declaration by module name.

        Raises:
            KeyError: when no module has that name
        """
        for decl in self.modules:
            if decl.name == name:
                return decl
        raise KeyError(name)
