"""
File Handlers Module

Utility functions for validating uploads and handling temporary files.
"""

import os
import tempfile
from typing import Optional, Sequence, Tuple

from ..logic.manifest_parser import MANIFEST_EXTENSION
from ..logic.scenario_parser import SCENARIO_EXTENSION

MANIFEST_EXTENSIONS = (MANIFEST_EXTENSION, ".txt")
SCENARIO_EXTENSIONS = (SCENARIO_EXTENSION, ".txt")


def validate_file_extension(file_name: str,
                            allowed_extensions: Sequence[str] = MANIFEST_EXTENSIONS) -> Tuple[bool, Optional[str]]:
    """
    Validate that a file has an allowed extension.

    Args:
        file_name: Name of the file to validate
        allowed_extensions: Allowed extensions including the dot

    Returns:
        Tuple of (is_valid, file_extension)
        - is_valid: True if the extension is allowed
        - file_extension: The lowercase extension, or None if invalid
    """
    file_extension = os.path.splitext(file_name)[1].lower()
    is_valid = file_extension in allowed_extensions
    return is_valid, file_extension if is_valid else None


def version_label_for(file_name: str) -> str:
    """Default version label of an uploaded manifest: its file stem."""
    return os.path.splitext(os.path.basename(file_name))[0]


def read_uploaded_text(uploaded_file) -> str:
    """
    Decode an uploaded file as UTF-8 text.

    Raises:
        UnicodeDecodeError: when the upload is not UTF-8
    """
    return uploaded_file.getvalue().decode("utf-8")


def read_temp_bytes(suffix: str, write) -> bytes:
    """
    Let ``write(path)`` produce a temporary file and return its bytes.

    Used for writers that only accept a path (the Excel exporter).
    """
    with tempfile.NamedTemporaryFile(delete=False, suffix=suffix) as tmp_file:
        tmp_file_path = tmp_file.name
    try:
        write(tmp_file_path)
        with open(tmp_file_path, "rb") as handle:
            return handle.read()
    finally:
        cleanup_temp_file(tmp_file_path)


def cleanup_temp_file(file_path: str) -> bool:
    """
    Clean up a temporary file, ignoring errors.

    Returns:
        True if the file was deleted
    """
    try:
        if file_path and os.path.exists(file_path):
            os.unlink(file_path)
            return True
    except OSError:
        pass
    return False
