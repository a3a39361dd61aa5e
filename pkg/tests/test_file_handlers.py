import os

import pytest

from src.utils.file_handlers import (
    MANIFEST_EXTENSIONS,
    SCENARIO_EXTENSIONS,
    cleanup_temp_file,
    read_temp_bytes,
    validate_file_extension,
    version_label_for,
)


@pytest.mark.parametrize("name, allowed, expected", [
    ("iot-java.cm", MANIFEST_EXTENSIONS, (True, ".cm")),
    ("IOT.CM", MANIFEST_EXTENSIONS, (True, ".cm")),
    ("notes.txt", MANIFEST_EXTENSIONS, (True, ".txt")),
    ("demo.scn", MANIFEST_EXTENSIONS, (False, None)),
    ("demo.scn", SCENARIO_EXTENSIONS, (True, ".scn")),
    ("no_extension", SCENARIO_EXTENSIONS, (False, None)),
])
def test_validate_file_extension(name, allowed, expected):
    assert validate_file_extension(name, allowed) == expected


def test_version_label_is_the_stem():
    assert version_label_for("uploads/iot-aspectj.cm") == "iot-aspectj"


def test_temp_bytes_are_read_and_removed():
    seen = []

    def write(path):
        seen.append(path)
        with open(path, "wb") as handle:
            handle.write(b"PK\x03\x04")

    assert read_temp_bytes(".xlsx", write) == b"PK\x03\x04"
    assert seen[0].endswith(".xlsx")
    assert not os.path.exists(seen[0])


def test_temp_file_is_removed_when_the_writer_fails():
    seen = []

    def write(path):
        seen.append(path)
        raise OSError("disk full")

    with pytest.raises(OSError):
        read_temp_bytes(".xlsx", write)
    assert not os.path.exists(seen[0])
    assert cleanup_temp_file(seen[0]) is False
