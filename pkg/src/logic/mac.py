"""
MAC Module

Keyed FNV-1a-64 digest used for frame integrity and handshake tokens.
Deterministic and explicitly not secure.
"""

FNV_OFFSET_BASIS = 0xCBF29CE484222325
FNV_PRIME = 0x00000100000001B3
MASK64 = (1 << 64) - 1


def fnv1a64(data: bytes, seed: int = FNV_OFFSET_BASIS) -> int:
    """
    Plain FNV-1a-64.

    Args:
        data: Bytes to hash
        seed: Starting hash value

    Returns:
        64-bit digest
    """
    h = seed
    for byte in data:
        h = ((h ^ byte) * FNV_PRIME) & MASK64
    return h


def mac64(key: int, data: bytes) -> int:
    """
    FNV-1a-64 over key (8 bytes little-endian), data, key again.

    Args:
        key: 64-bit key
        data: Message bytes

    Returns:
        64-bit tag
    """
    wrapped = (key & MASK64).to_bytes(8, "little")
    return fnv1a64(wrapped + bytes(data) + wrapped)


def nonce_bytes(*values: int) -> bytes:
    """Concatenate 64-bit values as little-endian bytes."""
    return b"".join((value & MASK64).to_bytes(8, "little") for value in values)
