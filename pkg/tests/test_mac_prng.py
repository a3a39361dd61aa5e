import pytest

from src.logic.mac import fnv1a64, mac64, nonce_bytes
from src.logic.prng import SplitMix64, prng_next
from src.models.protocol import Frame, FrameKind


@pytest.mark.parametrize("data, expected", [
    (b"", 0xCBF29CE484222325),
    (b"a", 0xAF63DC4C8601EC8C),
    (b"foobar", 0x85944171F73967E8),
])
def test_fnv1a64_reference_values(data, expected):
    assert fnv1a64(data) == expected


def test_mac_depends_on_key_and_data():
    tag = mac64(0x5EED, b"reading")
    assert tag == mac64(0x5EED, b"reading")
    assert tag != mac64(0x5EEE, b"reading")
    assert tag != mac64(0x5EED, b"readinh")
    assert 0 <= tag < 1 << 64


def test_nonce_bytes_are_little_endian():
    assert nonce_bytes(1, 0x0102) == b"\x01" + b"\x00" * 7 + b"\x02\x01" + b"\x00" * 6


def test_splitmix64_reference_sequence():
    rng = SplitMix64(0)
    assert [rng.next() for _ in range(3)] == [0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4, 0x06C45D188009454F]


def test_prng_next_is_pure():
    assert prng_next(1234) == prng_next(1234)
    value, state = prng_next(1234)
    assert SplitMix64(1234).next() == value
    assert state != 1234


def test_unit_draws_stay_in_range():
    rng = SplitMix64(99)
    draws = [rng.next_unit() for _ in range(2000)]
    assert all(0.0 <= d < 1.0 for d in draws)
    assert 0.4 < sum(draws) / len(draws) < 0.6


def test_chance_extremes():
    rng = SplitMix64(5)
    assert not any(rng.chance(0.0) for _ in range(100))
    assert all(rng.chance(1.0) for _ in range(100))


def test_every_single_bit_flip_breaks_the_frame_tag():
    key = 0x5EED
    frame = Frame(FrameKind.DATA, session_id=0xABCDEF, seq=3, payload=b"t=23.5;h=41;p=1013",
                  sensor_id="temp", first_seq=3, chunk_count=1)
    signed = frame.signed_bytes()
    tagged = frame.with_mac(mac64(key, signed))

    for bit in range(len(signed) * 8):
        corrupted = bytearray(signed)
        corrupted[bit // 8] ^= 1 << (bit % 8)
        assert mac64(key, bytes(corrupted)) != tagged.mac, bit

    for bit in range(64):
        assert tagged.with_mac(tagged.mac ^ (1 << bit)).mac != mac64(key, signed)
