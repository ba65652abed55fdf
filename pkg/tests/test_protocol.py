"""Wire frame encode/decode/accepts tests.

The CRC oracle is independent of src: binascii.crc_hqx(data, 0xFFFF) is
the same CRC-16/CCITT-FALSE construction (check value 0x29B1), so the
table-driven implementation is cross-checked against the stdlib and the
published test vector.
"""

import binascii

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from evok.protocol import (
    BPM_MAX,
    BPM_MIN,
    FLAG_CONTACT_LOST,
    FLAG_WARMUP,
    FRAME_SIZE,
    MAGIC,
    BadCrc,
    BadLength,
    BadMagic,
    BadVersion,
    DecodeError,
    FieldOutOfRange,
    Frame,
    InvalidFrame,
    MsgType,
    accepts,
    crc16,
    decode,
    encode,
)


def make_frame(**overrides) -> Frame:
    base = dict(
        msg_type=MsgType.HR_DATA,
        group_id=7,
        sender_id=1,
        seq=0,
        timestamp_ms=0,
        bpm=60,
        flags=0,
    )
    base.update(overrides)
    return Frame(**base)


valid_bpm = st.one_of(st.just(0), st.integers(BPM_MIN, BPM_MAX))

frames = st.builds(
    Frame,
    msg_type=st.sampled_from([MsgType.HR_DATA, MsgType.HELLO]),
    group_id=st.integers(0, 255),
    sender_id=st.integers(0, 2**32 - 1),
    seq=st.integers(0, 2**32 - 1),
    timestamp_ms=st.integers(0, 2**64 - 1),
    bpm=valid_bpm,
    flags=st.integers(0, 3),
)


class TestCrc:
    def test_published_check_value(self):
        assert crc16(b"123456789") == 0x29B1

    def test_matches_stdlib_construction(self):
        for data in (b"", b"\x00", MAGIC, bytes(range(24)), b"evok" * 6):
            assert crc16(data) == binascii.crc_hqx(data, 0xFFFF)


class TestEncode:
    def test_layout_header_bytes(self):
        wire = encode(make_frame())
        assert len(wire) == FRAME_SIZE
        assert wire[:5] == bytes([0x45, 0x56, 0x01, 0x00, 0x07])

    def test_trailing_crc_covers_first_24_bytes(self):
        # hand-build the 24-byte prefix and CRC it with the independent oracle
        prefix = (
            b"\x45\x56"  # magic
            + b"\x01"  # version
            + b"\x00"  # HR_DATA
            + b"\x07"  # group 7
            + (1).to_bytes(4, "big")  # sender
            + (0).to_bytes(4, "big")  # seq
            + (0).to_bytes(8, "big")  # timestamp
            + (60).to_bytes(2, "big")  # bpm
            + b"\x00"  # flags
        )
        wire = encode(make_frame())
        assert wire[:24] == prefix
        assert wire[24:] == binascii.crc_hqx(prefix, 0xFFFF).to_bytes(2, "big")

    @pytest.mark.parametrize(
        "overrides",
        [
            dict(bpm=29),
            dict(bpm=241),
            dict(bpm=-1),
            dict(group_id=256),
            dict(group_id=-1),
            dict(seq=2**32),
            dict(sender_id=2**32),
            dict(flags=0x04),
            dict(version=2),
        ],
    )
    def test_out_of_range_fields_rejected(self, overrides):
        with pytest.raises(InvalidFrame):
            encode(make_frame(**overrides))


class TestDecode:
    @given(frames)
    @settings(max_examples=300)
    def test_round_trip_identity(self, frame):
        assert decode(encode(frame)) == frame

    def test_bad_length(self):
        with pytest.raises(BadLength):
            decode(encode(make_frame())[:25])

    def test_bad_version(self):
        wire = bytearray(encode(make_frame()))
        wire[2] = 2
        head = bytes(wire[:24])
        with pytest.raises(BadVersion):
            decode(head + binascii.crc_hqx(head, 0xFFFF).to_bytes(2, "big"))

    def test_bad_magic(self):
        wire = bytearray(encode(make_frame()))
        wire[0] ^= 0xFF
        with pytest.raises(BadMagic):
            decode(bytes(wire))

    def test_field_out_of_range_with_valid_crc(self):
        wire = bytearray(encode(make_frame()))
        wire[21:23] = (10).to_bytes(2, "big")  # bpm=10: not 0, below the gate
        head = bytes(wire[:24])
        with pytest.raises(FieldOutOfRange):
            decode(head + binascii.crc_hqx(head, 0xFFFF).to_bytes(2, "big"))

    def test_single_byte_flips_hit_declared_taxonomy(self):
        wire = encode(make_frame())
        for i in range(FRAME_SIZE):
            for bit in range(8):
                corrupted = bytearray(wire)
                corrupted[i] ^= 1 << bit
                with pytest.raises((BadMagic, BadVersion, BadCrc, FieldOutOfRange)):
                    decode(bytes(corrupted))

    @given(st.binary(min_size=0, max_size=64))
    @settings(max_examples=500)
    def test_never_raises_anything_else(self, data):
        try:
            frame = decode(data)
        except DecodeError:
            return
        assert isinstance(frame, Frame)  # only possible for a genuinely valid frame


class TestAccepts:
    def test_next_sequence(self):
        assert accepts(7, 10, make_frame(seq=11)) is True

    def test_group_mismatch(self):
        assert accepts(7, None, make_frame(group_id=3)) is False

    def test_wraparound(self):
        # (0 - (2^32-1)) mod 2^32 == 1, inside [1, 2^31)
        assert accepts(7, 2**32 - 1, make_frame(seq=0)) is True

    def test_duplicate_rejected(self):
        assert accepts(7, 11, make_frame(seq=11)) is False

    def test_old_rejected(self):
        assert accepts(7, 11, make_frame(seq=9)) is False

    def test_half_window_boundary(self):
        assert accepts(7, 0, make_frame(seq=2**31 - 1)) is True
        assert accepts(7, 0, make_frame(seq=2**31)) is False

    @given(st.lists(st.integers(0, 2**32 - 1), max_size=200), st.integers(0, 2**32 - 1))
    @settings(max_examples=200)
    def test_accepted_subsequence_strictly_increases_mod_wrap(self, seqs, start):
        last = None
        accepted = []
        for seq in [start] + seqs:
            if accepts(7, last, make_frame(seq=seq)):
                accepted.append(seq)
                last = seq
        for a, b in zip(accepted, accepted[1:]):
            assert 1 <= (b - a) % 2**32 < 2**31

    def test_flags_enum_values(self):
        assert FLAG_WARMUP == 1 and FLAG_CONTACT_LOST == 2
