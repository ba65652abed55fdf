"""Binary wire protocol for heart-rate frames.

One frame per UDP datagram, 26 bytes, big-endian:

    ==========  =====  ========================================
    offset      size   field
    ==========  =====  ========================================
    0           2      magic ``0x45 0x56`` ("EV")
    2           1      version (currently 1)
    3           1      msg_type (0 = HR_DATA, 1 = HELLO)
    4           1      group_id (0-255, radio-group stand-in)
    5           4      sender_id (u32)
    9           4      seq (u32, wraps)
    13          8      timestamp_ms (u64, sender clock)
    21          2      bpm (u16; 0 when unavailable)
    23          1      flags (bit0 WARMUP, bit1 CONTACT_LOST)
    24          2      crc16 over bytes 0..23
    ==========  =====  ========================================

The CRC is CRC-16/CCITT-FALSE: polynomial 0x1021, initial value 0xFFFF,
no input/output reflection, no final xor (check value of b"123456789"
is 0x29B1).  See docs/protocol.md for a fully worked example.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from enum import IntEnum
from typing import Optional

MAGIC = b"\x45\x56"
VERSION = 1
FRAME_SIZE = 26

FLAG_WARMUP = 0x01
FLAG_CONTACT_LOST = 0x02
_FLAG_MASK = FLAG_WARMUP | FLAG_CONTACT_LOST

BPM_MIN = 30
BPM_MAX = 240

_HEADER = struct.Struct(">2sBBBIIQHB")  # everything before the CRC, 24 bytes
_CRC = struct.Struct(">H")

_U32 = 1 << 32
_U64 = 1 << 64


class MsgType(IntEnum):
    HR_DATA = 0
    HELLO = 1


class ProtocolError(Exception):
    """Base class for all encode/decode failures."""


class InvalidFrame(ProtocolError):
    """Frame field out of range on the encode side."""


class DecodeError(ProtocolError):
    """Base class for the decode-side error taxonomy."""


class BadLength(DecodeError):
    pass


class BadMagic(DecodeError):
    pass


class BadVersion(DecodeError):
    pass


class BadCrc(DecodeError):
    pass


class FieldOutOfRange(DecodeError):
    pass


def _make_crc_table() -> list[int]:
    table = []
    for byte in range(256):
        crc = byte << 8
        for _ in range(8):
            crc = ((crc << 1) ^ 0x1021) if crc & 0x8000 else (crc << 1)
        table.append(crc & 0xFFFF)
    return table


_CRC_TABLE = _make_crc_table()


def crc16(data: bytes) -> int:
    """CRC-16/CCITT-FALSE (poly 0x1021, init 0xFFFF, no reflection, no xorout)."""
    crc = 0xFFFF
    for byte in data:
        crc = ((crc << 8) & 0xFFFF) ^ _CRC_TABLE[(crc >> 8) ^ byte]
    return crc


@dataclass(frozen=True)
class Frame:
    """One wire message; see the module docstring for the byte layout."""

    msg_type: MsgType
    group_id: int
    sender_id: int
    seq: int
    timestamp_ms: int
    bpm: int = 0
    flags: int = 0
    version: int = VERSION


def _check_fields(frame: Frame) -> Optional[str]:
    """Returns a reason string if any frame field is out of range."""
    if frame.version != VERSION:
        return f"version must be {VERSION}, got {frame.version}"
    if frame.msg_type not in (MsgType.HR_DATA, MsgType.HELLO):
        return f"unknown msg_type {frame.msg_type}"
    if not 0 <= frame.group_id <= 255:
        return f"group_id {frame.group_id} not in 0..255"
    if not 0 <= frame.sender_id < _U32:
        return f"sender_id {frame.sender_id} not a u32"
    if not 0 <= frame.seq < _U32:
        return f"seq {frame.seq} not a u32"
    if not 0 <= frame.timestamp_ms < _U64:
        return f"timestamp_ms {frame.timestamp_ms} not a u64"
    if frame.bpm != 0 and not BPM_MIN <= frame.bpm <= BPM_MAX:
        return f"bpm {frame.bpm} not 0 or in {BPM_MIN}..{BPM_MAX}"
    if frame.flags & ~_FLAG_MASK:
        return f"unknown flag bits 0x{frame.flags:02x}"
    return None


def encode(frame: Frame) -> bytes:
    """Serialize a frame to its 26-byte wire form.

    Raises InvalidFrame if any field is out of range.
    """
    reason = _check_fields(frame)
    if reason is not None:
        raise InvalidFrame(reason)
    head = _HEADER.pack(
        MAGIC,
        frame.version,
        int(frame.msg_type),
        frame.group_id,
        frame.sender_id,
        frame.seq,
        frame.timestamp_ms,
        frame.bpm,
        frame.flags,
    )
    return head + _CRC.pack(crc16(head))


def decode(data: bytes) -> Frame:
    """Parse and validate 26 wire bytes back into a Frame.

    Check order: length, magic, version, CRC, field ranges.  Raises the
    matching DecodeError subclass; never anything else, for any input.
    """
    if len(data) != FRAME_SIZE:
        raise BadLength(f"expected {FRAME_SIZE} bytes, got {len(data)}")
    if data[0:2] != MAGIC:
        raise BadMagic(f"bad magic {data[0:2].hex()}")
    if data[2] != VERSION:
        raise BadVersion(f"unsupported version {data[2]}")
    head, (crc,) = data[:24], _CRC.unpack(data[24:26])
    if crc16(head) != crc:
        raise BadCrc(f"crc mismatch: frame says 0x{crc:04x}, computed 0x{crc16(head):04x}")
    _, version, msg_type, group_id, sender_id, seq, timestamp_ms, bpm, flags = _HEADER.unpack(head)
    if msg_type not in (0, 1):
        raise FieldOutOfRange(f"unknown msg_type {msg_type}")
    frame = Frame(
        msg_type=MsgType(msg_type),
        group_id=group_id,
        sender_id=sender_id,
        seq=seq,
        timestamp_ms=timestamp_ms,
        bpm=bpm,
        flags=flags,
        version=version,
    )
    reason = _check_fields(frame)
    if reason is not None:
        raise FieldOutOfRange(reason)
    return frame


def seq_newer(seq: int, last_seq: int) -> bool:
    """True iff seq is ahead of last_seq under 32-bit wrap-around comparison."""
    return 1 <= (seq - last_seq) % _U32 < (1 << 31)


def accepts(receiver_group: int, last_seq: Optional[int], frame: Frame) -> bool:
    """Group pairing plus duplicate/stale rejection.

    A frame is accepted iff it belongs to the receiver's group and its
    sequence number is newer than the last accepted one (any seq is newer
    when none has been accepted yet).
    """
    if frame.group_id != receiver_group:
        return False
    if last_seq is None:
        return True
    return seq_newer(frame.seq, last_seq)
