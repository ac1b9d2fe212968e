"""FTM frames and their fixed 24-octet binary codec.

Frame layout (multi-octet integers little-endian)::

    | Offset | Size | Field          |
    |--------|------|----------------|
    | 0      | 1    | frame_type     |  0x01 FTMR, 0x02 FTM, 0x03 ACK
    | 1      | 1    | dialog_token   |
    | 2      | 1    | burst_size     |
    | 3      | 8    | t1_ps          |  uint64
    | 11     | 4    | packet_number  |  uint32
    | 15     | 1    | flags          |  bit 0 = protected, other bits zero
    | 16     | 8    | auth_tag       |  all zero when unprotected

The integrity tag is HMAC-SHA256 over octets 0..15, truncated to 8 octets.
Frame logs are text, one frame per line: ``<capture_us> <48 hex chars>``.
"""

from __future__ import annotations

import hashlib
import hmac
import struct
from dataclasses import dataclass, replace
from enum import IntEnum
from typing import Iterable, Iterator

from .errors import InvariantViolation, MalformedFrame

FRAME_SIZE = 24
TAG_SIZE = 8
KEY_SIZE = 16
BODY_SIZE = 16  # everything before the tag
ZERO_TAG = bytes(TAG_SIZE)

_LAYOUT = struct.Struct("<BBBQIB8s")
assert _LAYOUT.size == FRAME_SIZE

_FLAG_PROTECTED = 0x01


class FrameType(IntEnum):
    FTM_REQUEST = 0x01
    FTM = 0x02
    ACK = 0x03


@dataclass(frozen=True)
class FtmFrame:
    frame_type: FrameType
    dialog_token: int = 0
    burst_size: int = 1
    t1_ps: int = 0
    packet_number: int = 0
    protected: bool = False
    auth_tag: bytes = ZERO_TAG

    def validate(self) -> None:
        """Raise InvariantViolation unless the field combination is legal."""
        if not isinstance(self.frame_type, FrameType):
            raise InvariantViolation(f"unknown frame type {self.frame_type!r}")
        for name, bits in (("dialog_token", 8), ("burst_size", 8),
                           ("t1_ps", 64), ("packet_number", 32)):
            value = getattr(self, name)
            if not isinstance(value, int) or not 0 <= value < (1 << bits):
                raise InvariantViolation(f"{name}={value!r} does not fit in u{bits}")
        if self.frame_type is not FrameType.FTM and self.t1_ps != 0:
            raise InvariantViolation(
                f"{self.frame_type.name} frame must carry t1_ps=0, got {self.t1_ps}")
        if self.frame_type is FrameType.FTM_REQUEST and self.burst_size < 1:
            raise InvariantViolation("FTM request needs burst_size >= 1")
        if not isinstance(self.auth_tag, (bytes, bytearray)) or len(self.auth_tag) != TAG_SIZE:
            raise InvariantViolation("auth_tag must be exactly 8 octets")
        if not self.protected and bytes(self.auth_tag) != ZERO_TAG:
            raise InvariantViolation("unprotected frame must carry an all-zero tag")


def _pack(frame: FtmFrame, tag: bytes) -> bytes:
    return _LAYOUT.pack(
        int(frame.frame_type),
        frame.dialog_token,
        frame.burst_size,
        frame.t1_ps,
        frame.packet_number,
        _FLAG_PROTECTED if frame.protected else 0,
        bytes(tag),
    )


def encode_frame(frame: FtmFrame) -> bytes:
    frame.validate()
    return _pack(frame, frame.auth_tag)


def decode_frame(data: bytes) -> FtmFrame:
    if len(data) != FRAME_SIZE:
        raise MalformedFrame(f"expected {FRAME_SIZE} octets, got {len(data)}")
    ftype, token, burst, t1, pn, flags, tag = _LAYOUT.unpack(bytes(data))
    try:
        frame_type = FrameType(ftype)
    except ValueError:
        raise MalformedFrame(f"unknown frame type byte 0x{ftype:02x}") from None
    if flags & ~_FLAG_PROTECTED:
        raise MalformedFrame(f"reserved flag bits set: 0x{flags:02x}")
    frame = FtmFrame(frame_type, token, burst, t1, pn, bool(flags & _FLAG_PROTECTED), tag)
    try:
        frame.validate()
    except InvariantViolation as exc:
        raise MalformedFrame(str(exc)) from exc
    return frame


def frame_body(frame: FtmFrame) -> bytes:
    """The octets covered by the integrity tag."""
    return _pack(frame, ZERO_TAG)[:BODY_SIZE]


def compute_auth_tag(body: bytes, key: bytes) -> bytes:
    if len(key) != KEY_SIZE:
        raise ValueError(f"key must be {KEY_SIZE} octets, got {len(key)}")
    return hmac.new(bytes(key), bytes(body), hashlib.sha256).digest()[:TAG_SIZE]


def protect(frame: FtmFrame, key: bytes) -> FtmFrame:
    """Return a copy of ``frame`` marked protected and tagged under ``key``."""
    marked = replace(frame, protected=True, auth_tag=ZERO_TAG)
    return replace(marked, auth_tag=compute_auth_tag(frame_body(marked), key))


def verify_auth_tag(frame: FtmFrame, key: bytes) -> bool:
    if not frame.protected:
        return False
    expected = compute_auth_tag(frame_body(frame), key)
    return hmac.compare_digest(expected, bytes(frame.auth_tag))


# -- frame logs ---------------------------------------------------------------

def format_log_line(capture_us: int, frame: FtmFrame) -> str:
    return f"{int(capture_us)} {encode_frame(frame).hex()}"


def write_frame_log(entries: Iterable[tuple[int, FtmFrame]]) -> str:
    lines = [format_log_line(us, frame) for us, frame in entries]
    return "".join(line + "\n" for line in lines)


def iter_frame_log(text: str) -> Iterator[tuple[int, bytes]]:
    """Yield ``(capture_us, raw_octets)`` per non-blank line.

    Only the line shape is checked here; frame validity is the caller's
    business so a sniffer can report on frames it cannot decode.
    """
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"line {lineno}: expected '<capture_us> <hex>'")
        stamp, payload = parts
        if not stamp.isdigit():
            raise ValueError(f"line {lineno}: bad capture time {stamp!r}")
        if len(payload) != 2 * FRAME_SIZE or payload != payload.lower():
            raise ValueError(f"line {lineno}: frame must be {2 * FRAME_SIZE} lowercase hex chars")
        try:
            raw = bytes.fromhex(payload)
        except ValueError:
            raise ValueError(f"line {lineno}: invalid hex") from None
        yield int(stamp), raw
