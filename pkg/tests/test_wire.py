import os
import random
from dataclasses import replace

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ftmsim.errors import InvariantViolation, MalformedFrame
from ftmsim.wire import (
    FRAME_SIZE,
    FrameType,
    FtmFrame,
    compute_auth_tag,
    decode_frame,
    encode_frame,
    frame_body,
    iter_frame_log,
    protect,
    verify_auth_tag,
    write_frame_log,
)

KEY = bytes(range(16))


def hand_encode(ftype, token, burst, t1, pn, protected, tag=bytes(8)):
    """Byte-by-byte reference encoder, independent of the struct layout."""
    out = bytearray([ftype, token, burst])
    out += t1.to_bytes(8, "little")
    out += pn.to_bytes(4, "little")
    out.append(1 if protected else 0)
    out += tag
    return bytes(out)


frames = st.builds(
    FtmFrame,
    frame_type=st.sampled_from(list(FrameType)),
    dialog_token=st.integers(0, 255),
    burst_size=st.integers(1, 255),
    packet_number=st.integers(0, 2 ** 32 - 1),
    t1_ps=st.integers(0, 2 ** 64 - 1),
).map(lambda f: f if f.frame_type is FrameType.FTM else replace(f, t1_ps=0))


class TestEncode:
    def test_ftm_frame_layout(self):
        frame = FtmFrame(FrameType.FTM, dialog_token=1, burst_size=1, t1_ps=1_000_000, packet_number=7)
        data = encode_frame(frame)
        assert len(data) == 24
        assert data[0] == 0x02
        assert data[3:11] == (1_000_000).to_bytes(8, "little")
        assert data[15:23] == bytes(8)
        assert data == hand_encode(0x02, 1, 1, 1_000_000, 7, False)

    def test_type_bytes(self):
        assert [int(t) for t in FrameType] == [0x01, 0x02, 0x03]

    def test_request_with_t1_rejected(self):
        with pytest.raises(InvariantViolation):
            encode_frame(FtmFrame(FrameType.FTM_REQUEST, t1_ps=5))

    def test_ack_with_t1_rejected(self):
        with pytest.raises(InvariantViolation):
            encode_frame(FtmFrame(FrameType.ACK, t1_ps=5))

    def test_request_needs_burst(self):
        with pytest.raises(InvariantViolation):
            encode_frame(FtmFrame(FrameType.FTM_REQUEST, burst_size=0))

    def test_unprotected_nonzero_tag_rejected(self):
        with pytest.raises(InvariantViolation):
            encode_frame(FtmFrame(FrameType.FTM, auth_tag=b"\x01" * 8))

    @pytest.mark.parametrize("field,value", [
        ("dialog_token", 256), ("packet_number", 2 ** 32), ("t1_ps", -1), ("t1_ps", 2 ** 64),
    ])
    def test_out_of_range(self, field, value):
        with pytest.raises(InvariantViolation):
            encode_frame(replace(FtmFrame(FrameType.FTM), **{field: value}))

    def test_protected_layout(self):
        frame = protect(FtmFrame(FrameType.FTM, 3, 8, 42, 9), KEY)
        data = encode_frame(frame)
        assert data[15] == 0x01
        assert data[16:] == frame.auth_tag != bytes(8)


class TestDecode:
    def test_unknown_type(self):
        raw = bytearray(hand_encode(0x02, 1, 1, 0, 0, False))
        raw[0] = 0x09
        with pytest.raises(MalformedFrame):
            decode_frame(bytes(raw))

    def test_truncated(self):
        with pytest.raises(MalformedFrame):
            decode_frame(bytes(10))

    def test_reserved_flag_bits(self):
        raw = bytearray(hand_encode(0x02, 1, 1, 0, 0, False))
        raw[15] = 0x02
        with pytest.raises(MalformedFrame):
            decode_frame(bytes(raw))

    def test_request_with_t1(self):
        with pytest.raises(MalformedFrame):
            decode_frame(hand_encode(0x01, 0, 1, 5, 0, False))

    def test_hand_encoded(self):
        frame = decode_frame(hand_encode(0x02, 200, 8, 123456789, 77, False))
        assert frame == FtmFrame(FrameType.FTM, 200, 8, 123456789, 77)


@given(frames)
def test_roundtrip_frame(frame):
    assert decode_frame(encode_frame(frame)) == frame


@given(st.binary(min_size=FRAME_SIZE, max_size=FRAME_SIZE))
@settings(max_examples=500)
def test_roundtrip_bytes(data):
    try:
        frame = decode_frame(data)
    except MalformedFrame:
        return
    assert encode_frame(frame) == data
    assert not (frame.frame_type is FrameType.FTM_REQUEST and frame.t1_ps != 0)


@given(frames, st.binary(min_size=16, max_size=16))
def test_protected_roundtrip(frame, key):
    tagged = protect(frame, key)
    assert decode_frame(encode_frame(tagged)) == tagged
    assert verify_auth_tag(tagged, key)


class TestAuthTag:
    def test_deterministic(self):
        body = bytes(range(16))
        assert compute_auth_tag(body, KEY) == compute_auth_tag(body, KEY)
        assert len(compute_auth_tag(body, KEY)) == 8

    def test_key_sensitivity(self):
        rng = random.Random(1)
        body = rng.randbytes(16)
        differ = sum(
            compute_auth_tag(body, rng.randbytes(16)) != compute_auth_tag(body, rng.randbytes(16))
            for _ in range(1000)
        )
        assert differ >= 999

    def test_avalanche(self):
        rng = random.Random(2)
        changed = 0
        for _ in range(1000):
            body = bytearray(rng.randbytes(16))
            key = rng.randbytes(16)
            before = compute_auth_tag(bytes(body), key)
            bit = rng.randrange(len(body) * 8)
            body[bit // 8] ^= 1 << (bit % 8)
            changed += compute_auth_tag(bytes(body), key) != before
        assert changed >= 999

    def test_verify(self):
        frame = protect(FtmFrame(FrameType.FTM, 1, 1, 1000, 3), KEY)
        assert verify_auth_tag(frame, KEY)
        assert not verify_auth_tag(frame, bytes(16))
        assert not verify_auth_tag(FtmFrame(FrameType.FTM, 1, 1, 1000, 3), KEY)

    def test_tag_covers_packet_number(self):
        frame = protect(FtmFrame(FrameType.FTM, 1, 1, 1000, 3), KEY)
        assert not verify_auth_tag(replace(frame, packet_number=4), KEY)

    def test_bad_key_length(self):
        with pytest.raises(ValueError):
            compute_auth_tag(bytes(16), bytes(8))


@given(
    frames,
    st.sampled_from(["dialog_token", "burst_size", "t1_ps", "packet_number"]),
    st.integers(1, 255),
)
def test_tag_soundness(frame, field, delta):
    tagged = protect(replace(frame, frame_type=FrameType.FTM), KEY)
    bits = {"dialog_token": 8, "burst_size": 8, "t1_ps": 64, "packet_number": 32}[field]
    mutated = replace(tagged, **{field: (getattr(tagged, field) + delta) % (1 << bits)})
    if field == "burst_size" and mutated.burst_size == 0:
        mutated = replace(mutated, burst_size=1 if tagged.burst_size != 1 else 2)
    assert frame_body(mutated) != frame_body(tagged)
    assert not verify_auth_tag(mutated, KEY)


def test_frame_log_roundtrip():
    entries = [(10, FtmFrame(FrameType.FTM_REQUEST, 0, 8)),
               (12, FtmFrame(FrameType.FTM, 1, 8, 999, 1)),
               (13, protect(FtmFrame(FrameType.ACK, 1, 8), KEY))]
    text = write_frame_log(entries)
    lines = text.splitlines()
    assert lines[1] == "12 " + hand_encode(0x02, 1, 8, 999, 1, False).hex()
    decoded = [(us, decode_frame(raw)) for us, raw in iter_frame_log(text)]
    assert decoded == entries


@pytest.mark.parametrize("line", ["12", "x " + "00" * 24, "1 " + "AB" * 24, "1 " + "00" * 23, "1 zz" + "00" * 23])
def test_frame_log_rejects(line):
    with pytest.raises(ValueError):
        list(iter_frame_log(line))


def test_random_bytes_rarely_crash():
    # decode must only ever raise MalformedFrame
    for _ in range(2000):
        try:
            decode_frame(os.urandom(24))
        except MalformedFrame:
            pass
