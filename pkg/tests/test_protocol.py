"""Wire codec: byte-exact layouts, round-trip identity, streaming
reassembly under random chunking, and typed rejection of malformed data."""

import struct

import numpy as np
import pytest

from ppanav.planes import GrayPlane
from ppanav.protocol import (
    FRAME_BYTES,
    MAX_PAYLOAD,
    Frame,
    GetPose,
    ParamSet,
    Pose,
    ProtocolError,
    Report,
    SetSpeed,
    SetSteer,
    Status,
    decode,
    encode,
)


def f32(x: float) -> float:
    return struct.unpack("<f", struct.pack("<f", x))[0]


def sample_messages(rng) -> list:
    msgs = [
        Frame(bytes(rng.integers(0, 256, FRAME_BYTES, dtype=np.uint8))),
        Report(*(f32(v) for v in rng.uniform(-500, 500, 4))),
        ParamSet("threshold", f32(rng.uniform(0, 255))),
        ParamSet("k" * int(rng.integers(1, 40)), f32(rng.uniform(-10, 10))),
        GetPose(),
        Pose(*(f32(v) for v in rng.uniform(-50, 50, 3))),
        SetSteer(f32(rng.uniform(-1, 1))),
        SetSpeed(f32(rng.uniform(0, 5))),
        Status(int(rng.integers(0, 4)), f32(rng.uniform(0, 100))),
        Status(int(rng.integers(0, 4)), f32(rng.uniform(0, 100)), int(rng.integers(0, 2**31))),
    ]
    return msgs


class TestEncode:
    def test_get_pose_is_exactly_eight_bytes(self):
        assert encode(GetPose()) == bytes([0x53, 0x43, 0x01, 0x10, 0, 0, 0, 0])

    def test_header_layout(self):
        raw = encode(SetSteer(0.0))
        assert raw[:2] == b"\x53\x43"
        assert raw[2] == 1
        assert raw[3] == 0x12
        assert struct.unpack("<I", raw[4:8])[0] == 4

    def test_frame_payload_is_row_major(self):
        img = np.zeros((256, 256), dtype=np.uint8)
        img[0, 5] = 77
        raw = encode(Frame.from_plane(GrayPlane(img)))
        assert raw[8 + 5] == 77
        assert len(raw) == 8 + FRAME_BYTES

    def test_report_roundtrip_exact_fields(self):
        msg = Report(100.0, 127.0, 155.0, 1.0)
        got, n = decode(encode(msg))
        assert got == msg and n == 8 + 16

    def test_frame_rejects_wrong_size(self):
        with pytest.raises(ValueError):
            Frame(b"\x00" * 100)

    def test_param_key_limits(self):
        with pytest.raises(ValueError):
            encode(ParamSet("", 1.0))
        with pytest.raises(ValueError):
            encode(ParamSet("k" * 256, 1.0))


class TestRoundTrip:
    def test_all_types_identity(self):
        rng = np.random.default_rng(51)
        for msg in sample_messages(rng):
            got, consumed = decode(encode(msg))
            assert got == msg
            assert consumed == len(encode(msg))

    def test_partial_buffer_requests_more(self):
        raw = encode(Pose(1.0, 2.0, 3.0))
        for cut in range(len(raw)):
            assert decode(raw[:cut]) is None

    def test_decode_at_offset(self):
        raw = encode(GetPose()) + encode(SetSpeed(2.0))
        msg, n = decode(raw, 8)
        assert msg == SetSpeed(2.0)
        assert n == 12

    def test_streaming_fuzz_random_chunks(self):
        rng = np.random.default_rng(52)
        msgs = []
        for _ in range(1000):
            pool = sample_messages(rng)
            msgs.append(pool[int(rng.integers(0, len(pool)))])
        stream = b"".join(encode(m) for m in msgs)

        out, buf, pos = [], bytearray(), 0
        while pos < len(stream) or buf:
            if pos < len(stream):
                step = int(rng.integers(1, 70000))
                buf.extend(stream[pos : pos + step])
                pos += step
            while True:
                got = decode(buf)
                if got is None:
                    break
                msg, n = got
                out.append(msg)
                del buf[:n]
            if pos >= len(stream) and decode(buf) is None:
                break
        assert out == msgs
        assert not buf


class TestMalformed:
    def test_bad_magic(self):
        raw = b"XX" + encode(GetPose())[2:]
        with pytest.raises(ProtocolError) as e:
            decode(raw)
        assert e.value.offset == 0

    def test_bad_version(self):
        raw = bytearray(encode(GetPose()))
        raw[2] = 9
        with pytest.raises(ProtocolError) as e:
            decode(bytes(raw))
        assert e.value.offset == 2

    def test_unknown_type(self):
        raw = bytearray(encode(GetPose()))
        raw[3] = 0x7F
        with pytest.raises(ProtocolError) as e:
            decode(bytes(raw))
        assert e.value.offset == 3

    def test_length_overflow(self):
        raw = struct.pack("<2sBBI", b"\x53\x43", 1, 0x12, MAX_PAYLOAD + 1)
        with pytest.raises(ProtocolError) as e:
            decode(raw)
        assert e.value.offset == 4

    def test_frame_length_must_be_exact(self):
        raw = struct.pack("<2sBBI", b"\x53\x43", 1, 0x01, 100) + b"\x00" * 100
        with pytest.raises(ProtocolError) as e:
            decode(raw)
        assert e.value.offset == 4

    def test_payload_size_mismatch(self):
        raw = struct.pack("<2sBBI", b"\x53\x43", 1, 0x02, 8) + b"\x00" * 8
        with pytest.raises(ProtocolError) as e:
            decode(raw)
        assert e.value.offset == 8

    def test_param_set_key_length_mismatch(self):
        payload = bytes([10]) + b"ab" + struct.pack("<f", 1.0)
        raw = struct.pack("<2sBBI", b"\x53\x43", 1, 0x03, len(payload)) + payload
        with pytest.raises(ProtocolError):
            decode(raw)

    def test_status_size_must_be_5_or_9(self):
        payload = b"\x00" * 7
        raw = struct.pack("<2sBBI", b"\x53\x43", 1, 0x20, 7) + payload
        with pytest.raises(ProtocolError):
            decode(raw)

    def test_offset_propagates_past_valid_prefix(self):
        good = encode(GetPose())
        raw = good + b"ZZ" + good[2:]
        msg, n = decode(raw)
        assert msg == GetPose()
        with pytest.raises(ProtocolError) as e:
            decode(raw, n)
        assert e.value.offset == n

    def test_error_message_carries_offset(self):
        with pytest.raises(ProtocolError, match="at byte 0"):
            decode(b"ZZZZZZZZZZ")
