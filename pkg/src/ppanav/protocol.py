"""Framed binary wire protocol between the world, vision and console sides.

Every message is `magic(2) version(1) type(1) payload_len(u32 LE) payload`.
Magic is 0x53 0x43, version 0x01. Payloads are little-endian throughout;
report and pose fields travel as 32-bit floats.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from typing import Optional, Union

from .planes import GrayPlane

MAGIC = b"\x53\x43"
VERSION = 1
HEADER = struct.Struct("<2sBBI")
FRAME_BYTES = 256 * 256
MAX_PAYLOAD = 1 << 20  # framing sanity bound for everything but FRAME

MSG_FRAME = 0x01
MSG_REPORT = 0x02
MSG_PARAM_SET = 0x03
MSG_GET_POSE = 0x10
MSG_POSE = 0x11
MSG_SET_STEER = 0x12
MSG_SET_SPEED = 0x13
MSG_STATUS = 0x20


class ProtocolError(Exception):
    """Malformed wire data; `offset` is the byte offset of the offence."""

    def __init__(self, reason: str, offset: int):
        super().__init__(f"{reason} (at byte {offset})")
        self.reason = reason
        self.offset = offset


@dataclass(frozen=True)
class Frame:
    pixels: bytes  # 65536 bytes, row-major 8-bit grayscale, row 0 first

    def __post_init__(self):
        if len(self.pixels) != FRAME_BYTES:
            raise ValueError(f"frame payload must be {FRAME_BYTES} bytes")

    @classmethod
    def from_plane(cls, plane: GrayPlane) -> "Frame":
        return cls(plane.to_bytes())

    def to_plane(self) -> GrayPlane:
        return GrayPlane.from_bytes(self.pixels)


@dataclass(frozen=True)
class Report:
    closest_x: float
    closest_y: float
    closest_dis: float
    direction: float  # +-1.0 / 0.0


@dataclass(frozen=True)
class ParamSet:
    key: str
    value: float


@dataclass(frozen=True)
class GetPose:
    pass


@dataclass(frozen=True)
class Pose:
    x: float
    y: float
    heading: float


@dataclass(frozen=True)
class SetSteer:
    radians: float


@dataclass(frozen=True)
class SetSpeed:
    mps: float


@dataclass(frozen=True)
class Status:
    mode: int
    e_dis: float
    tick: Optional[int] = None  # optional trailing sequence tag


Message = Union[Frame, Report, ParamSet, GetPose, Pose, SetSteer, SetSpeed, Status]

_TYPE_OF = {
    Frame: MSG_FRAME,
    Report: MSG_REPORT,
    ParamSet: MSG_PARAM_SET,
    GetPose: MSG_GET_POSE,
    Pose: MSG_POSE,
    SetSteer: MSG_SET_STEER,
    SetSpeed: MSG_SET_SPEED,
    Status: MSG_STATUS,
}
KNOWN_TYPES = frozenset(_TYPE_OF.values())


def _payload(msg: Message) -> bytes:
    if isinstance(msg, Frame):
        return msg.pixels
    if isinstance(msg, Report):
        return struct.pack(
            "<4f", msg.closest_x, msg.closest_y, msg.closest_dis, msg.direction
        )
    if isinstance(msg, ParamSet):
        key = msg.key.encode("ascii")
        if not 0 < len(key) < 256:
            raise ValueError("param key must be 1..255 ASCII bytes")
        return struct.pack("<B", len(key)) + key + struct.pack("<f", msg.value)
    if isinstance(msg, GetPose):
        return b""
    if isinstance(msg, Pose):
        return struct.pack("<3f", msg.x, msg.y, msg.heading)
    if isinstance(msg, SetSteer):
        return struct.pack("<f", msg.radians)
    if isinstance(msg, SetSpeed):
        return struct.pack("<f", msg.mps)
    if isinstance(msg, Status):
        raw = struct.pack("<Bf", msg.mode, msg.e_dis)
        if msg.tick is not None:
            raw += struct.pack("<I", msg.tick)
        return raw
    raise TypeError(f"not a wire message: {msg!r}")


def encode(msg: Message) -> bytes:
    payload = _payload(msg)
    return HEADER.pack(MAGIC, VERSION, _TYPE_OF[type(msg)], len(payload)) + payload


def _parse(msg_type: int, payload: bytes, at: int) -> Message:
    n = len(payload)
    if msg_type == MSG_FRAME:
        return Frame(payload)
    if msg_type == MSG_REPORT:
        if n != 16:
            raise ProtocolError(f"REPORT payload must be 16 bytes, got {n}", at)
        return Report(*struct.unpack("<4f", payload))
    if msg_type == MSG_PARAM_SET:
        if n < 1:
            raise ProtocolError("PARAM_SET payload truncated", at)
        klen = payload[0]
        if n != 1 + klen + 4:
            raise ProtocolError(f"PARAM_SET length mismatch (key {klen})", at)
        try:
            key = payload[1 : 1 + klen].decode("ascii")
        except UnicodeDecodeError:
            raise ProtocolError("PARAM_SET key is not ASCII", at) from None
        (value,) = struct.unpack("<f", payload[1 + klen :])
        return ParamSet(key, value)
    if msg_type == MSG_GET_POSE:
        if n != 0:
            raise ProtocolError(f"GET_POSE carries no payload, got {n} bytes", at)
        return GetPose()
    if msg_type == MSG_POSE:
        if n != 12:
            raise ProtocolError(f"POSE payload must be 12 bytes, got {n}", at)
        return Pose(*struct.unpack("<3f", payload))
    if msg_type == MSG_SET_STEER:
        if n != 4:
            raise ProtocolError(f"SET_STEER payload must be 4 bytes, got {n}", at)
        return SetSteer(*struct.unpack("<f", payload))
    if msg_type == MSG_SET_SPEED:
        if n != 4:
            raise ProtocolError(f"SET_SPEED payload must be 4 bytes, got {n}", at)
        return SetSpeed(*struct.unpack("<f", payload))
    if msg_type == MSG_STATUS:
        if n == 5:
            mode, e_dis = struct.unpack("<Bf", payload)
            return Status(mode, e_dis)
        if n == 9:
            mode, e_dis, tick = struct.unpack("<BfI", payload)
            return Status(mode, e_dis, tick)
        raise ProtocolError(f"STATUS payload must be 5 or 9 bytes, got {n}", at)
    raise ProtocolError(f"unknown message type 0x{msg_type:02x}", at)


def decode(buf, start: int = 0) -> Optional[tuple[Message, int]]:
    """Decode one message from buf[start:].

    Returns (message, bytes consumed), or None when more bytes are needed.
    Raises ProtocolError on malformed data, carrying the offending offset.
    """
    view = memoryview(buf)
    avail = len(view) - start
    if avail < HEADER.size:
        return None
    magic, version, msg_type, plen = HEADER.unpack_from(view, start)
    if magic != MAGIC:
        raise ProtocolError("bad magic", start)
    if version != VERSION:
        raise ProtocolError(f"unsupported version {version}", start + 2)
    if msg_type not in KNOWN_TYPES:
        raise ProtocolError(f"unknown message type 0x{msg_type:02x}", start + 3)
    if msg_type == MSG_FRAME:
        if plen != FRAME_BYTES:
            raise ProtocolError(f"FRAME payload must be {FRAME_BYTES} bytes", start + 4)
    elif plen > MAX_PAYLOAD:
        raise ProtocolError(f"payload length {plen} exceeds limit", start + 4)
    if avail < HEADER.size + plen:
        return None
    payload = bytes(view[start + HEADER.size : start + HEADER.size + plen])
    return _parse(msg_type, payload, start + HEADER.size), HEADER.size + plen
