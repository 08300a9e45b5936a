"""The closed loop between world, vision and controller, over TCP or in
process.

The interface drives a lock-step cycle: read the pose, ship the latest
frame to the vision side, wait for exactly one report, run the navigator,
then command steer/speed, which makes the world advance one timestep and
return the next frame. In-process channels push bytes through the same
codec as the sockets, so both transports quantize floats identically and
produce bit-identical trajectories.
"""

from __future__ import annotations

import math
import socket
from collections import deque
from dataclasses import dataclass

from . import protocol
from .detect import AreaConfig, ObstacleReport, detect_closest
from .navigate import Mode, Navigator, commanded_speed
from .protocol import (
    Frame,
    GetPose,
    ParamSet,
    Pose,
    Report,
    SetSpeed,
    SetSteer,
    Status,
    decode,
    encode,
)
from .world import (
    VEHICLE_RADIUS,
    WHEEL_RADIUS,
    VehicleState,
    World,
    WorldScene,
    clearance,
)

DEFAULT_VISION_PORT = 27725
DEFAULT_WORLD_PORT = 27726
DEFAULT_CONSOLE_PORT = 27727
REPORT_TIMEOUT = 2.0  # s

VISION_PARAM_KEYS = ("threshold", "distant_x_max", "forbidden_x_min", "safe_y_low", "safe_y_high")
NAV_PARAM_KEYS = ("k_safe", "k_steer", "d_safe", "e_safe")
PARAM_KEYS = VISION_PARAM_KEYS + NAV_PARAM_KEYS


class ChannelClosed(Exception):
    """The peer went away; a clean end-of-stream, not a protocol fault."""


class BridgeTimeout(Exception):
    """No reply within the deadline; the loop aborts."""


class SocketChannel:
    """Message channel over a connected TCP socket."""

    def __init__(self, sock: socket.socket):
        self.sock = sock
        self.buf = bytearray()
        sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)

    @classmethod
    def connect(cls, host: str, port: int, timeout: float = 5.0) -> "SocketChannel":
        return cls(socket.create_connection((host, port), timeout=timeout))

    def send(self, msg: protocol.Message):
        self.sock.sendall(encode(msg))

    def _try_decode(self):
        got = decode(self.buf)
        if got is None:
            return None
        msg, consumed = got
        del self.buf[:consumed]
        return msg

    def recv(self, timeout: float | None = None) -> protocol.Message:
        msg = self._try_decode()
        if msg is not None:
            return msg
        self.sock.settimeout(timeout)
        while True:
            try:
                chunk = self.sock.recv(65536)
            except (TimeoutError, socket.timeout):
                raise BridgeTimeout(f"no message within {timeout}s") from None
            if not chunk:
                raise ChannelClosed("peer closed the connection")
            self.buf.extend(chunk)
            msg = self._try_decode()
            if msg is not None:
                return msg

    def poll(self) -> protocol.Message | None:
        """Non-blocking receive; None when no complete message is waiting."""
        msg = self._try_decode()
        if msg is not None:
            return msg
        self.sock.settimeout(0.0)
        try:
            chunk = self.sock.recv(65536)
        except (BlockingIOError, socket.timeout, TimeoutError):
            return None
        finally:
            self.sock.settimeout(None)  # sends must stay blocking
        if not chunk:
            raise ChannelClosed("peer closed the connection")
        self.buf.extend(chunk)
        return self._try_decode()

    def close(self):
        try:
            self.sock.shutdown(socket.SHUT_RDWR)
        except OSError:
            pass
        self.sock.close()


class LoopbackChannel:
    """In-process channel: every message still round-trips through the
    codec so float quantization matches the socket path exactly."""

    def __init__(self, service):
        self.service = service
        self.inbox: deque = deque()
        for reply in service.on_connect():
            self._put(reply)

    def _put(self, msg):
        got = decode(encode(msg))
        assert got is not None
        self.inbox.append(got[0])

    def send(self, msg: protocol.Message):
        roundtripped = decode(encode(msg))[0]
        for reply in self.service.handle(roundtripped):
            self._put(reply)

    def recv(self, timeout: float | None = None) -> protocol.Message:
        if not self.inbox:
            raise BridgeTimeout("service produced no reply")
        return self.inbox.popleft()

    def poll(self) -> protocol.Message | None:
        return self.inbox.popleft() if self.inbox else None

    def close(self):
        pass


class ProtocolViolation(Exception):
    """A well-formed message arrived where it makes no sense."""


class VisionService:
    """Vision side: frames in, closest-obstacle reports out."""

    def __init__(self, threshold: float = 100.0, areas: AreaConfig | None = None):
        self.threshold = threshold
        self.areas = areas or AreaConfig()

    def on_connect(self):
        return []

    def apply_param(self, key: str, value: float) -> bool:
        try:
            if key == "threshold":
                self.threshold = float(value)
            elif key == "distant_x_max":
                self.areas = self.areas.replace(distant_x_max=int(value))
            elif key == "forbidden_x_min":
                self.areas = self.areas.replace(forbidden_x_min=int(value))
            elif key == "safe_y_low":
                self.areas = self.areas.replace(safe_y_low=(self.areas.safe_y_low[0], int(value)))
            elif key == "safe_y_high":
                self.areas = self.areas.replace(safe_y_high=(int(value), self.areas.safe_y_high[1]))
            else:
                return False
        except ValueError:
            return False  # rejected: would break the area invariants
        return True

    def handle(self, msg):
        if isinstance(msg, Frame):
            r = detect_closest(msg.to_plane(), self.threshold, self.areas)
            return [Report(r.closest_x, r.closest_y, r.closest_dis, float(r.direction))]
        if isinstance(msg, ParamSet):
            self.apply_param(msg.key, msg.value)
            return []
        if isinstance(msg, Status):
            return []  # telemetry tags are allowed through, nothing to do
        raise ProtocolViolation(f"vision side cannot handle {type(msg).__name__}")


class WorldService:
    """World side: pose queries and steer/speed commands; every steer
    command advances the world one timestep and returns the new frame."""

    def __init__(self, world: World):
        self.world = world

    def on_connect(self):
        return [Frame.from_plane(self.world.render())]

    def handle(self, msg):
        if isinstance(msg, GetPose):
            return [Pose(*self.world.get_pose())]
        if isinstance(msg, SetSpeed):
            self.world.set_speed(msg.mps)
            return []
        if isinstance(msg, SetSteer):
            self.world.set_steer(msg.radians)
            self.world.step()
            return [Frame.from_plane(self.world.render())]
        if isinstance(msg, Status):
            return []
        raise ProtocolViolation(f"world side cannot handle {type(msg).__name__}")


def _serve(listener: socket.socket, service):
    """Accept a single client and serve it until it disconnects."""
    conn, _ = listener.accept()
    chan = SocketChannel(conn)
    try:
        for msg in service.on_connect():
            chan.send(msg)
        while True:
            msg = chan.recv()
            for reply in service.handle(msg):
                chan.send(reply)
    except (ChannelClosed, OSError):
        return  # client went away, possibly mid-reply
    finally:
        chan.close()


def make_listener(host: str, port: int) -> socket.socket:
    listener = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    listener.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
    listener.bind((host, port))
    listener.listen(1)
    return listener


def serve_vision(host: str, port: int, threshold: float = 100.0,
                 areas: AreaConfig | None = None, ready=None):
    """Run a vision server for one client connection, then return."""
    listener = make_listener(host, port)
    if ready is not None:
        ready.set()
    try:
        _serve(listener, VisionService(threshold, areas))
    finally:
        listener.close()


def serve_world(host: str, port: int, scene: WorldScene, ready=None, **world_kw):
    """Run a world server for one client connection, then return."""
    listener = make_listener(host, port)
    if ready is not None:
        ready.set()
    try:
        _serve(listener, WorldService(World(scene, **world_kw)))
    finally:
        listener.close()


@dataclass
class TickRecord:
    step: int
    x: float
    y: float
    heading: float
    mode: Mode
    theta_steer: float
    closest_x: float
    closest_y: float
    closest_dis: float
    direction: int
    collision: bool
    clearance: float
    target_index: int


class ParamStore:
    """Routes live parameter updates and mirrors current values for
    telemetry. Vision-side keys are forwarded over the vision channel;
    navigation keys mutate the navigator in place. Updates are applied
    only at a tick boundary, never mid-frame."""

    def __init__(self, navigator: Navigator, vision_chan, threshold: float,
                 areas: AreaConfig):
        self.navigator = navigator
        self.vision_chan = vision_chan
        self.mirror = {
            "threshold": float(threshold),
            "distant_x_max": float(areas.distant_x_max),
            "forbidden_x_min": float(areas.forbidden_x_min),
            "safe_y_low": float(areas.safe_y_low[1]),
            "safe_y_high": float(areas.safe_y_high[0]),
        }
        for key in NAV_PARAM_KEYS:
            self.mirror[key] = float(getattr(navigator.params, key))

    def apply(self, key: str, value: float) -> bool:
        if key in NAV_PARAM_KEYS:
            try:
                setattr(self.navigator.params, key, float(value))
            except ValueError:
                return False
        elif key in VISION_PARAM_KEYS:
            self.vision_chan.send(ParamSet(key, float(value)))
        else:
            return False
        self.mirror[key] = float(value)
        return True

    def current(self) -> dict:
        return dict(self.mirror)


def run_loop(
    world_chan,
    vision_chan,
    navigator: Navigator,
    cones,
    max_steps: int,
    wheel_radius: float = WHEEL_RADIUS,
    vehicle_radius: float = VEHICLE_RADIUS,
    report_timeout: float = REPORT_TIMEOUT,
    on_tick=None,
    param_source=None,
    param_store: ParamStore | None = None,
    status_chan=None,
    freerun: bool = False,
) -> tuple[list[TickRecord], str]:
    """Drive the closed loop; returns (tick records, stop reason).

    Stops on navigator idle, step budget, or a clean peer disconnect (the
    partial log is still returned). A missing report past `report_timeout`
    raises BridgeTimeout.
    """
    records: list[TickRecord] = []
    last_report = ObstacleReport()
    probe = WorldScene(cones=list(cones))
    reason = "max_steps"
    try:
        frame: Frame = world_chan.recv(report_timeout)
        for step in range(max_steps):
            if param_source is not None and param_store is not None:
                for key, value in param_source():
                    param_store.apply(key, value)
            world_chan.send(GetPose())
            pose: Pose = world_chan.recv(report_timeout)

            vision_chan.send(frame)
            if freerun:
                while True:
                    got = vision_chan.poll()
                    if got is None:
                        break
                    last_report = ObstacleReport(
                        got.closest_x, got.closest_y, got.closest_dis, int(got.direction)
                    )
                report = last_report
            else:
                raw: Report = vision_chan.recv(report_timeout)
                report = ObstacleReport(
                    raw.closest_x, raw.closest_y, raw.closest_dis, int(raw.direction)
                )

            cmd = navigator.step(report, (pose.x, pose.y), pose.heading)
            probe.vehicle = VehicleState(pose.x, pose.y, pose.heading)
            clear = clearance(probe, vehicle_radius)
            rec = TickRecord(
                step=step,
                x=pose.x,
                y=pose.y,
                heading=pose.heading,
                mode=cmd.mode,
                theta_steer=cmd.theta_steer,
                closest_x=report.closest_x,
                closest_y=report.closest_y,
                closest_dis=report.closest_dis,
                direction=report.direction,
                collision=clear < 0.0,
                clearance=clear,
                target_index=navigator.target_index,
            )
            records.append(rec)
            if status_chan is not None:
                e = navigator.last_e_dis
                status_chan.send(Status(int(cmd.mode), e if math.isfinite(e) else -1.0, step))
            if on_tick is not None:
                on_tick(rec, frame.pixels, param_store.current() if param_store else {})
            if cmd.mode is Mode.IDLE:
                reason = "idle"
                break
            speed = commanded_speed(navigator.params, wheel_radius)
            world_chan.send(SetSpeed(speed))
            world_chan.send(SetSteer(cmd.theta_steer))
            frame = world_chan.recv(report_timeout)
    except ChannelClosed:
        reason = "disconnected"
    return records, reason
