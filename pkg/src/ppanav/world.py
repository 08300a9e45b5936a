"""2D robot world: Ackermann vehicle, cone obstacles and a pinhole camera.

The vehicle follows kinematic bicycle equations on a fixed timestep. The
camera sits 0.5 m ahead of and 1 m above the vehicle reference point,
pitched 38 degrees down, with a 60 degree field of view on both axes and
mirrored columns (an obstacle on the robot's left lands in the high
column half of the image). Cones are rasterized as filled silhouette
triangles from the projected apex to the projected base-circle extremes,
painter-ordered by camera depth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .planes import PLANE_SIZE, GrayPlane

STEER_LIMIT = 0.5236  # rad, 30 degrees
WHEELBASE = 0.6  # m
VEHICLE_RADIUS = 0.25  # m, collision disc
WHEEL_RADIUS = 0.1  # m, converts commanded rev/s into forward speed
DT = 0.05  # s, fixed timestep
GROUND_ALBEDO = 200
CONE_ALBEDO = 30
NEAR_CLIP = 0.05  # m, camera-space depth below which geometry is culled


def wrap_angle(a: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    r = math.fmod(a + math.pi, 2.0 * math.pi)
    if r <= 0.0:
        r += 2.0 * math.pi
    return r - math.pi


def clamp(v: float, limit: float) -> float:
    return -limit if v < -limit else limit if v > limit else v


@dataclass(frozen=True)
class VehicleState:
    x: float = 0.0
    y: float = 0.0
    heading: float = 0.0  # rad, wrapped to (-pi, pi]
    steer: float = 0.0  # rad, front wheel angle
    speed: float = 0.0  # m/s forward

    def __post_init__(self):
        object.__setattr__(self, "heading", wrap_angle(self.heading))


def step_vehicle(
    v: VehicleState,
    steer_cmd: float,
    dt: float = DT,
    wheelbase: float = WHEELBASE,
    steer_limit: float = STEER_LIMIT,
) -> VehicleState:
    """Advance one kinematic bicycle step with the given steering command."""
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    steer = clamp(steer_cmd, steer_limit)
    x = v.x + v.speed * math.cos(v.heading) * dt
    y = v.y + v.speed * math.sin(v.heading) * dt
    heading = wrap_angle(v.heading + (v.speed / wheelbase) * math.tan(steer) * dt)
    return VehicleState(x, y, heading, steer, v.speed)


@dataclass(frozen=True)
class Cone:
    cx: float
    cy: float
    base_radius: float = 0.18
    height: float = 0.35
    albedo: int = CONE_ALBEDO

    def __post_init__(self):
        if self.base_radius <= 0 or self.height <= 0:
            raise ValueError("cone base_radius and height must be positive")


def _rot_x(a):
    c, s = math.cos(a), math.sin(a)
    return np.array([[1, 0, 0], [0, c, -s], [0, s, c]])


def _rot_y(a):
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, 0, s], [0, 1, 0], [-s, 0, c]])


def _rot_z(a):
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, -s, 0], [s, c, 0], [0, 0, 1]])


@dataclass(frozen=True)
class CameraModel:
    """Robot-to-camera extrinsics plus the pinhole intrinsics.

    Euler angles are intrinsic X-Y-Z rotations in a body frame of
    X right / Y forward / Z up; the sensor looks along its +Z axis with
    image-up along +Y. Under this convention the default (-128, 0, -180)
    pitches the view 38 degrees below the horizon and mirrors the columns.
    """

    translation: tuple = (0.0, 0.5, 1.0)  # m, (right, forward, up)
    rotation_deg: tuple = (-128.0, 0.0, -180.0)
    fov_deg: float = 60.0
    resolution: int = PLANE_SIZE

    def __post_init__(self):
        if not 0.0 < self.fov_deg < 180.0:
            raise ValueError("fov must lie strictly between 0 and 180 degrees")
        if self.resolution != PLANE_SIZE:
            raise ValueError(f"resolution is fixed at {PLANE_SIZE}")

    @property
    def focal_px(self) -> float:
        return (self.resolution / 2.0) / math.tan(math.radians(self.fov_deg) / 2.0)

    def axes_body(self) -> np.ndarray:
        """Camera axes as columns, expressed in the body frame."""
        psi, theta, phi = (math.radians(a) for a in self.rotation_deg)
        return _rot_x(psi) @ _rot_y(theta) @ _rot_z(phi)


class CameraView:
    """Camera pose for one vehicle pose; projects world points to pixels."""

    def __init__(self, camera: CameraModel, vehicle: VehicleState):
        ch, sh = math.cos(vehicle.heading), math.sin(vehicle.heading)
        # body axes (right, forward, up) as world columns
        body = np.array([[sh, ch, 0.0], [-ch, sh, 0.0], [0.0, 0.0, 1.0]])
        self.axes = body @ camera.axes_body()  # camera axes as world columns
        self.center = np.array([vehicle.x, vehicle.y, 0.0]) + body @ np.asarray(
            camera.translation, dtype=float
        )
        self.focal = camera.focal_px
        self.mid = (camera.resolution - 1) / 2.0  # principal point, 127.5

    def project(self, points: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Project Nx3 world points; returns (rows, cols, depths)."""
        pc = (np.atleast_2d(points) - self.center) @ self.axes
        depth = pc[:, 2]
        with np.errstate(divide="ignore", invalid="ignore"):
            cols = self.mid + self.focal * pc[:, 0] / depth
            rows = self.mid - self.focal * pc[:, 1] / depth
        return rows, cols, depth


@dataclass
class WorldScene:
    cones: list = field(default_factory=list)
    targets: list = field(default_factory=list)  # ordered [(x, y), ...]
    vehicle: VehicleState = field(default_factory=VehicleState)
    arena: tuple = (-20.0, -20.0, 20.0, 20.0)  # (xmin, ymin, xmax, ymax)
    ground_albedo: int = GROUND_ALBEDO
    camera: CameraModel = field(default_factory=CameraModel)


def _fill_triangle(img: np.ndarray, rows, cols, value: int):
    """Fill the triangle given by three (row, col) vertices into img."""
    r0 = max(int(math.floor(min(rows))), 0)
    r1 = min(int(math.ceil(max(rows))), PLANE_SIZE - 1)
    c0 = max(int(math.floor(min(cols))), 0)
    c1 = min(int(math.ceil(max(cols))), PLANE_SIZE - 1)
    if r0 > r1 or c0 > c1:
        return
    area = (cols[1] - cols[0]) * (rows[2] - rows[0]) - (rows[1] - rows[0]) * (cols[2] - cols[0])
    if abs(area) < 1e-12:
        return
    rr, cc = np.meshgrid(np.arange(r0, r1 + 1), np.arange(c0, c1 + 1), indexing="ij")
    inside = np.ones(rr.shape, dtype=bool)
    for i in range(3):
        ra, ca = rows[i], cols[i]
        rb, cb = rows[(i + 1) % 3], cols[(i + 1) % 3]
        edge = (cb - ca) * (rr - ra) - (rb - ra) * (cc - ca)
        inside &= (edge * area) >= 0.0
    img[r0 : r1 + 1, c0 : c1 + 1][inside] = value


def _silhouette_points(cones, center) -> np.ndarray:
    """Apex plus the two base-circle extremes of every cone, (N*3)x3."""
    n = len(cones)
    pts = np.empty((n * 3, 3))
    for i, cone in enumerate(cones):
        dx, dy = cone.cx - center[0], cone.cy - center[1]
        norm = math.hypot(dx, dy)
        if norm < 1e-9:
            norm, dx, dy = 1.0, 1.0, 0.0  # directly underneath: degenerate
        px, py = -dy / norm * cone.base_radius, dx / norm * cone.base_radius
        pts[3 * i] = (cone.cx, cone.cy, cone.height)
        pts[3 * i + 1] = (cone.cx + px, cone.cy + py, 0.0)
        pts[3 * i + 2] = (cone.cx - px, cone.cy - py, 0.0)
    return pts


def render_frame(scene: WorldScene) -> GrayPlane:
    """Rasterize the scene from the vehicle's camera into a gray frame."""
    img = np.full((PLANE_SIZE, PLANE_SIZE), scene.ground_albedo, dtype=np.uint8)
    if not scene.cones:
        return GrayPlane(img)
    view = CameraView(scene.camera, scene.vehicle)
    rows, cols, depth = view.project(_silhouette_points(scene.cones, view.center))
    rows = rows.reshape(-1, 3)
    cols = cols.reshape(-1, 3)
    depth = depth.reshape(-1, 3)
    visible = (depth > NEAR_CLIP).all(axis=1)  # cull behind / grazing cones
    # painter's order: far cones first so nearer ones overwrite
    order = sorted(np.flatnonzero(visible), key=lambda i: -depth[i].min())
    for i in order:
        _fill_triangle(img, rows[i], cols[i], scene.cones[i].albedo)
    return GrayPlane(img)


def check_collision(
    scene: WorldScene, vehicle_radius: float = VEHICLE_RADIUS
) -> bool:
    """True iff the vehicle disc overlaps any cone base."""
    return clearance(scene, vehicle_radius) < 0.0


def clearance(scene: WorldScene, vehicle_radius: float = VEHICLE_RADIUS) -> float:
    """Distance from the vehicle disc to the nearest cone base (negative
    when overlapping); +inf with no cones."""
    v = scene.vehicle
    best = math.inf
    for cone in scene.cones:
        d = math.hypot(cone.cx - v.x, cone.cy - v.y) - cone.base_radius - vehicle_radius
        best = min(best, d)
    return best


class World:
    """Owns a scene and advances it; the remote-API surface of the world."""

    def __init__(
        self,
        scene: WorldScene,
        dt: float = DT,
        wheelbase: float = WHEELBASE,
        steer_limit: float = STEER_LIMIT,
        vehicle_radius: float = VEHICLE_RADIUS,
    ):
        self.scene = scene
        self.dt = dt
        self.wheelbase = wheelbase
        self.steer_limit = steer_limit
        self.vehicle_radius = vehicle_radius

    def get_pose(self) -> tuple[float, float, float]:
        v = self.scene.vehicle
        return (v.x, v.y, v.heading)

    def set_steer(self, steer: float):
        v = self.scene.vehicle
        self.scene.vehicle = replace(v, steer=clamp(steer, self.steer_limit))

    def set_speed(self, speed: float):
        self.scene.vehicle = replace(self.scene.vehicle, speed=speed)

    def step(self):
        v = self.scene.vehicle
        self.scene.vehicle = step_vehicle(
            v, v.steer, self.dt, self.wheelbase, self.steer_limit
        )

    def render(self) -> GrayPlane:
        return render_frame(self.scene)

    def collided(self) -> bool:
        return check_collision(self.scene, self.vehicle_radius)
