"""Steering control: target navigation with obstacle-avoidance dispatch.

Avoidance law: K = direction * (k_safe / closest_dis), raw = -k_steer * K.
The raw value is dimensionless; it is scaled by d_steer/10 radians per
unit and clamped to the steering limit before hitting the vehicle, so an
obstacle on the left (direction +1) yields a rightward (negative) steer
and a closer obstacle steers harder.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum

from .detect import ObstacleReport
from .world import STEER_LIMIT, WHEEL_RADIUS, clamp, wrap_angle


class Mode(IntEnum):
    IDLE = 0
    TARGET_NAV = 1
    AVOIDANCE = 2
    ON_TARGET = 3


@dataclass
class NavParams:
    d_safe: float = 200.0  # px, avoidance kicks in below this report distance
    e_safe: float = 1.0  # m, target reached within this radius
    k_safe: float = 100.0
    k_steer: float = 20.0
    d_vel: float = 1.0  # commanded wheel speed, rev/s
    d_steer: float = 0.1  # rad, base steering quantum

    def __post_init__(self):
        for name in ("d_safe", "e_safe", "k_safe", "k_steer"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")

    @property
    def steer_scale(self) -> float:
        # radians per raw steering unit
        return self.d_steer / 10.0


@dataclass(frozen=True)
class SteerCommand:
    theta_steer: float
    mode: Mode


def commanded_speed(p: NavParams, wheel_radius: float = WHEEL_RADIUS) -> float:
    """Forward speed in m/s for the commanded wheel revolutions per second."""
    return p.d_vel * 2.0 * math.pi * wheel_radius


def avoidance_raw(direction: int, closest_dis: float, p: NavParams) -> float:
    """The unscaled steering value of the avoidance law."""
    k = direction * (p.k_safe / closest_dis)
    return -p.k_steer * k


def avoidance_steer(
    report: ObstacleReport, p: NavParams, steer_limit: float = STEER_LIMIT
) -> SteerCommand:
    """Steer away from the reported closest obstacle.

    A direction of 0 (obstacle between the named bands) zeroes the law:
    the vehicle coasts straight while the range stays inside d_safe.
    """
    if report.closest_dis == 0.0:
        # singularity guard: hard over, away from the obstacle side
        return SteerCommand(-report.direction * steer_limit + 0.0, Mode.AVOIDANCE)
    raw = avoidance_raw(report.direction, report.closest_dis, p)
    return SteerCommand(clamp(raw * p.steer_scale, steer_limit) + 0.0, Mode.AVOIDANCE)


def target_steer(
    pos: tuple[float, float],
    heading: float,
    target: tuple[float, float],
    p: NavParams,
    steer_limit: float = STEER_LIMIT,
) -> tuple[SteerCommand, float]:
    """Steer toward a target point; returns the command and the distance left."""
    dx, dy = target[0] - pos[0], target[1] - pos[1]
    e_dis = math.hypot(dx, dy)
    if e_dis <= p.e_safe:
        return SteerCommand(0.0, Mode.ON_TARGET), e_dis
    theta_target = math.atan2(dy, dx)
    steer = clamp(wrap_angle(theta_target - heading), steer_limit)
    return SteerCommand(steer, Mode.TARGET_NAV), e_dis


class Navigator:
    """Per-tick dispatcher between avoidance and target navigation.

    Owns the ordered target list and the current index; target advance is
    edge-triggered, one advance per on-target transition. With `reactive`
    set (no targets), the vehicle cruises straight when no obstacle is
    near instead of idling.
    """

    def __init__(
        self,
        params: NavParams,
        targets: list | None = None,
        steer_limit: float = STEER_LIMIT,
        reactive: bool = False,
    ):
        self.params = params
        self.targets = list(targets or [])
        self.target_index = 0
        self.steer_limit = steer_limit
        self.reactive = reactive
        self.last_e_dis = math.inf

    def step(self, report: ObstacleReport, pos, heading: float) -> SteerCommand:
        p = self.params
        if report.closest_dis < p.d_safe:
            return avoidance_steer(report, p, self.steer_limit)
        if self.reactive:
            return SteerCommand(0.0, Mode.TARGET_NAV)
        if self.target_index >= len(self.targets):
            return SteerCommand(0.0, Mode.IDLE)
        cmd, e_dis = target_steer(
            pos, heading, self.targets[self.target_index], p, self.steer_limit
        )
        self.last_e_dis = e_dis
        if cmd.mode is Mode.ON_TARGET:
            self.target_index += 1
        return cmd
