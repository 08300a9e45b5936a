"""Closest-obstacle detection on a camera frame.

Segments obstacles by threshold + noise filtering, then repeatedly picks
the first remaining pixel, floods out its component, takes the bounding
box and gates the box's bottom centre against the image areas. The
minimum-distance hit (measured from the robot reference pixel (255,127))
becomes the report; each found component is XOR-deleted before the next
iteration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .planes import (
    PLANE_SHAPE,
    BitPlane,
    BoundingBox,
    GrayPlane,
    _mask_runs,
    filter_noise,
    threshold,
)

# Sentinel distance for "no valid obstacle": far beyond any on-image
# distance and any sane safe range, so downstream guards need no special case.
NO_OBSTACLE_DIS = 1.0e6

ROBOT_PIXEL = (255, 127)  # image point standing in for the robot position

DEFAULT_THRESHOLD = 100.0  # dark obstacles on a light ground, polarity below


@dataclass(frozen=True)
class AreaConfig:
    """Row/column bands partitioning the image (all bounds inclusive).

    A bottom centre only counts as an obstacle when its row lies strictly
    between the distant and forbidden areas and its column strictly
    between the two safe bands.
    """

    distant_x_max: int = 50
    forbidden_x_min: int = 240
    safe_y_low: tuple = (0, 10)
    safe_y_high: tuple = (245, 255)
    right_y: tuple = (15, 127)
    left_y: tuple = (128, 240)

    def __post_init__(self):
        if not self.distant_x_max < self.forbidden_x_min:
            raise ValueError("distant area must end before the forbidden area")
        if not self.right_y[1] < self.left_y[0]:
            raise ValueError("right and left areas must be disjoint and ordered")
        if self.safe_y_low[1] >= self.right_y[0] or self.safe_y_high[0] <= self.left_y[1]:
            raise ValueError("safe bands must not overlap the right/left areas")

    def replace(self, **kw) -> "AreaConfig":
        import dataclasses

        return dataclasses.replace(self, **kw)


@dataclass(frozen=True)
class ObstacleReport:
    """The four-field detection message: bottom centre of the winning box,
    its pixel distance from the robot reference point, and which side it
    sits on (-1 right, +1 left, 0 none)."""

    closest_x: float = 0.0
    closest_y: float = 0.0
    closest_dis: float = NO_OBSTACLE_DIS
    direction: int = 0


def classify_direction(y: float, areas: AreaConfig) -> int:
    """-1 if the column is in the right area, +1 in the left, 0 otherwise."""
    if areas.right_y[0] <= y <= areas.right_y[1]:
        return -1
    if areas.left_y[0] <= y <= areas.left_y[1]:
        return +1
    return 0


class _RunField:
    """The working register decomposed into horizontal runs.

    Deleting a found component always removes whole runs, so one
    decomposition serves the entire detection loop: first-event scan,
    flood and XOR-delete all become run bookkeeping.
    """

    def __init__(self, bits: np.ndarray):
        self.rows, self.starts, self.ends, self.row_slices = _mask_runs(bits)
        self.alive = np.ones(len(self.rows), dtype=bool)

    def first_alive(self) -> int | None:
        if not len(self.alive):
            return None
        idx = int(self.alive.argmax())
        return idx if self.alive[idx] else None

    def run_at(self, x: int, y: int) -> int:
        lo, hi = self.row_slices[x], self.row_slices[x + 1]
        i = lo + int(np.searchsorted(self.starts[lo:hi], y, side="right")) - 1
        if i < lo or self.ends[i] < y or not self.alive[i]:
            raise ValueError(f"no live run at ({x}, {y})")
        return i

    def flood_component(self, first: int) -> list[int]:
        """All runs 4-connected to `first`, marked consumed."""
        self.alive[first] = False
        component, stack = [first], [first]
        while stack:
            i = stack.pop()
            x, s, e = int(self.rows[i]), int(self.starts[i]), int(self.ends[i])
            for xn in (x - 1, x + 1):
                if not (0 <= xn < PLANE_SHAPE[0]):
                    continue
                lo, hi = self.row_slices[xn], self.row_slices[xn + 1]
                j = lo + int(np.searchsorted(self.ends[lo:hi], s))
                while j < hi and self.starts[j] <= e:
                    if self.alive[j]:
                        self.alive[j] = False
                        component.append(j)
                        stack.append(j)
                    j += 1
        return component

    def bounding_box(self, component: list[int]) -> BoundingBox:
        idx = np.asarray(component)
        return BoundingBox(
            int(self.rows[idx].min()),
            int(self.rows[idx].max()),
            int(self.starts[idx].min()),
            int(self.ends[idx].max()),
        )

    def to_plane(self) -> BitPlane:
        bits = np.zeros(PLANE_SHAPE, dtype=bool)
        for i in np.flatnonzero(self.alive):
            bits[self.rows[i], self.starts[i] : self.ends[i] + 1] = True
        return BitPlane(bits)


def detect_closest(
    frame: GrayPlane,
    t: float = DEFAULT_THRESHOLD,
    areas: AreaConfig = AreaConfig(),
    polarity: str = "below",
    scan=None,
    trace: list | None = None,
) -> ObstacleReport:
    """Run the detection loop on a frame and report the closest obstacle.

    `scan`, when given, picks the next component seed pixel from the
    remaining working plane (tests swap in other orders); `trace`, when a
    list, receives one (box, bottom, accepted) entry per component.
    """
    work = _RunField(filter_noise(threshold(frame, t, polarity)).bits)
    best_x = best_y = 0.0
    best_dis = NO_OBSTACLE_DIS
    found = False
    while True:
        if scan is None:
            first = work.first_alive()  # row-major first event
            if first is None:
                break
        else:
            seed = scan(work.to_plane())
            if seed is None:
                break
            first = work.run_at(seed[0], seed[1])
        component = work.flood_component(first)
        box = work.bounding_box(component)
        x_bottom, y_bottom = box.bottom_center
        accepted = (
            areas.distant_x_max < x_bottom < areas.forbidden_x_min
            and areas.safe_y_low[1] < y_bottom < areas.safe_y_high[0]
        )
        if accepted:
            dis = math.hypot(ROBOT_PIXEL[0] - x_bottom, ROBOT_PIXEL[1] - y_bottom)
            if dis < best_dis:
                best_dis = dis
                best_x, best_y = float(x_bottom), float(y_bottom)
                found = True
        if trace is not None:
            trace.append((box, (x_bottom, y_bottom), accepted))
    if not found:
        return ObstacleReport()
    return ObstacleReport(best_x, best_y, best_dis, classify_direction(best_y, areas))
