"""Pixel-parallel vision loop for a simulated mobile robot.

A sensor-style plane algebra feeds a closest-obstacle detector whose
report steers an Ackermann vehicle in a 2D cone world, over an in-process
or TCP bridge, with a live-tunable operator console.
"""

from .detect import AreaConfig, ObstacleReport, classify_direction, detect_closest
from .navigate import Mode, Navigator, NavParams, SteerCommand
from .planes import BitPlane, BoundingBox, GrayPlane, PixelCoord
from .runner import RunConfig, TrajectoryLog, run
from .scenes import gen_scene, load_scene, save_scene
from .world import CameraModel, Cone, VehicleState, World, WorldScene

__version__ = "0.1.0"

__all__ = [
    "AreaConfig",
    "BitPlane",
    "BoundingBox",
    "CameraModel",
    "Cone",
    "GrayPlane",
    "Mode",
    "NavParams",
    "Navigator",
    "ObstacleReport",
    "PixelCoord",
    "RunConfig",
    "SteerCommand",
    "TrajectoryLog",
    "VehicleState",
    "World",
    "WorldScene",
    "classify_direction",
    "detect_closest",
    "gen_scene",
    "load_scene",
    "run",
    "save_scene",
]
