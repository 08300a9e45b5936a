"""Scene files: JSON serialization and deterministic scene generators.

Schema: {"cones": [{"cx","cy","radius","height"}...], "targets": [[x,y]...],
"vehicle": {"x","y","heading"}, "arena": [xmin,ymin,xmax,ymax]} with an
optional "ground_albedo". See docs/scene_format.md for the full contract.
"""

from __future__ import annotations

import json
import math
import random
from pathlib import Path

from .world import Cone, VehicleState, WorldScene


def scene_to_dict(scene: WorldScene) -> dict:
    return {
        "cones": [
            {"cx": c.cx, "cy": c.cy, "radius": c.base_radius, "height": c.height}
            for c in scene.cones
        ],
        "targets": [[x, y] for x, y in scene.targets],
        "vehicle": {
            "x": scene.vehicle.x,
            "y": scene.vehicle.y,
            "heading": scene.vehicle.heading,
        },
        "arena": list(scene.arena),
        "ground_albedo": scene.ground_albedo,
    }


def scene_from_dict(data: dict) -> WorldScene:
    v = data.get("vehicle", {})
    return WorldScene(
        cones=[
            Cone(c["cx"], c["cy"], c.get("radius", 0.25), c.get("height", 0.35))
            for c in data.get("cones", [])
        ],
        targets=[(float(x), float(y)) for x, y in data.get("targets", [])],
        vehicle=VehicleState(
            v.get("x", 0.0), v.get("y", 0.0), v.get("heading", 0.0)
        ),
        arena=tuple(data.get("arena", (-20.0, -20.0, 20.0, 20.0))),
        ground_albedo=int(data.get("ground_albedo", 200)),
    )


def save_scene(scene: WorldScene, path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(scene_to_dict(scene), indent=2, sort_keys=True) + "\n")
    return path


def load_scene(path) -> WorldScene:
    return scene_from_dict(json.loads(Path(path).read_text()))


def _ellipse_ring(rng, a: float, b: float, count: int, jitter: float) -> list:
    cones = []
    for i in range(count):
        ang = 2.0 * math.pi * i / count
        r = 1.0 + rng.uniform(-jitter, jitter)
        cones.append(Cone(a * r * math.cos(ang), b * r * math.sin(ang)))
    return cones


def gen_ellipses(seed: int = 0, outer=(9.0, 7.0), inner=(4.0, 3.0),
                 outer_count: int = 46, inner_count: int = 22,
                 jitter: float = 0.02) -> WorldScene:
    """Two concentric ellipse rings of cones; the vehicle starts between
    them with no targets (reactive wandering)."""
    rng = random.Random(seed)
    cones = _ellipse_ring(rng, outer[0], outer[1], outer_count, jitter)
    cones += _ellipse_ring(rng, inner[0], inner[1], inner_count, jitter)
    start_y = -(inner[1] + outer[1]) / 2.0
    return WorldScene(
        cones=cones,
        targets=[],
        vehicle=VehicleState(0.0, start_y, 0.0),
        arena=(-outer[0] - 3, -outer[1] - 3, outer[0] + 3, outer[1] + 3),
    )


def gen_corridor(seed: int = 0, length: float = 8.0, half_width: float = 2.0,
                 spacing: float = 1.5) -> WorldScene:
    """A straight corridor of cones with a single target at the far end."""
    rng = random.Random(seed)
    cones = []
    n = int(length // spacing) + 1
    for i in range(n):
        x = 1.0 + i * spacing
        for side in (-1.0, 1.0):
            wobble = rng.uniform(-0.1, 0.1)
            cones.append(Cone(x, side * (half_width + wobble)))
    return WorldScene(
        cones=cones,
        targets=[(length + 1.0, 0.0)],
        vehicle=VehicleState(0.0, 0.0, 0.0),
        arena=(-3.0, -half_width - 3, length + 4, half_width + 3),
    )


def gen_scatter(seed: int = 0, count: int = 12, extent: float = 8.0,
                targets=((7.0, 0.0),), keepout: float = 1.5) -> WorldScene:
    """Randomly scattered cones, keeping a clear disc around the start and
    each target."""
    rng = random.Random(seed)
    protected = [(0.0, 0.0)] + [tuple(t) for t in targets]
    cones = []
    while len(cones) < count:
        cx = rng.uniform(-extent, extent)
        cy = rng.uniform(-extent, extent)
        if any(math.hypot(cx - px, cy - py) < keepout for px, py in protected):
            continue
        cones.append(Cone(cx, cy))
    return WorldScene(
        cones=cones,
        targets=[tuple(t) for t in targets],
        vehicle=VehicleState(0.0, 0.0, 0.0),
        arena=(-extent - 3, -extent - 3, extent + 3, extent + 3),
    )


GENERATORS = {
    "ellipses": gen_ellipses,
    "corridor": gen_corridor,
    "scatter": gen_scatter,
}


def gen_scene(kind: str, seed: int = 0, **kw) -> WorldScene:
    if kind not in GENERATORS:
        raise ValueError(f"unknown scene kind {kind!r}; pick one of {sorted(GENERATORS)}")
    return GENERATORS[kind](seed=seed, **kw)
