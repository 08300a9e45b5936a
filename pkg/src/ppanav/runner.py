"""Experiment harness: configure a run, drive the closed loop in-process
or across TCP, and write the trajectory log and summary."""

from __future__ import annotations

import base64
import csv
import json
import math
import multiprocessing
import os
import socket
from dataclasses import dataclass, field, replace
from pathlib import Path

from . import bridge
from .bridge import (
    DEFAULT_CONSOLE_PORT,
    DEFAULT_VISION_PORT,
    DEFAULT_WORLD_PORT,
    LoopbackChannel,
    ParamStore,
    SocketChannel,
    TickRecord,
    VisionService,
    WorldService,
    run_loop,
    serve_vision,
    serve_world,
)
from .console import ConsoleServer
from .detect import DEFAULT_THRESHOLD, AreaConfig
from .navigate import Mode, Navigator, NavParams
from .scenes import load_scene, save_scene
from .world import World, WorldScene

RUN_MODES = ("reactive", "single_target", "multi_target")

CSV_COLUMNS = [
    "step",
    "x",
    "y",
    "heading",
    "mode",
    "theta_steer",
    "closest_x",
    "closest_y",
    "closest_dis",
    "direction",
    "collision",
    "clearance",
    "target_index",
]


def default_ports() -> tuple[int, int, int]:
    """Port triple (vision, world, console), overridable via PPANAV_PORTS."""
    raw = os.environ.get("PPANAV_PORTS")
    if raw:
        parts = [int(p) for p in raw.split(",")]
        if len(parts) != 3:
            raise ValueError("PPANAV_PORTS must be three comma-separated ports")
        return tuple(parts)
    return (DEFAULT_VISION_PORT, DEFAULT_WORLD_PORT, DEFAULT_CONSOLE_PORT)


@dataclass
class RunConfig:
    scene: object  # path to a scene JSON, or a WorldScene
    mode: str = "single_target"
    params: NavParams = field(default_factory=NavParams)
    threshold: float = DEFAULT_THRESHOLD
    areas: AreaConfig = field(default_factory=AreaConfig)
    max_steps: int = 10000
    seed: int = 0
    out_dir: object = None
    net: bool = False
    ports: tuple = field(default_factory=default_ports)
    console_port: int | None = None
    assets_dir: object = None
    fail_on_collision: bool = False
    freerun: bool = False
    report_timeout: float = bridge.REPORT_TIMEOUT


class TrajectoryLog:
    """Per-tick records of one run, in loop order."""

    def __init__(self, records: list[TickRecord], stop_reason: str):
        self.records = records
        self.stop_reason = stop_reason

    def write_csv(self, path) -> Path:
        path = Path(path)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(CSV_COLUMNS)
            for r in self.records:
                w.writerow(
                    [
                        r.step,
                        r.x,
                        r.y,
                        r.heading,
                        r.mode.name.lower(),
                        r.theta_steer,
                        r.closest_x,
                        r.closest_y,
                        r.closest_dis,
                        r.direction,
                        int(r.collision),
                        r.clearance,
                        r.target_index,
                    ]
                )
        return path

    def summary(self) -> dict:
        out = summarize(self.records)
        out["stop_reason"] = self.stop_reason
        return out


def summarize(records) -> dict:
    """Summary fields derivable from the tick records alone."""
    if not records:
        return {
            "steps": 0,
            "targets_reached": 0,
            "collisions": 0,
            "min_clearance": None,
            "final_pose": None,
            "completed": False,
        }
    min_clear = min(r.clearance for r in records)
    last = records[-1]
    return {
        "steps": len(records),
        "targets_reached": max(r.target_index for r in records),
        "collisions": sum(1 for r in records if r.collision),
        "min_clearance": min_clear if math.isfinite(min_clear) else None,
        "final_pose": [last.x, last.y, last.heading],
        "completed": last.mode is Mode.IDLE,
    }


def read_csv(path) -> list[TickRecord]:
    """Parse a trajectory CSV back into tick records."""
    records = []
    with Path(path).open(newline="") as fh:
        for row in csv.DictReader(fh):
            records.append(
                TickRecord(
                    step=int(row["step"]),
                    x=float(row["x"]),
                    y=float(row["y"]),
                    heading=float(row["heading"]),
                    mode=Mode[row["mode"].upper()],
                    theta_steer=float(row["theta_steer"]),
                    closest_x=float(row["closest_x"]),
                    closest_y=float(row["closest_y"]),
                    closest_dis=float(row["closest_dis"]),
                    direction=int(row["direction"]),
                    collision=bool(int(row["collision"])),
                    clearance=float(row["clearance"]),
                    target_index=int(row["target_index"]),
                )
            )
    return records


def summary_from_csv(path) -> dict:
    return summarize(read_csv(path))


def _validate(config: RunConfig, scene: WorldScene):
    if config.max_steps <= 0:
        raise ValueError("max_steps must be positive")
    if config.mode not in RUN_MODES:
        raise ValueError(f"mode must be one of {RUN_MODES}, got {config.mode!r}")
    if config.mode == "single_target" and len(scene.targets) < 1:
        raise ValueError("single_target mode needs at least one target in the scene")
    if config.mode == "multi_target" and len(scene.targets) < 2:
        raise ValueError("multi_target mode needs at least two targets in the scene")


def _free_port() -> int:
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


def _resolve_scene(config: RunConfig, out_dir: Path | None) -> tuple[WorldScene, Path | None]:
    if isinstance(config.scene, WorldScene):
        scene_path = None
        if config.net:
            if out_dir is None:
                raise ValueError("net mode with an in-memory scene needs out_dir")
            scene_path = save_scene(config.scene, out_dir / "scene.json")
        return config.scene, scene_path
    scene_path = Path(config.scene)
    return load_scene(scene_path), scene_path


def _telemetry_cb(console: ConsoleServer, navigator: Navigator, areas: AreaConfig):
    def on_tick(rec: TickRecord, frame_bytes: bytes, params: dict):
        def build():
            e = navigator.last_e_dis
            return {
                "type": "telemetry",
                "tick": rec.step,
                "pose": {"x": rec.x, "y": rec.y, "heading": rec.heading},
                "mode": rec.mode.name.lower(),
                "steer": rec.theta_steer,
                "e_dis": e if math.isfinite(e) else None,
                "target_index": rec.target_index,
                "report": {
                    "closest_x": rec.closest_x,
                    "closest_y": rec.closest_y,
                    "closest_dis": rec.closest_dis,
                    "direction": rec.direction,
                },
                "params": params,
                "areas": {
                    "distant_x_max": params.get("distant_x_max", areas.distant_x_max),
                    "forbidden_x_min": params.get("forbidden_x_min", areas.forbidden_x_min),
                    "safe_y_low": params.get("safe_y_low", areas.safe_y_low[1]),
                    "safe_y_high": params.get("safe_y_high", areas.safe_y_high[0]),
                    "right_y": list(areas.right_y),
                    "left_y": list(areas.left_y),
                },
                "frame": base64.b64encode(frame_bytes).decode("ascii"),
            }

        console.push(build)

    return on_tick


def run(config: RunConfig, console_max_fps: float | None = 15.0):
    """Execute one experiment; returns (TrajectoryLog, summary dict)."""
    out_dir = Path(config.out_dir) if config.out_dir is not None else None
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
    scene, scene_path = _resolve_scene(config, out_dir)
    _validate(config, scene)

    navigator = Navigator(
        replace(config.params),
        targets=[] if config.mode == "reactive" else list(scene.targets),
        reactive=config.mode == "reactive",
    )
    if config.mode == "single_target":
        navigator.targets = navigator.targets[:1]

    console = None
    procs = []
    world_chan = vision_chan = None
    try:
        if config.console_port is not None:
            console = ConsoleServer(
                port=config.console_port,
                assets_dir=config.assets_dir,
                max_fps=console_max_fps,
            )
        if config.net:
            vision_port = config.ports[0] or _free_port()
            world_port = config.ports[1] or _free_port()
            # fork keeps this usable from scripts, the REPL and pytest alike
            ctx = multiprocessing.get_context("fork")
            ready_v, ready_w = ctx.Event(), ctx.Event()
            procs = [
                ctx.Process(
                    target=serve_vision,
                    args=("127.0.0.1", vision_port, config.threshold, config.areas, ready_v),
                    daemon=True,
                ),
                ctx.Process(
                    target=_serve_world_from_file,
                    args=("127.0.0.1", world_port, str(scene_path), ready_w),
                    daemon=True,
                ),
            ]
            for p in procs:
                p.start()
            if not (ready_v.wait(10.0) and ready_w.wait(10.0)):
                raise RuntimeError("bridge servers failed to start")
            vision_chan = SocketChannel.connect("127.0.0.1", vision_port)
            world_chan = SocketChannel.connect("127.0.0.1", world_port)
        else:
            vision_chan = LoopbackChannel(VisionService(config.threshold, config.areas))
            world_chan = LoopbackChannel(WorldService(World(scene)))

        param_store = ParamStore(navigator, vision_chan, config.threshold, config.areas)
        on_tick = _telemetry_cb(console, navigator, config.areas) if console else None
        records, reason = run_loop(
            world_chan,
            vision_chan,
            navigator,
            scene.cones,
            max_steps=config.max_steps,
            report_timeout=config.report_timeout,
            on_tick=on_tick,
            param_source=console.poll_params if console else None,
            param_store=param_store,
            freerun=config.freerun,
        )
    finally:
        for chan in (world_chan, vision_chan):
            if chan is not None:
                chan.close()
        for p in procs:
            p.join(timeout=5.0)
            if p.is_alive():
                p.terminate()
        if console is not None:
            console.close()

    log = TrajectoryLog(records, reason)
    summary = log.summary()
    summary["mode"] = config.mode
    summary["seed"] = config.seed
    summary["transport"] = "tcp" if config.net else "in-process"
    if out_dir is not None:
        log.write_csv(out_dir / "trajectory.csv")
        (out_dir / "summary.json").write_text(
            json.dumps(summary, indent=2, sort_keys=True) + "\n"
        )
    if config.fail_on_collision and summary["collisions"]:
        raise RuntimeError(f"collision detected ({summary['collisions']} ticks)")
    return log, summary


def _serve_world_from_file(host: str, port: int, scene_path: str, ready):
    serve_world(host, port, load_scene(scene_path), ready)
