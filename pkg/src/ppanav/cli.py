"""Command line entry points: run experiments, generate scenes, and host
the standalone vision/world servers."""

from __future__ import annotations

import argparse
import json
import sys

from .bridge import PARAM_KEYS, serve_vision, serve_world
from .detect import DEFAULT_THRESHOLD, AreaConfig
from .navigate import NavParams
from .runner import RUN_MODES, RunConfig, default_ports, run
from .scenes import GENERATORS, gen_scene, load_scene, save_scene

NAV_FIELDS = ("d_safe", "e_safe", "k_safe", "k_steer", "d_vel", "d_steer")


def _apply_params(pairs, params: NavParams, threshold: float, areas: AreaConfig):
    for pair in pairs or []:
        if "=" not in pair:
            raise SystemExit(f"--param expects k=v, got {pair!r}")
        key, raw = pair.split("=", 1)
        value = float(raw)
        if key in NAV_FIELDS:
            setattr(params, key, value)
        elif key == "threshold":
            threshold = value
        elif key == "distant_x_max":
            areas = areas.replace(distant_x_max=int(value))
        elif key == "forbidden_x_min":
            areas = areas.replace(forbidden_x_min=int(value))
        elif key == "safe_y_low":
            areas = areas.replace(safe_y_low=(areas.safe_y_low[0], int(value)))
        elif key == "safe_y_high":
            areas = areas.replace(safe_y_high=(int(value), areas.safe_y_high[1]))
        else:
            raise SystemExit(f"unknown param {key!r}; known: {NAV_FIELDS + PARAM_KEYS}")
    return params, threshold, areas


def _cmd_run(args):
    params, threshold, areas = _apply_params(
        args.param, NavParams(), DEFAULT_THRESHOLD, AreaConfig()
    )
    ports = default_ports()
    config = RunConfig(
        scene=args.scene,
        mode=args.mode,
        params=params,
        threshold=threshold,
        areas=areas,
        max_steps=args.steps,
        seed=args.seed,
        out_dir=args.out,
        net=args.net,
        ports=ports,
        console_port=args.console_port,
        assets_dir=args.assets,
        fail_on_collision=args.fail_on_collision,
        freerun=args.freerun,
    )
    _, summary = run(config)
    json.dump(summary, sys.stdout, indent=2, sort_keys=True)
    print()
    return 0


def _cmd_gen_scene(args):
    kw = {}
    if args.count is not None:
        kw["count"] = args.count
    scene = gen_scene(args.kind, seed=args.seed, **kw)
    save_scene(scene, args.out)
    print(f"wrote {args.out} ({len(scene.cones)} cones, {len(scene.targets)} targets)")
    return 0


def _cmd_serve_vision(args):
    print(f"vision server listening on {args.host}:{args.port}")
    serve_vision(args.host, args.port, args.threshold)
    return 0


def _cmd_serve_world(args):
    scene = load_scene(args.scene)
    print(f"world server listening on {args.host}:{args.port}")
    serve_world(args.host, args.port, scene)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ppanav")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a navigation experiment")
    p.add_argument("--scene", required=True, help="scene JSON file")
    p.add_argument("--mode", required=True, choices=RUN_MODES)
    p.add_argument("--net", action="store_true", help="vision/world as TCP processes")
    p.add_argument("--steps", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="runs/latest")
    p.add_argument("--param", action="append", metavar="K=V")
    p.add_argument("--console-port", type=int, default=None)
    p.add_argument("--assets", default=None, help="console static asset dir")
    p.add_argument("--fail-on-collision", action="store_true")
    p.add_argument("--freerun", action="store_true", help="pipelined reports instead of lock-step")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("gen-scene", help="write a deterministic scene file")
    p.add_argument("--kind", required=True, choices=sorted(GENERATORS))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--count", type=int, default=None, help="cone count (scatter only)")
    p.set_defaults(func=_cmd_gen_scene)

    p = sub.add_parser("serve-vision", help="host the vision server")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=default_ports()[0])
    p.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD)
    p.set_defaults(func=_cmd_serve_vision)

    p = sub.add_parser("serve-world", help="host the world server")
    p.add_argument("--scene", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=default_ports()[1])
    p.set_defaults(func=_cmd_serve_world)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
