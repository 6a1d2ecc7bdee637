"""Command-line entry points: run the simulated robot, process an image
through the vision pipeline, run the learning-control benchmark, or render a
synthetic camera frame."""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time

import numpy as np

from . import actuation, model
from .config import ParamTree
from .defaults import declare_all
from .ppm import read_ppm, write_ppm
from .vision.classify import pack_yuyv, rgb_to_yuv
from .vision.lut import ColorLut, reference_lut
from .vision.pipeline import CameraPose, VisionPipeline


def _load_scenario(path):
    with open(path, "r", encoding="utf-8") as fh:
        events = json.load(fh)
    if not isinstance(events, list):
        raise SystemExit("scenario file must be a JSON list of {at_s, event}")
    return events


def cmd_run(args) -> int:
    from .http_view import ImageServer
    from .runtime.loop import Simulation
    from .server import ConfigService

    tree = declare_all(ParamTree())
    if args.config:
        tree.load(args.config)
    lut = ColorLut.load(args.lut) if args.lut else None
    scenario = _load_scenario(args.scenario) if args.scenario else None
    sim = Simulation(tree=tree, seed=args.seed, telemetry_path=args.record,
                     packet_log_path=args.packet_log, realtime=args.realtime,
                     scenario=scenario, lut=lut)

    services = []
    if not args.headless:
        config_service = ConfigService(tree, host=args.host,
                                       telemetry_hub=sim.telemetry,
                                       lut_get=sim.get_lut_bytes,
                                       lut_set=sim.set_lut_bytes,
                                       motion_get=sim.get_motion_text,
                                       motion_set=sim.register_motion,
                                       motion_list=sim.motion_names)
        image_server = ImageServer(sim.latest_images, host=args.host,
                                   static_dir=args.static_dir)
        services = [config_service, image_server]
        print(f"config/telemetry on tcp://{args.host}:{config_service.port}, "
              f"images on http://{args.host}:{image_server.port}")

    try:
        if args.seconds is not None:
            sim.run(args.seconds)
        else:
            while True:
                sim.run(1.0)
    except KeyboardInterrupt:
        pass
    finally:
        for service in services:
            service.close()
        sim.close()

    print(f"ran {sim.cycle} cycles ({sim.clock_us / 1e6:.3f} s simulated), "
          f"behavior={sim.fsm.state.value}, warnings={sim.master.warnings}")
    if sim.jitter_stats:
        js = sim.jitter_stats
        print(f"realtime period: mean {js['mean_ms']:.3f} ms, "
              f"p99 {js['p99_ms']:.3f} ms, max {js['max_ms']:.3f} ms")
    return 0


def cmd_vision(args) -> int:
    rgb = read_ppm(args.image)
    height, width, _ = rgb.shape
    yuv = rgb_to_yuv(rgb)
    frame = pack_yuyv(yuv[:, :, 0], yuv[:, :, 1], yuv[:, :, 2])
    lut = ColorLut.load(args.lut) if args.lut else reference_lut()
    pipe = VisionPipeline(lut, width=width, height=height)
    pose = CameraPose(yaw=args.neck_yaw, pitch=args.camera_tilt + args.neck_pitch)
    detections = pipe.process(frame, pose)
    payload = json.dumps(detections.to_dict(), sort_keys=True, indent=2) + "\n"
    if args.out == "-":
        sys.stdout.write(payload)
    else:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(payload)
    return 0


def cmd_ilc(args) -> int:
    started = time.perf_counter()
    rms, ffm = actuation.run_ilc_benchmark(
        joint=args.joint, iterations=args.iterations, gamma=args.gamma,
        lead=args.lead, smooth_width=args.smooth_width)
    elapsed = time.perf_counter() - started
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iteration", "rms_rad"])
        for i, value in enumerate(rms):
            writer.writerow([i, f"{value:.9f}"])
    print(f"{args.joint}: rms {rms[0]:.5f} -> {rms[-1]:.5f} rad over "
          f"{args.iterations} iterations ({elapsed:.2f} s); wrote {args.out}")
    return 0


def cmd_render(args) -> int:
    from .runtime.render import CameraRenderer, CameraView
    from .runtime.world import WorldState

    try:
        x, y, heading = (float(v) for v in args.pose.split(","))
    except ValueError:
        raise SystemExit("--pose expects x,y,theta")
    world = WorldState()
    world.teleport(x, y, heading)
    if args.ball:
        bx, by = (float(v) for v in args.ball.split(","))
        world.set_ball(bx, by)
    renderer = CameraRenderer()
    view = renderer.view_for(world, args.neck_yaw, args.neck_pitch,
                             args.camera_height, args.camera_tilt)
    write_ppm(args.out, renderer.render_rgb(world, view))
    print(f"wrote {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="soccerbot",
        description="Deterministic simulated humanoid soccer robot stack")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the closed-loop simulation")
    run.add_argument("--config", help="JSON config file to load")
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--seconds", type=float, default=None,
                     help="simulated seconds (default: run until Ctrl+C)")
    run.add_argument("--headless", action="store_true",
                     help="no config/telemetry/HTTP services")
    run.add_argument("--realtime", action="store_true",
                     help="pace the loop with the wall clock")
    run.add_argument("--record", help="telemetry JSONL output path")
    run.add_argument("--scenario", help="JSON scenario file: [{at_s, event}]")
    run.add_argument("--packet-log", help="binary bus packet log path")
    run.add_argument("--lut", help="color LUT file (default: reference palette)")
    run.add_argument("--host", default="127.0.0.1")
    run.add_argument("--static-dir", help="serve this directory at / (dashboard)")
    run.set_defaults(func=cmd_run)

    vis = sub.add_parser("vision", help="run the pipeline on one PPM image")
    vis.add_argument("--image", required=True, help="binary PPM (P6) input")
    vis.add_argument("--lut", help="color LUT file (default: reference palette)")
    vis.add_argument("--out", required=True, help="detections JSON path, - for stdout")
    vis.add_argument("--neck-yaw", type=float, default=0.0)
    vis.add_argument("--neck-pitch", type=float, default=0.0)
    vis.add_argument("--camera-tilt", type=float, default=0.35)
    vis.set_defaults(func=cmd_vision)

    ilc = sub.add_parser("ilc", help="iterative-learning benchmark -> CSV")
    ilc.add_argument("--joint", default="left_knee_pitch",
                     choices=list(model.JOINT_NAMES))
    ilc.add_argument("--iterations", type=int, default=10)
    ilc.add_argument("--gamma", type=float, default=0.5)
    ilc.add_argument("--lead", type=int, default=2)
    ilc.add_argument("--smooth-width", type=int, default=5)
    ilc.add_argument("--out", required=True, help="CSV output path")
    ilc.set_defaults(func=cmd_ilc)

    render = sub.add_parser("render", help="render one synthetic camera frame")
    render.add_argument("--pose", required=True, help="x,y,theta of the robot")
    render.add_argument("--ball", help="x,y of the ball")
    render.add_argument("--out", required=True, help="PPM output path")
    render.add_argument("--neck-yaw", type=float, default=0.0)
    render.add_argument("--neck-pitch", type=float, default=0.0)
    render.add_argument("--camera-height", type=float, default=0.85)
    render.add_argument("--camera-tilt", type=float, default=0.35)
    render.set_defaults(func=cmd_render)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
