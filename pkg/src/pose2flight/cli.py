"""Command-line entry point.

Subcommands:
  run            full pipeline + simulator on a replayed stream (wall clock)
  replay         replay a skeleton stream (virtual or paced) with recording
  record         alias for replay focused on recording topics
  train-distance train the distance classifier on synthetic data
  eval-distance  evaluate a trained model on a fresh synthetic split
  eval-gesture   per-gesture accuracy on the jittered synthetic corpus
  gen-data       write a synthetic distance dataset to disk
  sim            standalone UDP drone simulator
  serve          operator-console bridge + static assets + live pipeline
"""

from __future__ import annotations

import argparse
import functools
import http.server
import os
import threading
import time

from .config import load_config
from .control import ControlEvent, ControlMode
from .distance import (
    DistanceModel,
    generate_synthetic_dataset,
    load_dataset,
    load_model,
    save_dataset,
    save_model,
    train,
)
from .evaluate import evaluate_distance, evaluate_gesture_corpus
from .pipeline import Pipeline, Recorder, read_stream
from .sim import DroneSim
from .udp import UdpDroneServer


def _add_config_arg(p):
    p.add_argument("--config", default=None, help="config file (or POSE2FLIGHT_CONFIG)")


def _load_model_or_default(cfg, seed: int = 0):
    if cfg.distance_model_path and os.path.exists(cfg.distance_model_path):
        return load_model(cfg.distance_model_path)
    model = DistanceModel()
    model.init_weights(seed)
    return model


def _initial_mode(pipe, mode_name: str):
    mode = {m.value: m for m in ControlMode}[mode_name]
    pipe.control.handle_event(ControlEvent("mode", mode=mode), 0)
    pipe.bus.pump()


def cmd_replay(args):
    cfg = load_config(args.config)
    model = _load_model_or_default(cfg)
    pipe = Pipeline(cfg=cfg, model=model)
    recorder = None
    if args.out:
        recorder = Recorder(args.out, args.topics)
        recorder.attach(pipe.bus)
    groups = read_stream(args.input)
    _initial_mode(pipe, args.mode)
    actions = [(0, "takeoff")] if args.takeoff else []
    t0 = time.monotonic()
    if args.wall:
        if args.takeoff:
            pipe.control.command("takeoff", 0)
            pipe.bus.pump()
        _paced_replay(pipe, groups, args.fps)
    else:
        pipe.run_virtual(groups, extra_ms=args.extra_ms, actions=actions)
    elapsed = time.monotonic() - t0
    n = sum(len(g[1]) for g in groups)
    print(f"replayed {n} frames in {elapsed:.2f}s ({n / max(elapsed, 1e-9):.1f} fps)")
    if recorder:
        recorder.close()
        print(f"recorded {', '.join(args.topics)} to {args.out}")


def _paced_replay(pipe: Pipeline, groups, fps: float):
    interval = 1.0 / fps
    start = time.monotonic()
    for i, (ts, group) in enumerate(groups):
        target = start + i * interval
        now = time.monotonic()
        if now < target:
            time.sleep(target - now)
        t_ms = int((time.monotonic() - start) * 1000)
        pipe.gateway.advance_to(float(t_ms), t_ms)
        pipe.ingest.feed(group, t_ms)
        pipe.control.tick(t_ms)
        pipe.bus.pump()


def cmd_run(args):
    cfg = load_config(args.config)
    model = _load_model_or_default(cfg)
    pipe = Pipeline(cfg=cfg, model=model)
    if args.input:
        groups = read_stream(args.input)
        _initial_mode(pipe, args.mode)
        if args.takeoff:
            pipe.control.command("takeoff", 0)
            pipe.bus.pump()
        _paced_replay(pipe, groups, args.fps or cfg.source_fps)
        s = pipe.gateway.sim.state
        print(f"final drone state: x={s.x:.1f} y={s.y:.1f} z={s.z:.1f} yaw={s.yaw:.1f}")
    else:
        print("run: no --input given; use `serve` for the live console")


def cmd_record(args):
    args.wall = False
    args.extra_ms = args.extra_ms or 0
    cmd_replay(args)


def cmd_gen_data(args):
    x, y = generate_synthetic_dataset(args.n_per_class, args.noise, args.seed)
    save_dataset(args.out, x, y)
    print(f"wrote {x.shape[0]} samples ({args.n_per_class}/class, noise {args.noise}) to {args.out}")


def cmd_train_distance(args):
    if args.data:
        x, y = load_dataset(args.data)
    else:
        x, y = generate_synthetic_dataset(args.n_per_class, args.noise, args.seed)
    model = train(x, y, epochs=args.epochs, seed=args.seed, verbose=True)
    save_model(model, args.out)
    acc, mae = evaluate_distance(model, x, y)
    print(f"train accuracy {acc:.3f}, MAE {mae:.1f} cm; model saved to {args.out}")


def cmd_eval_distance(args):
    model = load_model(args.model)
    if args.data:
        x, y = load_dataset(args.data)
    else:
        x, y = generate_synthetic_dataset(args.n_per_class, args.noise, args.seed)
    acc, mae = evaluate_distance(model, x, y)
    print(f"held-out accuracy {acc:.3f}, continuous MAE {mae:.2f} cm over {x.shape[0]} samples")


def cmd_eval_gesture(args):
    accuracies = evaluate_gesture_corpus(args.n_per_gesture, args.seed)
    for gesture, acc in accuracies.items():
        print(f"{gesture.value:<10} {acc * 100:6.1f}%")
    avg = sum(accuracies.values()) / len(accuracies)
    print(f"{'Average':<10} {avg * 100:6.1f}%")


def cmd_sim(args):
    cfg = load_config(args.config)
    server = UdpDroneServer(DroneSim(), port=args.port or cfg.sim_port, telemetry_port=cfg.sim_telemetry_port)
    server.start()
    print(f"drone simulator listening on udp://127.0.0.1:{server.port}")
    try:
        while True:
            time.sleep(1.0)
    except KeyboardInterrupt:
        server.stop()


def cmd_serve(args):
    from .bridge import BridgeServer, LiveRunner

    cfg = load_config(args.config)
    model = _load_model_or_default(cfg)
    pipe = Pipeline(cfg=cfg, model=model)
    runner = LiveRunner(pipe)
    runner.start()
    bridge = BridgeServer(runner, port=args.port if args.port is not None else cfg.bridge_port)
    bridge.start()
    print(f"bridge listening on ws://127.0.0.1:{bridge.port}", flush=True)

    static_dir = args.static
    if static_dir and os.path.isdir(static_dir):
        handler = functools.partial(http.server.SimpleHTTPRequestHandler, directory=static_dir)
        httpd = http.server.ThreadingHTTPServer(("127.0.0.1", args.http_port), handler)
        threading.Thread(target=httpd.serve_forever, daemon=True).start()
        print(f"console assets on http://127.0.0.1:{httpd.server_address[1]}", flush=True)
    try:
        while True:
            time.sleep(1.0)
    except KeyboardInterrupt:
        bridge.stop()
        runner.stop()


def main(argv=None):
    parser = argparse.ArgumentParser(prog="pose2flight")
    sub = parser.add_subparsers(dest="command", required=True)

    mode_choices = [m.value for m in ControlMode if m is not ControlMode.EMERGENCY]

    p = sub.add_parser("run", help="full pipeline + simulator")
    _add_config_arg(p)
    p.add_argument("--input", default=None, help="skeleton stream to replay")
    p.add_argument("--fps", type=float, default=None)
    p.add_argument("--mode", choices=mode_choices, default="gesture_control")
    p.add_argument("--takeoff", action="store_true", help="take off before the stream starts")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("replay", help="replay a skeleton stream")
    _add_config_arg(p)
    p.add_argument("--input", required=True)
    p.add_argument("--fps", type=float, default=30.0)
    p.add_argument("--wall", action="store_true", help="pace to wall clock (default: virtual)")
    p.add_argument("--out", default=None, help="record topics to this file")
    p.add_argument("--topics", nargs="+", default=["/gesture", "/cmd"])
    p.add_argument("--extra-ms", type=int, default=0, help="extra settle time after the last frame")
    p.add_argument("--mode", choices=mode_choices, default="gesture_control")
    p.add_argument("--takeoff", action="store_true")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("record", help="replay while recording topics")
    _add_config_arg(p)
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--topics", nargs="+", default=["/gesture", "/cmd"])
    p.add_argument("--fps", type=float, default=30.0)
    p.add_argument("--extra-ms", type=int, default=0)
    p.add_argument("--mode", choices=mode_choices, default="gesture_control")
    p.add_argument("--takeoff", action="store_true")
    p.set_defaults(func=cmd_record)

    p = sub.add_parser("gen-data", help="write a synthetic distance dataset")
    p.add_argument("--out", required=True)
    p.add_argument("--n-per-class", type=int, default=960)
    p.add_argument("--noise", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_gen_data)

    p = sub.add_parser("train-distance", help="train the distance classifier")
    p.add_argument("--data", default=None, help="npz dataset (default: generate)")
    p.add_argument("--out", required=True)
    p.add_argument("--epochs", type=int, default=15)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--noise", type=float, default=0.05)
    p.add_argument("--n-per-class", type=int, default=960)
    p.set_defaults(func=cmd_train_distance)

    p = sub.add_parser("eval-distance", help="evaluate a trained model")
    p.add_argument("--model", required=True)
    p.add_argument("--data", default=None)
    p.add_argument("--noise", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--n-per-class", type=int, default=200)
    p.set_defaults(func=cmd_eval_distance)

    p = sub.add_parser("eval-gesture", help="gesture corpus accuracy")
    p.add_argument("--n-per-gesture", type=int, default=600)
    p.add_argument("--seed", type=int, default=7)
    p.set_defaults(func=cmd_eval_gesture)

    p = sub.add_parser("sim", help="standalone UDP drone simulator")
    _add_config_arg(p)
    p.add_argument("--port", type=int, default=None)
    p.set_defaults(func=cmd_sim)

    p = sub.add_parser("serve", help="operator console bridge")
    _add_config_arg(p)
    p.add_argument("--port", type=int, default=None, help="bridge websocket port")
    p.add_argument("--http-port", type=int, default=8080)
    p.add_argument("--static", default=None, help="frontend asset directory")
    p.set_defaults(func=cmd_serve)

    args = parser.parse_args(argv)
    args.func(args)


if __name__ == "__main__":
    main()
