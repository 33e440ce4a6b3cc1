"""`mbot-stack` command line: bring up the stack, inspect config, convert maps."""

from __future__ import annotations

import argparse
import signal
import sys
from pathlib import Path

from . import config as config_mod
from .bridge import BridgeServer
from .bus import MessageBus
from .config import ConfigError, StackConfig
from .stack import SimStack
from .types import load_map_file, save_map_file


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mbot-stack",
        description="Desk-scale robot stack: simulator, SLAM, navigation, bridge")
    sub = parser.add_subparsers(dest="command", required=True)

    up = sub.add_parser("up", help="start the stack")
    up.add_argument("--config", help="YAML config file")
    up.add_argument("--sim", action="store_true", default=True,
                    help="run against the simulator (default; hardware "
                         "backends are out of scope)")
    up.add_argument("--world", help="ground-truth world map file")
    up.add_argument("--load-map", help="prior SLAM map (localization mode)")
    up.add_argument("--save-map", help="write the SLAM map here on shutdown")
    up.add_argument("--mode", choices=["IDLE", "LOCALIZATION_ONLY", "FULL_SLAM"],
                    help="initial SLAM mode")
    up.add_argument("--port", type=int, help="bridge websocket port")
    up.add_argument("--webroot", help="static files directory for the web app")
    up.add_argument("--seed", type=int, help="simulation seed")
    up.add_argument("--no-realtime", action="store_true",
                    help="run the sim clock as fast as possible")
    up.add_argument("--duration", type=float,
                    help="stop after this many sim seconds")

    cfg = sub.add_parser("config", help="config helpers")
    cfg.add_argument("--defaults", action="store_true",
                     help="print the full default config")
    cfg.add_argument("--check", metavar="FILE", help="validate a config file")

    conv = sub.add_parser("map", help="map file tools")
    conv_sub = conv.add_subparsers(dest="map_command", required=True)
    c = conv_sub.add_parser("convert", help="convert between map formats")
    c.add_argument("input")
    c.add_argument("output")

    replay = sub.add_parser(
        "replay", help="replay a recorded session (not implemented; log "
                       "recording is out of scope for this release)")
    replay.add_argument("logfile", nargs="?")
    return parser


def _load_config(args) -> StackConfig:
    if args.config:
        cfg = config_mod.load_file(args.config)
    else:
        cfg = StackConfig()
    cfg = config_mod.apply_env_overrides(cfg)
    import dataclasses
    if args.world:
        cfg = dataclasses.replace(cfg, world_map=args.world)
    if args.load_map:
        cfg = dataclasses.replace(cfg, load_map=args.load_map)
    if args.save_map:
        cfg = dataclasses.replace(cfg, save_map=args.save_map)
    if args.mode:
        cfg = dataclasses.replace(cfg, slam_mode=args.mode)
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, seed=args.seed)
    if args.port is not None:
        cfg = dataclasses.replace(
            cfg, bridge=dataclasses.replace(cfg.bridge, port=args.port))
    if args.webroot:
        cfg = dataclasses.replace(
            cfg, bridge=dataclasses.replace(cfg.bridge, webroot=args.webroot))
    if args.no_realtime:
        cfg = dataclasses.replace(
            cfg, sim=dataclasses.replace(cfg.sim, realtime=False))
    return cfg


def cmd_up(args) -> int:
    try:
        cfg = _load_config(args)
        cfg.validate()
    except (ConfigError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    # fail fast on bad inputs before starting anything
    for label, path in (("world map", cfg.world_map),
                        ("prior map", cfg.load_map)):
        if path and not Path(path).is_file():
            print(f"error: {label} file not found: {path}", file=sys.stderr)
            return 1

    bus = MessageBus()
    try:
        stack = SimStack(cfg, bus)
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1

    bridge = None
    if cfg.bridge.enabled:
        bridge = BridgeServer(bus, cfg.bridge.host, cfg.bridge.port,
                              webroot=cfg.bridge.webroot or None)
        try:
            bridge.start()
        except OSError as e:
            print(f"error: cannot listen on port {cfg.bridge.port}: {e}",
                  file=sys.stderr)
            return 1
        print(f"bridge listening on ws://{cfg.bridge.host}:{cfg.bridge.port}/ws")

    stop_requested = []

    def on_interrupt(signum, frame):
        stop_requested.append(True)
        stack.stop()

    signal.signal(signal.SIGINT, on_interrupt)
    signal.signal(signal.SIGTERM, on_interrupt)
    print(f"stack running (mode={cfg.slam_mode}, seed={cfg.seed}, "
          f"realtime={cfg.sim.realtime})")
    try:
        stack.run(duration=args.duration)
    finally:
        if bridge:
            bridge.stop()
        if cfg.save_map:
            save_map_file(stack.slam.grid, cfg.save_map)
            print(f"saved SLAM map to {cfg.save_map}")
    return 0


def cmd_config(args) -> int:
    if args.defaults:
        print(config_mod.defaults_yaml(), end="")
        return 0
    if args.check:
        try:
            cfg = config_mod.load_file(args.check)
            cfg.validate()
        except (ConfigError, OSError, ValueError) as e:
            print(f"error: {e}", file=sys.stderr)
            return 1
        print("config OK")
        return 0
    print("nothing to do; see --help", file=sys.stderr)
    return 2


def cmd_map_convert(args) -> int:
    """Convert between the ASCII map format and PGM grayscale images."""
    inp, out = Path(args.input), Path(args.output)
    try:
        if inp.suffix == ".pgm":
            grid = _load_pgm(inp)
        else:
            grid = load_map_file(inp)
        if out.suffix == ".pgm":
            _save_pgm(grid, out)
        else:
            save_map_file(grid, out)
    except (OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    return 0


def _save_pgm(grid, path) -> None:
    # log-odds -128 (free) -> 255 white, +127 (occupied) -> 0 black
    with open(path, "wb") as f:
        f.write(f"P5\n{grid.width} {grid.height}\n255\n".encode())
        f.write(bytes(127 - int(v) for v in grid.cells.reshape(-1)))


def _load_pgm(path):
    import numpy as np
    from .types import OccupancyGrid
    data = Path(path).read_bytes()
    parts = data.split(b"\n", 3)
    if parts[0].strip() != b"P5":
        raise ValueError("only binary PGM (P5) supported")
    width, height = map(int, parts[1].split())
    cells = np.frombuffer(parts[3][:width * height], dtype=np.uint8)
    cells = (127 - cells.astype(np.int16)).clip(-128, 127).astype(np.int8)
    return OccupancyGrid(0.0, 0.0, 0.05, width, height,
                         cells.reshape(height, width))


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "up":
        return cmd_up(args)
    if args.command == "config":
        return cmd_config(args)
    if args.command == "map":
        return cmd_map_convert(args)
    if args.command == "replay":
        print("replay is a documented stub: session recording/replay is "
              "out of scope for this release", file=sys.stderr)
        return 2
    return 2


if __name__ == "__main__":
    sys.exit(main())
