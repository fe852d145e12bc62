"""Command-line front end: reconstruct, simulate, and info subcommands."""
from __future__ import annotations

import argparse
import sys
from typing import List, Optional

from .cube import CubeConfig
from .events import SensorGeometry, StreamError, parse_event_text, validate_stream
from .pipeline import (ReconstructionConfig, SceneSpec, StageError,
                       run_reconstruct, run_simulate)
from .regularize import LambdaConfig
from .simulate import SimulatorConfig

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_IO = 3

_LAMBDA_MODES = {"sigmoid": "sigmoid", "maxabs": "max_abs", "exp": "exponential"}
_NORM_MODES = {"global": "global", "perframe": "per_frame"}
_COLOR_MODES = {"gray": "gray", "map": "colormap"}
_POLARITY = {"signed": "signed", "zero01": "zero_one"}


class _Parser(argparse.ArgumentParser):
    # usage problems exit 1, not argparse's default 2
    def error(self, message: str):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _build_parser() -> _Parser:
    parser = _Parser(prog="evframes",
                     description="Frame reconstruction from event-camera streams")
    sub = parser.add_subparsers(dest="command", required=True)

    rec = sub.add_parser("reconstruct", help="reconstruct frames from an event file")
    rec.add_argument("--input", required=True, help="event text file (t x y p)")
    rec.add_argument("--width", type=int, required=True)
    rec.add_argument("--height", type=int, required=True)
    rec.add_argument("--k", type=int, required=True, help="events per window")
    rec.add_argument("--nu", type=int, default=None,
                     help="total events to use (default: all)")
    rec.add_argument("--lambda", dest="lambda_mode", choices=sorted(_LAMBDA_MODES),
                     default="sigmoid")
    rec.add_argument("--epsilon", type=float, default=0.5,
                     help="floor for the maxabs weight mode")
    rec.add_argument("--norm", choices=sorted(_NORM_MODES), default="global")
    rec.add_argument("--color", choices=sorted(_COLOR_MODES), default="gray")
    rec.add_argument("--polarity", choices=sorted(_POLARITY), default="zero01")
    rec.add_argument("--sort", action="store_true",
                     help="stable-sort events by timestamp instead of rejecting")
    rec.add_argument("--lanes", type=int, default=1, help="worker threads")
    rec.add_argument("--out", required=True, help="output directory")

    sim = sub.add_parser("simulate", help="generate events from an analytic scene")
    sim.add_argument("--scene", choices=["constant", "ramp", "sine"], required=True)
    sim.add_argument("--width", type=int, required=True)
    sim.add_argument("--height", type=int, required=True)
    sim.add_argument("--threshold", type=float, required=True,
                     help="contrast threshold")
    sim.add_argument("--samples", type=int, required=True,
                     help="number of sample times")
    sim.add_argument("--duration", type=float, default=1.0)
    sim.add_argument("--level", type=float, default=1.0, help="constant scene luminance")
    sim.add_argument("--rate", type=float, default=1.0, help="ramp log-rate per second")
    sim.add_argument("--amplitude", type=float, default=1.0, help="sine log-amplitude")
    sim.add_argument("--period", type=float, default=1.0, help="sine period (s)")
    sim.add_argument("--spatial-phase", type=float, default=0.5,
                     help="sine phase offset per pixel (rad)")
    sim.add_argument("--out", required=True, help="output directory")

    info = sub.add_parser("info", help="validate an event file and print statistics")
    info.add_argument("--input", required=True)
    info.add_argument("--width", type=int, required=True)
    info.add_argument("--height", type=int, required=True)
    info.add_argument("--polarity", choices=sorted(_POLARITY), default="zero01")
    info.add_argument("--sort", action="store_true")
    return parser


def _load_stream(path: str, width: int, height: int, polarity: str, sort: bool):
    geometry = SensorGeometry(width=width, height=height)
    with open(path, "rb") as fh:
        return parse_event_text(fh, geometry, _POLARITY[polarity], sort=sort)


def _cmd_reconstruct(args: argparse.Namespace) -> int:
    stream = _load_stream(args.input, args.width, args.height, args.polarity, args.sort)
    nu = args.nu if args.nu is not None else len(stream)
    config = ReconstructionConfig(
        cube=CubeConfig(k=args.k, nu=nu),
        lam=LambdaConfig(mode=_LAMBDA_MODES[args.lambda_mode], epsilon=args.epsilon),
        normalization=_NORM_MODES[args.norm],
        color=_COLOR_MODES[args.color],
        out_dir=args.out,
        lanes=args.lanes,
    )
    report = run_reconstruct(stream, config)
    report.write(sys.stdout)
    return EXIT_OK


def _cmd_simulate(args: argparse.Namespace) -> int:
    spec = SceneSpec(kind=args.scene, n_samples=args.samples, duration=args.duration,
                     level=args.level, rate=args.rate, amplitude=args.amplitude,
                     period=args.period, spatial_phase=args.spatial_phase)
    config = SimulatorConfig(threshold=args.threshold,
                             geometry=SensorGeometry(width=args.width, height=args.height))
    stream, events_path, truth_path = run_simulate(spec, config, args.out)
    print(f"events: {len(stream)}")
    print(f"events_file: {events_path}")
    print(f"ground_truth_file: {truth_path}")
    return EXIT_OK


def _cmd_info(args: argparse.Namespace) -> int:
    stream = _load_stream(args.input, args.width, args.height, args.polarity, args.sort)
    report = validate_stream(stream)
    print(f"count: {report.count}")
    print(f"time_span: [{report.time_span[0]:.6f}, {report.time_span[1]:.6f}]")
    print(f"max_events_per_pixel: {report.max_events_per_pixel}")
    print(f"violations: {len(report.violations)}")
    for v in report.violations:
        print(f"  {v}")
    return EXIT_OK if report.ok else EXIT_DATA


def main(argv: Optional[List[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    handlers = {"reconstruct": _cmd_reconstruct,
                "simulate": _cmd_simulate,
                "info": _cmd_info}
    try:
        return handlers[args.command](args)
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO if isinstance(exc.cause, OSError) else EXIT_DATA
    except (StreamError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
