"""Reconstruction of per-pixel intensity trajectories from event-camera data.

Each pixel's trajectory is the unique minimizer of a small Tikhonov-
regularized least-squares problem over its windowed event counts; a forward
event-camera simulator provides ground truth for round-trip validation.
"""

from .cube import CubeConfig, DataCube, build_cube, cube_stats, dump_cube_text
from .events import (Event, EventStream, SensorGeometry, StreamError,
                     ValidationReport, parse_event_text, validate_stream,
                     write_event_text)
from .pipeline import (ReconstructionConfig, RunReport, SceneSpec, StageError,
                       run_reconstruct, run_simulate)
from .regularize import LambdaConfig, LambdaField, compute_lambda, lambda_scalar
from .render import (DEFAULT_COLORMAP, ColorMap, apply_colormap, colormap_frame,
                     normalize, write_pgm, write_ppm)
from .simulate import (LuminanceSignal, SimulatorConfig, oracle_log_difference,
                       simulate_pixel, simulate_scene)
from .solve import (FrameStack, PixelProblem, TridiagonalSystem, assemble_system,
                    rhs_from_accum, solve_all, solve_pixel, solve_tridiagonal)

__version__ = "0.1.0"

__all__ = [
    "CubeConfig", "DataCube", "build_cube", "cube_stats", "dump_cube_text",
    "Event", "EventStream", "SensorGeometry", "StreamError", "ValidationReport",
    "parse_event_text", "validate_stream", "write_event_text",
    "ReconstructionConfig", "RunReport", "SceneSpec", "StageError",
    "run_reconstruct", "run_simulate",
    "LambdaConfig", "LambdaField", "compute_lambda", "lambda_scalar",
    "DEFAULT_COLORMAP", "ColorMap", "apply_colormap", "colormap_frame",
    "normalize", "write_pgm", "write_ppm",
    "LuminanceSignal", "SimulatorConfig", "oracle_log_difference",
    "simulate_pixel", "simulate_scene",
    "FrameStack", "PixelProblem", "TridiagonalSystem", "assemble_system",
    "rhs_from_accum", "solve_all", "solve_pixel", "solve_tridiagonal",
]
