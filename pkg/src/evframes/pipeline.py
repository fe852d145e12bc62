"""End-to-end orchestration: events -> cube -> weights -> solve -> images."""
from __future__ import annotations

import concurrent.futures
import os
import time
from dataclasses import dataclass, field
from typing import Dict, IO, List, Tuple

import numpy as np

from .cube import CubeConfig, build_cube, cube_stats
from .events import EventStream, write_event_text
from .regularize import LambdaConfig, compute_lambda
from .render import (DEFAULT_COLORMAP, _rescale, colormap_frame, normalize,
                     write_pgm, write_ppm)
from .simulate import (LuminanceSignal, SimulatorConfig, constant_scene,
                       ramp_scene, simulate_scene, sine_scene)
from .solve import FrameStack, FrameStackStore, solve_all, solve_all_streamed

# Above this estimated in-memory stack size the solve spills to a scratch file.
DEFAULT_MEMORY_BUDGET = 1 << 29


@dataclass(frozen=True)
class ReconstructionConfig:
    """All knobs of one reconstruction run."""

    cube: CubeConfig
    lam: LambdaConfig = LambdaConfig()
    normalization: str = "global"
    color: str = "gray"
    out_dir: str = "."
    lanes: int = 1
    memory_budget: int = DEFAULT_MEMORY_BUDGET

    def __post_init__(self):
        if self.normalization not in ("global", "per_frame"):
            raise ValueError(f"bad normalization mode {self.normalization!r}")
        if self.color not in ("gray", "colormap"):
            raise ValueError(f"bad color mode {self.color!r}")
        if self.lanes < 1:
            raise ValueError("lanes must be >= 1")


@dataclass
class RunReport:
    """Counters and timings of one reconstruction run."""

    events_read: int = 0
    events_used: int = 0
    events_discarded: int = 0
    r: int = 0
    n_frames: int = 0
    stage_seconds: Dict[str, float] = field(default_factory=dict)
    cube_min: int = 0
    cube_max: int = 0
    cube_total: int = 0
    cube_zero_fraction: float = 0.0
    stack_min: float = 0.0
    stack_max: float = 0.0
    output_files: int = 0

    def lines(self) -> List[str]:
        out = [
            f"events_read: {self.events_read}",
            f"events_used: {self.events_used}",
            f"events_discarded: {self.events_discarded}",
            f"r: {self.r}",
            f"n_frames: {self.n_frames}",
            f"cube_min: {self.cube_min}",
            f"cube_max: {self.cube_max}",
            f"cube_total: {self.cube_total}",
            f"cube_zero_fraction: {self.cube_zero_fraction:.6f}",
            f"stack_min: {self.stack_min:.9g}",
            f"stack_max: {self.stack_max:.9g}",
            f"output_files: {self.output_files}",
        ]
        out += [f"seconds_{name}: {secs:.3f}" for name, secs in self.stage_seconds.items()]
        return out

    def write(self, sink: IO) -> None:
        for line in self.lines():
            sink.write(line + "\n")


class StageError(RuntimeError):
    """A pipeline stage failed; partial outputs have been removed."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause


def _encode_gray(frame: np.ndarray) -> bytes:
    return write_pgm(frame)


def _encode_color(frame: np.ndarray) -> bytes:
    return write_ppm(colormap_frame(frame, DEFAULT_COLORMAP))


def _write_frames_memory(stack: FrameStack, config: ReconstructionConfig,
                         written: List[str]) -> None:
    ext = "pgm" if config.color == "gray" else "ppm"
    encode = _encode_gray if config.color == "gray" else _encode_color
    for i, frame in stack.iter_frames():
        path = os.path.join(config.out_dir, f"frame_{i:06d}.{ext}")
        with open(path, "wb") as fh:
            fh.write(encode(frame))
        written.append(path)


def _write_frames_store(store: FrameStackStore, config: ReconstructionConfig,
                        written: List[str]) -> None:
    ext = "pgm" if config.color == "gray" else "ppm"
    encode = _encode_gray if config.color == "gray" else _encode_color
    per_frame = config.normalization == "per_frame"

    def write_range(bounds: Tuple[int, int]) -> None:
        for i in range(*bounds):
            frame = store.frame(i).astype(np.float64)
            if per_frame:
                norm = _rescale(frame, float(frame.min()), float(frame.max()))
            else:
                norm = _rescale(frame, store.vmin, store.vmax)
            path = os.path.join(config.out_dir, f"frame_{i:06d}.{ext}")
            with open(path, "wb") as fh:
                fh.write(encode(norm))
            written.append(path)  # list.append is atomic across lanes

    if config.lanes <= 1:
        write_range((0, store.n_frames))
    else:
        step = -(-store.n_frames // config.lanes)
        bounds = [(a, min(a + step, store.n_frames))
                  for a in range(0, store.n_frames, step)]
        store._open()  # share read-only maps across lanes
        with concurrent.futures.ThreadPoolExecutor(max_workers=config.lanes) as pool:
            list(pool.map(write_range, bounds))


def run_reconstruct(stream: EventStream, config: ReconstructionConfig) -> RunReport:
    """Run the full pipeline and write n_frames image files plus report.txt.

    Stages: build_cube -> compute_lambda -> solve_all -> normalize -> encode.
    Any stage failure removes the partial outputs and raises StageError.
    """
    report = RunReport(events_read=len(stream))
    os.makedirs(config.out_dir, exist_ok=True)
    written: List[str] = []
    scratch = os.path.join(config.out_dir, ".stack.f32")
    stage = "build_cube"
    try:
        t0 = time.perf_counter()
        cube = build_cube(stream, config.cube)
        report.stage_seconds["build_cube"] = time.perf_counter() - t0
        report.r = cube.r
        report.n_frames = cube.r + 1
        report.events_used = cube.r * cube.k
        report.events_discarded = min(config.cube.nu, len(stream)) - report.events_used

        stats = cube_stats(cube)
        report.cube_total = stats.grand_total
        report.cube_min = min(s.minimum for s in stats.per_slice)
        report.cube_max = max(s.maximum for s in stats.per_slice)
        report.cube_zero_fraction = stats.zero_fraction

        stage = "compute_lambda"
        t0 = time.perf_counter()
        lam = compute_lambda(cube, config.lam)
        report.stage_seconds["compute_lambda"] = time.perf_counter() - t0

        n_pixels = cube.geometry.n_pixels
        streamed = n_pixels * report.n_frames * 8 > config.memory_budget

        stage = "solve_all"
        t0 = time.perf_counter()
        if streamed:
            store = solve_all_streamed(cube, lam, scratch, lanes=config.lanes)
            report.stack_min = store.vmin
            report.stack_max = store.vmax
        else:
            stack = solve_all(cube, lam, lanes=config.lanes)
            report.stack_min = float(stack.data.min())
            report.stack_max = float(stack.data.max())
        report.stage_seconds["solve_all"] = time.perf_counter() - t0

        del lam
        if streamed:
            del cube

        stage = "normalize"
        t0 = time.perf_counter()
        if not streamed:
            stack = normalize(stack, config.normalization)
        # streamed runs fold normalization into encoding using the tracked range
        report.stage_seconds["normalize"] = time.perf_counter() - t0

        stage = "encode"
        t0 = time.perf_counter()
        if streamed:
            _write_frames_store(store, config, written)
            store.delete()
        else:
            _write_frames_memory(stack, config, written)
        report.stage_seconds["encode"] = time.perf_counter() - t0
        report.output_files = len(written)

        report_path = os.path.join(config.out_dir, "report.txt")
        with open(report_path, "w") as fh:
            report.write(fh)
        return report
    except Exception as exc:
        for path in written:
            if os.path.exists(path):
                os.remove(path)
        if os.path.exists(scratch):
            os.remove(scratch)
        raise StageError(stage, exc) from exc


@dataclass(frozen=True)
class SceneSpec:
    """Analytic test scene for the simulator CLI."""

    kind: str
    n_samples: int
    duration: float = 1.0
    level: float = 1.0
    rate: float = 1.0
    amplitude: float = 1.0
    period: float = 1.0
    spatial_phase: float = 0.5

    def __post_init__(self):
        if self.kind not in ("constant", "ramp", "sine"):
            raise ValueError(f"unknown scene kind {self.kind!r}")
        if self.n_samples < 2:
            raise ValueError("need at least 2 samples")


def build_scene(spec: SceneSpec, config: SimulatorConfig) -> LuminanceSignal:
    geom = config.geometry
    if spec.kind == "constant":
        return constant_scene(geom, spec.n_samples, spec.duration, spec.level)
    if spec.kind == "ramp":
        return ramp_scene(geom, spec.n_samples, spec.duration, spec.rate)
    return sine_scene(geom, spec.n_samples, spec.duration, spec.amplitude,
                      spec.period, spec.spatial_phase)


def run_simulate(spec: SceneSpec, config: SimulatorConfig,
                 out_dir: str) -> Tuple[EventStream, str, str]:
    """Simulate a scene; write events.txt and ground_truth.txt to out_dir.

    The ground-truth file has one line per sample time: the time followed by
    the row-major per-pixel log-luminance values.
    """
    os.makedirs(out_dir, exist_ok=True)
    signal = build_scene(spec, config)
    stream = simulate_scene(signal, config)

    events_path = os.path.join(out_dir, "events.txt")
    with open(events_path, "w") as fh:
        write_event_text(stream, fh)

    truth_path = os.path.join(out_dir, "ground_truth.txt")
    log_q = np.log(signal.samples)
    with open(truth_path, "w") as fh:
        for i, t in enumerate(signal.sample_times):
            row = " ".join(f"{v:.9g}" for v in log_q[i].ravel())
            fh.write(f"{t:.6f} {row}\n")
    return stream, events_path, truth_path
