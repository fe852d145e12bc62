"""Accumulation of an event stream into per-window polarity-sum slices."""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import IO, List

import numpy as np

from .events import EventStream, SensorGeometry


@dataclass(frozen=True)
class CubeConfig:
    """Windowing parameters: k events per window, nu total events to use."""

    k: int
    nu: int

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if self.nu < self.k:
            raise ValueError(f"nu ({self.nu}) must be >= k ({self.k})")


@dataclass(frozen=True)
class DataCube:
    """r slices of per-pixel polarity sums over consecutive windows of k
    global events. slices has shape (r, height, width), signed integers.

    boundary_times[0] is the timestamp of the first event; boundary_times[i]
    (i >= 1) is the timestamp of the last event of window i. They label
    frames only; the reconstruction math uses window indices.
    """

    geometry: SensorGeometry
    k: int
    slices: np.ndarray
    boundary_times: np.ndarray

    def __post_init__(self):
        slices = np.ascontiguousarray(self.slices)
        if slices.ndim != 3:
            raise ValueError("slices must be (r, height, width)")
        if slices.shape[1] != self.geometry.height or slices.shape[2] != self.geometry.width:
            raise ValueError(f"slice shape {slices.shape[1:]} does not match geometry "
                             f"{self.geometry.height}x{self.geometry.width}")
        if slices.shape[0] < 1:
            raise ValueError("cube must have at least one slice")
        bt = np.ascontiguousarray(self.boundary_times, dtype=np.float64)
        if bt.shape != (slices.shape[0] + 1,):
            raise ValueError("boundary_times must have r+1 entries")
        slices.flags.writeable = False
        bt.flags.writeable = False
        object.__setattr__(self, "slices", slices)
        object.__setattr__(self, "boundary_times", bt)

    @property
    def r(self) -> int:
        return self.slices.shape[0]


def build_cube(stream: EventStream, config: CubeConfig) -> DataCube:
    """Bin the first r*k events of the stream, r = floor(min(nu, n)/k).

    Slice i sums the polarities, per pixel, of global events with indices
    in [i*k, (i+1)*k). Events past r*k are discarded. nu larger than the
    stream is clamped with a warning.
    """
    n = len(stream)
    k = config.k
    nu = config.nu
    if nu > n:
        warnings.warn(f"nu={nu} exceeds available events ({n}); clamping", stacklevel=2)
        nu = n
    r = nu // k
    if r < 1:
        raise ValueError(f"too few events for one window: have {nu} usable, need k={k}")
    used = r * k
    geom = stream.geometry

    # |entry| <= k, so int16 covers any practical k; guard the pathological case.
    dtype = np.int16 if k <= np.iinfo(np.int16).max else np.int64
    slices = np.zeros((r, geom.height * geom.width), dtype=dtype)
    pix = stream.y[:used].astype(np.int64) * geom.width + stream.x[:used]
    win = np.arange(used, dtype=np.int64) // k
    np.add.at(slices, (win, pix), stream.p[:used])
    slices = slices.reshape(r, geom.height, geom.width)

    boundary_times = np.empty(r + 1)
    boundary_times[0] = stream.t[0]
    boundary_times[1:] = stream.t[k - 1:used:k]
    return DataCube(geometry=geom, k=k, slices=slices, boundary_times=boundary_times)


@dataclass
class SliceStats:
    minimum: int
    maximum: int
    total: int


@dataclass
class CubeStats:
    """Exact integer statistics of a cube, per slice and overall."""

    per_slice: List[SliceStats]
    grand_total: int
    zero_fraction: float


def cube_stats(cube: DataCube) -> CubeStats:
    """Per-slice min/max/sum plus overall total and fraction of zero entries."""
    per_slice = [SliceStats(minimum=int(s.min()), maximum=int(s.max()), total=int(s.sum()))
                 for s in cube.slices]
    grand_total = sum(s.total for s in per_slice)
    zero_fraction = float(np.count_nonzero(cube.slices == 0) / cube.slices.size)
    return CubeStats(per_slice=per_slice, grand_total=grand_total,
                     zero_fraction=zero_fraction)


def dump_cube_text(cube: DataCube, sink: IO) -> None:
    """Debug dump: header "width height r k", then each slice row-major as
    space-separated signed integers, one slice per line."""
    sink.write(f"{cube.geometry.width} {cube.geometry.height} {cube.r} {cube.k}\n")
    for s in cube.slices:
        sink.write(" ".join(str(int(v)) for v in s.ravel()) + "\n")
