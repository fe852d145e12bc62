"""Per-pixel, per-frame regularization weights computed from the data cube."""
from __future__ import annotations

import math
from dataclasses import dataclass
import numpy as np

from .cube import DataCube
from .events import SensorGeometry

MODES = ("sigmoid", "max_abs", "exponential")

# exp(|d|) saturates at the largest finite double instead of overflowing
_MAX_FLOAT = np.finfo(np.float64).max
_LOG_MAX = math.log(_MAX_FLOAT)


@dataclass(frozen=True)
class LambdaConfig:
    """Weight strategy: sigmoid, max_abs (with floor epsilon), or exponential."""

    mode: str = "sigmoid"
    epsilon: float = 0.5

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if not (self.epsilon > 0):
            raise ValueError(f"epsilon must be > 0, got {self.epsilon}")


def lambda_scalar(d: int, config: LambdaConfig) -> float:
    """Weight for a single cube entry; strictly positive for every mode.

    sigmoid: 1/(1+exp(-|d|)); max_abs: max(epsilon, |d|);
    exponential: exp(|d|), saturating at the largest finite double.
    """
    a = abs(int(d))
    if config.mode == "sigmoid":
        return 1.0 / (1.0 + math.exp(-a))
    if config.mode == "max_abs":
        return max(config.epsilon, float(a))
    if a >= _LOG_MAX:
        return _MAX_FLOAT
    return math.exp(a)


@dataclass(frozen=True)
class LambdaField:
    """Per-pixel, per-frame weights, n_frames = r + 1 per pixel.

    Weights are a function of |cube entry| only, so the field is stored as a
    magnitude index array plus a value table: values[y, x, i] =
    table[magnitudes[y, x, i]]. This keeps desk-scale fields (tens of
    thousands of frames) compact while staying exact.
    """

    geometry: SensorGeometry
    n_frames: int
    table: np.ndarray
    magnitudes: np.ndarray

    def __post_init__(self):
        table = np.ascontiguousarray(self.table, dtype=np.float64)
        mags = np.ascontiguousarray(self.magnitudes)
        if mags.shape != (self.geometry.height, self.geometry.width, self.n_frames):
            raise ValueError("magnitudes must be (height, width, n_frames)")
        if mags.size and int(mags.max()) >= table.shape[0]:
            raise ValueError("magnitude index out of table range")
        if np.any(table <= 0) or not np.all(np.isfinite(table)):
            raise ValueError("all lambda values must be finite and > 0")
        table.flags.writeable = False
        mags.flags.writeable = False
        object.__setattr__(self, "table", table)
        object.__setattr__(self, "magnitudes", mags)

    @classmethod
    def uniform(cls, value: float, geometry: SensorGeometry, n_frames: int) -> "LambdaField":
        """Constant weight everywhere (used to bypass the data-driven modes)."""
        mags = np.zeros((geometry.height, geometry.width, n_frames), dtype=np.uint8)
        return cls(geometry=geometry, n_frames=n_frames,
                   table=np.array([value]), magnitudes=mags)

    def pixel(self, x: int, y: int) -> np.ndarray:
        """The n_frames weight vector of one pixel."""
        return self.table[self.magnitudes[y, x]]

    def dense(self) -> np.ndarray:
        """Materialize the full (height, width, n_frames) weight array."""
        return self.table[self.magnitudes]


def compute_lambda(cube: DataCube, config: LambdaConfig) -> LambdaField:
    """Map each cube entry through lambda_scalar, per pixel and window.

    Frame i (1-based, i <= r) takes the weight of the window ending at it;
    the final frame r+1 replicates the last window's weight, giving
    n_frames = r + 1 weights per pixel.
    """
    r = cube.r
    k = cube.k
    table = np.array([lambda_scalar(d, config) for d in range(k + 1)])
    abs_dtype = np.uint8 if k <= np.iinfo(np.uint8).max else np.uint16
    geom = cube.geometry
    # Fill slice by slice to keep the peak footprint at one slice, not a
    # second copy of the whole cube.
    mags = np.empty((geom.height, geom.width, r + 1), dtype=abs_dtype)
    for i in range(r):
        np.copyto(mags[:, :, i], np.abs(cube.slices[i]), casting="unsafe")
    mags[:, :, r] = mags[:, :, r - 1]
    return LambdaField(geometry=geom, n_frames=r + 1, table=table, magnitudes=mags)
