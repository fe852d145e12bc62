"""Dynamic-range normalization and netpbm (PGM/PPM) image encoding."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .solve import FrameStack

NORMALIZATION_MODES = ("global", "per_frame")


def _round_half_away(values: np.ndarray) -> np.ndarray:
    # all rendered values are >= 0, so half away from zero is floor(x + 0.5)
    return np.floor(values + 0.5)


def _rescale(values: np.ndarray, lo: float, hi: float) -> np.ndarray:
    if hi == lo:
        return np.full_like(values, 0.5)
    return (values - lo) / (hi - lo)


def normalize(stack: FrameStack, mode: str = "global") -> FrameStack:
    """Affine rescale of the stack to [0, 1] (mat2gray-style).

    global: one min/max over the whole stack; per_frame: each frame scaled
    independently. A degenerate range maps to uniform 0.5.
    """
    if mode not in NORMALIZATION_MODES:
        raise ValueError(f"mode must be one of {NORMALIZATION_MODES}, got {mode!r}")
    if not np.all(np.isfinite(stack.data)):
        raise ValueError("stack contains non-finite values")
    if mode == "global":
        out = _rescale(stack.data, float(stack.data.min()), float(stack.data.max()))
    else:
        out = np.empty_like(stack.data)
        for i in range(stack.n_frames):
            frame = stack.data[:, :, i]
            out[:, :, i] = _rescale(frame, float(frame.min()), float(frame.max()))
    return FrameStack(geometry=stack.geometry, frame_times=stack.frame_times, data=out)


@dataclass(frozen=True)
class ColorMap:
    """Piecewise-linear RGB map over [0, 1], defined by anchor points."""

    anchors: Tuple[Tuple[float, Tuple[int, int, int]], ...]

    def __post_init__(self):
        pos = [u for u, _ in self.anchors]
        if len(pos) < 2 or pos[0] != 0.0 or pos[-1] != 1.0:
            raise ValueError("anchors must start at 0.0 and end at 1.0")
        if any(b <= a for a, b in zip(pos, pos[1:])):
            raise ValueError("anchor positions must be strictly increasing")


DEFAULT_COLORMAP = ColorMap(anchors=(
    (0.0, (0, 0, 255)),
    (0.5, (0, 255, 0)),
    (1.0, (255, 0, 0)),
))


def apply_colormap(value: float, cmap: ColorMap = DEFAULT_COLORMAP) -> Tuple[int, int, int]:
    """Interpolate one normalized value to an 8-bit RGB triple."""
    if not (0.0 <= value <= 1.0):
        raise ValueError(f"value {value} outside [0, 1]")
    anchors = cmap.anchors
    for (u0, c0), (u1, c1) in zip(anchors, anchors[1:]):
        if value <= u1:
            w = (value - u0) / (u1 - u0)
            return tuple(int(np.floor(a + w * (b - a) + 0.5))
                         for a, b in zip(c0, c1))
    return anchors[-1][1]


def colormap_frame(frame: np.ndarray, cmap: ColorMap = DEFAULT_COLORMAP) -> np.ndarray:
    """Vectorized apply_colormap over a normalized frame -> (h, w, 3) uint8."""
    if frame.min() < 0.0 or frame.max() > 1.0:
        raise ValueError("frame values outside [0, 1]")
    pos = np.array([u for u, _ in cmap.anchors])
    cols = np.array([c for _, c in cmap.anchors], dtype=np.float64)
    idx = np.clip(np.searchsorted(pos, frame, side="left"), 1, len(pos) - 1)
    u0 = pos[idx - 1]
    u1 = pos[idx]
    w = (frame - u0) / (u1 - u0)
    rgb = cols[idx - 1] + w[..., None] * (cols[idx] - cols[idx - 1])
    return _round_half_away(rgb).astype(np.uint8)


def write_pgm(frame: np.ndarray) -> bytes:
    """Binary PGM (P5, maxval 255) of a normalized [0, 1] frame."""
    if frame.ndim != 2:
        raise ValueError("expected a 2-d frame")
    if frame.min() < 0.0 or frame.max() > 1.0:
        raise ValueError("frame values outside [0, 1]")
    h, w = frame.shape
    payload = _round_half_away(frame * 255.0).astype(np.uint8)
    return b"P5\n%d %d\n255\n" % (w, h) + payload.tobytes()


def write_ppm(rgb: np.ndarray) -> bytes:
    """Binary PPM (P6, maxval 255) of an (h, w, 3) uint8 image."""
    if rgb.ndim != 3 or rgb.shape[2] != 3:
        raise ValueError("expected an (h, w, 3) image")
    if rgb.dtype != np.uint8:
        raise ValueError("expected uint8 channels")
    h, w = rgb.shape[:2]
    return b"P6\n%d %d\n255\n" % (w, h) + np.ascontiguousarray(rgb).tobytes()
