"""Forward event-camera model: thresholded log-luminance changes to events."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from .events import EventStream, SensorGeometry

# Relative slack when comparing a log-luminance step against the contrast
# threshold, so that steps that equal the threshold up to floating-point
# representation still fire.
_THRESHOLD_RTOL = 1e-9


@dataclass(frozen=True)
class LuminanceSignal:
    """Positive per-pixel luminance sampled on a shared, strictly increasing
    time grid. samples has shape (n_times, height, width)."""

    sample_times: np.ndarray
    samples: np.ndarray

    def __post_init__(self):
        times = np.ascontiguousarray(self.sample_times, dtype=np.float64)
        vals = np.ascontiguousarray(self.samples, dtype=np.float64)
        if vals.ndim != 3 or vals.shape[0] != times.shape[0]:
            raise ValueError("samples must be (n_times, height, width) matching sample_times")
        if times.size > 1 and np.any(np.diff(times) <= 0):
            raise ValueError("sample_times must be strictly increasing")
        if not np.all(np.isfinite(vals)) or np.any(vals <= 0):
            raise ValueError("luminance samples must be finite and > 0")
        object.__setattr__(self, "sample_times", times)
        object.__setattr__(self, "samples", vals)

    @property
    def geometry(self) -> SensorGeometry:
        return SensorGeometry(width=self.samples.shape[2], height=self.samples.shape[1])


@dataclass(frozen=True)
class SimulatorConfig:
    """Contrast threshold and sensor size of the simulated camera."""

    threshold: float
    geometry: SensorGeometry

    def __post_init__(self):
        if not (self.threshold > 0 and math.isfinite(self.threshold)):
            raise ValueError(f"threshold must be positive and finite, got {self.threshold}")


def simulate_pixel(log_samples: Sequence[Tuple[float, float]],
                   threshold: float) -> List[Tuple[float, int, int]]:
    """Run the per-pixel change detector on sampled log-luminance.

    The reference level starts at the first log value. At each later sample
    with excursion delta = value - reference: if |delta| reaches the
    threshold, m = floor(|delta|/threshold) events of the matching polarity
    fire at that sample time and the reference advances by m*threshold.
    Returns (time, polarity, multiplicity) triples; the pending excursion
    stays strictly below one threshold after every sample.
    """
    if threshold <= 0 or not math.isfinite(threshold):
        raise ValueError(f"threshold must be positive and finite, got {threshold}")
    out: List[Tuple[float, int, int]] = []
    prev_t = -math.inf
    ref = None
    for t, val in log_samples:
        if not (math.isfinite(t) and math.isfinite(val)):
            raise ValueError(f"non-finite log sample at t={t}")
        if t <= prev_t:
            raise ValueError(f"sample times must be strictly increasing (t={t})")
        prev_t = t
        if ref is None:
            ref = val
            continue
        delta = val - ref
        m = int(abs(delta) / threshold + _THRESHOLD_RTOL)
        if m > 0:
            pol = 1 if delta > 0 else -1
            out.append((t, pol, m))
            ref += pol * m * threshold
    return out


def simulate_scene(signal: LuminanceSignal, config: SimulatorConfig) -> EventStream:
    """Apply simulate_pixel to log(q) of every pixel and merge the outputs.

    Events are ordered by timestamp with ties broken by ascending (y, x);
    a multiplicity-m firing expands to m identical events.
    """
    geom = signal.geometry
    if geom != config.geometry:
        raise ValueError(f"signal grid {geom} does not match config geometry {config.geometry}")
    times = signal.sample_times
    log_q = np.log(signal.samples)
    n_samples = times.shape[0]
    c = config.threshold

    # Vectorized across pixels: one pass over the sample grid, updating every
    # pixel's reference level in lock step.
    ref = log_q[0].copy()
    ts: List[np.ndarray] = []
    xs: List[np.ndarray] = []
    ys: List[np.ndarray] = []
    ps: List[np.ndarray] = []
    yy, xx = np.mgrid[0:geom.height, 0:geom.width]
    for i in range(1, n_samples):
        delta = log_q[i] - ref
        m = (np.abs(delta) / c + _THRESHOLD_RTOL).astype(np.int64)
        fired = m > 0
        if not fired.any():
            continue
        pol = np.where(delta > 0, 1, -1)
        ref += np.where(fired, pol * m * c, 0.0)
        # (y, x) tie order falls out of row-major iteration of the fired mask
        my = yy[fired]
        mx = xx[fired]
        mp = pol[fired]
        mm = m[fired]
        reps = np.repeat(np.arange(my.size), mm)
        ts.append(np.full(reps.size, times[i]))
        xs.append(mx[reps])
        ys.append(my[reps])
        ps.append(mp[reps])

    if ts:
        t_arr = np.concatenate(ts)
        x_arr = np.concatenate(xs)
        y_arr = np.concatenate(ys)
        p_arr = np.concatenate(ps)
    else:
        t_arr = np.empty(0)
        x_arr = np.empty(0, dtype=np.int32)
        y_arr = np.empty(0, dtype=np.int32)
        p_arr = np.empty(0, dtype=np.int8)
    return EventStream(geom, t_arr, x_arr, y_arr, p_arr)


def oracle_log_difference(signal: LuminanceSignal, threshold: float,
                          pixel: Tuple[int, int], t_a: float, t_b: float) -> float:
    """Ground-truth luminosity change between two sample times, in event-count
    units: (log q(t_b) - log q(t_a)) / threshold for the given (x, y) pixel."""
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    x, y = pixel
    geom = signal.geometry
    if not (0 <= x < geom.width and 0 <= y < geom.height):
        raise ValueError(f"pixel {pixel} out of bounds")
    idx_a = np.nonzero(signal.sample_times == t_a)[0]
    idx_b = np.nonzero(signal.sample_times == t_b)[0]
    if idx_a.size == 0 or idx_b.size == 0:
        raise ValueError("t_a and t_b must be sample times of the signal")
    qa = signal.samples[idx_a[0], y, x]
    qb = signal.samples[idx_b[0], y, x]
    return float((np.log(qb) - np.log(qa)) / threshold)


def constant_scene(geometry: SensorGeometry, n_samples: int, duration: float = 1.0,
                   level: float = 1.0) -> LuminanceSignal:
    """Static luminance everywhere; produces no events."""
    times = np.linspace(0.0, duration, n_samples)
    samples = np.full((n_samples, geometry.height, geometry.width), level)
    return LuminanceSignal(times, samples)


def ramp_scene(geometry: SensorGeometry, n_samples: int, duration: float = 1.0,
               rate: float = 1.0) -> LuminanceSignal:
    """Log-luminance rises linearly at `rate` per second from 0 (q from 1)."""
    times = np.linspace(0.0, duration, n_samples)
    log_q = rate * times
    samples = np.exp(log_q)[:, None, None] * np.ones((geometry.height, geometry.width))
    return LuminanceSignal(times, samples)


def sine_scene(geometry: SensorGeometry, n_samples: int, duration: float = 1.0,
               amplitude: float = 1.0, period: float = 1.0,
               spatial_phase: float = 0.5) -> LuminanceSignal:
    """Per-pixel sinusoid in log-luminance with a phase offset of
    `spatial_phase` radians per pixel index (distinct phases across the grid)."""
    times = np.linspace(0.0, duration, n_samples)
    yy, xx = np.mgrid[0:geometry.height, 0:geometry.width]
    phase = spatial_phase * (yy * geometry.width + xx)
    log_q = amplitude * np.sin(2.0 * np.pi * times[:, None, None] / period + phase[None, :, :])
    return LuminanceSignal(times, np.exp(log_q))
