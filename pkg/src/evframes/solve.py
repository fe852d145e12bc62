"""Per-pixel reconstruction: tridiagonal normal equations and their solves.

For each pixel the window sums E feed the normal equations
K v = A^T E with K = A^T A + diag(lambda^2), where A is the first-difference
matrix. K is symmetric positive-definite tridiagonal, so every pixel is an
O(n_frames) direct elimination. solve_all batches the elimination over
pixels with a compiled kernel; the per-pixel entry points run the exact same
recurrence, so batched and scalar paths agree bitwise.
"""
from __future__ import annotations

import concurrent.futures
import os
from dataclasses import dataclass
from typing import Iterator, List, Optional, Tuple

import numba
import numpy as np

from .cube import DataCube
from .events import SensorGeometry
from .regularize import LambdaField


@dataclass(frozen=True)
class TridiagonalSystem:
    """Symmetric tridiagonal matrix: diag (n) and shared sub/super off (n-1)."""

    n: int
    diag: np.ndarray
    off: np.ndarray

    def __post_init__(self):
        if self.diag.shape != (self.n,) or self.off.shape != (max(self.n - 1, 0),):
            raise ValueError("inconsistent tridiagonal dimensions")

    def dense(self) -> np.ndarray:
        m = np.diag(self.diag)
        if self.n > 1:
            m += np.diag(self.off, 1) + np.diag(self.off, -1)
        return m


@dataclass(frozen=True)
class PixelProblem:
    """One pixel's data term (n_frames-1 window sums) and weights (n_frames)."""

    accum: np.ndarray
    lam: np.ndarray

    def __post_init__(self):
        accum = np.ascontiguousarray(self.accum, dtype=np.float64)
        lam = np.ascontiguousarray(self.lam, dtype=np.float64)
        if lam.shape != (accum.shape[0] + 1,):
            raise ValueError("need len(lam) == len(accum) + 1")
        object.__setattr__(self, "accum", accum)
        object.__setattr__(self, "lam", lam)


@dataclass(frozen=True)
class FrameStack:
    """Reconstructed per-pixel trajectories: data is (height, width, n_frames)."""

    geometry: SensorGeometry
    frame_times: np.ndarray
    data: np.ndarray

    def __post_init__(self):
        if self.data.shape != (self.geometry.height, self.geometry.width,
                               self.frame_times.shape[0]):
            raise ValueError("data must be (height, width, n_frames)")

    @property
    def n_frames(self) -> int:
        return self.data.shape[2]

    def frame(self, i: int) -> np.ndarray:
        return self.data[:, :, i]

    def pixel(self, x: int, y: int) -> np.ndarray:
        return self.data[y, x, :]

    def iter_frames(self) -> Iterator[Tuple[int, np.ndarray]]:
        for i in range(self.n_frames):
            yield i, self.data[:, :, i]


class SingularSystemError(ArithmeticError):
    """Zero pivot during elimination; cannot happen for lambda > 0."""


def assemble_system(lam: np.ndarray) -> TridiagonalSystem:
    """Normal-equations matrix for weights lam: diag = [1, 2, ..., 2, 1] +
    lam^2, off-diagonal all -1."""
    lam = np.ascontiguousarray(lam, dtype=np.float64)
    n = lam.shape[0]
    if n < 2:
        raise ValueError("need at least 2 frames")
    if np.any(lam <= 0) or not np.all(np.isfinite(lam)):
        raise ValueError("all weights must be finite and > 0")
    diag = np.full(n, 2.0)
    diag[0] = 1.0
    diag[-1] = 1.0
    diag += lam * lam
    return TridiagonalSystem(n=n, diag=diag, off=np.full(n - 1, -1.0))


def rhs_from_accum(accum: np.ndarray) -> np.ndarray:
    """A^T applied to the window sums: [-a_1, a_1-a_2, ..., a_{n-1}]."""
    accum = np.asarray(accum, dtype=np.float64)
    if accum.shape[0] < 1:
        raise ValueError("need at least one window sum")
    n = accum.shape[0] + 1
    rhs = np.empty(n)
    rhs[0] = -accum[0]
    rhs[1:-1] = accum[:-1] - accum[1:]
    rhs[-1] = accum[-1]
    return rhs


@numba.njit(nogil=True)
def _thomas(diag, off, rhs, out, cp):  # pragma: no cover - compiled
    """Direct elimination for a symmetric tridiagonal system.

    Writes the solution into out, uses cp (n-1) as scratch. Returns False on
    a zero pivot.
    """
    n = diag.shape[0]
    if n == 1:
        if diag[0] == 0.0:
            return False
        out[0] = rhs[0] / diag[0]
        return True
    denom = diag[0]
    if denom == 0.0:
        return False
    inv = 1.0 / denom
    cp[0] = off[0] * inv
    out[0] = rhs[0] * inv
    for i in range(1, n - 1):
        denom = diag[i] - off[i - 1] * cp[i - 1]
        if denom == 0.0:
            return False
        inv = 1.0 / denom
        cp[i] = off[i] * inv
        out[i] = (rhs[i] - off[i - 1] * out[i - 1]) * inv
    denom = diag[n - 1] - off[n - 2] * cp[n - 2]
    if denom == 0.0:
        return False
    out[n - 1] = (rhs[n - 1] - off[n - 2] * out[n - 2]) / denom
    for i in range(n - 2, -1, -1):
        out[i] = out[i] - cp[i] * out[i + 1]
    return True


@numba.njit(nogil=True)
def _solve_window_batch(accum, mag, table, out):  # pragma: no cover - compiled
    """Fused assemble + eliminate for a block of pixels.

    accum: (m, r) integer window sums; mag: (m, r+1) lambda magnitude
    indices; table: lambda values by magnitude; out: (m, r+1) solutions.
    Arithmetic matches assemble_system/rhs_from_accum/_thomas exactly.
    Returns the index of a pixel with a zero pivot, or -1.
    """
    m, nt = out.shape
    r = nt - 1
    diag = np.empty(nt)
    rhs = np.empty(nt)
    off = np.full(nt - 1, -1.0)
    cp = np.empty(nt - 1)
    for px in range(m):
        lam = table[mag[px, 0]]
        diag[0] = 1.0 + lam * lam
        rhs[0] = -float(accum[px, 0])
        for i in range(1, nt - 1):
            lam = table[mag[px, i]]
            diag[i] = 2.0 + lam * lam
            rhs[i] = float(accum[px, i - 1]) - float(accum[px, i])
        lam = table[mag[px, nt - 1]]
        diag[nt - 1] = 1.0 + lam * lam
        rhs[nt - 1] = float(accum[px, r - 1])
        if not _thomas(diag, off, rhs, out[px], cp):
            return px
    return -1


def solve_tridiagonal(system: TridiagonalSystem, rhs: np.ndarray) -> np.ndarray:
    """Solve the tridiagonal system by direct elimination (no iteration)."""
    rhs = np.ascontiguousarray(rhs, dtype=np.float64)
    if rhs.shape != (system.n,):
        raise ValueError(f"rhs must have length {system.n}")
    out = np.empty(system.n)
    cp = np.empty(max(system.n - 1, 1))
    diag = np.ascontiguousarray(system.diag, dtype=np.float64)
    off = np.ascontiguousarray(system.off, dtype=np.float64)
    if not _thomas(diag, off, rhs, out, cp):
        raise SingularSystemError("zero pivot: system is not positive definite")
    return out


def solve_pixel(problem: PixelProblem) -> np.ndarray:
    """Minimize 0.5||A v - E||^2 + 0.5||lam * v||^2 for one pixel."""
    system = assemble_system(problem.lam)
    rhs = rhs_from_accum(problem.accum)
    return solve_tridiagonal(system, rhs)


def _pixel_chunks(n_pixels: int, chunk_px: int) -> List[Tuple[int, int]]:
    return [(a, min(a + chunk_px, n_pixels)) for a in range(0, n_pixels, chunk_px)]


def _chunk_inputs(cube: DataCube, lam: LambdaField, a: int, b: int):
    r = cube.r
    n_pixels = cube.geometry.n_pixels
    accum = np.ascontiguousarray(cube.slices.reshape(r, n_pixels)[:, a:b].T)
    mag = lam.magnitudes.reshape(n_pixels, lam.n_frames)[a:b]
    return accum, mag


def _check_shapes(cube: DataCube, lam: LambdaField) -> None:
    if lam.geometry != cube.geometry:
        raise ValueError("cube and lambda field geometries differ")
    if lam.n_frames != cube.r + 1:
        raise ValueError(f"lambda field has {lam.n_frames} frames, "
                         f"expected r+1 = {cube.r + 1}")


def solve_all(cube: DataCube, lam: LambdaField, lanes: int = 1,
              chunk_px: int = 4096) -> FrameStack:
    """Reconstruct every pixel's trajectory from the cube.

    Pixels are independent; they are processed in chunks, optionally across
    `lanes` threads (the kernel releases the GIL). Each chunk writes a
    disjoint block of the output, so the result is bitwise identical for any
    lane count.
    """
    _check_shapes(cube, lam)
    n_pixels = cube.geometry.n_pixels
    nt = cube.r + 1
    out = np.empty((n_pixels, nt))
    chunks = _pixel_chunks(n_pixels, chunk_px)

    def run(bounds: Tuple[int, int]) -> None:
        a, b = bounds
        accum, mag = _chunk_inputs(cube, lam, a, b)
        bad = _solve_window_batch(accum, mag, lam.table, out[a:b])
        if bad >= 0:
            raise SingularSystemError(f"zero pivot at pixel {a + bad}")

    if lanes <= 1 or len(chunks) == 1:
        for bounds in chunks:
            run(bounds)
    else:
        with concurrent.futures.ThreadPoolExecutor(max_workers=lanes) as pool:
            list(pool.map(run, chunks))
    data = out.reshape(cube.geometry.height, cube.geometry.width, nt)
    return FrameStack(geometry=cube.geometry, frame_times=cube.boundary_times.copy(),
                      data=data)


class FrameStackStore:
    """Disk-backed frame stack for runs too large for memory.

    The scratch file holds one float32 block per pixel chunk, each laid out
    frame-major (n_frames, chunk_width), so reading frames in order streams
    every block sequentially. Tracks the global value range for later
    normalization.
    """

    def __init__(self, path: str, geometry: SensorGeometry, frame_times: np.ndarray,
                 chunk_bounds: List[Tuple[int, int]]):
        self.path = path
        self.geometry = geometry
        self.frame_times = frame_times
        self.n_frames = frame_times.shape[0]
        self.chunk_bounds = chunk_bounds
        self.vmin = np.inf
        self.vmax = -np.inf
        self._maps: Optional[List[np.memmap]] = None

    def chunk_offset(self, idx: int) -> int:
        off = 0
        for a, b in self.chunk_bounds[:idx]:
            off += (b - a) * self.n_frames * 4
        return off

    def _open(self) -> List[np.memmap]:
        if self._maps is None:
            self._maps = [np.memmap(self.path, dtype=np.float32, mode="r",
                                    offset=self.chunk_offset(i),
                                    shape=(self.n_frames, b - a))
                          for i, (a, b) in enumerate(self.chunk_bounds)]
        return self._maps

    def frame(self, i: int) -> np.ndarray:
        parts = [m[i] for m in self._open()]
        flat = np.concatenate(parts)
        return flat.reshape(self.geometry.height, self.geometry.width)

    def iter_frames(self) -> Iterator[Tuple[int, np.ndarray]]:
        for i in range(self.n_frames):
            yield i, self.frame(i)

    def close(self) -> None:
        self._maps = None

    def delete(self) -> None:
        self.close()
        if os.path.exists(self.path):
            os.remove(self.path)


def solve_all_streamed(cube: DataCube, lam: LambdaField, scratch_path: str,
                       lanes: int = 1, chunk_px: int = 2048) -> FrameStackStore:
    """solve_all variant that spills the stack to a float32 scratch file.

    Solves in float64 exactly as solve_all, then stores each chunk as
    float32. The store's vmin/vmax come from the stored float32 values, so
    downstream normalization is consistent with what was written.
    """
    _check_shapes(cube, lam)
    n_pixels = cube.geometry.n_pixels
    nt = cube.r + 1
    chunks = _pixel_chunks(n_pixels, chunk_px)
    store = FrameStackStore(scratch_path, cube.geometry, cube.boundary_times.copy(), chunks)

    total_bytes = n_pixels * nt * 4
    with open(scratch_path, "wb") as fh:
        fh.truncate(total_bytes)

    ranges: List[Tuple[float, float]] = [(np.inf, -np.inf)] * len(chunks)

    def run(idx: int) -> None:
        a, b = chunks[idx]
        accum, mag = _chunk_inputs(cube, lam, a, b)
        out = np.empty((b - a, nt))
        bad = _solve_window_batch(accum, mag, lam.table, out)
        if bad >= 0:
            raise SingularSystemError(f"zero pivot at pixel {a + bad}")
        block = np.ascontiguousarray(out.T, dtype=np.float32)
        ranges[idx] = (float(block.min()), float(block.max()))
        with open(scratch_path, "r+b") as fh:
            fh.seek(store.chunk_offset(idx))
            block.tofile(fh)

    if lanes <= 1 or len(chunks) == 1:
        for idx in range(len(chunks)):
            run(idx)
    else:
        with concurrent.futures.ThreadPoolExecutor(max_workers=lanes) as pool:
            list(pool.map(run, range(len(chunks))))

    store.vmin = min(lo for lo, _ in ranges)
    store.vmax = max(hi for _, hi in ranges)
    return store
