"""Event types, text-file parsing/serialization, and stream validation."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import IO, Iterator, List, NamedTuple, Sequence, Tuple, Union

import numpy as np


class Event(NamedTuple):
    """One sensor firing: timestamp (s), column, row, polarity (+1/-1)."""

    t: float
    x: int
    y: int
    p: int


@dataclass(frozen=True)
class SensorGeometry:
    """Pixel-array dimensions of the sensor."""

    width: int
    height: int

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("sensor geometry must be at least 1x1, got "
                             f"{self.width}x{self.height}")

    @property
    def n_pixels(self) -> int:
        return self.width * self.height


class StreamError(ValueError):
    """Malformed or out-of-contract event data."""


def _readonly(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class EventStream:
    """An ordered sequence of events on a fixed sensor grid.

    Stored as parallel arrays (t float64, x/y int32, p int8); arrays are
    frozen after construction so streams can be shared across threads.
    """

    geometry: SensorGeometry
    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        n = len(self.t)
        if not (len(self.x) == len(self.y) == len(self.p) == n):
            raise ValueError("event arrays must have equal length")
        object.__setattr__(self, "t", _readonly(np.ascontiguousarray(self.t, dtype=np.float64)))
        object.__setattr__(self, "x", _readonly(np.ascontiguousarray(self.x, dtype=np.int32)))
        object.__setattr__(self, "y", _readonly(np.ascontiguousarray(self.y, dtype=np.int32)))
        object.__setattr__(self, "p", _readonly(np.ascontiguousarray(self.p, dtype=np.int8)))

    @classmethod
    def from_events(cls, geometry: SensorGeometry,
                    events: Sequence[Union[Event, Tuple[float, int, int, int]]]) -> "EventStream":
        t = np.array([e[0] for e in events], dtype=np.float64)
        x = np.array([e[1] for e in events], dtype=np.int32)
        y = np.array([e[2] for e in events], dtype=np.int32)
        p = np.array([e[3] for e in events], dtype=np.int8)
        return cls(geometry, t, x, y, p)

    def __len__(self) -> int:
        return len(self.t)

    def __getitem__(self, i: int) -> Event:
        return Event(float(self.t[i]), int(self.x[i]), int(self.y[i]), int(self.p[i]))

    def __iter__(self) -> Iterator[Event]:
        for i in range(len(self)):
            yield self[i]


@dataclass
class ValidationReport:
    """Outcome of validate_stream; violations are data, not exceptions."""

    count: int
    time_span: Tuple[float, float]
    max_events_per_pixel: int
    violations: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def parse_event_text(source: Union[IO, bytes, str], geometry: SensorGeometry,
                     polarity_convention: str = "signed",
                     sort: bool = False) -> EventStream:
    """Parse line-oriented "t x y p" text into an EventStream.

    Lines starting with '#' are comments. Under the zero_one convention
    polarity 0 maps to -1 and 1 to +1; under signed it must be -1 or +1.
    Decreasing timestamps are an error unless sort=True, which applies a
    stable sort by timestamp before validation.
    """
    if polarity_convention not in ("signed", "zero_one"):
        raise ValueError(f"unknown polarity convention {polarity_convention!r}")
    if isinstance(source, bytes):
        lines = source.decode("ascii").splitlines()
    elif isinstance(source, str):
        lines = source.splitlines()
    else:
        raw = source.read()
        if isinstance(raw, bytes):
            raw = raw.decode("ascii")
        lines = raw.splitlines()

    ts: List[float] = []
    xs: List[int] = []
    ys: List[int] = []
    ps: List[int] = []
    for lineno, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        fields = stripped.split()
        if len(fields) != 4:
            raise StreamError(f"line {lineno}: expected 4 fields, got {len(fields)}")
        try:
            t = float(fields[0])
            x = int(fields[1])
            y = int(fields[2])
            p = int(fields[3])
        except ValueError as exc:
            raise StreamError(f"line {lineno}: {exc}") from None
        if not np.isfinite(t) or t < 0:
            raise StreamError(f"line {lineno}: timestamp {t} must be finite and >= 0")
        if not (0 <= x < geometry.width and 0 <= y < geometry.height):
            raise StreamError(f"line {lineno}: pixel ({x}, {y}) out of bounds for "
                              f"{geometry.width}x{geometry.height} sensor")
        if polarity_convention == "zero_one":
            if p not in (0, 1):
                raise StreamError(f"line {lineno}: polarity {p} not in {{0, 1}}")
            p = -1 if p == 0 else 1
        else:
            if p not in (-1, 1):
                raise StreamError(f"line {lineno}: polarity {p} not in {{-1, +1}}")
        ts.append(t)
        xs.append(x)
        ys.append(y)
        ps.append(p)

    t_arr = np.array(ts, dtype=np.float64)
    x_arr = np.array(xs, dtype=np.int32)
    y_arr = np.array(ys, dtype=np.int32)
    p_arr = np.array(ps, dtype=np.int8)
    if sort:
        order = np.argsort(t_arr, kind="stable")
        t_arr, x_arr, y_arr, p_arr = t_arr[order], x_arr[order], y_arr[order], p_arr[order]
    elif len(t_arr) > 1:
        bad = np.nonzero(np.diff(t_arr) < 0)[0]
        if bad.size:
            raise StreamError(f"decreasing timestamp at event index {int(bad[0]) + 1} "
                              "(pass sort=True to stable-sort instead)")
    return EventStream(geometry, t_arr, x_arr, y_arr, p_arr)


def write_event_text(stream: EventStream, sink: IO) -> int:
    """Write one "t x y p" line per event; returns the number of lines.

    Timestamps are printed with 6 decimal places; round-trips through
    parse_event_text(signed) up to that printed precision.
    """
    n = 0
    for i in range(len(stream)):
        sink.write(f"{stream.t[i]:.6f} {stream.x[i]} {stream.y[i]} {stream.p[i]}\n")
        n += 1
    return n


def validate_stream(stream: EventStream) -> ValidationReport:
    """Check EventStream invariants; every violation is reported with its index."""
    violations: List[str] = []
    n = len(stream)
    t, x, y, p = stream.t, stream.x, stream.y, stream.p
    geom = stream.geometry

    for i in np.nonzero((x < 0) | (x >= geom.width) | (y < 0) | (y >= geom.height))[0]:
        violations.append(f"pixel out of bounds at index {int(i)}: "
                          f"({int(x[i])}, {int(y[i])})")
    for i in np.nonzero(~np.isin(p, (-1, 1)))[0]:
        violations.append(f"polarity {int(p[i])} not in {{-1, +1}} at index {int(i)}")
    for i in np.nonzero(~np.isfinite(t) | (t < 0))[0]:
        violations.append(f"bad timestamp {float(t[i])} at index {int(i)}")
    if n > 1:
        for i in np.nonzero(np.diff(t) < 0)[0]:
            violations.append(f"decreasing timestamp at index {int(i) + 1}")

    if n:
        span = (float(t.min()), float(t.max()))
        in_bounds = (x >= 0) & (x < geom.width) & (y >= 0) & (y < geom.height)
        if in_bounds.any():
            flat = y[in_bounds].astype(np.int64) * geom.width + x[in_bounds]
            per_pixel = np.bincount(flat, minlength=geom.n_pixels)
            max_per_pixel = int(per_pixel.max())
        else:
            max_per_pixel = 0
    else:
        span = (0.0, 0.0)
        max_per_pixel = 0
    return ValidationReport(count=n, time_span=span,
                            max_events_per_pixel=max_per_pixel,
                            violations=violations)
