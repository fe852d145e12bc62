import io

import numpy as np
import pytest

from evframes import (EventStream, SensorGeometry, StreamError,
                      parse_event_text, validate_stream, write_event_text)


def test_parse_signed_single_line():
    s = parse_event_text(b"0.50 3 2 1\n", SensorGeometry(4, 4), "signed")
    assert len(s) == 1
    assert s[0] == (0.5, 3, 2, 1)


def test_parse_zero_one_convention():
    s = parse_event_text(b"0.1 0 0 0\n0.2 0 0 1\n", SensorGeometry(2, 2), "zero_one")
    assert list(s.p) == [-1, 1]


def test_parse_out_of_bounds_reports_line():
    with pytest.raises(StreamError, match=r"line 1.*\(5, 0\)"):
        parse_event_text(b"0.1 5 0 1\n", SensorGeometry(4, 4), "signed")


def test_parse_malformed_line_number():
    with pytest.raises(StreamError, match="line 2"):
        parse_event_text(b"0.1 0 0 1\n0.2 0 0\n", SensorGeometry(4, 4), "signed")


def test_parse_comments_and_blank_lines():
    s = parse_event_text(b"# header\n\n0.1 0 0 1\n", SensorGeometry(2, 2), "signed")
    assert len(s) == 1


def test_parse_bad_polarity_per_convention():
    with pytest.raises(StreamError, match="polarity"):
        parse_event_text(b"0.1 0 0 2\n", SensorGeometry(2, 2), "signed")
    with pytest.raises(StreamError, match="polarity"):
        parse_event_text(b"0.1 0 0 -1\n", SensorGeometry(2, 2), "zero_one")


def test_parse_rejects_decreasing_timestamps():
    with pytest.raises(StreamError, match="decreasing timestamp"):
        parse_event_text(b"0.2 0 0 1\n0.1 0 0 1\n", SensorGeometry(2, 2), "signed")


def test_parse_sort_option_is_stable():
    text = b"0.2 0 0 1\n0.1 1 0 1\n0.2 1 1 0\n"
    s = parse_event_text(text, SensorGeometry(2, 2), "zero_one", sort=True)
    assert list(s.t) == [0.1, 0.2, 0.2]
    # equal timestamps keep file order
    assert (s[1].x, s[1].y) == (0, 0)
    assert (s[2].x, s[2].y) == (1, 1)


def test_write_formatting():
    s = EventStream.from_events(SensorGeometry(4, 4), [(0.5, 3, 2, 1)])
    sink = io.StringIO()
    assert write_event_text(s, sink) == 1
    assert sink.getvalue() == "0.500000 3 2 1\n"


def test_write_empty_stream():
    s = EventStream.from_events(SensorGeometry(2, 2), [])
    sink = io.StringIO()
    assert write_event_text(s, sink) == 0
    assert sink.getvalue() == ""


def test_round_trip_identity():
    rng = np.random.default_rng(7)
    geom = SensorGeometry(16, 12)
    n = 300
    t = np.sort(np.round(rng.uniform(0, 5, n), 6))
    s = EventStream(geom, t, rng.integers(0, 16, n), rng.integers(0, 12, n),
                    rng.choice([-1, 1], n))
    sink = io.StringIO()
    write_event_text(s, sink)
    back = parse_event_text(sink.getvalue(), geom, "signed")
    assert np.array_equal(back.x, s.x)
    assert np.array_equal(back.y, s.y)
    assert np.array_equal(back.p, s.p)
    np.testing.assert_allclose(back.t, s.t, atol=5e-7)


def test_parse_polarity_always_signed():
    rng = np.random.default_rng(3)
    lines = "".join(f"{i * 0.01:.3f} {rng.integers(0, 4)} {rng.integers(0, 4)} "
                    f"{rng.integers(0, 2)}\n" for i in range(200))
    s = parse_event_text(lines, SensorGeometry(4, 4), "zero_one")
    assert set(np.unique(s.p)) <= {-1, 1}


def test_validate_clean_stream():
    s = EventStream.from_events(SensorGeometry(4, 4),
                                [(0.1, 0, 0, 1), (0.2, 1, 1, -1), (0.3, 2, 3, 1)])
    report = validate_stream(s)
    assert report.count == 3
    assert report.violations == []
    assert report.time_span == (0.1, 0.3)
    assert report.max_events_per_pixel == 1


def test_validate_decreasing_timestamp():
    s = EventStream.from_events(SensorGeometry(2, 2), [(0.2, 0, 0, 1), (0.1, 0, 0, 1)])
    report = validate_stream(s)
    assert any("decreasing timestamp at index 1" in v for v in report.violations)


def test_validate_empty():
    report = validate_stream(EventStream.from_events(SensorGeometry(2, 2), []))
    assert report.count == 0
    assert report.violations == []


def test_validate_out_of_bounds_and_polarity():
    geom = SensorGeometry(2, 2)
    s = EventStream(geom, np.array([0.1, 0.2]), np.array([0, 5]),
                    np.array([0, 0]), np.array([3, 1]))
    report = validate_stream(s)
    assert not report.ok
    assert any("out of bounds" in v for v in report.violations)
    assert any("polarity" in v for v in report.violations)


def test_validate_matches_invariants():
    # violations list is empty exactly when the stream invariants hold
    rng = np.random.default_rng(11)
    geom = SensorGeometry(3, 3)
    for _ in range(50):
        n = int(rng.integers(1, 20))
        t = rng.uniform(0, 1, n)
        if rng.random() < 0.5:
            t = np.sort(t)
        x = rng.integers(0, 4, n)  # may go out of bounds
        y = rng.integers(0, 3, n)
        p = rng.choice([-1, 1], n)
        s = EventStream(geom, t, x, y, p)
        ok = bool(np.all(x < 3) and np.all(np.diff(t) >= 0))
        assert validate_stream(s).ok == ok


def test_geometry_validation():
    with pytest.raises(ValueError):
        SensorGeometry(0, 4)
