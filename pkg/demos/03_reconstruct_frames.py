"""Reconstruct log-luminance frames from events and write netpbm images.

Each pixel's frame values solve a small regularized least-squares
problem: consecutive frame differences should match the pixel's event
counts, damped by the per-frame weights. The per-pixel systems are
tridiagonal, so the whole grid solves in one fast batched pass. The
result is normalized to [0, 1] and written both as grayscale PGM and
false-color PPM images.
"""
import pathlib

from evframes import (CubeConfig, LambdaConfig, SensorGeometry,
                      SimulatorConfig, build_cube, colormap_frame,
                      compute_lambda, normalize, simulate_scene, solve_all,
                      write_pgm, write_ppm)
from evframes.simulate import sine_scene

geom = SensorGeometry(width=32, height=24)
signal = sine_scene(geom, n_samples=6000, duration=2.0,
                    amplitude=1.0, period=0.8, spatial_phase=0.17)
stream = simulate_scene(signal, SimulatorConfig(threshold=0.25, geometry=geom))

cube = build_cube(stream, CubeConfig(k=400, nu=len(stream)))
field = compute_lambda(cube, LambdaConfig(mode="sigmoid"))
stack = solve_all(cube, field)
print(f"reconstructed {stack.n_frames} frames, value range "
      f"[{stack.data.min():.4f}, {stack.data.max():.4f}]")

out = pathlib.Path("demo_frames")
out.mkdir(exist_ok=True)
norm = normalize(stack, mode="global")
for i, frame in norm.iter_frames():
    (out / f"frame_{i:06d}.pgm").write_bytes(write_pgm(frame))
    (out / f"frame_{i:06d}.ppm").write_bytes(write_ppm(colormap_frame(frame)))
print(f"wrote {2 * norm.n_frames} images to {out}/")
