"""Run the end-to-end pipeline: simulate, write events, reconstruct, report.

This mirrors what the `evframes` command-line tool does: events go to a
text file, then the reconstruction pipeline reads them back, builds the
cube, computes weights, solves every pixel, and renders frames into an
output directory alongside a plain-text run report.
"""
import pathlib

from evframes import (CubeConfig, LambdaConfig, ReconstructionConfig,
                      SceneSpec, SensorGeometry, SimulatorConfig,
                      run_reconstruct, run_simulate)

work = pathlib.Path("demo_pipeline")
sim_dir = work / "sim"
rec_dir = work / "frames"

geom = SensorGeometry(width=16, height=12)
scene = SceneSpec(kind="sine", n_samples=3000, duration=1.5,
                  amplitude=0.9, period=0.6, spatial_phase=0.23)
stream, events_path, truth_path = run_simulate(
    scene, SimulatorConfig(threshold=0.3, geometry=geom), str(sim_dir))
print(f"simulated {len(stream)} events -> {events_path}")

config = ReconstructionConfig(
    cube=CubeConfig(k=64, nu=len(stream)),
    lam=LambdaConfig(mode="max_abs", epsilon=0.5),
    normalization="global",
    color="colormap",
    out_dir=str(rec_dir),
)
report = run_reconstruct(stream, config)
print(f"reconstructed {report.n_frames} frames -> {rec_dir}/")
print("--- report ---")
for line in report.lines():
    print(line)
