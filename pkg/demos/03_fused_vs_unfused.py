# %% [markdown]
# # Fused versus unfused execution
#
# Both executors run the same per-line kernels. The fused one loads a line
# into a tile-sized buffer, transforms, multiplies, inverse-transforms and
# stores it in one pass. The unfused one writes every intermediate back to a
# scene-sized array. The traffic ledger counts the line transfers.

# %%
import numpy as np

from rdafuse.quality import l2_relative_error
from rdafuse.rda import STEPS, Mode, benchmark_pipeline, build_stage_plan, run_pipeline
from rdafuse.sar_sim import SarGeometry, default_targets, fit_pulse, simulate_scene

N = 512
geom = fit_pulse(SarGeometry(), N)
scene = simulate_scene(geom, default_targets(geom, N, N), N, N, seed=7)

# %% Stage graphs
for mode in Mode:
    print(mode.value)
    for s in build_stage_plan(mode):
        print(f"   {s.step:<20} {s.kind.value:<11} {'+'.join(s.ops)}")

# %% Ledger: transfers per line and bytes per step
runs = {m: run_pipeline(scene, geom, m) for m in Mode}
print(f"{'step':<20} {'fused':>12} {'unfused':>12}")
for step in STEPS:
    f, u = (runs[m].ledger for m in Mode)
    print(f"{step:<20} {f.bytes(step):>12,} {u.bytes(step):>12,}")
for m in Mode:
    per_line = runs[m].ledger.transfers("range_compression") / N
    print(f"{m.value}: {per_line:g} range-compression transfers per line")

# %% The images agree bit for bit
a, b = (runs[m].image.data for m in Mode)
print("L2 relative error:", l2_relative_error(a, b), "identical:", a.tobytes() == b.tobytes())

# %% Timing, median of 5 runs after a warm-up
for m in Mode:
    t = benchmark_pipeline(scene, geom, m, reps=5)
    print(f"{m.value:>8}: " + ", ".join(f"{k} {v:.1f}" for k, v in t.items()) + " ms")
