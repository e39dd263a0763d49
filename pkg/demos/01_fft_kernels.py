# %% [markdown]
# # FFT kernels
#
# Three kernel families compute the same forward transform:
#
# * `stockham4` and `stockham8` ping-pong between two buffers, so the output
#   comes out in natural order without a separate reordering pass.
# * `ct8` works in place on split real/imaginary arrays. Its strided stages
#   run as 8x8 tile butterflies and the last stage writes digit-reversed.
#
# This script checks all three against numpy and shows the pieces.

# %%
import time

import numpy as np

from rdafuse.core import ComplexBuffer, Layout, convert_layout
from rdafuse.fft import (
    FftFamily, digit_reverse_permutation, fft_forward, fft_lines, ifft, lane_to_position,
    make_dft8, plan_fft, tile_butterfly_8x8,
)

rng = np.random.default_rng(0)
x = (rng.standard_normal(4096) + 1j * rng.standard_normal(4096)).astype(np.complex64)
ref = np.fft.fft(x.astype(np.complex128))

# %% Plans: radices, strides and whether a stage uses the tile butterfly
for family in FftFamily:
    plan = plan_fft(4096, family)
    stages = ", ".join(f"r{s.radix}/s{s.stride}{'*' if s.uses_tile_butterfly else ''}"
                       for s in plan.stages)
    print(f"{family.value:>10} ({plan.layout.name.lower()}): {stages}")

# %% Each family against numpy
for family in FftFamily:
    plan = plan_fft(4096, family)
    out = fft_forward(plan, ComplexBuffer.from_complex(x, plan.layout)).to_complex()
    err = np.abs(out - ref).max() / np.abs(ref).max()
    back = ifft(plan, fft_forward(plan, ComplexBuffer.from_complex(x, plan.layout))).to_complex()
    print(f"{family.value:>10}: rel err {err:.1e}, round trip {np.abs(back - x).max():.1e}")

# %% [markdown]
# The split layout holds all real parts, then all imaginary parts. Converting
# there and back is exact.

# %%
split = convert_layout(ComplexBuffer.from_complex(x[:4]), Layout.SPLIT)
print(split.data)
same = convert_layout(split, Layout.INTERLEAVED).data.tobytes() == x[:4].tobytes()
print("round trip bit-identical:", same)

# %% [markdown]
# The tile butterfly applies the 8-point DFT matrix to all eight columns of a
# tile as four real matrix products. The lane map assigns each of 32 lanes two
# adjacent cells of the 8x8 tile.

# %%
tile = rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8))
y_re, y_im = tile_butterfly_8x8(make_dft8(), tile.real.astype(np.float32), tile.imag.astype(np.float32))
print("tile vs column DFT:", np.abs(y_re + 1j * y_im - np.fft.fft(tile, axis=0)).max())

grid = np.full((8, 8), -1)
for lane in range(32):
    for r, c in lane_to_position(lane).cells:
        grid[r, c] = lane
print(grid)

print("digit reversal for n=64, first 10:", digit_reverse_permutation(64)[:10])

# %% Batched throughput on this machine
lines = (rng.standard_normal((256, 4096)) + 1j * rng.standard_normal((256, 4096))).astype(np.complex64)
for family in FftFamily:
    plan = plan_fft(4096, family)
    fft_lines(plan, lines)
    t0 = time.perf_counter()
    fft_lines(plan, lines)
    print(f"{family.value:>10}: {(time.perf_counter() - t0) / 256 * 1e6:.1f} us per 4096-point FFT")
