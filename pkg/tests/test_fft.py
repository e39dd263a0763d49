import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rdafuse.core import ComplexBuffer, Layout, convert_layout
from rdafuse.fft import (
    FftFamily, LaneOutOfRange, LayoutMismatch, LengthMismatch, StageDesc, StrideMismatch,
    UnsupportedLength, ct_dif_stage, digit_reverse_permutation, fft_forward, fft_lines,
    ifft, ifft_lines, lane_to_position, make_dft8, plan_fft, plan_for_length,
    plan_mixed_stockham, tile_butterfly_8x8,
)

from conftest import max_rel_error, naive_dft, random_complex

CASES = [(f, n) for f in FftFamily for n in (4, 8, 16, 64, 256, 512, 1024, 4096)
         if (n & (n - 1)) == 0 and n >= (4 if f is FftFamily.STOCKHAM_RADIX4 else 8)
         and (np.log2(n) % (2 if f is FftFamily.STOCKHAM_RADIX4 else 3) == 0)]


def run(plan, x):
    return fft_forward(plan, ComplexBuffer.from_complex(x, plan.layout)).to_complex()


def test_case_list_covers_every_family():
    assert {f for f, _ in CASES} == set(FftFamily)
    assert (FftFamily.CT_DIF_RADIX8, 4096) in CASES


def test_plan_stockham_radix4_4096_has_six_passes():
    plan = plan_fft(4096, "stockham4")
    assert [s.radix for s in plan.stages] == [4] * 6
    assert not any(s.uses_tile_butterfly for s in plan.stages)


def test_plan_ct_dif_strides():
    plan = plan_fft(4096, FftFamily.CT_DIF_RADIX8)
    assert [s.stride for s in plan.stages] == [512, 64, 8, 1]
    assert [s.uses_tile_butterfly for s in plan.stages] == [True, True, True, False]
    assert [s.stride for s in plan_fft(64, "ct8").stages] == [8, 1]


@pytest.mark.parametrize("family,n", CASES)
def test_plan_radices_multiply_to_n(family, n):
    plan = plan_fft(n, family)
    assert np.prod([s.radix for s in plan.stages]) == n


@pytest.mark.parametrize("family,n", [("stockham4", 512), ("stockham4", 8), ("ct8", 256),
                                      ("ct8", 1024), ("stockham8", 48), ("stockham8", 0)])
def test_plan_rejects_incompatible_lengths(family, n):
    with pytest.raises(UnsupportedLength):
        plan_fft(n, family)


def test_stage_desc_rejects_tile_on_stride_one():
    with pytest.raises(ValueError):
        StageDesc(8, 1, True)
    with pytest.raises(ValueError):
        StageDesc(4, 8, True)


@pytest.mark.parametrize("family", ["stockham8", "ct8"])
def test_impulse_and_constant(family):
    plan = plan_fft(8, family)
    imp = np.zeros(8, np.complex64)
    imp[0] = 1
    np.testing.assert_allclose(run(plan, imp), np.ones(8), atol=1e-6)
    c = np.complex64(0.5 - 2j)
    expect = np.zeros(8, complex)
    expect[0] = 8 * c
    np.testing.assert_allclose(run(plan, np.full(8, c, np.complex64)), expect, atol=1e-5)


@pytest.mark.parametrize("family,n", CASES)
def test_matches_naive_dft(family, n, rng):
    plan = plan_fft(n, family)
    x = random_complex(rng, n)
    assert max_rel_error(run(plan, x), naive_dft(x)[0]) <= 1e-4


@pytest.mark.parametrize("family,n", CASES)
def test_ifft_round_trip(family, n, rng):
    plan = plan_fft(n, family)
    x = random_complex(rng, n)
    buf = ComplexBuffer.from_complex(x, plan.layout)
    back = ifft(plan, fft_forward(plan, buf)).to_complex()
    assert np.abs(back - x).max() <= 1e-5


@pytest.mark.parametrize("family", ["stockham8", "ct8"])
def test_ifft_small_examples(family):
    plan = plan_fft(8, family)
    ones = ComplexBuffer.from_complex(np.ones(8), plan.layout)
    imp = np.zeros(8)
    imp[0] = 1
    np.testing.assert_allclose(ifft(plan, ones).to_complex(), imp, atol=1e-7)
    spike = ComplexBuffer.from_complex(8 * imp, plan.layout)
    np.testing.assert_allclose(ifft(plan, spike).to_complex(), np.ones(8), atol=1e-7)


def test_ifft_is_conj_fft_conj_composition(rng):
    plan = plan_fft(64, "stockham4")
    x = random_complex(rng, 64)
    via_ifft = ifft(plan, ComplexBuffer.from_complex(x)).to_complex()
    manual = np.conj(run(plan, np.conj(x))) * np.float32(1 / 64)
    assert via_ifft.tobytes() == manual.astype(np.complex64).tobytes()


def test_layout_and_length_checks(rng):
    plan = plan_fft(64, "ct8")
    with pytest.raises(LayoutMismatch):
        fft_forward(plan, ComplexBuffer.from_complex(np.zeros(64)))
    with pytest.raises(LengthMismatch):
        fft_forward(plan, ComplexBuffer.from_complex(np.zeros(8), Layout.SPLIT))
    with pytest.raises(LayoutMismatch):
        fft_forward(plan_fft(64, "stockham8"), ComplexBuffer.from_complex(np.zeros(64), Layout.SPLIT))


def test_dft8_matrix_structure():
    d = make_dft8()
    f = d.f_re.astype(np.float64) + 1j * d.f_im
    np.testing.assert_array_equal(f[0], np.ones(8))
    np.testing.assert_array_equal(f[:, 0], np.ones(8))
    assert np.abs(f @ f.conj().T - 8 * np.eye(8)).max() <= 1e-5
    assert d.f_re.dtype == np.float32


def test_tile_butterfly_impulses():
    d = make_dft8()
    x_re = np.zeros((8, 8), np.float32)
    x_im = np.zeros((8, 8), np.float32)
    x_re[0, 0] = 1
    y_re, y_im = tile_butterfly_8x8(d, x_re, x_im)
    np.testing.assert_allclose(y_re[:, 0], 1, atol=1e-7)
    np.testing.assert_allclose(y_im[:, 0], 0, atol=1e-7)
    y_re, y_im = tile_butterfly_8x8(d, x_im, x_re)
    np.testing.assert_allclose(y_re[:, 0], 0, atol=1e-7)
    np.testing.assert_allclose(y_im[:, 0], 1, atol=1e-7)


def test_tile_butterfly_columns_match_dft8(rng):
    x = random_complex(rng, (8, 8))
    y_re, y_im = tile_butterfly_8x8(make_dft8(), x.real, x.imag)
    assert y_re.dtype == np.float32
    ref = naive_dft(x.T).T
    assert np.abs(y_re + 1j * y_im - ref).max() <= 1e-5


def test_lane_mapping_examples():
    assert (lane_to_position(0).row, lane_to_position(0).col0) == (0, 0)
    p = lane_to_position(31)
    assert (p.row, p.col0) == (31 // 16 * 4 + (31 % 8) // 2, (31 // 8 % 2) * 4 + (31 % 2) * 2) == (7, 6)
    for bad in (-1, 32):
        with pytest.raises(LaneOutOfRange):
            lane_to_position(bad)


def test_lane_mapping_tiles_grid():
    cells = [c for lane in range(32) for c in lane_to_position(lane).cells]
    assert len(set(cells)) == 64
    assert set(cells) == set(itertools.product(range(8), range(8)))
    assert all(lane_to_position(l).col0 % 2 == 0 for l in range(32))


def test_digit_reversal():
    np.testing.assert_array_equal(digit_reverse_permutation(8), np.arange(8))
    rev = digit_reverse_permutation(64)
    assert rev[1] == 8 and rev[8] == 1 and rev[9] == 9 and rev[10] == 17
    rev = digit_reverse_permutation(4096)
    np.testing.assert_array_equal(rev[rev], np.arange(4096))
    with pytest.raises(UnsupportedLength):
        digit_reverse_permutation(32)


def _split(x):
    return convert_layout(ComplexBuffer.from_complex(x), Layout.SPLIT)


def test_ct_stage_single_stage_is_dft8(rng):
    plan = plan_fft(8, "ct8")
    x = random_complex(rng, 8)
    buf = ct_dif_stage(_split(x), plan.stages[0], plan.twiddles)
    assert np.abs(buf.to_complex() - naive_dft(x)[0]).max() <= 1e-5


def test_ct_stages_then_reversal_match_dft(rng):
    plan = plan_fft(64, "ct8")
    x = random_complex(rng, 64)
    buf = _split(x)
    for stage in plan.stages:
        ct_dif_stage(buf, stage, plan.twiddles)
    out = buf.to_complex()[digit_reverse_permutation(64)]
    assert np.abs(out - naive_dft(x)[0]).max() <= 1e-5


def test_ct_stages_4096_match_stockham(rng):
    plan = plan_fft(4096, "ct8")
    x = random_complex(rng, 4096)
    buf = _split(x)
    for stage in plan.stages:
        ct_dif_stage(buf, stage, plan.twiddles)
    staged = buf.to_complex()[plan.permutation]
    fused_final = run(plan, x)
    stockham = run(plan_fft(4096, "stockham4"), x)
    assert max_rel_error(staged, stockham) <= 1e-4
    assert max_rel_error(fused_final, stockham) <= 1e-4


def test_ct_stage_rejects_bad_stride():
    plan = plan_fft(64, "ct8")
    with pytest.raises(StrideMismatch):
        ct_dif_stage(_split(np.zeros(64)), StageDesc(8, 16), plan.twiddles)
    with pytest.raises(LayoutMismatch):
        ct_dif_stage(ComplexBuffer.from_complex(np.zeros(64)), plan.stages[0], plan.twiddles)


@pytest.mark.parametrize("n", [64, 512, 4096])
def test_kernel_families_agree(n, rng):
    x = random_complex(rng, n)
    outs = [run(plan_fft(n, f), x) for f in ("stockham8", "ct8")]
    if n in (64, 4096):
        outs.append(run(plan_fft(n, "stockham4"), x))
    for other in outs[1:]:
        assert max_rel_error(other, outs[0]) <= 1e-4


@pytest.mark.parametrize("family", list(FftFamily))
@pytest.mark.parametrize("workers", [1, 3])
def test_fft_lines_matches_single_transforms(family, workers, rng):
    plan = plan_fft(64, family)
    lines = random_complex(rng, (5, 64))
    got = fft_lines(plan, lines, workers)
    for row in range(5):
        assert got[row].tobytes() == run(plan, lines[row]).tobytes()
    back = ifft_lines(plan, got)
    assert np.abs(back - lines).max() <= 1e-5


@settings(max_examples=25, deadline=None)
@given(n=st.sampled_from([64, 512, 4096]), seed=st.integers(0, 2**32 - 1),
       family=st.sampled_from(list(FftFamily)))
def test_linearity_and_parseval(n, seed, family):
    if family is FftFamily.STOCKHAM_RADIX4 and n == 512:
        family = FftFamily.STOCKHAM_RADIX8
    plan = plan_fft(n, family)
    rng = np.random.default_rng(seed)
    x, y = random_complex(rng, n), random_complex(rng, n)
    a, b = complex(*rng.uniform(-1, 1, 2)), complex(*rng.uniform(-1, 1, 2))
    lhs = run(plan, (a * x + b * y).astype(np.complex64))
    rhs = a * run(plan, x).astype(complex) + b * run(plan, y).astype(complex)
    assert max_rel_error(lhs, rhs) <= 1e-4
    X = run(plan, x).astype(np.complex128)
    energy = np.sum(np.abs(x.astype(np.complex128)) ** 2)
    assert abs(energy - np.sum(np.abs(X) ** 2) / n) <= 1e-3 * energy


@pytest.mark.parametrize("n", [4, 32, 128, 2048])
def test_mixed_stockham_covers_other_powers_of_two(n, rng):
    plan = plan_for_length(n)
    assert plan.family is FftFamily.STOCKHAM_RADIX8 or n == 4
    x = random_complex(rng, n)
    assert max_rel_error(run(plan, x), naive_dft(x)[0]) <= 1e-4
    with pytest.raises(UnsupportedLength):
        plan_mixed_stockham(n + 1 if n > 4 else 2)
