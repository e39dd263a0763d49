"""FFT kernel families: Stockham autosort (interleaved) and in-place CT-DIF radix-8 (split).

Forward transforms use ``X[k] = sum_j x[j] exp(-2j*pi*j*k/n)``. The inverse is
always built from the forward kernel as ``conj(fft(conj(x))) / n``.
"""

from __future__ import annotations

import enum
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import _kernels
from .core import ComplexBuffer, Layout, TwiddleTable, is_power_of_two, make_twiddles


class UnsupportedLength(ValueError):
    pass


class LengthMismatch(ValueError):
    pass


class LayoutMismatch(ValueError):
    pass


class StrideMismatch(ValueError):
    pass


class LaneOutOfRange(ValueError):
    pass


class FftFamily(str, enum.Enum):
    STOCKHAM_RADIX4 = "stockham4"
    STOCKHAM_RADIX8 = "stockham8"
    CT_DIF_RADIX8 = "ct8"

    @property
    def layout(self) -> Layout:
        return Layout.SPLIT if self is FftFamily.CT_DIF_RADIX8 else Layout.INTERLEAVED


@dataclass(frozen=True)
class StageDesc:
    radix: int
    stride: int
    uses_tile_butterfly: bool = False

    def __post_init__(self):
        if self.radix not in (4, 8):
            raise ValueError(f"radix must be 4 or 8, got {self.radix}")
        if self.uses_tile_butterfly and not (self.radix == 8 and self.stride > 1):
            raise ValueError("tile butterfly needs radix 8 and stride > 1")


@dataclass(frozen=True)
class Dft8Matrix:
    """8-point DFT matrix split into real and imaginary float32 parts."""

    f_re: np.ndarray
    f_im: np.ndarray


def make_dft8() -> Dft8Matrix:
    jk = np.outer(np.arange(8), np.arange(8)) % 8
    theta = -2.0 * np.pi * jk / 8
    f_re = np.cos(theta)
    f_im = np.sin(theta)
    # Snap the +-1, 0 and +-sqrt(1/2) entries so symmetric rows cancel exactly.
    f_re[np.abs(f_re) < 1e-12] = 0.0
    f_im[np.abs(f_im) < 1e-12] = 0.0
    return Dft8Matrix(f_re.astype(np.float32), f_im.astype(np.float32))


_DFT8 = make_dft8()


@dataclass(frozen=True)
class LanePosition:
    lane: int
    row: int
    col0: int

    @property
    def cells(self) -> tuple[tuple[int, int], tuple[int, int]]:
        """Grid cells of thread element 0 and element 1."""
        return (self.row, self.col0), (self.row, self.col0 + 1)


def lane_to_position(lane: int) -> LanePosition:
    """Where a 32-wide SIMD lane's two elements sit inside an 8x8 matrix tile."""
    if not 0 <= lane <= 31:
        raise LaneOutOfRange(f"lane {lane} outside 0..31")
    row = (lane // 16) * 4 + (lane % 8) // 2
    col0 = ((lane // 8) % 2) * 4 + (lane % 2) * 2
    return LanePosition(lane, row, col0)


def tile_butterfly_8x8(dft: Dft8Matrix, x_re: np.ndarray, x_im: np.ndarray):
    """DFT every column of an 8x8 complex tile with four real matrix products.

    Returns ``(y_re, y_im)`` where ``y_re = F_re X_re - F_im X_im`` and
    ``y_im = F_re X_im + F_im X_re``, all float32.
    """
    x_re = np.asarray(x_re, dtype=np.float32)
    x_im = np.asarray(x_im, dtype=np.float32)
    if x_re.shape != (8, 8) or x_im.shape != (8, 8):
        raise ValueError("tile inputs must be 8x8")
    y_re = dft.f_re @ x_re - dft.f_im @ x_im
    y_im = dft.f_re @ x_im + dft.f_im @ x_re
    return y_re, y_im


def _log(n: int, radix: int) -> int | None:
    m = 0
    while n > 1 and n % radix == 0:
        n //= radix
        m += 1
    return m if n == 1 and m > 0 else None


def digit_reverse_permutation(n: int, radix: int = 8) -> np.ndarray:
    """Index map reversing the base-``radix`` digits of every index below ``n``."""
    m = _log(n, radix)
    if m is None:
        raise UnsupportedLength(f"n={n} is not a positive power of {radix}")
    k = np.arange(n)
    out = np.zeros(n, dtype=np.int64)
    rest = k.copy()
    for _ in range(m):
        out = out * radix + rest % radix
        rest //= radix
    return out


@dataclass(frozen=True, eq=False)
class FftPlan:
    n: int
    family: FftFamily
    stages: tuple[StageDesc, ...]
    twiddles: TwiddleTable
    permutation: np.ndarray | None = None

    @property
    def layout(self) -> Layout:
        return self.family.layout

    @cached_property
    def kernel_args(self) -> tuple:
        radices = np.array([s.radix for s in self.stages], dtype=np.int64)
        strides = np.array([s.stride for s in self.stages], dtype=np.int64)
        rev = self.permutation if self.permutation is not None else np.zeros(1, np.int64)
        code = _kernels.CT_DIF if self.family is FftFamily.CT_DIF_RADIX8 else _kernels.STOCKHAM
        return (code, radices, strides, self.twiddles.re, self.twiddles.im,
                _DFT8.f_re, _DFT8.f_im, rev)


def plan_fft(n: int, family: FftFamily | str) -> FftPlan:
    family = FftFamily(family)
    radix = 4 if family is FftFamily.STOCKHAM_RADIX4 else 8
    m = _log(n, radix) if is_power_of_two(n) else None
    if m is None:
        raise UnsupportedLength(f"{family.value} needs n = {radix}^m, got {n}")
    twiddles = make_twiddles(n)
    if family is FftFamily.CT_DIF_RADIX8:
        strides = [n // 8 ** (i + 1) for i in range(m)]
        stages = tuple(StageDesc(8, s, s > 1) for s in strides)
        return FftPlan(n, family, stages, twiddles, digit_reverse_permutation(n, 8))
    stages = tuple(StageDesc(radix, radix ** i) for i in range(m))
    return FftPlan(n, family, stages, twiddles)


def plan_mixed_stockham(n: int) -> FftPlan:
    """Stockham plan for any ``2^k`` with ``k >= 2``: radix-8 passes, then radix-4 passes.

    ``k = 3b + 2a`` always has a solution, so every power of two from 4 up is covered.
    """
    if not (is_power_of_two(n) and n >= 4):
        raise UnsupportedLength(f"mixed Stockham needs a power of two >= 4, got {n}")
    k = n.bit_length() - 1
    eights = k // 3
    while (k - 3 * eights) % 2:
        eights -= 1
    radices = [8] * eights + [4] * ((k - 3 * eights) // 2)
    stages, s = [], 1
    for r in radices:
        stages.append(StageDesc(r, s))
        s *= r
    return FftPlan(n, FftFamily.STOCKHAM_RADIX8, tuple(stages), make_twiddles(n))


def plan_for_length(n: int, family: FftFamily | str | None = None) -> FftPlan:
    """Plan for a pipeline line.

    Without a family, radix-4 Stockham is preferred, then radix-8, then a
    mixed 8/4 Stockham plan for lengths that are neither.
    """
    if family is not None:
        return plan_fft(n, family)
    for fam in (FftFamily.STOCKHAM_RADIX4, FftFamily.STOCKHAM_RADIX8):
        try:
            return plan_fft(n, fam)
        except UnsupportedLength:
            pass
    return plan_mixed_stockham(n)


def _check(plan: FftPlan, buf: ComplexBuffer) -> None:
    if buf.n != plan.n:
        raise LengthMismatch(f"buffer has {buf.n} samples, plan expects {plan.n}")
    if buf.layout != plan.layout:
        raise LayoutMismatch(f"{plan.family.value} runs on {plan.layout.name} buffers")


def _ct_scratch(n):
    return tuple(np.empty((8, 8), np.float32) for _ in range(4))


def fft_forward(plan: FftPlan, buf: ComplexBuffer) -> ComplexBuffer:
    _check(plan, buf)
    _, radices, strides, tw_re, tw_im, f_re, f_im, rev = plan.kernel_args
    if plan.family is FftFamily.CT_DIF_RADIX8:
        work = buf.data.copy()
        out = np.empty_like(work)
        _kernels.ct_forward_split(work[0], work[1], out[0], out[1], strides, tw_re, tw_im,
                                  f_re, f_im, rev, *_ct_scratch(plan.n))
        return ComplexBuffer(out, Layout.SPLIT)
    line = buf.data.copy().view(np.float32)
    scratch = np.empty_like(line)
    _kernels.stockham_line(line, scratch, radices, tw_re, tw_im, f_re, f_im,
                           np.empty(8, np.float32), np.empty(8, np.float32))
    return ComplexBuffer(line.view(np.complex64), Layout.INTERLEAVED)


def _conj(buf: ComplexBuffer) -> ComplexBuffer:
    if buf.layout == Layout.INTERLEAVED:
        return ComplexBuffer(np.conj(buf.data), buf.layout)
    return ComplexBuffer(np.stack([buf.data[0], -buf.data[1]]), buf.layout)


def ifft(plan: FftPlan, buf: ComplexBuffer) -> ComplexBuffer:
    """Inverse transform reusing the forward kernel between two conjugations."""
    _check(plan, buf)
    spec = fft_forward(plan, _conj(buf))
    scale = np.float32(1.0 / plan.n)
    if spec.layout == Layout.INTERLEAVED:
        return ComplexBuffer(np.conj(spec.data) * scale, Layout.INTERLEAVED)
    return ComplexBuffer(np.stack([spec.data[0] * scale, -spec.data[1] * scale]), Layout.SPLIT)


def ct_dif_stage(buf: ComplexBuffer, stage: StageDesc, twiddles: TwiddleTable) -> ComplexBuffer:
    """Run one radix-8 DIF stage in place on a split buffer and return it.

    Output stays in the stage's in-place order; after the last stage the
    samples are in base-8 digit-reversed order.
    """
    if buf.layout != Layout.SPLIT:
        raise LayoutMismatch("CT-DIF stages run on split buffers")
    if stage.radix != 8 or buf.n % (8 * stage.stride) or twiddles.n != buf.n:
        raise StrideMismatch(f"stride {stage.stride} does not divide n={buf.n} into radix-8 blocks")
    x_re, x_im, y_re, y_im = _ct_scratch(buf.n)
    _kernels.ct_stage(buf.data[0], buf.data[1], stage.stride, twiddles.re, twiddles.im,
                      _DFT8.f_re, _DFT8.f_im, x_re, x_im, y_re, y_im)
    return buf


def row_chunks(rows: int, workers: int) -> list[tuple[int, int]]:
    workers = max(1, min(workers, rows))
    edges = np.linspace(0, rows, workers + 1).astype(int)
    return [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]


def run_rows(kernel, rows: int, workers: int, head: tuple, tail: tuple = ()) -> None:
    """Call ``kernel(*head, lo, hi, *tail)`` over disjoint row chunks.

    Each row is touched by exactly one chunk, so the result does not depend
    on ``workers``.
    """
    chunks = row_chunks(rows, workers)
    if len(chunks) == 1:
        kernel(*head, *chunks[0], *tail)
        return
    with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
        for fut in [pool.submit(kernel, *head, lo, hi, *tail) for lo, hi in chunks]:
            fut.result()


def fft_lines(plan: FftPlan, lines: np.ndarray, workers: int = 1) -> np.ndarray:
    """Forward FFT of every row of a (rows, n) complex64 array, any family."""
    lines = np.ascontiguousarray(lines, dtype=np.complex64)
    if lines.ndim != 2 or lines.shape[1] != plan.n:
        raise LengthMismatch(f"expected (rows, {plan.n}) lines, got {lines.shape}")
    out = np.empty_like(lines)
    src = lines.view(np.float32)
    dst = out.view(np.float32)
    run_rows(_kernels.fft_rows, lines.shape[0], workers, (src, dst), plan.kernel_args)
    return out


def ifft_lines(plan: FftPlan, lines: np.ndarray, workers: int = 1) -> np.ndarray:
    spec = fft_lines(plan, np.conj(lines), workers)
    return np.conj(spec) * np.float32(1.0 / plan.n)
