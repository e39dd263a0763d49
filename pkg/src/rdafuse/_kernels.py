"""Compiled line kernels.

Every kernel works in float32. Interleaved lines are handled through their
float32 view (``2*n`` values, re/im adjacent); the Cooley-Tukey kernels work on
split real/imaginary arrays. Row-range kernels take ``lo``/``hi`` so the caller
can hand disjoint row chunks to worker threads; they release the GIL.

Plan arguments travel as one positional bundle::

    family, radices, strides, tw_re, tw_im, f_re, f_im, rev

``family`` is 0 for Stockham and 1 for the split-layout CT-DIF kernel.
"""

import numpy as np
from numba import njit

STOCKHAM = 0
CT_DIF = 1

_opts = dict(cache=True, nogil=True, error_model="numpy")


@njit(**_opts)
def stockham_pass(src, dst, l, s, r, tw_re, tw_im, f_re, f_im, ar, ai):
    """One out-of-place autosort pass; ``l`` is the current sub-length, ``n = l*s``."""
    m = l // r
    if r == 4:
        for p in range(m):
            w1r = tw_re[p * s]
            w1i = tw_im[p * s]
            w2r = tw_re[2 * p * s]
            w2i = tw_im[2 * p * s]
            w3r = tw_re[3 * p * s]
            w3i = tw_im[3 * p * s]
            for q in range(s):
                i0 = 2 * (q + s * p)
                i1 = 2 * (q + s * (p + m))
                i2 = 2 * (q + s * (p + 2 * m))
                i3 = 2 * (q + s * (p + 3 * m))
                t0r = src[i0] + src[i2]
                t0i = src[i0 + 1] + src[i2 + 1]
                t1r = src[i0] - src[i2]
                t1i = src[i0 + 1] - src[i2 + 1]
                t2r = src[i1] + src[i3]
                t2i = src[i1 + 1] + src[i3 + 1]
                # -i * (a1 - a3)
                t3r = src[i1 + 1] - src[i3 + 1]
                t3i = src[i3] - src[i1]
                o = 2 * (q + s * 4 * p)
                step = 2 * s
                dst[o] = t0r + t2r
                dst[o + 1] = t0i + t2i
                yr = t1r + t3r
                yi = t1i + t3i
                dst[o + step] = yr * w1r - yi * w1i
                dst[o + step + 1] = yr * w1i + yi * w1r
                yr = t0r - t2r
                yi = t0i - t2i
                dst[o + 2 * step] = yr * w2r - yi * w2i
                dst[o + 2 * step + 1] = yr * w2i + yi * w2r
                yr = t1r - t3r
                yi = t1i - t3i
                dst[o + 3 * step] = yr * w3r - yi * w3i
                dst[o + 3 * step + 1] = yr * w3i + yi * w3r
    else:
        for p in range(m):
            for q in range(s):
                for j in range(8):
                    ar[j] = src[2 * (q + s * (p + j * m))]
                    ai[j] = src[2 * (q + s * (p + j * m)) + 1]
                for k in range(8):
                    yr = np.float32(0.0)
                    yi = np.float32(0.0)
                    for j in range(8):
                        yr += f_re[k, j] * ar[j] - f_im[k, j] * ai[j]
                        yi += f_re[k, j] * ai[j] + f_im[k, j] * ar[j]
                    widx = p * k * s
                    wr = tw_re[widx]
                    wi = tw_im[widx]
                    o = 2 * (q + s * (8 * p + k))
                    dst[o] = yr * wr - yi * wi
                    dst[o + 1] = yr * wi + yi * wr


@njit(**_opts)
def stockham_line(buf, scratch, radices, tw_re, tw_im, f_re, f_im, ar, ai):
    """Forward FFT of one interleaved line (float32 view), result left in ``buf``."""
    n = buf.shape[0] // 2
    src = buf
    dst = scratch
    l = n
    s = 1
    for st in range(radices.shape[0]):
        r = radices[st]
        stockham_pass(src, dst, l, s, r, tw_re, tw_im, f_re, f_im, ar, ai)
        l //= r
        s *= r
        src, dst = dst, src
    if radices.shape[0] % 2 == 1:
        buf[:] = scratch


@njit(**_opts)
def tile_butterfly(f_re, f_im, x_re, x_im, y_re, y_im):
    """Y = F X on 8x8 tiles as four real matrix products."""
    for i in range(8):
        for c in range(8):
            rr = np.float32(0.0)
            ii = np.float32(0.0)
            ri = np.float32(0.0)
            ir = np.float32(0.0)
            for k in range(8):
                rr += f_re[i, k] * x_re[k, c]
                ii += f_im[i, k] * x_im[k, c]
                ri += f_re[i, k] * x_im[k, c]
                ir += f_im[i, k] * x_re[k, c]
            y_re[i, c] = rr - ii
            y_im[i, c] = ri + ir


@njit(**_opts)
def ct_stage(re, im, stride, tw_re, tw_im, f_re, f_im, x_re, x_im, y_re, y_im):
    """In-place radix-8 DIF stage with post-butterfly twiddles W_{8S}^{j*m}."""
    n = re.shape[0]
    span = 8 * stride
    tstep = n // span
    if stride >= 8:
        for b in range(0, n, span):
            for j0 in range(0, stride, 8):
                for t in range(8):
                    base = b + j0 + stride * t
                    for c in range(8):
                        x_re[t, c] = re[base + c]
                        x_im[t, c] = im[base + c]
                tile_butterfly(f_re, f_im, x_re, x_im, y_re, y_im)
                for m in range(8):
                    base = b + j0 + stride * m
                    for c in range(8):
                        widx = (j0 + c) * m * tstep
                        wr = tw_re[widx]
                        wi = tw_im[widx]
                        yr = y_re[m, c]
                        yi = y_im[m, c]
                        re[base + c] = yr * wr - yi * wi
                        im[base + c] = yr * wi + yi * wr
    else:
        for b in range(0, n, span):
            for j in range(stride):
                for t in range(8):
                    x_re[0, t] = re[b + j + stride * t]
                    x_im[0, t] = im[b + j + stride * t]
                for m in range(8):
                    yr = np.float32(0.0)
                    yi = np.float32(0.0)
                    for t in range(8):
                        yr += f_re[m, t] * x_re[0, t] - f_im[m, t] * x_im[0, t]
                        yi += f_re[m, t] * x_im[0, t] + f_im[m, t] * x_re[0, t]
                    widx = j * m * tstep
                    wr = tw_re[widx]
                    wi = tw_im[widx]
                    re[b + j + stride * m] = yr * wr - yi * wi
                    im[b + j + stride * m] = yr * wi + yi * wr


@njit(**_opts)
def ct_final_stage(re, im, out_re, out_im, rev, f_re, f_im, x_re, x_im):
    """Stride-1 scalar butterfly fused with the digit-reversal store."""
    n = re.shape[0]
    for b in range(0, n, 8):
        for t in range(8):
            x_re[0, t] = re[b + t]
            x_im[0, t] = im[b + t]
        for m in range(8):
            yr = np.float32(0.0)
            yi = np.float32(0.0)
            for t in range(8):
                yr += f_re[m, t] * x_re[0, t] - f_im[m, t] * x_im[0, t]
                yi += f_re[m, t] * x_im[0, t] + f_im[m, t] * x_re[0, t]
            dest = rev[b + m]
            out_re[dest] = yr
            out_im[dest] = yi


@njit(**_opts)
def ct_forward_split(re, im, out_re, out_im, strides, tw_re, tw_im, f_re, f_im, rev,
                     x_re, x_im, y_re, y_im):
    """All CT-DIF stages; ``re``/``im`` are overwritten, natural-order result in ``out_*``."""
    nst = strides.shape[0]
    for st in range(nst - 1):
        ct_stage(re, im, strides[st], tw_re, tw_im, f_re, f_im, x_re, x_im, y_re, y_im)
    ct_final_stage(re, im, out_re, out_im, rev, f_re, f_im, x_re, x_im)


@njit(**_opts)
def _line_forward(tile, scratch, sre, sim, ore, oim, x_re, x_im, y_re, y_im, ar, ai,
                  family, radices, strides, tw_re, tw_im, f_re, f_im, rev):
    """Forward FFT of an interleaved line held in ``tile``; result back in ``tile``."""
    if family == STOCKHAM:
        stockham_line(tile, scratch, radices, tw_re, tw_im, f_re, f_im, ar, ai)
    else:
        n = sre.shape[0]
        for k in range(n):
            sre[k] = tile[2 * k]
            sim[k] = tile[2 * k + 1]
        ct_forward_split(sre, sim, ore, oim, strides, tw_re, tw_im, f_re, f_im, rev,
                         x_re, x_im, y_re, y_im)
        for k in range(n):
            tile[2 * k] = ore[k]
            tile[2 * k + 1] = oim[k]


@njit(**_opts)
def _alloc(n):
    tile = np.empty(2 * n, dtype=np.float32)
    scratch = np.empty(2 * n, dtype=np.float32)
    sre = np.empty(n, dtype=np.float32)
    sim = np.empty(n, dtype=np.float32)
    ore = np.empty(n, dtype=np.float32)
    oim = np.empty(n, dtype=np.float32)
    x_re = np.empty((8, 8), dtype=np.float32)
    x_im = np.empty((8, 8), dtype=np.float32)
    y_re = np.empty((8, 8), dtype=np.float32)
    y_im = np.empty((8, 8), dtype=np.float32)
    ar = np.empty(8, dtype=np.float32)
    ai = np.empty(8, dtype=np.float32)
    return tile, scratch, sre, sim, ore, oim, x_re, x_im, y_re, y_im, ar, ai


@njit(**_opts)
def fft_rows(src, dst, lo, hi, family, radices, strides, tw_re, tw_im, f_re, f_im, rev):
    """Forward FFT of rows ``lo:hi``; ``src``/``dst`` are (rows, 2n) float32 views."""
    n = src.shape[1] // 2
    tile, scratch, sre, sim, ore, oim, x_re, x_im, y_re, y_im, ar, ai = _alloc(n)
    for row in range(lo, hi):
        tile[:] = src[row]
        _line_forward(tile, scratch, sre, sim, ore, oim, x_re, x_im, y_re, y_im, ar, ai,
                      family, radices, strides, tw_re, tw_im, f_re, f_im, rev)
        dst[row] = tile


@njit(**_opts)
def multiply_rows(src, filt, dst, lo, hi):
    """Pointwise complex product with one filter row (broadcast) or one per row."""
    n = src.shape[1] // 2
    per_row = filt.shape[0] > 1
    for row in range(lo, hi):
        h = filt[row] if per_row else filt[0]
        for k in range(n):
            a = src[row, 2 * k]
            b = src[row, 2 * k + 1]
            c = h[2 * k]
            d = h[2 * k + 1]
            dst[row, 2 * k] = a * c - b * d
            dst[row, 2 * k + 1] = a * d + b * c


@njit(**_opts)
def conj_rows(src, dst, lo, hi):
    n = src.shape[1] // 2
    for row in range(lo, hi):
        for k in range(n):
            dst[row, 2 * k] = src[row, 2 * k]
            dst[row, 2 * k + 1] = -src[row, 2 * k + 1]


@njit(**_opts)
def conj_scale_rows(src, dst, scale, lo, hi):
    n = src.shape[1] // 2
    for row in range(lo, hi):
        for k in range(n):
            dst[row, 2 * k] = src[row, 2 * k] * scale
            dst[row, 2 * k + 1] = -src[row, 2 * k + 1] * scale


@njit(**_opts)
def fused_rows(src, filt, dst, with_fft, lo, hi,
               family, radices, strides, tw_re, tw_im, f_re, f_im, rev):
    """Per line: load, [forward FFT], multiply, conj-FFT-conj with 1/N folded into the store.

    Only one line-sized buffer (``tile``) plus kernel scratch is live per line;
    nothing intermediate is written to scene-sized storage.
    """
    n = src.shape[1] // 2
    scale = np.float32(1.0) / np.float32(n)
    per_row = filt.shape[0] > 1
    tile, scratch, sre, sim, ore, oim, x_re, x_im, y_re, y_im, ar, ai = _alloc(n)
    for row in range(lo, hi):
        tile[:] = src[row]
        if with_fft:
            _line_forward(tile, scratch, sre, sim, ore, oim, x_re, x_im, y_re, y_im, ar, ai,
                          family, radices, strides, tw_re, tw_im, f_re, f_im, rev)
        h = filt[row] if per_row else filt[0]
        for k in range(n):
            a = tile[2 * k]
            b = tile[2 * k + 1]
            c = h[2 * k]
            d = h[2 * k + 1]
            tile[2 * k] = a * c - b * d
            tile[2 * k + 1] = -(a * d + b * c)
        _line_forward(tile, scratch, sre, sim, ore, oim, x_re, x_im, y_re, y_im, ar, ai,
                      family, radices, strides, tw_re, tw_im, f_re, f_im, rev)
        for k in range(n):
            dst[row, 2 * k] = tile[2 * k] * scale
            dst[row, 2 * k + 1] = -tile[2 * k + 1] * scale


@njit(**_opts)
def rcmc_rows(src, dst, shift, taps, lo, hi):
    """Hann-weighted sinc resampling of each row at ``col + shift[row, col]``.

    Integer shifts relocate samples exactly; taps outside the row are zero.
    Tap weights are normalized to unit sum.
    """
    n = src.shape[1] // 2
    half = taps // 2
    # Tap t sits at distance frac + e[t] from the sample, e[t] = half - 1 - t.
    sign = np.empty(taps)
    ce = np.empty(taps)
    se = np.empty(taps)
    for t in range(taps):
        e = half - 1 - t
        sign[t] = 1.0 if e % 2 == 0 else -1.0
        ce[t] = np.cos(np.pi * e / half)
        se[t] = np.sin(np.pi * e / half)
    for row in range(lo, hi):
        for col in range(n):
            pos = col + shift[row, col]
            i0 = np.int64(np.floor(pos))
            frac = pos - i0
            if frac == 0.0:
                if 0 <= i0 < n:
                    dst[row, 2 * col] = src[row, 2 * i0]
                    dst[row, 2 * col + 1] = src[row, 2 * i0 + 1]
                else:
                    dst[row, 2 * col] = 0.0
                    dst[row, 2 * col + 1] = 0.0
                continue
            s_pi = np.sin(np.pi * frac)
            c_h = np.cos(np.pi * frac / half)
            s_h = np.sin(np.pi * frac / half)
            acc_r = 0.0
            acc_i = 0.0
            wsum = 0.0
            k0 = i0 - half + 1
            for t in range(taps):
                d = frac + (half - 1 - t)
                w = sign[t] * s_pi / (np.pi * d) * 0.5 * (1.0 + c_h * ce[t] - s_h * se[t])
                wsum += w
                k = k0 + t
                if 0 <= k < n:
                    acc_r += w * src[row, 2 * k]
                    acc_i += w * src[row, 2 * k + 1]
            dst[row, 2 * col] = acc_r / wsum
            dst[row, 2 * col + 1] = acc_i / wsum
