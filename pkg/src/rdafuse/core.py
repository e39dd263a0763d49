"""Complex sample storage, memory layouts, twiddle tables and the scene file format."""

from __future__ import annotations

import enum
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

# One threadgroup's worth of on-chip memory: 4096 complex float32 values.
TILE_BYTES = 32768
COMPLEX_BYTES = 8

SCENE_MAGIC = b"SARC"
_HEADER = struct.Struct("<4sIII")


class Layout(enum.IntEnum):
    """Storage order of complex samples."""

    INTERLEAVED = 0
    SPLIT = 1


def is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class ComplexBuffer:
    """``n`` complex float32 samples in either layout.

    Interleaved data is a ``complex64`` array of shape ``(n,)`` (re, im pairs
    adjacent in memory). Split data is a ``float32`` array of shape ``(2, n)``
    with every real part in row 0 and every imaginary part in row 1.
    """

    data: np.ndarray
    layout: Layout

    def __post_init__(self):
        if self.layout == Layout.INTERLEAVED:
            if self.data.dtype != np.complex64 or self.data.ndim != 1:
                raise ValueError("interleaved buffers hold a 1-D complex64 array")
        else:
            if self.data.dtype != np.float32 or self.data.ndim != 2 or self.data.shape[0] != 2:
                raise ValueError("split buffers hold a (2, n) float32 array")
        if self.n < 1:
            raise ValueError("buffer must hold at least one sample")

    @property
    def n(self) -> int:
        return self.data.shape[-1]

    @property
    def nbytes(self) -> int:
        return self.data.nbytes

    @classmethod
    def from_complex(cls, values, layout: Layout = Layout.INTERLEAVED) -> "ComplexBuffer":
        arr = np.ascontiguousarray(np.asarray(values, dtype=np.complex64).ravel())
        buf = cls(arr, Layout.INTERLEAVED)
        return buf if layout == Layout.INTERLEAVED else convert_layout(buf, layout)

    @classmethod
    def from_split(cls, re, im) -> "ComplexBuffer":
        return cls(np.ascontiguousarray(np.stack([re, im]).astype(np.float32)), Layout.SPLIT)

    @property
    def re(self) -> np.ndarray:
        return self.data.real if self.layout == Layout.INTERLEAVED else self.data[0]

    @property
    def im(self) -> np.ndarray:
        return self.data.imag if self.layout == Layout.INTERLEAVED else self.data[1]

    def to_complex(self) -> np.ndarray:
        """Interleaved ``complex64`` copy of the samples."""
        return convert_layout(self, Layout.INTERLEAVED).data.copy()


def convert_layout(buf: ComplexBuffer, target: Layout) -> ComplexBuffer:
    """Re-store ``buf`` in ``target`` layout. Element bits are copied untouched."""
    if buf.layout == target:
        return ComplexBuffer(buf.data.copy(), target)
    if target == Layout.SPLIT:
        pairs = buf.data.view(np.float32).reshape(buf.n, 2)
        return ComplexBuffer(np.ascontiguousarray(pairs.T), Layout.SPLIT)
    out = np.empty(buf.n, dtype=np.complex64)
    pairs = out.view(np.float32).reshape(buf.n, 2)
    pairs[:, 0] = buf.data[0]
    pairs[:, 1] = buf.data[1]
    return ComplexBuffer(out, Layout.INTERLEAVED)


@dataclass(frozen=True)
class SceneMatrix:
    """Azimuth x range complex scene, row-major; one row is one azimuth line."""

    data: np.ndarray

    def __post_init__(self):
        if self.data.dtype != np.complex64 or self.data.ndim != 2:
            raise ValueError("scene data must be a 2-D complex64 array")
        rows, cols = self.data.shape
        if not (is_power_of_two(rows) and is_power_of_two(cols)):
            raise ValueError(f"scene dimensions must be powers of two, got {rows}x{cols}")
        if not self.data.flags.c_contiguous:
            object.__setattr__(self, "data", np.ascontiguousarray(self.data))

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    @property
    def buffer(self) -> ComplexBuffer:
        return ComplexBuffer(self.data.ravel(), Layout.INTERLEAVED)

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "SceneMatrix":
        return cls(np.zeros((rows, cols), dtype=np.complex64))


def transpose(m: SceneMatrix) -> SceneMatrix:
    return SceneMatrix(np.ascontiguousarray(m.data.T))


@dataclass(frozen=True)
class TwiddleTable:
    """``factors[k] = exp(-2j*pi*k/n)`` in complex64, with split copies for CT kernels."""

    n: int
    factors: np.ndarray

    @property
    def re(self) -> np.ndarray:
        return np.ascontiguousarray(self.factors.real)

    @property
    def im(self) -> np.ndarray:
        return np.ascontiguousarray(self.factors.imag)


def make_twiddles(n: int) -> TwiddleTable:
    if n < 1:
        raise ValueError("twiddle table length must be >= 1")
    k = np.arange(n, dtype=np.float64)
    theta = -2.0 * np.pi * k / n
    factors = (np.cos(theta) + 1j * np.sin(theta)).astype(np.complex64)
    # Exact values at the quarter points keep symmetric stages free of cos(pi/2) residue.
    for q, val in enumerate((1, -1j, -1, 1j)):
        if (q * n) % 4 == 0:
            factors[q * n // 4] = val
    return TwiddleTable(n, factors)


def write_scene(path, scene: SceneMatrix, layout: Layout = Layout.INTERLEAVED) -> None:
    """Write ``scene`` as a ``SARC`` file: 16-byte little-endian header + float32 payload."""
    header = _HEADER.pack(SCENE_MAGIC, scene.rows, scene.cols, int(layout))
    buf = convert_layout(scene.buffer, layout)
    payload = buf.data.view(np.float32) if layout == Layout.INTERLEAVED else buf.data
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(payload).astype("<f4", copy=False).tobytes())


def read_scene(path) -> SceneMatrix:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise ValueError(f"{path}: truncated scene header")
    magic, rows, cols, tag = _HEADER.unpack_from(raw)
    if magic != SCENE_MAGIC:
        raise ValueError(f"{path}: bad magic {magic!r}")
    try:
        layout = Layout(tag)
    except ValueError:
        raise ValueError(f"{path}: unknown layout tag {tag}") from None
    n = rows * cols
    if len(raw) != _HEADER.size + n * COMPLEX_BYTES:
        raise ValueError(f"{path}: payload size does not match {rows}x{cols}")
    payload = np.frombuffer(raw, dtype="<f4", offset=_HEADER.size).astype(np.float32)
    if layout == Layout.INTERLEAVED:
        buf = ComplexBuffer(payload.view(np.complex64).copy(), Layout.INTERLEAVED)
    else:
        buf = convert_layout(ComplexBuffer(payload.reshape(2, n).copy(), Layout.SPLIT),
                             Layout.INTERLEAVED)
    return SceneMatrix(buf.data.reshape(rows, cols))
