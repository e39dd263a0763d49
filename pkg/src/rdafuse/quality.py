"""Point-target and image-equivalence quality metrics, all evaluated in float64."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .core import SceneMatrix

DB_FLOOR = -100.0


class DimensionMismatch(ValueError):
    pass


class ZeroReference(ValueError):
    pass


class RegionOverlap(ValueError):
    pass


class RegionOutOfBounds(ValueError):
    pass


class NoSidelobeFound(ValueError):
    pass


class PeakBelowFloor(ValueError):
    pass


def _arr(img) -> np.ndarray:
    return img.data if isinstance(img, SceneMatrix) else np.asarray(img)


def _pair(a, b):
    a = _arr(a).astype(np.complex128)
    b = _arr(b).astype(np.complex128)
    if a.shape != b.shape:
        raise DimensionMismatch(f"{a.shape} vs {b.shape}")
    return a, b


def l2_relative_error(a, b) -> float:
    """``||a - b|| / ||b||`` with ``b`` as the reference."""
    a, b = _pair(a, b)
    diff = np.linalg.norm((a - b).ravel())
    ref = np.linalg.norm(b.ravel())
    if ref == 0.0:
        if diff > 0.0:
            raise ZeroReference("reference is all zeros but images differ")
        return 0.0
    return float(diff / ref)


def max_abs_error(a, b) -> float:
    a, b = _pair(a, b)
    return float(np.abs(a - b).max(initial=0.0))


def _db(ratio: float) -> float:
    return max(10.0 * math.log10(ratio), DB_FLOOR) if ratio > 0 else DB_FLOOR


@dataclass(frozen=True)
class Window:
    """Half-open pixel block ``[row0, row1) x [col0, col1)``."""

    row0: int
    row1: int
    col0: int
    col1: int

    @classmethod
    def around(cls, pixel: tuple[int, int], radius: int) -> "Window":
        r, c = pixel
        return cls(r - radius, r + radius + 1, c - radius, c + radius + 1)

    def inside(self, shape) -> bool:
        return 0 <= self.row0 < self.row1 <= shape[0] and 0 <= self.col0 < self.col1 <= shape[1]

    def overlaps(self, other: "Window") -> bool:
        return (self.row0 < other.row1 and other.row0 < self.row1
                and self.col0 < other.col1 and other.col0 < self.col1)

    def take(self, arr: np.ndarray) -> np.ndarray:
        return arr[self.row0:self.row1, self.col0:self.col1]


def target_snr(image, peak_region: Window, noise_region: Window) -> float:
    """Peak power in ``peak_region`` over mean power in ``noise_region``, in dB."""
    img = _arr(image)
    for w in (peak_region, noise_region):
        if not w.inside(img.shape):
            raise RegionOutOfBounds(f"{w} outside image {img.shape}")
    if peak_region.overlaps(noise_region):
        raise RegionOverlap(f"{peak_region} overlaps {noise_region}")
    power = np.abs(img.astype(np.complex128)) ** 2
    peak = peak_region.take(power).max()
    noise = noise_region.take(power).mean()
    if noise == 0.0:
        return math.inf
    return 10.0 * math.log10(peak / noise) if peak > 0 else -math.inf


def _mainlobe(cut) -> tuple[np.ndarray, int, int]:
    power = np.abs(np.asarray(cut, dtype=np.float64)) ** 2
    if power.size < 3:
        raise NoSidelobeFound("cut too short")
    peak = int(np.argmax(power))
    left = peak
    while left > 0 and power[left - 1] < power[left]:
        left -= 1
    right = peak
    while right < power.size - 1 and power[right + 1] < power[right]:
        right += 1
    if left == 0 and right == power.size - 1:
        raise NoSidelobeFound("profile decreases monotonically on both sides of the peak")
    return power, left, right


def pslr(cut) -> float:
    """Highest sidelobe over peak power (dB); the mainlobe runs null to null.

    ``cut`` is a 1-D magnitude profile. A profile with no energy outside the
    mainlobe gives the -100 dB floor.
    """
    power, left, right = _mainlobe(cut)
    side = np.concatenate([power[:left], power[right + 1:]])
    return _db(side.max(initial=0.0) / power.max())


def islr(cut) -> float:
    """Sidelobe energy over mainlobe energy across the whole cut (dB)."""
    power, left, right = _mainlobe(cut)
    main = power[left:right + 1].sum()
    side = power.sum() - main
    return _db(side / main)


def upsample_cut(cut, factor: int) -> np.ndarray:
    """Band-limited (FFT zero-padding) interpolation of a complex cut."""
    cut = np.asarray(cut, dtype=np.complex128)
    if factor <= 1:
        return cut
    n = cut.size
    spec = np.fft.fftshift(np.fft.fft(cut))
    pad = (factor - 1) * n
    spec = np.concatenate([np.zeros(pad // 2), spec, np.zeros(pad - pad // 2)])
    return np.fft.ifft(np.fft.ifftshift(spec)) * factor


def extract_cut(image, pixel: tuple[int, int], axis: str = "range", half_width: int = 16,
                upsample: int = 8) -> np.ndarray:
    """Magnitude profile through ``pixel`` along ``range`` (columns) or ``azimuth`` (rows).

    The cut is clipped at the image border and interpolated ``upsample`` times
    so the null-to-null mainlobe is resolved.
    """
    img = _arr(image)
    r, c = pixel
    if axis == "range":
        line = img[r, max(0, c - half_width):c + half_width + 1]
    elif axis == "azimuth":
        line = img[max(0, r - half_width):r + half_width + 1, c]
    else:
        raise ValueError(f"axis must be 'range' or 'azimuth', got {axis!r}")
    return np.abs(upsample_cut(line, upsample))


def find_peaks(image, expected, search_radius: int = 2,
               floor_factor: float = 10.0) -> list[tuple[int, int]]:
    """Brightest pixel within ``search_radius`` of each expected location."""
    mag = np.abs(_arr(image))
    floor = floor_factor * float(np.median(mag))
    out = []
    for r, c in expected:
        if not (0 <= r < mag.shape[0] and 0 <= c < mag.shape[1]):
            raise RegionOutOfBounds(f"expected pixel {(r, c)} outside image {mag.shape}")
        r0, c0 = max(0, r - search_radius), max(0, c - search_radius)
        win = mag[r0:r + search_radius + 1, c0:c + search_radius + 1]
        i, j = np.unravel_index(np.argmax(win), win.shape)
        if win[i, j] < floor:
            raise PeakBelowFloor(f"peak near {(r, c)} is {win[i, j]:.3g}, floor {floor:.3g}")
        out.append((int(r0 + i), int(c0 + j)))
    return out


def default_noise_region(shape, targets, size: int | None = None, guard: int = 8) -> Window:
    """Corner block clear of every target window; tries all four corners."""
    rows, cols = shape
    size = size or max(4, min(rows, cols) // 16)
    corners = [(0, 0), (0, cols - size), (rows - size, 0), (rows - size, cols - size)]
    for r0, c0 in corners:
        w = Window(r0, r0 + size, c0, c0 + size)
        if not any(w.overlaps(Window.around(p, guard)) for p in targets):
            return w
    raise RegionOverlap("no image corner is clear of the target windows")


@dataclass
class TargetMetrics:
    pixel: tuple[int, int]
    snr_db: float
    pslr_db: float | None
    islr_db: float | None


@dataclass
class QualityReport:
    l2_relative_error: float
    max_abs_error: float
    targets: list[TargetMetrics] = field(default_factory=list)
    reference_targets: list[TargetMetrics] = field(default_factory=list)
    snr_delta_db: list[float] = field(default_factory=list)
    labels: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def table(self) -> str:
        """Human summary laid out like the fused-vs-unfused quality table."""
        rows = [("L2 relative error", f"{self.l2_relative_error:.3g}"),
                ("Max absolute error", f"{self.max_abs_error:.3g}"),
                ("SNR delta (all targets)",
                 f"{max((abs(d) for d in self.snr_delta_db), default=0.0):.3g} dB")]
        for i, (t, ref) in enumerate(zip(self.targets, self.reference_targets)):
            label = self.labels[i] if i < len(self.labels) else ""
            name = f"Target {i}" + (f" ({label})" if label else "") + " SNR"
            rows.append((name, f"{t.snr_db:.3g} / {ref.snr_db:.3g} dB"))
        width = max(len(k) for k, _ in rows)
        return "\n".join(f"{k:<{width}}  {v}" for k, v in rows)


def _cut_metric(fn, cut):
    try:
        return fn(cut)
    except NoSidelobeFound:
        return None


def measure_targets(image, pixels, noise_region: Window, peak_radius: int = 2,
                    cut_half_width: int = 16, upsample: int = 8) -> list[TargetMetrics]:
    out = []
    for p in pixels:
        snr = target_snr(image, Window.around(p, peak_radius), noise_region)
        cut = extract_cut(image, p, "range", cut_half_width, upsample)
        out.append(TargetMetrics(tuple(int(v) for v in p), snr,
                                 _cut_metric(pslr, cut), _cut_metric(islr, cut)))
    return out


def compare_images(image, reference, expected, labels=(), search_radius: int = 2,
                   noise_region: Window | None = None) -> QualityReport:
    """Equivalence and per-target metrics of ``image`` against ``reference``.

    Targets are located once, on the reference, so both images are measured at
    the same pixels.
    """
    pixels = find_peaks(reference, expected, search_radius)
    noise_region = noise_region or default_noise_region(_arr(reference).shape, pixels)
    mine = measure_targets(image, pixels, noise_region)
    ref = measure_targets(reference, pixels, noise_region)
    return QualityReport(
        l2_relative_error(image, reference),
        max_abs_error(image, reference),
        mine, ref,
        [a.snr_db - b.snr_db for a, b in zip(mine, ref)],
        list(labels),
    )
