"""Point-target SAR raw-data simulator and the range/azimuth matched filters."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from .core import ComplexBuffer, Layout, SceneMatrix, convert_layout, is_power_of_two
from .fft import FftPlan, fft_forward, LengthMismatch

C = 299_792_458.0


class PulseTooLong(ValueError):
    pass


class TargetOutOfScene(ValueError):
    pass


class InvalidRange(ValueError):
    pass


@dataclass(frozen=True)
class SarGeometry:
    """Radar and platform parameters (SI units)."""

    bandwidth_hz: float = 100e6
    carrier_hz: float = 10e9
    velocity_mps: float = 100.0
    range0_m: float = 20e3
    pulse_dur_s: float = 10e-6
    sample_rate_hz: float = 120e6
    prf_hz: float = 400.0

    def __post_init__(self):
        for name in ("bandwidth_hz", "carrier_hz", "velocity_mps", "range0_m",
                     "pulse_dur_s", "sample_rate_hz", "prf_hz"):
            val = getattr(self, name)
            if not (math.isfinite(val) and val > 0):
                raise ValueError(f"{name} must be positive and finite, got {val}")
        if self.sample_rate_hz < self.bandwidth_hz:
            raise ValueError("sample rate must be at least the chirp bandwidth")

    @property
    def wavelength_m(self) -> float:
        return C / self.carrier_hz

    @property
    def range_fm_rate(self) -> float:
        return self.bandwidth_hz / self.pulse_dur_s

    @property
    def azimuth_fm_rate(self) -> float:
        return self.azimuth_fm_rate_at(self.range0_m)

    def azimuth_fm_rate_at(self, range_m):
        return 2.0 * self.velocity_mps ** 2 / (self.wavelength_m * np.asarray(range_m))

    @property
    def range_cell_m(self) -> float:
        return C / (2.0 * self.sample_rate_hz)

    @property
    def azimuth_cell_m(self) -> float:
        return self.velocity_mps / self.prf_hz

    @property
    def pulse_samples(self) -> int:
        return int(round(self.pulse_dur_s * self.sample_rate_hz))

    def gate_start_s(self, n_r: int) -> float:
        """Fast time of range bin 0; ``range0_m`` lands on bin ``n_r // 2``."""
        return 2.0 * self.range0_m / C - (n_r // 2) / self.sample_rate_hz

    def bin_ranges(self, n_r: int) -> np.ndarray:
        """Slant range of each range bin's leading edge."""
        return self.range0_m + (np.arange(n_r) - n_r // 2) * self.range_cell_m

    def range_migration_m(self, doppler_hz, range_m):
        """Range migration ``lambda^2 R f_a^2 / (8 v^2)`` in the range-Doppler domain."""
        lam = self.wavelength_m
        return lam ** 2 * np.asarray(range_m) * np.asarray(doppler_hz) ** 2 / (
            8.0 * self.velocity_mps ** 2)

    def summary(self) -> dict:
        return {
            "bandwidth_hz": self.bandwidth_hz,
            "carrier_hz": self.carrier_hz,
            "velocity_mps": self.velocity_mps,
            "range0_m": self.range0_m,
            "pulse_dur_s": self.pulse_dur_s,
            "sample_rate_hz": self.sample_rate_hz,
            "prf_hz": self.prf_hz,
            "wavelength_m": self.wavelength_m,
            "range_fm_rate": self.range_fm_rate,
            "azimuth_fm_rate": float(self.azimuth_fm_rate),
        }


def fit_pulse(geom: SarGeometry, n_r: int, fraction: float = 0.25) -> SarGeometry:
    """Shorten the pulse so the replica spans at most ``fraction`` of a range line.

    Keeps the bandwidth (and so the range resolution); only the FM rate grows.
    """
    limit = fraction * n_r / geom.sample_rate_hz
    if geom.pulse_dur_s <= limit:
        return geom
    return replace(geom, pulse_dur_s=math.floor(fraction * n_r) / geom.sample_rate_hz)


@dataclass(frozen=True)
class PointTarget:
    range_offset_m: float
    azimuth_offset_m: float
    amplitude: float = 1.0
    label: str = ""


def default_targets(geom: SarGeometry, n_a: int, n_r: int) -> list[PointTarget]:
    """Five targets: center, range, azimuth, diagonal and far offsets.

    Offsets are whole cells so every target has an exact predicted pixel.
    """
    dr = geom.range_cell_m
    da = geom.azimuth_cell_m
    hr = n_r // 2
    ha = n_a // 2
    layout = [
        ("center", 0, 0),
        ("range offset", round(0.2 * hr), 0),
        ("azimuth offset", 0, round(0.2 * ha)),
        ("diagonal offset", -round(0.2 * hr), -round(0.2 * ha)),
        ("far offset", round(0.4 * hr), round(0.4 * ha)),
    ]
    return [PointTarget(r * dr, a * da, 1.0, name) for name, r, a in layout]


def predicted_pixels(geom: SarGeometry, targets, n_a: int, n_r: int) -> list[tuple[int, int]]:
    """(row, col) of each focused target under the scene's range/azimuth sampling."""
    out = []
    for t in targets:
        row = n_a // 2 + t.azimuth_offset_m * geom.prf_hz / geom.velocity_mps
        col = n_r // 2 + 2.0 * t.range_offset_m * geom.sample_rate_hz / C
        out.append((int(round(row)), int(round(col))))
    return out


def make_chirp(geom: SarGeometry, n: int, chirp_rate: float | None = None) -> ComplexBuffer:
    """Baseband LFM replica ``exp(i*pi*K_r*t^2)`` starting at sample 0.

    The pulse covers ``pulse_samples`` samples with ``t = 0`` at index
    ``pulse_samples // 2``; the rest of the line is zero.
    """
    L = geom.pulse_samples
    if L > n:
        raise PulseTooLong(f"pulse needs {L} samples, line holds {n}")
    kr = geom.range_fm_rate if chirp_rate is None else chirp_rate
    t = (np.arange(L) - L // 2) / geom.sample_rate_hz
    out = np.zeros(n, dtype=np.complex64)
    out[:L] = np.exp(1j * np.pi * kr * t ** 2)
    return ComplexBuffer(out, Layout.INTERLEAVED)


class FilterKind(str, enum.Enum):
    RANGE = "range"
    AZIMUTH = "azimuth"


@dataclass(frozen=True)
class MatchedFilter:
    kind: FilterKind
    spectrum: ComplexBuffer
    range_bin_m: float | None = None

    @property
    def taps(self) -> np.ndarray:
        return self.spectrum.to_complex()


def make_range_filter(geom: SarGeometry, n: int, plan: FftPlan,
                      chirp_rate: float | None = None) -> MatchedFilter:
    if plan.n != n:
        raise LengthMismatch(f"plan length {plan.n} != filter length {n}")
    replica = convert_layout(make_chirp(geom, n, chirp_rate), plan.layout)
    spec = fft_forward(plan, replica).to_complex()
    return MatchedFilter(FilterKind.RANGE, ComplexBuffer(np.conj(spec), Layout.INTERLEAVED))


def _azimuth_taps(geom: SarGeometry, n_a: int, range_m) -> np.ndarray:
    fa = np.fft.fftfreq(n_a, 1.0 / geom.prf_hz)
    ka = geom.azimuth_fm_rate_at(range_m)
    return np.exp(-1j * np.pi * np.multiply.outer(1.0 / np.atleast_1d(ka), fa ** 2))


def make_azimuth_filter(geom: SarGeometry, n_a: int, range_bin_m: float) -> MatchedFilter:
    """Pure-phase azimuth filter over ``fftfreq(n_a, 1/prf)`` for one slant range.

    The quadratic phase has the sign that cancels the ``exp(-4j*pi*R/lambda)``
    history produced by :func:`simulate_scene` under a ``exp(-2j*pi*...)``
    forward FFT.
    """
    if not is_power_of_two(n_a):
        raise ValueError(f"azimuth length must be a power of two, got {n_a}")
    if not (np.isfinite(range_bin_m) and range_bin_m > 0):
        raise InvalidRange(f"range must be positive, got {range_bin_m}")
    taps = _azimuth_taps(geom, n_a, range_bin_m)[0].astype(np.complex64)
    return MatchedFilter(FilterKind.AZIMUTH, ComplexBuffer(taps, Layout.INTERLEAVED),
                         float(range_bin_m))


def azimuth_filter_bank(geom: SarGeometry, n_a: int, n_r: int, per_bin: bool = True) -> np.ndarray:
    """(n_r, n_a) complex64 azimuth filters, one per range bin.

    With ``per_bin=False`` a single filter at ``range0_m`` is returned as a
    (1, n_a) array and broadcast across bins.
    """
    ranges = geom.bin_ranges(n_r) if per_bin else np.array([geom.range0_m])
    if np.any(ranges <= 0):
        raise InvalidRange("scene extends to non-positive slant range")
    return np.ascontiguousarray(_azimuth_taps(geom, n_a, ranges).astype(np.complex64))


def _check_targets(geom, targets, n_a, n_r):
    L = geom.pulse_samples
    eta_edge = (n_a // 2) / geom.prf_hz
    for t, (row, col) in zip(targets, predicted_pixels(geom, targets, n_a, n_r)):
        r_t = geom.range0_m + t.range_offset_m
        r_far = math.hypot(r_t, geom.velocity_mps * eta_edge + abs(t.azimuth_offset_m))
        last = col + L + math.ceil((r_far - r_t) / geom.range_cell_m)
        if not (0 <= row < n_a and 0 <= col and last <= n_r):
            raise TargetOutOfScene(
                f"target {t.label or t} maps to ({row}, {col}) and its echo to bin {last}; "
                f"scene is {n_a}x{n_r}")


def simulate_echoes(geom: SarGeometry, targets, n_a: int, n_r: int,
                    rows_per_chunk: int = 256) -> np.ndarray:
    """Noiseless raw echoes as complex128, stop-and-go, no antenna weighting."""
    if not (is_power_of_two(n_a) and is_power_of_two(n_r)):
        raise ValueError(f"scene dimensions must be powers of two, got {n_a}x{n_r}")
    if targets:
        make_chirp(geom, n_r)
    _check_targets(geom, targets, n_a, n_r)
    fs = geom.sample_rate_hz
    L = geom.pulse_samples
    kr = geom.range_fm_rate
    t_fast = geom.gate_start_s(n_r) + np.arange(n_r) / fs
    eta = (np.arange(n_a) - n_a // 2) / geom.prf_hz
    phase_per_m = 4.0 * np.pi / geom.wavelength_m
    out = np.zeros((n_a, n_r), dtype=np.complex128)
    for t in targets:
        r_t = geom.range0_m + t.range_offset_m
        for lo in range(0, n_a, rows_per_chunk):
            hi = min(n_a, lo + rows_per_chunk)
            R = np.hypot(r_t, geom.velocity_mps * eta[lo:hi] - t.azimuth_offset_m)
            u = (t_fast[None, :] - 2.0 * R[:, None] / C) * fs
            inside = (u >= 0) & (u < L)
            tau = (u - L // 2) / fs
            az_phase = np.mod(phase_per_m * R, 2.0 * np.pi)
            echo = t.amplitude * np.exp(1j * (np.pi * kr * tau ** 2 - az_phase[:, None]))
            out[lo:hi] += np.where(inside, echo, 0.0)
    return out


def add_noise(signal: np.ndarray, snr_db: float, seed: int) -> np.ndarray:
    """Add circular complex Gaussian noise at ``snr_db`` below the mean support power.

    The support is every sample where the noiseless signal is nonzero.
    Returns complex64.
    """
    if not np.isfinite(snr_db):
        return signal.astype(np.complex64)
    mag2 = np.abs(signal) ** 2
    support = mag2 > 0
    p_sig = mag2[support].mean() if support.any() else 0.0
    sigma = math.sqrt(p_sig / 10.0 ** (snr_db / 10.0) / 2.0)
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal(signal.shape + (2,))
    noisy = signal + sigma * (noise[..., 0] + 1j * noise[..., 1])
    return noisy.astype(np.complex64)


def simulate_scene(geom: SarGeometry, targets, n_a: int, n_r: int,
                   noise_snr_db: float = 20.0, seed: int = 0) -> SceneMatrix:
    """Raw (azimuth x range) scene; ``noise_snr_db=inf`` disables noise."""
    return SceneMatrix(add_noise(simulate_echoes(geom, targets, n_a, n_r), noise_snr_db, seed))
