"""Plain-text ``key = value`` run configuration.

Example::

    # geometry overrides
    bandwidth_hz = 100e6
    carrier_hz = 10e9
    rows = 512
    cols = 512
    seed = 7
    target = 0.0, 0.0, 1.0, center
    target = 62.5, 0.0, 1.0, range offset

``target`` lines are ``range_offset_m, azimuth_offset_m[, amplitude[, label]]``
and may repeat. Without any, the five-target default layout is used.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path

from .sar_sim import PointTarget, SarGeometry, default_targets, fit_pulse

GEOMETRY_KEYS = tuple(f.name for f in dataclasses.fields(SarGeometry))
MODES = ("fused", "unfused", "both")
FAMILIES = ("auto", "stockham4", "stockham8", "ct8")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    geometry: dict[str, float] = field(default_factory=dict)
    rows: int = 512
    cols: int = 512
    mode: str = "fused"
    seed: int = 0
    reps: int = 5
    workers: int = 1
    out: str = "out"
    family: str = "auto"
    noise_snr_db: float = 20.0
    targets: list[PointTarget] | None = None

    def __post_init__(self):
        unknown = set(self.geometry) - set(GEOMETRY_KEYS)
        if unknown:
            raise ConfigError(f"unknown geometry keys: {sorted(unknown)}")
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.family not in FAMILIES:
            raise ConfigError(f"family must be one of {FAMILIES}, got {self.family!r}")
        if self.rows < 1 or self.cols < 1 or self.reps < 1 or self.workers < 1:
            raise ConfigError("rows, cols, reps and workers must be positive")

    def resolve_geometry(self) -> SarGeometry:
        """Geometry with overrides applied; an unset pulse length is fitted to the range line."""
        geom = SarGeometry(**self.geometry)
        if "pulse_dur_s" not in self.geometry:
            geom = fit_pulse(geom, self.cols)
        return geom

    def resolve_targets(self) -> list[PointTarget]:
        if self.targets is not None:
            return list(self.targets)
        return default_targets(self.resolve_geometry(), self.rows, self.cols)

    @property
    def fft_family(self) -> str | None:
        return None if self.family == "auto" else self.family


_INT_KEYS = ("rows", "cols", "seed", "reps", "workers")


def _parse_target(value: str) -> PointTarget:
    parts = [p.strip() for p in value.split(",", 3)]
    if len(parts) < 2:
        raise ConfigError(f"target needs at least range and azimuth offsets: {value!r}")
    amp = float(parts[2]) if len(parts) > 2 else 1.0
    label = parts[3] if len(parts) > 3 else ""
    return PointTarget(float(parts[0]), float(parts[1]), amp, label)


def parse_config(text: str) -> RunConfig:
    kwargs: dict = {}
    geometry: dict[str, float] = {}
    targets: list[PointTarget] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        try:
            if key in GEOMETRY_KEYS:
                geometry[key] = float(value)
            elif key == "target":
                targets.append(_parse_target(value))
            elif key in _INT_KEYS:
                kwargs[key] = int(value)
            elif key == "noise_snr_db":
                kwargs[key] = float(value)
            elif key in ("mode", "out", "family"):
                kwargs[key] = value
            else:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"line {lineno}: bad value for {key}: {value!r}") from exc
    return RunConfig(geometry=geometry, targets=targets or None, **kwargs)


def load_config(path) -> RunConfig:
    return parse_config(Path(path).read_text())


def _num(x: float) -> str:
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(float(x))


def serialize_config(cfg: RunConfig) -> str:
    lines = [f"{k} = {_num(cfg.geometry[k])}" for k in GEOMETRY_KEYS if k in cfg.geometry]
    lines += [f"{k} = {getattr(cfg, k)}" for k in _INT_KEYS]
    lines += [f"mode = {cfg.mode}", f"out = {cfg.out}", f"family = {cfg.family}",
              f"noise_snr_db = {_num(cfg.noise_snr_db)}"]
    for t in cfg.targets or []:
        lines.append(f"target = {_num(t.range_offset_m)}, {_num(t.azimuth_offset_m)}, "
                     f"{_num(t.amplitude)}, {t.label}".rstrip(", "))
    return "\n".join(lines) + "\n"
