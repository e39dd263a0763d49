"""Range Doppler pipeline with fused and unfused executors and a memory-traffic ledger.

Both executors run the same line kernels, so they differ only in how data
moves: the fused path keeps each line in one tile-sized buffer from load to
store, while the unfused path materializes every intermediate as a full
scene-sized array, the way three separate dispatches would.
"""

from __future__ import annotations

import enum
import json
import statistics
import time
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import _kernels
from .core import COMPLEX_BYTES, TILE_BYTES, SceneMatrix, transpose
from .fft import FftPlan, LengthMismatch, plan_for_length, run_rows
from .sar_sim import MatchedFilter, SarGeometry, azimuth_filter_bank, make_range_filter

STEPS = ("range_compression", "azimuth_fft", "rcmc", "azimuth_compression")


class LineTooLargeForTile(ValueError):
    pass


class Mode(str, enum.Enum):
    FUSED = "fused"
    UNFUSED = "unfused"


class StageKind(str, enum.Enum):
    FUSED_LINE = "fused_line"
    FFT = "fft"
    MULTIPLY = "multiply"
    IFFT = "ifft"
    TRANSPOSE = "transpose"
    RCMC = "rcmc"


@dataclass(frozen=True)
class StageSpec:
    step: str
    kind: StageKind
    fused: bool = False
    ops: tuple[str, ...] = ()


def build_stage_plan(mode: Mode | str) -> list[StageSpec]:
    """Ordered stage graph for one mode; ``step`` groups stages into the four pipeline steps."""
    mode = Mode(mode)
    azimuth_fft = [StageSpec("azimuth_fft", StageKind.TRANSPOSE),
                   StageSpec("azimuth_fft", StageKind.FFT),
                   StageSpec("azimuth_fft", StageKind.TRANSPOSE)]
    rcmc = [StageSpec("rcmc", StageKind.RCMC)]
    T = StageSpec("azimuth_compression", StageKind.TRANSPOSE)
    if mode is Mode.FUSED:
        return ([StageSpec("range_compression", StageKind.FUSED_LINE, True, ("fft", "multiply", "ifft"))]
                + azimuth_fft + rcmc
                + [T, StageSpec("azimuth_compression", StageKind.FUSED_LINE, True, ("multiply", "ifft")), T])
    return ([StageSpec("range_compression", k) for k in (StageKind.FFT, StageKind.MULTIPLY, StageKind.IFFT)]
            + azimuth_fft + rcmc
            + [T, StageSpec("azimuth_compression", StageKind.MULTIPLY),
               StageSpec("azimuth_compression", StageKind.IFFT), T])


@dataclass(frozen=True)
class LedgerEntry:
    stage: str
    category: str
    line_reads: int
    line_writes: int
    bytes_moved: int


@dataclass
class TrafficLedger:
    """Line-granular device-memory transfer counts.

    Categories: ``line`` (the stage's own load/store of data lines),
    ``transpose``, ``broadcast`` (matched-filter reads, shared by every line)
    and ``host_conj`` (extra conjugation passes of the unfused baseline).
    Entries are appended from the coordinating thread only, after each stage.
    """

    entries: list[LedgerEntry] = field(default_factory=list)

    def record(self, stage: str, reads: int, writes: int, line_bytes: int,
               category: str = "line") -> None:
        self.entries.append(LedgerEntry(stage, category, reads, writes,
                                        (reads + writes) * line_bytes))

    def _select(self, stage=None, category=None):
        return [e for e in self.entries
                if (stage is None or e.stage == stage) and (category is None or e.category == category)]

    def transfers(self, stage: str | None = None, category: str | None = "line") -> int:
        return sum(e.line_reads + e.line_writes for e in self._select(stage, category))

    def bytes(self, stage: str | None = None, category: str | None = None) -> int:
        return sum(e.bytes_moved for e in self._select(stage, category))

    def to_records(self, timings: dict[str, float] | None = None) -> list[dict]:
        """One ``{stage, reads, writes, bytes, millis}`` record per pipeline step."""
        timings = timings or {}
        order = [s for s in STEPS if self._select(s)]
        order += sorted({e.stage for e in self.entries} - set(order))
        out = []
        for stage in order:
            sel = self._select(stage)
            out.append({
                "stage": stage,
                "reads": sum(e.line_reads for e in sel),
                "writes": sum(e.line_writes for e in sel),
                "bytes": sum(e.bytes_moved for e in sel),
                "millis": timings.get(stage),
                "by_category": {c: {"reads": sum(e.line_reads for e in self._select(stage, c)),
                                    "writes": sum(e.line_writes for e in self._select(stage, c))}
                                for c in sorted({e.category for e in sel})},
            })
        return out

    def to_json(self, timings=None) -> str:
        return json.dumps(self.to_records(timings), indent=2)


@dataclass(frozen=True)
class TileBuffer:
    """On-chip working buffer of one line; a line fits iff ``8*n <= 32768``."""

    n: int
    capacity_bytes: int = TILE_BYTES

    def __post_init__(self):
        if COMPLEX_BYTES * self.n > self.capacity_bytes:
            raise LineTooLargeForTile(
                f"{self.n}-sample line needs {COMPLEX_BYTES * self.n} B, tile holds {self.capacity_bytes} B")

    @staticmethod
    def fits(n: int) -> bool:
        return COMPLEX_BYTES * n <= TILE_BYTES


@dataclass(frozen=True)
class RcmcParams:
    taps: int
    shift_table: np.ndarray
    max_shift_cells: float

    def __post_init__(self):
        if self.taps < 2 or self.taps % 2:
            raise ValueError("RCMC needs an even tap count >= 2")
        if not np.all(np.isfinite(self.shift_table)):
            raise ValueError("RCMC shifts must be finite")
        if np.abs(self.shift_table).max(initial=0.0) > self.max_shift_cells:
            raise ValueError("RCMC shift exceeds the configured maximum migration")


def make_rcmc_params(geom: SarGeometry, n_a: int, n_r: int, taps: int = 8,
                     max_shift_cells: float | None = None) -> RcmcParams:
    """Shift table (n_a, n_r) in range cells, rows in ``fftfreq`` azimuth-frequency order.

    Shifts beyond ``max_shift_cells`` (default: a quarter line) are clipped.
    """
    fa = np.fft.fftfreq(n_a, 1.0 / geom.prf_hz)
    shift = geom.range_migration_m(fa[:, None], geom.bin_ranges(n_r)[None, :]) / geom.range_cell_m
    limit = n_r / 4 if max_shift_cells is None else max_shift_cells
    shift = np.clip(shift, -limit, limit)
    return RcmcParams(taps, np.ascontiguousarray(shift), float(limit))


def zero_rcmc(n_a: int, n_r: int, taps: int = 8) -> RcmcParams:
    return RcmcParams(taps, np.zeros((n_a, n_r)), 0.0)


def _f32(arr: np.ndarray) -> np.ndarray:
    return arr.view(np.float32)


def _filter_rows(filt, n: int) -> np.ndarray:
    if isinstance(filt, MatchedFilter):
        taps = filt.taps[None, :]
    else:
        taps = np.asarray(filt, dtype=np.complex64)
        taps = taps[None, :] if taps.ndim == 1 else taps
    if taps.shape[1] != n:
        raise LengthMismatch(f"filter length {taps.shape[1]} != line length {n}")
    return np.ascontiguousarray(taps, dtype=np.complex64)


def _check_lines(scene: SceneMatrix, plan: FftPlan) -> None:
    if scene.cols != plan.n:
        raise LengthMismatch(f"line length {scene.cols} != plan length {plan.n}")


def _ledger(ledger):
    return ledger if ledger is not None else TrafficLedger()


def _fused_lines(data, taps, plan, with_fft, workers):
    out = np.empty_like(data)
    run_rows(_kernels.fused_rows, data.shape[0], workers,
             (_f32(data), _f32(taps), _f32(out), with_fft), plan.kernel_args)
    return out


def _unfused_multiply_ifft(data, taps, plan, workers, ledger, stage):
    """Multiply pass, then conj / FFT / conj-scale passes, each scene-sized."""
    rows, n = data.shape
    lb = COMPLEX_BYTES * n
    prod = np.empty_like(data)
    run_rows(_kernels.multiply_rows, rows, workers, (_f32(data), _f32(taps), _f32(prod)))
    ledger.record(stage, rows, rows, lb)
    ledger.record(stage, rows, 0, lb, "broadcast")
    conj = np.empty_like(data)
    run_rows(_kernels.conj_rows, rows, workers, (_f32(prod), _f32(conj)))
    spec = np.empty_like(data)
    run_rows(_kernels.fft_rows, rows, workers, (_f32(conj), _f32(spec)), plan.kernel_args)
    ledger.record(stage, rows, rows, lb)
    out = np.empty_like(data)
    scale = np.float32(1.0) / np.float32(n)
    run_rows(_kernels.conj_scale_rows, rows, workers, (_f32(spec), _f32(out), scale))
    ledger.record(stage, 2 * rows, 2 * rows, lb, "host_conj")
    return out


def range_compress_fused(scene: SceneMatrix, filt, plan: FftPlan,
                         ledger: TrafficLedger | None = None, workers: int = 1) -> SceneMatrix:
    """Load, FFT, multiply by the range filter, IFFT and store each line in one pass."""
    _check_lines(scene, plan)
    TileBuffer(plan.n)
    taps = _filter_rows(filt, plan.n)
    out = _fused_lines(scene.data, taps, plan, True, workers)
    ledger = _ledger(ledger)
    lb = COMPLEX_BYTES * plan.n
    ledger.record("range_compression", scene.rows, scene.rows, lb)
    ledger.record("range_compression", scene.rows, 0, lb, "broadcast")
    return SceneMatrix(out)


def range_compress_unfused(scene: SceneMatrix, filt, plan: FftPlan,
                           ledger: TrafficLedger | None = None, workers: int = 1) -> SceneMatrix:
    """Three scene-sized passes: FFT all lines, multiply all lines, IFFT all lines."""
    _check_lines(scene, plan)
    TileBuffer(plan.n)
    taps = _filter_rows(filt, plan.n)
    ledger = _ledger(ledger)
    rows = scene.rows
    spec = np.empty_like(scene.data)
    run_rows(_kernels.fft_rows, rows, workers, (_f32(scene.data), _f32(spec)), plan.kernel_args)
    ledger.record("range_compression", rows, rows, COMPLEX_BYTES * plan.n)
    out = _unfused_multiply_ifft(spec, taps, plan, workers, ledger, "range_compression")
    return SceneMatrix(out)


def azimuth_fft(scene: SceneMatrix, plan: FftPlan, ledger: TrafficLedger | None = None,
                workers: int = 1) -> SceneMatrix:
    """Column FFTs as transpose, row FFT, transpose back."""
    if scene.rows != plan.n:
        raise LengthMismatch(f"azimuth length {scene.rows} != plan length {plan.n}")
    ledger = _ledger(ledger)
    t = transpose(scene)
    spec = np.empty_like(t.data)
    run_rows(_kernels.fft_rows, t.rows, workers, (_f32(t.data), _f32(spec)), plan.kernel_args)
    lb = COMPLEX_BYTES * plan.n
    ledger.record("azimuth_fft", 2 * t.rows, 2 * t.rows, lb, "transpose")
    ledger.record("azimuth_fft", t.rows, t.rows, lb)
    return transpose(SceneMatrix(spec))


def rcmc_apply(scene_freq: SceneMatrix, params: RcmcParams,
               ledger: TrafficLedger | None = None, workers: int = 1) -> SceneMatrix:
    """Resample each azimuth-frequency row at ``range + shift`` with a Hann-weighted sinc."""
    if params.shift_table.shape != scene_freq.shape:
        raise LengthMismatch(f"shift table {params.shift_table.shape} != scene {scene_freq.shape}")
    out = np.empty_like(scene_freq.data)
    shift = np.ascontiguousarray(params.shift_table, dtype=np.float64)
    run_rows(_kernels.rcmc_rows, scene_freq.rows, workers,
             (_f32(scene_freq.data), _f32(out), shift, params.taps))
    _ledger(ledger).record("rcmc", scene_freq.rows, scene_freq.rows, COMPLEX_BYTES * scene_freq.cols)
    return SceneMatrix(out)


def _azimuth_lines(scene_freq, filter_bank, plan):
    if scene_freq.rows != plan.n:
        raise LengthMismatch(f"azimuth length {scene_freq.rows} != plan length {plan.n}")
    TileBuffer(plan.n)
    taps = _filter_rows(filter_bank, plan.n)
    if taps.shape[0] not in (1, scene_freq.cols):
        raise LengthMismatch(f"{taps.shape[0]} azimuth filters for {scene_freq.cols} range bins")
    return transpose(scene_freq), taps


def azimuth_compress_fused(scene_freq: SceneMatrix, filter_bank, plan: FftPlan,
                           ledger: TrafficLedger | None = None, workers: int = 1) -> SceneMatrix:
    """Per range bin: multiply by that bin's azimuth filter and IFFT in one pass."""
    t, taps = _azimuth_lines(scene_freq, filter_bank, plan)
    out = _fused_lines(t.data, taps, plan, False, workers)
    ledger = _ledger(ledger)
    lb = COMPLEX_BYTES * plan.n
    ledger.record("azimuth_compression", 2 * t.rows, 2 * t.rows, lb, "transpose")
    ledger.record("azimuth_compression", t.rows, t.rows, lb)
    ledger.record("azimuth_compression", t.rows, 0, lb, "broadcast")
    return transpose(SceneMatrix(out))


def azimuth_compress_unfused(scene_freq: SceneMatrix, filter_bank, plan: FftPlan,
                             ledger: TrafficLedger | None = None, workers: int = 1) -> SceneMatrix:
    t, taps = _azimuth_lines(scene_freq, filter_bank, plan)
    ledger = _ledger(ledger)
    ledger.record("azimuth_compression", 2 * t.rows, 2 * t.rows, COMPLEX_BYTES * plan.n, "transpose")
    out = _unfused_multiply_ifft(t.data, taps, plan, workers, ledger, "azimuth_compression")
    return transpose(SceneMatrix(out))


class PipelineResult(NamedTuple):
    image: SceneMatrix
    ledger: TrafficLedger
    timings: dict[str, float]


def run_pipeline(scene: SceneMatrix, geom: SarGeometry, mode: Mode | str = Mode.FUSED,
                 family=None, workers: int = 1, rcmc: RcmcParams | None | bool = True,
                 per_bin_azimuth: bool = True) -> PipelineResult:
    """Range compression, azimuth FFT, RCMC and azimuth compression.

    ``rcmc=True`` derives the shift table from ``geom``; ``False`` skips the
    step; an :class:`RcmcParams` is used as given. ``timings`` are
    milliseconds per step from a single run.
    """
    mode = Mode(mode)
    n_a, n_r = scene.shape
    range_plan = plan_for_length(n_r, family)
    az_plan = range_plan if n_a == n_r else plan_for_length(n_a, family)
    h_r = make_range_filter(geom, n_r, range_plan)
    bank = azimuth_filter_bank(geom, n_a, n_r, per_bin=per_bin_azimuth)
    if rcmc is True:
        rcmc = make_rcmc_params(geom, n_a, n_r)
    ledger = TrafficLedger()
    timings: dict[str, float] = {}
    compress_r = range_compress_fused if mode is Mode.FUSED else range_compress_unfused
    compress_a = azimuth_compress_fused if mode is Mode.FUSED else azimuth_compress_unfused

    def timed(step, fn, *args):
        t0 = time.perf_counter()
        result = fn(*args, ledger=ledger, workers=workers)
        timings[step] = (time.perf_counter() - t0) * 1e3
        return result

    data = timed("range_compression", compress_r, scene, h_r, range_plan)
    data = timed("azimuth_fft", azimuth_fft, data, az_plan)
    if rcmc:
        data = timed("rcmc", rcmc_apply, data, rcmc)
    data = timed("azimuth_compression", compress_a, data, bank, az_plan)
    return PipelineResult(data, ledger, timings)


def benchmark_pipeline(scene: SceneMatrix, geom: SarGeometry, mode: Mode | str,
                       reps: int = 5, **kwargs) -> dict[str, float]:
    """Median per-step and total milliseconds over ``reps`` runs after one discarded warm-up."""
    run_pipeline(scene, geom, mode, **kwargs)
    runs = []
    for _ in range(max(1, reps)):
        t0 = time.perf_counter()
        res = run_pipeline(scene, geom, mode, **kwargs)
        total = (time.perf_counter() - t0) * 1e3
        runs.append({**res.timings, "total": total})
    return {k: statistics.median(r[k] for r in runs) for k in runs[0]}
