"""Command-line front end: simulate | process | bench | quality | compare."""

from __future__ import annotations

import argparse
import csv
import json
import os
import statistics
import sys
import time
from pathlib import Path

import numpy as np

from .config import ConfigError, RunConfig, load_config, serialize_config
from .core import SceneMatrix, read_scene, write_scene
from .fft import FftFamily, UnsupportedLength, fft_lines, plan_fft
from .quality import QualityReport, compare_images, extract_cut
from .rda import Mode, run_pipeline
from .sar_sim import predicted_pixels, simulate_scene

BENCH_SIZES = (64, 256, 512, 1024, 4096)
BENCH_HEADER = ["n", "family", "us_per_fft", "ffts_per_sec"]
DESK_LIMIT = 2048


def _dims(text: str) -> tuple[int, int]:
    try:
        r, c = text.lower().split("x")
        return int(r), int(c)
    except ValueError:
        raise argparse.ArgumentTypeError(f"--dims expects RxC, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="key = value run configuration")
    common.add_argument("--mode", choices=["fused", "unfused", "both"])
    common.add_argument("--dims", type=_dims, help="scene size as RxC (azimuth x range)")
    common.add_argument("--full-scale", action="store_true", help="use 4096x4096")
    common.add_argument("--seed", type=int)
    common.add_argument("--reps", type=int)
    common.add_argument("--workers", type=int,
                        help="worker threads (fallback: $RDA_FUSE_WORKERS)")
    common.add_argument("--family", choices=["auto"] + [f.value for f in FftFamily])
    common.add_argument("--out", type=Path)

    parser = argparse.ArgumentParser(prog="rdafuse", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("simulate", parents=[common], help="write a simulated raw scene")
    p = sub.add_parser("process", parents=[common], help="focus a scene file")
    p.add_argument("scene", type=Path)
    sub.add_parser("bench", parents=[common], help="time every FFT family")
    p = sub.add_parser("quality", parents=[common], help="compare two focused images")
    p.add_argument("image", type=Path)
    p.add_argument("reference", type=Path)
    p = sub.add_parser("compare", parents=[common], help="process both modes and report quality")
    p.add_argument("scene", type=Path)
    return parser


def resolve_config(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    if args.full_scale:
        cfg.rows, cfg.cols = 4096, 4096
    elif args.dims:
        cfg.rows, cfg.cols = args.dims
        if max(args.dims) > DESK_LIMIT:
            raise ConfigError(f"dims above {DESK_LIMIT} need --full-scale")
    for name in ("mode", "seed", "reps", "family"):
        if getattr(args, name) is not None:
            setattr(cfg, name, getattr(args, name))
    if args.workers is not None:
        cfg.workers = args.workers
    elif os.environ.get("RDA_FUSE_WORKERS"):
        cfg.workers = int(os.environ["RDA_FUSE_WORKERS"])
    if args.out is not None:
        cfg.out = str(args.out)
    RunConfig.__post_init__(cfg)
    return cfg


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2) + "\n")


def cmd_simulate(cfg: RunConfig) -> Path:
    geom = cfg.resolve_geometry()
    targets = cfg.resolve_targets()
    scene = simulate_scene(geom, targets, cfg.rows, cfg.cols, cfg.noise_snr_db, cfg.seed)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "scene.sarc"
    write_scene(path, scene)
    (out / "run.cfg").write_text(serialize_config(cfg))
    summary = {"scene": str(path), "rows": cfg.rows, "cols": cfg.cols, "seed": cfg.seed,
               "targets": len(targets), "geometry": geom.summary()}
    print(json.dumps(summary, indent=2))
    return path


def _process_mode(cfg: RunConfig, scene: SceneMatrix, mode: str, out: Path) -> SceneMatrix:
    res = run_pipeline(scene, cfg.resolve_geometry(), mode, family=cfg.fft_family,
                       workers=cfg.workers)
    write_scene(out / f"image_{mode}.sarc", res.image)
    _write_json(out / f"ledger_{mode}.json", res.ledger.to_records())
    _write_json(out / f"timings_{mode}.json", res.ledger.to_records(res.timings))
    rc = res.ledger.transfers("range_compression") / scene.rows
    print(f"{mode}: range-compression transfers/line = {rc:g}; "
          + ", ".join(f"{k} {v:.1f} ms" for k, v in res.timings.items()))
    return res.image


def _targets_and_labels(cfg: RunConfig):
    targets = cfg.resolve_targets()
    pixels = predicted_pixels(cfg.resolve_geometry(), targets, cfg.rows, cfg.cols)
    return pixels, [t.label for t in targets]


def _quality(cfg: RunConfig, image, reference, out: Path) -> QualityReport:
    pixels, labels = _targets_and_labels(cfg)
    report = compare_images(image, reference, pixels, labels)
    (out / "quality.json").write_text(report.to_json() + "\n")
    with open(out / "cuts.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["target", "axis", "index", "magnitude_db"])
        for i, t in enumerate(report.reference_targets):
            for axis in ("range", "azimuth"):
                cut = extract_cut(reference, t.pixel, axis)
                db = 20 * np.log10(np.maximum(cut / cut.max(), 1e-10))
                w.writerows([i, axis, k, repr(float(v))] for k, v in enumerate(db))
    print(report.table())
    return report


def cmd_process(cfg: RunConfig, scene_path: Path) -> dict:
    scene = read_scene(scene_path)
    cfg.rows, cfg.cols = scene.shape
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    modes = ["fused", "unfused"] if cfg.mode == "both" else [cfg.mode]
    images = {m: _process_mode(cfg, scene, m, out) for m in modes}
    if cfg.mode == "both":
        report = _quality(cfg, images["fused"], images["unfused"], out)
        stanza = {"l2_relative_error": report.l2_relative_error,
                  "max_abs_error": report.max_abs_error,
                  "snr_delta_db": report.snr_delta_db}
        _write_json(out / "comparison.json", stanza)
    return images


def bench_rows(reps: int, sizes=BENCH_SIZES, batch: int = 256) -> list[dict]:
    rng = np.random.default_rng(0)
    rows = []
    for family in FftFamily:
        for n in sizes:
            try:
                plan = plan_fft(n, family)
            except UnsupportedLength:
                continue
            x = (rng.standard_normal((batch, n)) + 1j * rng.standard_normal((batch, n))).astype(np.complex64)
            fft_lines(plan, x)
            times = []
            for _ in range(reps):
                t0 = time.perf_counter()
                fft_lines(plan, x)
                times.append(time.perf_counter() - t0)
            us = statistics.median(times) / batch * 1e6
            rows.append({"n": n, "family": family.value, "us_per_fft": us,
                         "ffts_per_sec": 1e6 / us})
    return rows


def cmd_bench(cfg: RunConfig) -> Path:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "bench.csv"
    rows = bench_rows(cfg.reps)
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, BENCH_HEADER)
        w.writeheader()
        w.writerows(rows)
    for r in rows:
        print(f"{r['family']:>10} n={r['n']:<5} {r['us_per_fft']:.3g} us/FFT")
    return path


def cmd_quality(cfg: RunConfig, image_path: Path, reference_path: Path) -> QualityReport:
    image = read_scene(image_path)
    reference = read_scene(reference_path)
    cfg.rows, cfg.cols = reference.shape
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    return _quality(cfg, image, reference, out)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        if args.command == "simulate":
            cmd_simulate(cfg)
        elif args.command == "process":
            cmd_process(cfg, args.scene)
        elif args.command == "bench":
            cmd_bench(cfg)
        elif args.command == "quality":
            cmd_quality(cfg, args.image, args.reference)
        elif args.command == "compare":
            cfg.mode = "both"
            cmd_process(cfg, args.scene)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"rdafuse {args.command}: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
