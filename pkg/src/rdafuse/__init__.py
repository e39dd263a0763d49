"""Kernel-fused SAR Range Doppler processing on the CPU.

Modules: ``core`` (buffers, layouts, scene files), ``fft`` (Stockham and
CT-DIF kernels), ``sar_sim`` (point-target simulator, matched filters),
``rda`` (fused/unfused pipeline, traffic ledger), ``quality`` (image metrics)
and ``cli``.
"""

from .core import ComplexBuffer, Layout, SceneMatrix, read_scene, write_scene
from .fft import FftFamily, fft_forward, ifft, plan_fft
from .rda import Mode, TrafficLedger, run_pipeline
from .sar_sim import PointTarget, SarGeometry, default_targets, simulate_scene

__all__ = [
    "ComplexBuffer", "Layout", "SceneMatrix", "read_scene", "write_scene",
    "FftFamily", "fft_forward", "ifft", "plan_fft",
    "Mode", "TrafficLedger", "run_pipeline",
    "PointTarget", "SarGeometry", "default_targets", "simulate_scene",
]

__version__ = "0.1.0"
