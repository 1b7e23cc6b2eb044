"""Smoothed spectral projectors on the tube boundary and the experiments built on them."""
from .kernels import (
    ShortWindowValue,
    auto_degree,
    frequencies,
    pairing,
    projector_kernel,
    short_window_kernel,
    short_window_shells,
    tempered_kernel,
)
from .windows import SpectralWindow, tail_cutoff, window_chi, window_hat
from .experiments import ExperimentResult, KernelSeries, Threshold

__all__ = [
    "ExperimentResult",
    "KernelSeries",
    "ShortWindowValue",
    "SpectralWindow",
    "Threshold",
    "auto_degree",
    "frequencies",
    "pairing",
    "projector_kernel",
    "short_window_kernel",
    "short_window_shells",
    "tail_cutoff",
    "tempered_kernel",
    "window_chi",
    "window_hat",
]
