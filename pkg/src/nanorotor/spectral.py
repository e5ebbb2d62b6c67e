"""Detector signal models and power spectral density estimation.

The far-field detector observables reduce to orientation factors of the
polarization vector: the 45-degree polarimetric signal follows p_y
(~ xi near equilibrium) and split detection follows p_z (~ eta).
Proportionality constants (detector gain) are set to 1; peak locations
and relative heights, the quantities of interest, are gain-independent.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import signal as sps

from .errors import InsufficientData, PeaksNotFound
from .modes import axial_displacement_ratio
from .params import ParticleParams, TrapParams
from .rigidbody import EulerState


def signal_p45(
    s: EulerState,
    trap: TrapParams | None = None,
    particle: ParticleParams | None = None,
    apply_gouy: bool = False,
) -> float:
    """45-degree PBS difference signal, sin^2(beta) cos(alpha) sin(alpha)."""
    v = math.sin(s.beta) ** 2 * math.cos(s.alpha) * math.sin(s.alpha)
    if apply_gouy:
        v *= gouy_attenuation(particle, trap)
    return v


def signal_split(
    s: EulerState,
    trap: TrapParams | None = None,
    particle: ParticleParams | None = None,
    apply_gouy: bool = False,
) -> float:
    """Split-detection signal, cos(beta) sin(beta) cos(alpha) (~ eta)."""
    v = math.cos(s.beta) * math.sin(s.beta) * math.cos(s.alpha)
    if apply_gouy:
        v *= gouy_attenuation(particle, trap)
    return v


def p45_series(alpha: np.ndarray, beta: np.ndarray) -> np.ndarray:
    """Vectorized signal_p45 over sampled trajectories."""
    return np.sin(beta) ** 2 * np.cos(alpha) * np.sin(alpha)


def split_series(alpha: np.ndarray, beta: np.ndarray) -> np.ndarray:
    return np.cos(beta) * np.sin(beta) * np.cos(alpha)


def gouy_attenuation(particle: ParticleParams, trap: TrapParams) -> float:
    """Multiplicative homodyne attenuation z_d/z_R from the Gouy phase."""
    return axial_displacement_ratio(particle, trap)


@dataclass(frozen=True)
class PsdResult:
    """One-sided Welch PSD with estimator metadata."""

    frequencies: np.ndarray   # Hz
    power: np.ndarray         # signal^2 / Hz
    dt: float                 # s
    window: str
    segment_length: int
    overlap: float
    n_segments: int

    @property
    def omega(self) -> np.ndarray:
        """Angular-frequency axis, rad/s."""
        return 2.0 * math.pi * self.frequencies

    def integrated_power(self) -> float:
        return float(np.trapezoid(self.power, self.frequencies))

    def parseval_ok(self, variance: float, tol: float = 0.02) -> bool:
        """Integral of the PSD matches the signal variance within tol."""
        if variance == 0.0:
            return True
        return abs(self.integrated_power() - variance) <= tol * variance


def estimate_psd(
    series: np.ndarray,
    dt: float,
    segment_length: int | None = None,
    overlap: float = 0.5,
    window: str = "hann",
) -> PsdResult:
    """Welch-averaged one-sided periodogram, density normalization.

    Hann window and 50% overlap by default; a unit-variance white series
    yields a flat density of 2 dt.  Raises InsufficientData when the series
    is shorter than one segment.
    """
    series = np.asarray(series, dtype=float)
    if dt <= 0.0:
        raise InsufficientData("dt must be positive")
    if segment_length is None:
        segment_length = min(len(series), 4096)
    if len(series) < segment_length or segment_length < 8:
        raise InsufficientData(
            f"series length {len(series)} below segment length {segment_length}"
        )
    noverlap = int(overlap * segment_length)
    freqs, power = sps.welch(
        series,
        fs=1.0 / dt,
        window=window,
        nperseg=segment_length,
        noverlap=noverlap,
        detrend="constant",
        scaling="density",
    )
    step = segment_length - noverlap
    n_segments = 1 + (len(series) - segment_length) // step
    return PsdResult(
        frequencies=freqs,
        power=power,
        dt=dt,
        window=window,
        segment_length=segment_length,
        overlap=overlap,
        n_segments=n_segments,
    )


def find_peaks(
    psd: PsdResult, n: int = 1, floor_factor: float = 3.0
) -> list[tuple[float, float, float]]:
    """The n tallest spectral peaks as (frequency_Hz, height, width_Hz).

    Local maxima above floor_factor x the median floor, refined by
    parabolic sub-bin interpolation on log power.  Raises PeaksNotFound if
    fewer than n qualify.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    p = psd.power
    f = psd.frequencies
    floor = float(np.median(p)) * floor_factor
    idx, props = sps.find_peaks(p, height=floor)
    if len(idx) < n:
        raise PeaksNotFound(
            f"found {len(idx)} peaks above {floor_factor}x median floor, wanted {n}"
        )
    order = np.argsort(props["peak_heights"])[::-1][:n]
    out = []
    df = f[1] - f[0]
    for i in idx[order]:
        if 0 < i < len(p) - 1 and p[i - 1] > 0 and p[i + 1] > 0:
            # parabolic interpolation on log power
            la, lb, lc = np.log(p[i - 1]), np.log(p[i]), np.log(p[i + 1])
            denom = la - 2.0 * lb + lc
            shift = 0.5 * (la - lc) / denom if denom != 0.0 else 0.0
            shift = float(np.clip(shift, -0.5, 0.5))
            height = float(np.exp(lb - 0.25 * (la - lc) * shift))
        else:
            shift, height = 0.0, float(p[i])
        freq = float(f[i] + shift * df)
        half = height / 2.0
        lo = i
        while lo > 0 and p[lo] > half:
            lo -= 1
        hi = i
        while hi < len(p) - 1 and p[hi] > half:
            hi += 1
        out.append((freq, height, float((hi - lo) * df)))
    out.sort(key=lambda pk: -pk[1])
    return out
