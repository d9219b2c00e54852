"""Spectra from correlation kernels: emission, direct and net absorption.

The emission spectrum is the Fourier transform of G1 over theta,
P(omega) = 2 Re int_0^T G1(theta) e^{-i omega theta} d theta, with the
overall detector-coupling scale set to one; the direct absorption P' is the
same transform of G2 and the net absorption is Q = P' - P. The transform is
evaluated as an explicit quadrature sum, which keeps the frequency grid
arbitrary; at the default resolution this costs ~1e7 multiply-adds, done in
chunks to bound memory.
"""

from __future__ import annotations

import warnings
from dataclasses import replace

import numpy as np

from .core import CorrelationKernel, PulseSchedule, SimParams, SpectrumResult
from .correlations import accumulate_kernel

#: frequencies per chunk in the transform (memory/speed tradeoff only)
_CHUNK = 256


def spectrum_from_kernel(kernel: CorrelationKernel,
                         omega_grid: np.ndarray) -> SpectrumResult:
    """Fourier-transform the kernels onto a detector frequency grid.

    Trapezoidal weights in theta; net absorption is computed as the exact
    elementwise difference of the other two columns.
    """
    omega = np.asarray(omega_grid, dtype=float)
    if omega.ndim != 1 or omega.size == 0:
        raise ValueError("omega_grid must be a nonempty 1-d array")
    if omega.size > 1 and np.any(np.diff(omega) <= 0):
        raise ValueError("omega_grid must be strictly increasing")
    theta = kernel.theta_grid
    if len(theta) < 2:
        raise ValueError("kernel theta grid must have at least two points")

    dtheta = theta[1] - theta[0]
    wq = np.full(len(theta), dtheta)
    wq[0] = wq[-1] = 0.5 * dtheta
    f1 = wq * kernel.g1
    f2 = wq * kernel.g2

    emission = np.empty(omega.size)
    direct = np.empty(omega.size)
    for i in range(0, omega.size, _CHUNK):
        block = omega[i:i + _CHUNK]
        kern = np.exp(np.outer(block, -1j * theta))
        emission[i:i + _CHUNK] = 2.0 * np.real(kern @ f1)
        direct[i:i + _CHUNK] = 2.0 * np.real(kern @ f2)

    return SpectrumResult(
        omega=omega,
        emission=emission,
        direct_absorption=direct,
        net_absorption=direct - emission,
        params=kernel.params,
        schedule_digest=kernel.schedule_digest,
    )


def emission_sum_rule(result: SpectrumResult,
                      kernel: CorrelationKernel) -> tuple[float, float]:
    """Parseval check: int P(omega) d omega / (2 pi) against G1(0).

    G1(0) is the time-integrated excited population, so the two agree up to
    quadrature error and spectral weight outside the frequency grid. Warns
    when the emission has not decayed at the grid edges.
    """
    omega = result.omega
    if (omega[0] > -40.0 or omega[-1] < 40.0
            or np.max(np.diff(omega)) > 0.05 * (1 + 1e-9)):
        raise ValueError(
            "sum rule needs an omega grid spanning at least [-40, 40] "
            "with step <= 0.05"
        )
    p = result.emission
    lhs = float(np.sum((p[1:] + p[:-1]) * np.diff(omega)) / 2.0 / (2.0 * np.pi))
    rhs = float(kernel.g1[0].real)
    edge = max(abs(p[0]), abs(p[-1]))
    if edge > 1e-3 * np.max(p, initial=0.0):
        warnings.warn(
            "emission at the omega-grid edge is not negligible; "
            "widen the grid for a reliable sum rule",
            stacklevel=2,
        )
    return lhs, rhs


def detuning_average(schedule: PulseSchedule, base_params: SimParams,
                     deltas: np.ndarray, weights: np.ndarray) -> SpectrumResult:
    """Weighted ensemble average of spectra over a set of detunings.

    Proxy for inhomogeneous broadening: the full pipeline runs once per
    detuning and the spectra are averaged elementwise. Weights must be
    nonnegative and sum to one.
    """
    deltas = np.asarray(deltas, dtype=float)
    weights = np.asarray(weights, dtype=float)
    if deltas.shape != weights.shape or deltas.ndim != 1 or deltas.size == 0:
        raise ValueError("deltas and weights must be 1-d arrays of equal length")
    if np.any(weights < 0):
        raise ValueError("weights must be nonnegative")
    if abs(weights.sum() - 1.0) > 1e-12:
        raise ValueError(f"weights must sum to 1, got {weights.sum()!r}")

    omega = base_params.omega_grid
    emission = np.zeros(omega.size)
    direct = np.zeros(omega.size)
    digest = ""
    for d, wt in zip(deltas, weights):
        kern = accumulate_kernel(schedule, replace(base_params, delta=float(d)))
        spec = spectrum_from_kernel(kern, omega)
        emission += wt * spec.emission
        direct += wt * spec.direct_absorption
        digest = spec.schedule_digest

    pairs = ",".join(f"{d:.17g}:{wt:.17g}" for d, wt in zip(deltas, weights))
    return SpectrumResult(
        omega=omega,
        emission=emission,
        direct_absorption=direct,
        net_absorption=direct - emission,
        params=base_params,
        schedule_digest=f"{digest} avg[{pairs}]",
    )


def smooth3(values: np.ndarray) -> np.ndarray:
    """3-point moving average with the ends left untouched."""
    v = np.asarray(values, dtype=float)
    if v.size < 3:
        return v.copy()
    out = v.copy()
    out[1:-1] = (v[:-2] + v[1:-1] + v[2:]) / 3.0
    return out


def local_maxima(omega: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Indices of local maxima of the 3-point-smoothed values.

    A point qualifies when it strictly exceeds its left neighbor and is at
    least its right neighbor, so a flat run counts once at its lowest
    frequency. Grid endpoints never qualify.
    """
    s = smooth3(values)
    if s.size < 3:
        return np.array([], dtype=int)
    inner = (s[1:-1] > s[:-2]) & (s[1:-1] >= s[2:])
    return np.nonzero(inner)[0] + 1


def dominant_peaks(omega: np.ndarray, values: np.ndarray,
                   rel_height: float = 0.5) -> list[tuple[float, float]]:
    """(position, smoothed height) of local maxima above rel_height * max."""
    s = smooth3(values)
    idx = local_maxima(omega, values)
    if idx.size == 0:
        return []
    cut = rel_height * s[idx].max()
    return [(float(omega[i]), float(s[i])) for i in idx if s[i] >= cut]


def full_width_half_max(omega: np.ndarray, values: np.ndarray) -> float:
    """FWHM of the global maximum via linear interpolation of the crossings."""
    v = np.asarray(values, dtype=float)
    i = int(np.argmax(v))
    half = v[i] / 2.0
    left = np.nonzero(v[:i] < half)[0]
    right = np.nonzero(v[i:] < half)[0]
    if left.size == 0 or right.size == 0:
        raise ValueError("half-maximum level is not crossed on both sides")
    j = left[-1]
    lo = omega[j] + (half - v[j]) * (omega[j + 1] - omega[j]) / (v[j + 1] - v[j])
    k = i + right[0]
    hi = omega[k - 1] + (half - v[k - 1]) * (omega[k] - omega[k - 1]) / (v[k] - v[k - 1])
    return float(hi - lo)
