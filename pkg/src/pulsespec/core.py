"""Domain types and elementary operator algebra for a driven two-level emitter.

Everything lives in the two-dimensional {|e>, |g>} basis. Operators are kept
as four explicit complex matrix elements rather than a generic matrix type:
the equations of motion are written per element and the correlation kernel
reduction touches these elements in its innermost loop.
"""

from __future__ import annotations

import hashlib
import warnings
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

#: default tolerance for density-matrix validation
DENSITY_TOL = 1e-9


class PulseAxis(Enum):
    """Rotation axis of an instantaneous pi pulse."""

    X = "x"
    Y = "y"
    Z = "z"


@dataclass(frozen=True)
class TwoLevelOperator:
    """A general complex 2x2 operator in the {|e>, |g>} basis.

    The same container holds the physical density matrix and the
    non-Hermitian regression seeds (sigma_- rho and rho sigma_-), so no
    Hermiticity or trace constraint is enforced at construction. Use
    :func:`validate_density` to check the physical-state invariants.
    """

    ee: complex = 0j
    eg: complex = 0j
    ge: complex = 0j
    gg: complex = 0j

    @property
    def trace(self) -> complex:
        return self.ee + self.gg

    def as_matrix(self) -> np.ndarray:
        """Return the operator as a 2x2 complex array, rows/cols = (e, g)."""
        return np.array([[self.ee, self.eg], [self.ge, self.gg]], dtype=complex)

    @classmethod
    def from_matrix(cls, m) -> "TwoLevelOperator":
        m = np.asarray(m, dtype=complex)
        if m.shape != (2, 2):
            raise ValueError(f"expected a 2x2 matrix, got shape {m.shape}")
        return cls(ee=m[0, 0], eg=m[0, 1], ge=m[1, 0], gg=m[1, 1])


#: initial condition used throughout: excited state occupied, no coherence
EXCITED_STATE = TwoLevelOperator(ee=1.0 + 0j, eg=0j, ge=0j, gg=0j)


def validate_density(op: TwoLevelOperator, tol: float = DENSITY_TOL) -> bool:
    """Check whether ``op`` is a physical density matrix.

    True iff the matrix is Hermitian (ge = conj(eg), real populations),
    has unit trace, and both populations lie in [0, 1], all within ``tol``.
    Pure predicate: never raises for a malformed operator.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if abs(op.ee.imag) > tol or abs(op.gg.imag) > tol:
        return False
    if abs(op.ge - op.eg.conjugate()) > tol:
        return False
    if abs(op.trace - 1.0) > tol:
        return False
    for p in (op.ee.real, op.gg.real):
        if p < -tol or p > 1.0 + tol:
            return False
    return True


def left_mul_sigma_minus(rho: TwoLevelOperator) -> TwoLevelOperator:
    """Return sigma_- rho, the seed for the <sigma_+(t+theta) sigma_-(t)> row.

    With sigma_- = |g><e| the product moves the top row of rho to the bottom:
    ge <- rho.ee, gg <- rho.eg, everything else zero.
    """
    return TwoLevelOperator(ee=0j, eg=0j, ge=rho.ee, gg=rho.eg)


def right_mul_sigma_minus(rho: TwoLevelOperator) -> TwoLevelOperator:
    """Return rho sigma_-, the seed for the <sigma_-(t) sigma_+(t+theta)> row.

    Moves the right column of rho to the left: ee <- rho.eg, ge <- rho.gg.
    """
    return TwoLevelOperator(ee=rho.eg, eg=0j, ge=rho.gg, gg=0j)


@dataclass(frozen=True)
class PulseEvent:
    """A single instantaneous pulse: (time, rotation axis)."""

    time: float
    axis: PulseAxis


@dataclass(frozen=True)
class PulseSchedule:
    """Ordered instantaneous-pulse events over an observation window [0, T].

    Invariants: event times strictly increasing, all within (0, window_end].
    """

    events: tuple[PulseEvent, ...]
    window_end: float

    def __post_init__(self):
        if self.window_end <= 0:
            raise ValueError("window_end must be positive")
        prev = 0.0
        for ev in self.events:
            if ev.time <= prev:
                raise ValueError(
                    f"pulse times must be strictly increasing and positive; "
                    f"got {ev.time} after {prev}"
                )
            prev = ev.time
        if self.events and self.events[-1].time > self.window_end * (1 + 1e-12):
            raise ValueError(
                f"pulse at t={self.events[-1].time} lies outside the window "
                f"(0, {self.window_end}]"
            )

    @property
    def times(self) -> np.ndarray:
        return np.array([ev.time for ev in self.events])

    def min_gap(self) -> float:
        """Smallest spacing between consecutive events (including 0 -> first).

        Returns +inf for an empty schedule.
        """
        if not self.events:
            return np.inf
        t = self.times
        return float(np.min(np.diff(np.concatenate(([0.0], t)))))

    def digest(self) -> str:
        """Deterministic short hash of the event list, for run metadata."""
        h = hashlib.sha256()
        h.update(f"T={self.window_end:.17g}".encode())
        for ev in self.events:
            h.update(f";{ev.time:.17g},{ev.axis.value}".encode())
        return h.hexdigest()[:16]


@dataclass(frozen=True)
class SimParams:
    """Physical and numerical parameters of one simulation run.

    delta      detuning of the emitter from the pulse carrier (rotating frame)
    gamma      spontaneous emission rate (> 0); the natural unit choice is 2
    t_end      observation window T (> 0); must match the schedule window
    dt         integration step; t_end must be an integer number of steps
    omega_grid detector frequencies, strictly increasing
    """

    delta: float
    gamma: float = 2.0
    t_end: float = 2.0
    dt: float = 1e-3
    omega_grid: np.ndarray = field(default_factory=lambda: default_omega_grid())

    def __post_init__(self):
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")
        if self.t_end <= 0:
            raise ValueError("t_end must be positive")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        n = round(self.t_end / self.dt)
        if n < 1 or abs(n * self.dt - self.t_end) > 1e-9 * max(1.0, self.t_end):
            raise ValueError(
                f"t_end={self.t_end} is not an integer multiple of dt={self.dt}"
            )
        grid = np.asarray(self.omega_grid, dtype=float)
        if grid.ndim != 1 or grid.size == 0:
            raise ValueError("omega_grid must be a nonempty 1-d array")
        if grid.size > 1 and np.any(np.diff(grid) <= 0):
            raise ValueError("omega_grid must be strictly increasing")
        grid.flags.writeable = False
        object.__setattr__(self, "omega_grid", grid)

    @property
    def n_steps(self) -> int:
        """Number of dt steps spanning [0, t_end]."""
        return round(self.t_end / self.dt)

    def time_grid(self) -> np.ndarray:
        """Uniform grid t_k = k*dt over [0, t_end]."""
        return np.arange(self.n_steps + 1) * self.dt

    def check_schedule(self, schedule: PulseSchedule) -> None:
        """Sanity-check a parameter/schedule combination before a run.

        Mismatched windows are an error. A dt above a tenth of the smallest
        pulse gap only warns: coarse grids are legitimate for bookkeeping
        cross-checks, but production spectra want many steps per interval.
        """
        if abs(schedule.window_end - self.t_end) > 1e-9 * max(1.0, self.t_end):
            raise ValueError(
                f"schedule window {schedule.window_end} != t_end {self.t_end}"
            )
        gap = schedule.min_gap()
        if not self.dt < gap / 10.0:
            warnings.warn(
                f"dt={self.dt} resolves the minimum pulse gap {gap} with "
                f"fewer than 10 steps; spectra may be inaccurate",
                stacklevel=2,
            )


def default_omega_grid(omega_min: float = -40.0, omega_max: float = 40.0,
                       step: float = 0.025) -> np.ndarray:
    """Detector-frequency grid covering every lineshape in the studied protocols."""
    if step <= 0 or omega_max <= omega_min:
        raise ValueError("need omega_max > omega_min and step > 0")
    n = round((omega_max - omega_min) / step)
    if abs(omega_min + n * step - omega_max) > 1e-9 * max(1.0, abs(omega_max)):
        raise ValueError("omega range is not an integer number of steps")
    return omega_min + np.arange(n + 1) * step


@dataclass(frozen=True)
class CorrelationKernel:
    """Two-time correlators reduced over the emission triangle.

    g1[j] = integral over t in [0, T - theta_j] of <sigma_+(t+theta_j) sigma_-(t)>
    g2[j] = same for <sigma_-(t) sigma_+(t+theta_j)>

    theta_grid is the uniform grid [0, T] with step dt. The producing run's
    parameters and schedule digest ride along so a spectrum can be labelled.
    """

    theta_grid: np.ndarray
    g1: np.ndarray
    g2: np.ndarray
    params: SimParams
    schedule_digest: str

    def __post_init__(self):
        if len(self.g1) != len(self.theta_grid) or len(self.g2) != len(self.theta_grid):
            raise ValueError("kernel arrays must match the theta grid length")
        for name in ("theta_grid", "g1", "g2"):
            arr = np.asarray(getattr(self, name))
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)


@dataclass(frozen=True)
class SpectrumResult:
    """Per-frequency emission P, direct absorption P', net absorption Q = P' - P."""

    omega: np.ndarray
    emission: np.ndarray
    direct_absorption: np.ndarray
    net_absorption: np.ndarray
    params: SimParams
    schedule_digest: str

    def __post_init__(self):
        n = len(self.omega)
        for name in ("omega", "emission", "direct_absorption", "net_absorption"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if len(arr) != n:
                raise ValueError("spectrum arrays must share the omega grid length")
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
