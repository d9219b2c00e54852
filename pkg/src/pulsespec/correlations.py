"""Two-time correlators via the regression recipe, reduced over the triangle.

The emission and absorption integrands are C1(t, theta) = <s+(t+theta) s-(t)>
and C2(t, theta) = <s-(t) s+(t+theta)>. Each is obtained by seeding a
modified operator at time t (sigma_- rho for C1, rho sigma_- for C2),
evolving it with the same master equation and pulse maps, and reading off
the ge element. Exchanging the order of the double integral lets the
t-integration happen first, so only the theta-indexed kernels

    G1(theta) = int_0^{T-theta} C1(t, theta) dt     (G2 likewise)

are ever stored, never the full (t, theta) grid.

``correlator_row`` computes one t-row at a time (the reference path);
``accumulate_kernel`` advances all rows together in absolute time s = t +
theta, which turns the reduction into array operations: at each grid time
s_m the active rows hold the antidiagonal {C(t_k, theta_{m-k})}, which is
weighted and added into the kernels in one shot. The two paths produce the
same numbers and check each other in the tests.
"""

from __future__ import annotations

import numpy as np

from .core import (
    CorrelationKernel,
    PulseAxis,
    PulseSchedule,
    SimParams,
    TwoLevelOperator,
    left_mul_sigma_minus,
    right_mul_sigma_minus,
)
from .dynamics import (
    TIME_SNAP,
    _pieces,
    density_trajectory,
    evolve_operator,
    step_multipliers,
)


def correlator_row(t_seed: float, rho_at_seed: TwoLevelOperator,
                   schedule: PulseSchedule, params: SimParams,
                   stepper: str = "rk4") -> tuple[np.ndarray, np.ndarray]:
    """Correlators C1(t_seed, theta), C2(t_seed, theta) for theta in [0, T-t_seed].

    ``rho_at_seed`` must be the density matrix at t_seed (post-pulse if a
    pulse sits exactly there). Returns the two complex rows sampled on the
    uniform theta grid with step dt. At theta = 0 they equal the excited and
    ground populations at t_seed.
    """
    dt = params.dt
    k = round(t_seed / dt)
    if k < 0 or k > params.n_steps or abs(k * dt - t_seed) > TIME_SNAP * dt:
        raise ValueError(
            f"t_seed={t_seed} is not on the [0, {params.t_end}] grid with step {dt}"
        )
    theta_count = params.n_steps - k + 1
    sample_times = t_seed + np.arange(theta_count) * dt

    _, row1 = evolve_operator(
        left_mul_sigma_minus(rho_at_seed), t_seed, params.t_end,
        schedule, params, record_grid=sample_times, stepper=stepper,
    )
    _, row2 = evolve_operator(
        right_mul_sigma_minus(rho_at_seed), t_seed, params.t_end,
        schedule, params, record_grid=sample_times, stepper=stepper,
    )
    c1 = np.array([s.ge for s in row1], dtype=complex)
    c2 = np.array([s.ge for s in row2], dtype=complex)
    return c1, c2


def _batch_pulse(axis: PulseAxis, ee, eg, ge, gg, sl: slice) -> None:
    """Apply sigma_i . sigma_i in place to the active slice of a row batch."""
    if axis is PulseAxis.X:
        tmp = ee[sl].copy()
        ee[sl] = gg[sl]
        gg[sl] = tmp
        tmp = eg[sl].copy()
        eg[sl] = ge[sl]
        ge[sl] = tmp
    elif axis is PulseAxis.Y:
        tmp = ee[sl].copy()
        ee[sl] = gg[sl]
        gg[sl] = tmp
        tmp = eg[sl].copy()
        eg[sl] = -ge[sl]
        ge[sl] = -tmp
    elif axis is PulseAxis.Z:
        eg[sl] *= -1.0
        ge[sl] *= -1.0
    else:
        raise ValueError(f"unknown pulse axis {axis!r}")


def accumulate_kernel(schedule: PulseSchedule, params: SimParams,
                      stepper: str = "rk4") -> CorrelationKernel:
    """Reduce both correlators to their theta kernels G1, G2.

    One regression row is seeded per t-grid point from the density-matrix
    trajectory and all rows advance together in absolute time; row k only
    contributes to theta indices 0..N-k (the integration triangle). The
    t-quadrature uses trapezoidal row weights: dt/2 for the rows seeded at
    t = 0 and t = T, dt for the rest. The reduction order is fixed, so
    repeated runs are bit-identical.
    """
    params.check_schedule(schedule)
    traj = density_trajectory(schedule, params, stepper=stepper)
    t_ee, t_eg, t_ge, t_gg = traj.element_arrays()
    n = params.n_steps
    dt = params.dt
    grid = traj.t_grid
    snap = TIME_SNAP * dt

    # row batches for sigma_- rho (family 1) and rho sigma_- (family 2)
    ee1 = np.zeros(n + 1, dtype=complex)
    eg1 = np.zeros(n + 1, dtype=complex)
    ge1 = np.zeros(n + 1, dtype=complex)
    gg1 = np.zeros(n + 1, dtype=complex)
    ee2 = np.zeros(n + 1, dtype=complex)
    eg2 = np.zeros(n + 1, dtype=complex)
    ge2 = np.zeros(n + 1, dtype=complex)
    gg2 = np.zeros(n + 1, dtype=complex)

    g1 = np.zeros(n + 1, dtype=complex)
    g2 = np.zeros(n + 1, dtype=complex)
    w = np.full(n + 1, dt)
    w[0] = w[-1] = 0.5 * dt

    def _seed(m: int) -> None:
        ge1[m] = t_ee[m]
        gg1[m] = t_eg[m]
        ee1[m] = eg1[m] = 0j
        ee2[m] = t_eg[m]
        ge2[m] = t_gg[m]
        eg2[m] = gg2[m] = 0j

    _seed(0)
    g1[0] += w[0] * ge1[0]
    g2[0] += w[0] * ge2[0]

    for m in range(1, n + 1):
        sl = slice(0, m)
        for h, axis in _pieces(grid[m - 1], grid[m], schedule, snap):
            if h > snap:
                decay, phase = step_multipliers(h, params.delta, params.gamma,
                                                stepper)
                feed = 1.0 - decay
                cphase = phase.conjugate()
                gg1[sl] += feed * ee1[sl]
                ee1[sl] *= decay
                ge1[sl] *= phase
                eg1[sl] *= cphase
                gg2[sl] += feed * ee2[sl]
                ee2[sl] *= decay
                ge2[sl] *= phase
                eg2[sl] *= cphase
            if axis is not None:
                _batch_pulse(axis, ee1, eg1, ge1, gg1, sl)
                _batch_pulse(axis, ee2, eg2, ge2, gg2, sl)
        _seed(m)
        both = slice(0, m + 1)
        g1[both] += (w[both] * ge1[both])[::-1]
        g2[both] += (w[both] * ge2[both])[::-1]

    return CorrelationKernel(
        theta_grid=grid,
        g1=g1,
        g2=g2,
        params=params,
        schedule_digest=schedule.digest(),
    )
