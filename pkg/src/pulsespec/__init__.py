"""Emission and net-absorption spectra of a pulse-driven two-level emitter.

The pipeline: build a pulse schedule, evolve the density matrix over the
observation window, reduce the two-time correlators to theta kernels via
the regression recipe, and Fourier-transform onto a detector grid.

>>> from pulsespec import *
>>> sched = periodic_schedule([PulseAxis.Z], tau=0.2, n_pulses=12)
>>> params = SimParams(delta=3.0, t_end=2.4)
>>> spec = spectrum_from_kernel(accumulate_kernel(sched, params),
...                             params.omega_grid)
"""

from .core import (
    CorrelationKernel,
    PulseAxis,
    PulseEvent,
    PulseSchedule,
    SimParams,
    SpectrumResult,
    TwoLevelOperator,
    default_omega_grid,
    left_mul_sigma_minus,
    right_mul_sigma_minus,
    validate_density,
)
from .correlations import accumulate_kernel, correlator_row
from .dynamics import (
    Trajectory,
    apply_pulse,
    density_trajectory,
    evolve_operator,
    free_derivative,
    free_propagator_exact,
    rk4_step,
)
from .sequences import no_drive_schedule, periodic_schedule, uhrig_schedule
from .spectra import (
    detuning_average,
    dominant_peaks,
    emission_sum_rule,
    full_width_half_max,
    local_maxima,
    spectrum_from_kernel,
)

__version__ = "0.1.0"

__all__ = [
    "CorrelationKernel",
    "PulseAxis",
    "PulseEvent",
    "PulseSchedule",
    "SimParams",
    "SpectrumResult",
    "Trajectory",
    "TwoLevelOperator",
    "accumulate_kernel",
    "apply_pulse",
    "correlator_row",
    "default_omega_grid",
    "density_trajectory",
    "detuning_average",
    "dominant_peaks",
    "emission_sum_rule",
    "evolve_operator",
    "free_derivative",
    "free_propagator_exact",
    "full_width_half_max",
    "left_mul_sigma_minus",
    "local_maxima",
    "no_drive_schedule",
    "periodic_schedule",
    "right_mul_sigma_minus",
    "rk4_step",
    "spectrum_from_kernel",
    "uhrig_schedule",
    "validate_density",
]
