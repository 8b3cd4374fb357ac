"""Geometric phases of dissipative three-level STIRAP.

Computes adiabatic geometric phases of the open (Markovian) system from the
left/right eigensystem of the 9x9 Liouville supermatrix tracked along the
pulse cycle, together with the closed-system analytics and independent
cross-check integrators used to validate the pipeline.
"""

from .lindblad import (
    DecayRates,
    Liouvillian,
    RateCombos,
    build_hamiltonian,
    build_superoperator,
    coherence_to_density,
    density_to_coherence,
    liouvillian_matrix,
)
from .stirap import (
    PulseParams,
    adiabaticity_lhs,
    closed_eigensystem,
    pulses,
    t_of_theta,
    theta_of_t,
)

__version__ = "0.1.0"
