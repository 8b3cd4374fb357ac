"""Gaussian pulse pair, mixing-angle parameterization, and closed-system analytics.

The two Rabi frequencies trace a closed curve through the origin of the
(g1, g2) plane as t runs over the real line; the mixing angle
theta = arctan(g1/g2) then runs monotonically across (0, pi/2), increasing for
positive pulse delay and decreasing for negative delay.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .lindblad import build_hamiltonian

__all__ = [
    "PulseParams",
    "ClosedEigenSystem",
    "DegenerateDelay",
    "pulses",
    "theta_of_t",
    "t_of_theta",
    "dtheta_dt",
    "adiabaticity_lhs",
    "closed_eigensystem",
    "closed_berry_integrand",
]

# below this fraction of peak intensity the adiabaticity ratio is reported as
# infinite rather than risking 0/0
_UNDERFLOW_FLOOR = 1e-300


class DegenerateDelay(ValueError):
    """t0 = 0 freezes theta; the t <-> theta maps are undefined."""


@dataclass(frozen=True)
class PulseParams:
    """Gaussian pulse pair g1 = g01 exp(-(t-t0)^2/tau^2), g2 = g02 exp(-t^2/tau^2).

    For t0 > 0 the g2 (Stokes) pulse precedes the g1 (probe) pulse, the
    counterintuitive STIRAP ordering.  phi is the fixed superposition angle of
    the two bright states; pi/4 is the value consistent with real couplings.
    """

    g01: float = 15.0
    g02: float = 15.0
    t0: float = 4.0 / 3.0
    tau: float = 1.0
    phi: float = field(default=math.pi / 4.0)

    def __post_init__(self):
        if self.tau <= 0:
            raise ValueError(f"tau must be positive, got {self.tau}")
        if self.g01 <= 0 or self.g02 <= 0:
            raise ValueError(f"pulse amplitudes must be positive, got {(self.g01, self.g02)}")


def pulses(t: float, p: PulseParams) -> tuple[float, float]:
    """Instantaneous Rabi frequencies (g1, g2) at time t."""
    g1 = p.g01 * math.exp(-((t - p.t0) ** 2) / p.tau**2)
    g2 = p.g02 * math.exp(-(t**2) / p.tau**2)
    return g1, g2


def theta_of_t(t: float, p: PulseParams) -> float:
    """Mixing angle theta(t) = arctan(g1/g2) in (0, pi/2).

    Evaluated from the closed form tan(theta) = (g01/g02) exp((2 t t0 - t0^2)/tau^2),
    with asymptotic branches so the extreme tails neither overflow nor lose
    the distinction from the limits 0 and pi/2.
    """
    if p.t0 == 0.0:
        raise DegenerateDelay("t0 = 0 makes theta constant in time")
    arg = (2.0 * t * p.t0 - p.t0**2) / p.tau**2
    ratio = p.g01 / p.g02
    if arg > 350.0:
        return math.pi / 2.0 - math.exp(-arg) / ratio
    if arg < -350.0:
        return ratio * math.exp(arg)
    return math.atan(ratio * math.exp(arg))


def t_of_theta(theta: float, p: PulseParams) -> float:
    """Inverse of :func:`theta_of_t` on the open interval (0, pi/2)."""
    if p.t0 == 0.0:
        raise DegenerateDelay("t0 = 0 makes theta constant in time")
    if not 0.0 < theta < math.pi / 2.0:
        raise ValueError(f"theta must lie strictly inside (0, pi/2), got {theta}")
    return (p.tau**2 * math.log((p.g02 / p.g01) * math.tan(theta)) + p.t0**2) / (2.0 * p.t0)


def dtheta_dt(t: float, p: PulseParams) -> float:
    """Analytic rate of change of the mixing angle, (t0/tau^2) sin(2 theta)."""
    return (p.t0 / p.tau**2) * math.sin(2.0 * theta_of_t(t, p))


def adiabaticity_lhs(t: float, p: PulseParams) -> float:
    """|dtheta/dt| / sqrt(g1^2 + g2^2), the adiabaticity ratio (<< 1 is adiabatic).

    Returns +inf when both pulses have decayed below the floating-point floor.
    """
    g1, g2 = pulses(t, p)
    peak = max(p.g01, p.g02)
    if g1 < _UNDERFLOW_FLOOR * peak and g2 < _UNDERFLOW_FLOOR * peak:
        return math.inf
    norm = math.hypot(g1, g2)
    if norm == 0.0:
        return math.inf
    return abs(dtheta_dt(t, p)) / norm


@dataclass(frozen=True)
class ClosedEigenSystem:
    """Instantaneous eigensystem of the closed three-level Hamiltonian.

    energies = (0, +E, -E) with E = coupling norm; states has the dark state,
    then the upper and lower bright states, as columns (real-valued).
    """

    theta: float
    phi: float
    energies: np.ndarray
    states: np.ndarray

    @property
    def dark(self) -> np.ndarray:
        return self.states[:, 0]

    @property
    def bright_plus(self) -> np.ndarray:
        return self.states[:, 1]

    @property
    def bright_minus(self) -> np.ndarray:
        return self.states[:, 2]


def closed_eigensystem(theta: float, phi: float = math.pi / 4.0, norm: float = 1.0) -> ClosedEigenSystem:
    """Adiabatic eigenstates at mixing angle theta.

    |0>  =  cos(theta)|1> - sin(theta)|2>                       (dark, E = 0)
    |+>  =  sin(theta)sin(phi)|1> + cos(theta)sin(phi)|2> + cos(phi)|3>
    |->  =  sin(theta)cos(phi)|1> + cos(theta)cos(phi)|2> - sin(phi)|3>

    The three are orthonormal for any phi; they are eigenstates of the
    Hamiltonian at (g1, g2) = norm*(sin theta, cos theta) when phi = pi/4.
    """
    ct, st = math.cos(theta), math.sin(theta)
    cp, sp = math.cos(phi), math.sin(phi)
    states = np.array(
        [
            [ct, st * sp, st * cp],
            [-st, ct * sp, ct * cp],
            [0.0, cp, -sp],
        ]
    )
    energies = np.array([0.0, norm, -norm])
    return ClosedEigenSystem(theta=theta, phi=phi, energies=energies, states=states)


def closed_berry_integrand(n: str, theta: float, phi: float = math.pi / 4.0) -> complex:
    """<n(theta)| d/dtheta |n(theta)> from the analytic derivative of the states.

    Vanishes identically for all three labels n in {"0", "+", "-"} and any
    phi, which is why the closed cycle acquires no geometric phase.
    """
    sys = closed_eigensystem(theta, phi)
    ct, st = math.cos(theta), math.sin(theta)
    cp, sp = math.cos(phi), math.sin(phi)
    derivatives = {
        "0": np.array([-st, -ct, 0.0]),
        "+": np.array([ct * sp, -st * sp, 0.0]),
        "-": np.array([ct * cp, -st * cp, 0.0]),
    }
    kets = {"0": sys.dark, "+": sys.bright_plus, "-": sys.bright_minus}
    if n not in kets:
        raise ValueError(f"state label must be one of '0', '+', '-', got {n!r}")
    # sequential sum so the pairwise sin*cos cancellation is exact in floats
    ket, dket = kets[n], derivatives[n]
    return complex(sum(ket[i] * dket[i] for i in range(3)))


def verify_closed_eigensystem(theta: float, norm: float = 1.0, tol: float = 1e-12) -> float:
    """Max residual ||H|n> - E_n|n>|| of the analytic states at phi = pi/4."""
    sys = closed_eigensystem(theta, math.pi / 4.0, norm)
    h = build_hamiltonian(norm * math.sin(theta), norm * math.cos(theta))
    res = h @ sys.states - sys.states * sys.energies[np.newaxis, :]
    worst = float(np.max(np.abs(res)))
    if worst > tol * max(norm, 1.0):
        raise AssertionError(f"analytic eigensystem residual {worst} exceeds {tol}")
    return worst
