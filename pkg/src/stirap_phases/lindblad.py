"""Three-level STIRAP model in the coherence-vector picture.

Builds the interaction Hamiltonian, the Markovian dissipator (spontaneous
emission from the excited level plus collisional relaxation between the two
ground levels), and the resulting 9x9 real Liouville supermatrix in the
Gell-Mann basis.

Conventions
-----------
Levels are ordered |1>, |2> (ground) and |3> (excited).  A density matrix is
expanded as ``rho = w0 * I + sum_a w[a] * Omega_a`` over the eight standard
Gell-Mann matrices ``Omega_a``, so the coherence vector is
``w = [tr(rho)/3, tr(rho Omega_1)/2, ..., tr(rho Omega_8)/2]`` and the master
equation becomes ``dw/dt = L w`` with L real.  Decay parameters enter as
amplitudes of the jump operators and therefore appear squared in L.

The collisional channel follows the supermatrix convention that all the
analytic results of this package assume: ground-state populations equilibrate
faster than plain two-rate exchange, and the real and imaginary quadratures of
the optical coherences damp at gamma21^2/2 and gamma12^2/2 respectively.  This
is deliberately encoded both in the closed-form matrix
(:func:`liouvillian_matrix`) and in the generic route
(:func:`build_superoperator`); the two are cross-validated on every build.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "DecayRates",
    "RateCombos",
    "Liouvillian",
    "NotAState",
    "FixtureMismatch",
    "GELL_MANN",
    "build_hamiltonian",
    "liouvillian_matrix",
    "build_superoperator",
    "coherence_components",
    "density_to_coherence",
    "coherence_to_density",
]

SQRT3 = np.sqrt(3.0)


class NotAState(ValueError):
    """Input matrix is not Hermitian with unit trace."""


class FixtureMismatch(RuntimeError):
    """Generic superoperator construction disagrees with the closed form."""


def _gell_mann() -> np.ndarray:
    """The eight standard Gell-Mann matrices, tr(O_a O_b) = 2 delta_ab."""
    g = np.zeros((8, 3, 3), dtype=complex)
    g[0, 0, 1] = g[0, 1, 0] = 1.0
    g[1, 0, 1] = -1.0j
    g[1, 1, 0] = 1.0j
    g[2, 0, 0] = 1.0
    g[2, 1, 1] = -1.0
    g[3, 0, 2] = g[3, 2, 0] = 1.0
    g[4, 0, 2] = -1.0j
    g[4, 2, 0] = 1.0j
    g[5, 1, 2] = g[5, 2, 1] = 1.0
    g[6, 1, 2] = -1.0j
    g[6, 2, 1] = 1.0j
    g[7] = np.diag([1.0, 1.0, -2.0]) / SQRT3
    return g


GELL_MANN = _gell_mann()


@dataclass(frozen=True)
class DecayRates:
    """Decay amplitudes (units 1/sqrt(time); they enter the generator squared).

    gamma13, gamma23 drive spontaneous emission |3> -> |1>, |3> -> |2|;
    gamma12, gamma21 drive collisional relaxation |2> -> |1>, |1> -> |2>.
    """

    gamma13: float = 0.0
    gamma23: float = 0.0
    gamma12: float = 0.0
    gamma21: float = 0.0

    def __post_init__(self):
        vals = (self.gamma13, self.gamma23, self.gamma12, self.gamma21)
        if not all(np.isfinite(vals)):
            raise ValueError(f"decay amplitudes must be finite, got {vals}")
        if any(v < 0 for v in vals):
            raise ValueError(f"decay amplitudes must be nonnegative, got {vals}")

    def scaled(self, factor: float) -> "DecayRates":
        return DecayRates(
            self.gamma13 * factor,
            self.gamma23 * factor,
            self.gamma12 * factor,
            self.gamma21 * factor,
        )

    @property
    def combos(self) -> "RateCombos":
        return RateCombos.from_rates(self)


@dataclass(frozen=True)
class RateCombos:
    """Squared-rate combinations that parameterize the supermatrix (1/time)."""

    gamma_plus: float
    gamma_minus: float
    gamma_prime_plus: float
    gamma_prime_minus: float

    @classmethod
    def from_rates(cls, rates: DecayRates) -> "RateCombos":
        return cls(
            gamma_plus=(rates.gamma13**2 + rates.gamma23**2) / 2.0,
            gamma_minus=rates.gamma13**2 - rates.gamma23**2,
            gamma_prime_plus=rates.gamma12**2 + rates.gamma21**2,
            gamma_prime_minus=rates.gamma12**2 - rates.gamma21**2,
        )

    def __post_init__(self):
        assert self.gamma_plus >= 0.0
        assert self.gamma_prime_plus >= 0.0
        assert abs(self.gamma_minus) <= 2.0 * self.gamma_plus + 1e-300


@dataclass(frozen=True)
class Liouvillian:
    """A 9x9 real supermatrix together with the parameters that built it."""

    matrix: np.ndarray
    g1: float
    g2: float
    rates: DecayRates

    def __post_init__(self):
        assert self.matrix.shape == (9, 9)


def build_hamiltonian(g1: float, g2: float) -> np.ndarray:
    """Rotating-wave interaction Hamiltonian for resonant two-field driving.

    H = g1(|3><1| + |1><3|) + g2(|3><2| + |2><3|); Hermitian, zero diagonal,
    eigenvalues {0, +-sqrt(g1^2 + g2^2)}.
    """
    if not (np.isfinite(g1) and np.isfinite(g2)):
        raise ValueError(f"Rabi frequencies must be finite, got {(g1, g2)}")
    h = np.zeros((3, 3), dtype=complex)
    h[2, 0] = h[0, 2] = g1
    h[2, 1] = h[1, 2] = g2
    return h


def coherence_components(x: np.ndarray) -> np.ndarray:
    """Raw expansion coefficients of a 3x3 matrix in the {I, Omega_a} basis.

    Complex-valued in general; real iff x is Hermitian.  The inverse of
    ``w0 * I + sum w[a] Omega_a``.
    """
    w = np.empty(9, dtype=complex)
    w[0] = np.trace(x) / 3.0
    for a in range(8):
        w[a + 1] = np.trace(x @ GELL_MANN[a]) / 2.0
    return w


def components_to_matrix(w: np.ndarray) -> np.ndarray:
    """Inverse of :func:`coherence_components` (no state checks)."""
    x = np.eye(3, dtype=complex) * w[0]
    for a in range(8):
        x += w[a + 1] * GELL_MANN[a]
    return x


def density_to_coherence(rho: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Map a density matrix to its real nine-component coherence vector.

    Raises NotAState unless rho is Hermitian with unit trace (within tol).
    Positivity is deliberately not checked: basis elements and intermediate
    vectors need not be physical states.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (3, 3):
        raise NotAState(f"expected a 3x3 matrix, got shape {rho.shape}")
    if np.max(np.abs(rho - rho.conj().T)) > tol:
        raise NotAState("matrix is not Hermitian")
    if abs(np.trace(rho) - 1.0) > tol:
        raise NotAState(f"trace is {np.trace(rho)}, expected 1")
    return coherence_components(rho).real.copy()


def coherence_to_density(w: np.ndarray) -> np.ndarray:
    """Map a nine-component coherence vector back to a 3x3 Hermitian matrix."""
    w = np.asarray(w, dtype=float)
    if w.shape != (9,):
        raise ValueError(f"expected 9 components, got shape {w.shape}")
    return components_to_matrix(w.astype(complex))


def liouvillian_matrix(g1: float, g2: float, rates: DecayRates) -> np.ndarray:
    """Closed-form 9x9 supermatrix of the model (the canonical definition).

    Entries are linear in g1, g2 and in the squared decay amplitudes; the
    first row is identically zero (trace preservation).
    """
    c = rates.combos
    gp, gm = c.gamma_plus, c.gamma_minus
    gpp, gpm = c.gamma_prime_plus, c.gamma_prime_minus
    g12sq = rates.gamma12**2
    g21sq = rates.gamma21**2

    m = np.zeros((9, 9))
    m[1, 1] = -gpp
    m[1, 5] = g2
    m[1, 7] = g1
    m[2, 2] = -gpp
    m[2, 4] = -g2
    m[2, 6] = g1
    m[3, 0] = gm / 2.0 + gpm
    m[3, 3] = -2.0 * gpp
    m[3, 5] = g1
    m[3, 7] = -g2
    m[3, 8] = -(gm - gpm) / SQRT3
    m[4, 2] = g2
    m[4, 4] = -gp - g21sq / 2.0
    m[5, 1] = -g2
    m[5, 3] = -g1
    m[5, 5] = -gp - g12sq / 2.0
    m[5, 8] = -SQRT3 * g1
    m[6, 2] = -g1
    m[6, 6] = -gp - g21sq / 2.0
    m[7, 1] = -g1
    m[7, 3] = g2
    m[7, 7] = -gp - g12sq / 2.0
    m[7, 8] = -SQRT3 * g2
    m[8, 0] = SQRT3 * gp
    m[8, 5] = SQRT3 * g1
    m[8, 7] = SQRT3 * g2
    m[8, 8] = -2.0 * gp
    return m


def master_equation_rhs(x: np.ndarray, g1: float, g2: float, rates: DecayRates) -> np.ndarray:
    """Generator of the model acting on a 3x3 (Hermitian) matrix.

    Coherent part -i[H, x] plus the emission dissipator in standard Lindblad
    form plus the collisional channel in the package's supermatrix convention
    (see module docstring).
    """
    h = build_hamiltonian(g1, g2)
    out = -1.0j * (h @ x - x @ h)

    # spontaneous emission |3> -> |1>, |3> -> |2>
    e13 = rates.gamma13**2
    e23 = rates.gamma23**2
    gp = (e13 + e23) / 2.0
    x33 = x[2, 2]
    out[0, 0] += e13 * x33
    out[1, 1] += e23 * x33
    out[2, 2] -= 2.0 * gp * x33
    # anticommutator -gp * (x P3 + P3 x) on the off-diagonal entries
    out[0, 2] -= gp * x[0, 2]
    out[2, 0] -= gp * x[2, 0]
    out[1, 2] -= gp * x[1, 2]
    out[2, 1] -= gp * x[2, 1]

    # collisional relaxation between |1> and |2> (model convention)
    c12 = rates.gamma12**2
    c21 = rates.gamma21**2
    d11 = (1.5 * c12 + 0.5 * c21) * x[1, 1] - (0.5 * c12 + 1.5 * c21) * x[0, 0]
    out[0, 0] += d11
    out[1, 1] -= d11
    out[0, 1] -= (c12 + c21) * x[0, 1]
    out[1, 0] -= (c12 + c21) * x[1, 0]
    # Re and Im quadratures of the optical coherences damp at different rates.
    # Written with transposed (not conjugated) entries so the map stays
    # complex-linear; for Hermitian x these are Re(x_ij) and i*Im(x_ij).
    for (i, j) in ((0, 2), (1, 2)):
        re = 0.5 * (x[i, j] + x[j, i])
        im = 0.5 * (x[i, j] - x[j, i])
        out[i, j] += -(c21 / 2.0) * re - (c12 / 2.0) * im
        out[j, i] += -(c21 / 2.0) * re + (c12 / 2.0) * im
    return out


def build_superoperator(
    g1: float,
    g2: float,
    rates: DecayRates,
    validate: bool = True,
    tol: float = 1e-12,
) -> Liouvillian:
    """Assemble the 9x9 supermatrix generically and validate it.

    Applies :func:`master_equation_rhs` to each basis element {I, Omega_a} and
    reads off coherence components column by column.  When ``validate`` is on
    (default), the result is compared entrywise against
    :func:`liouvillian_matrix`; any disagreement beyond ``tol`` (relative to
    the matrix scale) signals a basis-convention bug and raises
    FixtureMismatch.
    """
    basis = [np.eye(3, dtype=complex)] + [GELL_MANN[a] for a in range(8)]
    m = np.empty((9, 9))
    for b, elem in enumerate(basis):
        col = coherence_components(master_equation_rhs(elem, g1, g2, rates))
        if np.max(np.abs(col.imag)) > 1e-14 * max(1.0, np.max(np.abs(col.real))):
            raise FixtureMismatch("generator does not preserve Hermiticity")
        m[:, b] = col.real
    if validate:
        ref = liouvillian_matrix(g1, g2, rates)
        scale = max(np.max(np.abs(ref)), 1e-300)
        err = np.max(np.abs(m - ref))
        if err > tol * scale:
            raise FixtureMismatch(
                f"generic construction deviates from the closed form by "
                f"{err:.3e} (scale {scale:.3e})"
            )
    return Liouvillian(matrix=m, g1=g1, g2=g2, rates=rates)
