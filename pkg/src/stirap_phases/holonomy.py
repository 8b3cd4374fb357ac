"""Eigenpath tracking along the pulse cycle and open-system geometric phases.

The supermatrix of this model is exactly block-diagonal with respect to the
coherence-vector index split {0,1,3,5,7,8} + {2,4,6} for every parameter
value (verified at build time).  The two blocks are decomposed and tracked
independently, which resolves an otherwise fatal ambiguity: for purely
spontaneous emission the quadratic factor lam^2 + gamma_plus*lam + g^2 divides
both sector characteristic polynomials, so the eigenvalue continuations of
+-i*g are exactly two-fold degenerate with one member in each sector.  Within
a sector all eigenvalues are simple along the whole pulse for every schedule
this package runs.

Phases are accumulated with the discrete parallel-transport product
beta = i * sum_k ln <<E(t_k)|D(t_{k+1})>>, which is invariant under interior
gauge changes; the endpoint gauge is the deterministic largest-entry
convention of :mod:`stirap_phases.matops`.  Steps where an eigenvalue is not
numerically resolvable from its sector neighbours (the far pulse tails, where
the true integrand is far below the tolerance budget) are excluded by a
per-path resolvability window; nearly degenerate in-sector pairs fall back to
the eigenphases of the accumulated 2x2 transport product, which are immune to
basis noise inside the window.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy.optimize import linear_sum_assignment

from .lindblad import DecayRates, coherence_components, liouvillian_matrix
from .matops import fix_gauge
from .stirap import PulseParams, closed_eigensystem, pulses, theta_of_t

__all__ = [
    "ThetaGrid",
    "EigenPath",
    "PhaseResult",
    "DegenerateRegime",
    "LostTrack",
    "AmbiguousLabel",
    "BranchJump",
    "track_eigenpaths",
    "label_paths_closed_limit",
    "geometric_phase",
    "pair_geometric_phases",
    "labelled_phases",
    "phase_sweep",
    "apply_symmetry_offset",
]

SECTOR_PLUS = (0, 1, 3, 5, 7, 8)
SECTOR_MINUS = (2, 4, 6)
LABELS_PLUS = (1, 2, 4, 6, 7, 9)
LABELS_MINUS = (3, 5, 8)

# an eigenvalue counts as numerically resolved at a grid point when its gap to
# every other same-sector eigenvalue exceeds this fraction of the sector scale
RESOLVE_TOL = 1e-8
# continuity floor for matched overlaps inside a resolvability window
OVERLAP_FLOOR = 0.5


class DegenerateRegime(RuntimeError):
    """Equal spontaneous rates with no collisions: degenerate (non-scalar) case."""


class LostTrack(RuntimeError):
    """Continuity overlap stayed below 0.5 after one local refinement."""


class AmbiguousLabel(RuntimeError):
    """Closed-limit homotopy could not assign labels with a safe margin."""


class BranchJump(RuntimeError):
    """A single transport step rotated by more than pi/2; refine the grid."""


@dataclass(frozen=True)
class ThetaGrid:
    """Uniform-in-t grid over the pulse window with its mixing angles.

    Points are stored in ascending time order (the physical traversal), so
    theta is strictly increasing for t0 > 0 and strictly decreasing for
    t0 < 0.  Time spacing is uniform: theta saturates exponentially at the
    ends, and uniform-theta grids would starve the tails where the
    eigenvectors still rotate.
    """

    t: np.ndarray
    theta: np.ndarray
    pulse: PulseParams

    @classmethod
    def for_pulse(
        cls,
        p: PulseParams,
        n: int = 2000,
        t_min: float | None = None,
        t_max: float | None = None,
    ) -> "ThetaGrid":
        if n < 2:
            raise ValueError("grid needs at least two points")
        if t_min is None:
            t_min = -6.0 * p.tau if p.t0 > 0 else -8.0 * p.tau
        if t_max is None:
            t_max = 8.0 * p.tau if p.t0 > 0 else 6.0 * p.tau
        if not t_min < t_max:
            raise ValueError(f"need t_min < t_max, got {(t_min, t_max)}")
        t = np.linspace(t_min, t_max, n)
        theta = np.array([theta_of_t(tk, p) for tk in t])
        return cls(t=t, theta=theta, pulse=p)

    @property
    def n(self) -> int:
        return len(self.t)

    @property
    def truncation(self) -> tuple[float, float]:
        return float(self.t[0]), float(self.t[-1])


@dataclass
class EigenPath:
    """One tracked eigenvalue continuation in sector-local coordinates.

    ``rights[k]`` / ``lefts[k]`` are the bi-orthonormalized vectors at grid
    point k (length 6 or 3 depending on the sector); ``window`` is the largest
    contiguous run of points where this eigenvalue is resolvable from its
    sector neighbours and phases may be accumulated.
    """

    sector: tuple[int, ...]
    lambdas: np.ndarray
    rights: np.ndarray
    lefts: np.ndarray
    gaps: np.ndarray
    window: tuple[int, int]
    grid: ThetaGrid
    slot: int = -1
    sector_lambdas: np.ndarray | None = None
    label: int | None = None

    def embed_rights(self) -> np.ndarray:
        """Right vectors as full nine-component coherence vectors."""
        out = np.zeros((len(self.lambdas), 9), dtype=complex)
        out[:, list(self.sector)] = self.rights
        return out

    def window_slice(self) -> slice:
        return slice(self.window[0], self.window[1] + 1)


@dataclass(frozen=True)
class PhaseResult:
    """Geometric phase of one labelled path with run diagnostics.

    ``beta`` is complex: the real part is the observable phase (radians), the
    imaginary part the visibility correction.  Diagnostics record the minimum
    continuity overlap, the smallest in-sector eigenvalue gap met inside the
    integration window, the window actually integrated, and the method used
    ("step-product" or "pair-product").
    """

    label: int
    beta: complex
    grid_points: int
    truncation: tuple[float, float]
    diagnostics: dict = field(default_factory=dict)


def apply_symmetry_offset(rates: DecayRates, eps: float = 1e-6) -> DecayRates:
    """Detune exactly equal spontaneous rates by a relative ``eps``.

    The scalar-phase pipeline refuses the exactly symmetric spontaneous-only
    point; symmetric schedules are run at this documented offset instead and
    converge continuously to the symmetric limit.
    """
    if rates.gamma13 == rates.gamma23 and rates.gamma12 == 0 and rates.gamma21 == 0:
        return DecayRates(
            gamma13=rates.gamma13 * (1.0 - 0.5 * eps),
            gamma23=rates.gamma23 * (1.0 + 0.5 * eps),
            gamma12=rates.gamma12,
            gamma21=rates.gamma21,
        )
    return rates


def _sector_matrices(rates: DecayRates) -> dict:
    """Constant, g1- and g2-linear parts of both sector blocks."""
    zero = DecayRates()
    l0 = liouvillian_matrix(0.0, 0.0, rates)
    a1 = liouvillian_matrix(1.0, 0.0, zero)
    a2 = liouvillian_matrix(0.0, 1.0, zero)
    # the sector split must be exact; anything else is a model bug
    for m in (l0, a1, a2):
        assert np.all(m[np.ix_(SECTOR_PLUS, SECTOR_MINUS)] == 0.0)
        assert np.all(m[np.ix_(SECTOR_MINUS, SECTOR_PLUS)] == 0.0)
    out = {}
    for sec in (SECTOR_PLUS, SECTOR_MINUS):
        ix = np.ix_(sec, sec)
        out[sec] = (l0[ix], a1[ix], a2[ix])
    return out


def _decompose_point(m: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Gauge-fixed bi-orthonormal eigensystem of one sector block."""
    w, vl, vr = scipy.linalg.eig(m, left=True, right=True)
    lefts = vl.conj().T
    for k in range(len(w)):
        d = fix_gauge(vr[:, k])
        vr[:, k] = d
        lefts[k] /= lefts[k] @ d
    return w, vr, lefts


def _match(lefts_prev: np.ndarray, rights_next: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Assignment of next-point slots to previous-point slots by max total overlap."""
    z = np.abs(lefts_prev @ rights_next)
    row, col = linear_sum_assignment(-z)
    perm = np.empty(len(row), dtype=int)
    perm[row] = col
    return perm, z[row, perm[row]]


def _largest_true_run(mask: np.ndarray) -> tuple[int, int]:
    """Bounds (first, last) of the longest contiguous True run; (-1, -1) if none."""
    best = (-1, -1)
    best_len = 0
    start = None
    for i, val in enumerate(mask.tolist() + [False]):
        if val and start is None:
            start = i
        elif not val and start is not None:
            if i - start > best_len:
                best_len = i - start
                best = (start, i - 1)
            start = None
    return best


def track_eigenpaths(
    grid: ThetaGrid,
    p: PulseParams,
    rates: DecayRates,
    resolve_tol: float = RESOLVE_TOL,
) -> list[EigenPath]:
    """Track all nine sector eigen-triples continuously along the grid.

    Returns unlabelled paths (six from the large sector followed by three
    from the small one); run :func:`label_paths_closed_limit` to attach the
    closed-limit indices.  Raises DegenerateRegime for exactly equal
    spontaneous rates with zero collisional rates.
    """
    if rates.gamma13 == rates.gamma23 and rates.gamma12 == 0.0 and rates.gamma21 == 0.0:
        raise DegenerateRegime(
            "gamma13 == gamma23 with zero collisional rates is the degenerate "
            "(non-scalar) regime; run with apply_symmetry_offset"
        )
    sectors = _sector_matrices(rates)
    n = grid.n
    paths: list[EigenPath] = []
    for sec, (l0, a1, a2) in sectors.items():
        d = len(sec)
        lambdas = np.empty((n, d), dtype=complex)
        rights = np.empty((n, d, d), dtype=complex)
        lefts = np.empty((n, d, d), dtype=complex)
        gaps = np.empty((n, d))
        for k in range(n):
            g1, g2 = pulses(grid.t[k], p)
            m = l0 + g1 * a1 + g2 * a2
            w, vr, vl = _decompose_point(m)
            if k > 0:
                perm, _ = _match(lefts[k - 1], vr)
                w, vr, vl = w[perm], vr[:, perm], vl[perm]
            lambdas[k] = w
            rights[k] = vr.T  # rights[k][j] is the j-th right vector
            lefts[k] = vl
            scale = max(np.max(np.abs(w)), 1e-300)
            dist = np.abs(w[:, None] - w[None, :]) + np.diag(np.full(d, np.inf))
            gaps[k] = dist.min(axis=1) / scale
        for j in range(d):
            mask = gaps[:, j] > resolve_tol
            window = _largest_true_run(mask)
            if window[0] < 0:
                window = (0, 0)
            paths.append(
                EigenPath(
                    sector=sec,
                    lambdas=lambdas[:, j],
                    rights=rights[:, j, :],
                    lefts=lefts[:, j, :],
                    gaps=gaps[:, j],
                    window=window,
                    grid=grid,
                    slot=j,
                    sector_lambdas=lambdas,
                )
            )
    return paths


def _closed_sector_targets(sec: tuple[int, ...], coupling: float) -> np.ndarray:
    """Closed-limit eigenvalues carried by one sector, in label order."""
    g = coupling
    if sec == SECTOR_PLUS:
        return np.array([2j * g, 1j * g, 0.0, 0.0, -1j * g, -2j * g])
    return np.array([1j * g, 0.0, -1j * g])


def label_paths_closed_limit(
    paths: list[EigenPath],
    p: PulseParams,
    rates: DecayRates,
    steps: int = 16,
) -> list[EigenPath]:
    """Attach closed-limit indices 1-9 by a decay-scaling homotopy.

    At the mid-grid reference angle the decay amplitudes are scaled down
    geometrically; each sector eigenvalue is threaded by nearest-distance
    assignment and finally matched against the closed-limit set it carries.
    The stationary path (eigenvalue identically zero) is identified directly,
    which also disambiguates the two zero-limit continuations of the large
    sector.  Paths are returned sorted by label.
    """
    grid = paths[0].grid
    k_ref = grid.n // 2
    g1, g2 = pulses(grid.t[k_ref], p)
    coupling = math.hypot(g1, g2)
    scales = np.geomspace(1.0, 1e-5, steps + 1)

    by_sector: dict[tuple, list[EigenPath]] = {}
    for path in paths:
        by_sector.setdefault(path.sector, []).append(path)

    for sec, sec_paths in by_sector.items():
        if sec == SECTOR_PLUS:
            # trace preservation keeps one eigenvalue exactly zero at every
            # point and every homotopy scale; identify that path directly and
            # keep it out of the value threading (its zero-limit twin passes
            # arbitrarily close to it as the rates are scaled away).  Identity
            # is judged at the reference point: in the far tails the slots of
            # an unresolved cluster are nominal.
            magnitudes = np.array([abs(path.lambdas[k_ref]) for path in sec_paths])
            stationary = int(np.argmin(magnitudes))
            others = np.delete(np.arange(len(sec_paths)), stationary)
            scale_ref = max(max(abs(path.lambdas[k_ref]) for path in sec_paths), 1e-300)
            if magnitudes[stationary] > 1e-10 * scale_ref:
                raise AmbiguousLabel("no path with zero eigenvalue at the reference point")
            sec_paths[stationary].label = 4
            track_idx = list(others)
            targets = np.array([2j, 1j, 0.0, -1j, -2j]) * coupling
            target_labels = [1, 2, 6, 7, 9]
        else:
            track_idx = list(range(len(sec_paths)))
            targets = np.array([1j, 0.0, -1j]) * coupling
            target_labels = [3, 5, 8]

        current = np.array([sec_paths[j].lambdas[k_ref] for j in track_idx])
        zero_slot = None if sec != SECTOR_PLUS else stationary
        for s in scales[1:]:
            w = _sector_eigvals(g1, g2, rates.scaled(s), sec, drop_zero=zero_slot is not None)
            dist = np.abs(current[:, None] - w[None, :])
            row, col = linear_sum_assignment(dist)
            _guard_assignment(dist, row, col)
            current = w[col[np.argsort(row)]]

        dist = np.abs(current[:, None] - targets[None, :])
        row, col = linear_sum_assignment(dist)
        _guard_assignment(dist, row, col, floor=0.05 * max(coupling, 1e-300))
        for r, c in zip(row, col):
            sec_paths[track_idx[r]].label = target_labels[c]
    return sorted(paths, key=lambda path: path.label)


def _sector_eigvals(
    g1: float,
    g2: float,
    rates: DecayRates,
    sec: tuple[int, ...],
    drop_zero: bool,
) -> np.ndarray:
    """Sector eigenvalues, optionally with the exact-zero one removed."""
    m = liouvillian_matrix(g1, g2, rates)[np.ix_(sec, sec)]
    w = np.linalg.eigvals(m)
    if not drop_zero:
        return w
    scale = max(np.max(np.abs(w)), 1e-300)
    k = int(np.argmin(np.abs(w)))
    if abs(w[k]) > 1e-9 * scale:
        raise AmbiguousLabel("zero eigenvalue not found during homotopy")
    return np.delete(w, k)


def _guard_assignment(dist: np.ndarray, row: np.ndarray, col: np.ndarray, floor: float = 0.0):
    """Require every match to beat the runner-up by 2x (below ``floor`` is exempt)."""
    for r, c in zip(row, col):
        d0 = dist[r, c]
        if d0 <= floor:
            continue
        others = np.delete(dist[r], c)
        if others.size and others.min() < 2.0 * d0:
            raise AmbiguousLabel(
                f"homotopy match distance {d0:.3e} not separated from runner-up "
                f"{others.min():.3e} by a factor of 2"
            )


# refinement triggers: a transport step is accepted when its gauge-invariant
# overlap is this close to 1 in argument and magnitude
_STEP_ARG_LIMIT = 0.5
_STEP_MAG_LIMIT = 0.35
_MAX_REFINE_DEPTH = 14


def _aligned_overlap(e_left: np.ndarray, d_left: np.ndarray, d_right: np.ndarray) -> complex:
    """Gauge-invariant transport overlap zeta = (E_L . D_R) * phi.

    phi is the unit phase that Hermitian-aligns D_R onto D_L; zeta is
    invariant under independent unit rescalings of either endpoint (the
    rescaling cancels between the bilinear overlap and the alignment phase).
    For a smooth eigenvector field zeta = 1 + O(step^2), regardless of how
    the per-point gauge convention jumps.
    """
    h = np.vdot(d_left, d_right)
    if h == 0.0:
        return 0.0
    return (e_left @ d_right) * (np.conj(h) / abs(h))


def _transport_fns(sec: tuple[int, ...], p: PulseParams, rates: DecayRates):
    """Per-sector decomposition helper bound to fixed pulse and rates."""
    zero = DecayRates()
    ix = np.ix_(sec, sec)
    l0 = liouvillian_matrix(0.0, 0.0, rates)[ix]
    a1 = liouvillian_matrix(1.0, 0.0, zero)[ix]
    a2 = liouvillian_matrix(0.0, 1.0, zero)[ix]

    def decompose(t: float):
        g1, g2 = pulses(t, p)
        return _decompose_point(l0 + g1 * a1 + g2 * a2)

    return decompose


def _step_log(
    e_left: np.ndarray,
    d_left: np.ndarray,
    e_right: np.ndarray,
    d_right: np.ndarray,
    t_left: float,
    t_right: float,
    decompose,
    depth: int,
) -> tuple[complex, float]:
    """(sum of ln zeta, sum of alignment arguments) across one transport step,
    bisected while the rotation across the step is too fast to trust a single
    product term.  Returning sums instead of products keeps the accumulated
    argument unwrapped."""
    h = np.vdot(d_left, d_right)
    phi = np.conj(h) / abs(h) if h != 0.0 else 0.0
    zeta = (e_left @ d_right) * phi if phi != 0.0 else 0.0
    if (
        zeta != 0.0
        and abs(np.angle(zeta)) <= _STEP_ARG_LIMIT
        and abs(abs(zeta) - 1.0) <= _STEP_MAG_LIMIT
    ):
        return complex(np.log(zeta)), float(np.angle(phi))
    if depth >= _MAX_REFINE_DEPTH or decompose is None:
        raise LostTrack(
            f"transport step at t in [{t_left:.4f}, {t_right:.4f}] stayed wild "
            f"(zeta = {zeta:.4f}) at refinement depth {depth}"
        )
    t_mid = 0.5 * (t_left + t_right)
    w, vr, vl = decompose(t_mid)
    j = int(np.argmax(np.abs(e_left @ vr)))
    d_mid = vr[:, j]
    e_mid = vl[j]
    llog, larg = _step_log(e_left, d_left, e_mid, d_mid, t_left, t_mid, decompose, depth + 1)
    rlog, rarg = _step_log(e_mid, d_mid, e_right, d_right, t_mid, t_right, decompose, depth + 1)
    return llog + rlog, larg + rarg


def geometric_phase(
    path: EigenPath,
    p: PulseParams | None = None,
    rates: DecayRates | None = None,
) -> PhaseResult:
    """Discrete parallel-transport phase of one path over its window.

    beta = i * sum_k ln <<E(t_k)|D(t_{k+1})>> with per-point normalization
    <<E|D>> = 1, evaluated per step through the gauge-invariant form
    zeta_k = z_k * phi_k (phi_k the Hermitian alignment phase), so interior
    gauge-convention switches cannot fake branch jumps; the sum of the
    alignment arguments restores the endpoint-gauge-fixed value.  Steps whose
    rotation is too fast (near the real-axis collision points of the spectrum)
    are bisected locally with extra decompositions; persistent wild steps
    raise LostTrack and a genuine argument beyond pi/2 after refinement raises
    BranchJump.
    """
    lo, hi = path.window
    if hi <= lo:
        raise LostTrack("no resolvable window for this path; refine the grid")
    decompose = None
    if p is not None and rates is not None:
        decompose = _transport_fns(path.sector, p, rates)

    d = path.rights
    e = path.lefts
    z = np.einsum("ki,ki->k", e[lo:hi], d[lo + 1 : hi + 1])
    h = np.einsum("ki,ki->k", d[lo:hi].conj(), d[lo + 1 : hi + 1])
    phases = np.where(np.abs(h) > 0, np.conj(h) / np.maximum(np.abs(h), 1e-300), 1.0)
    zeta = z * phases
    min_ov = float(np.min(np.abs(z))) if len(z) else 1.0
    log_zeta = np.zeros(len(zeta), dtype=complex)
    arg_phi = np.angle(phases)
    bad = (np.abs(np.angle(zeta)) > _STEP_ARG_LIMIT) | (
        np.abs(np.abs(zeta) - 1.0) > _STEP_MAG_LIMIT
    )
    log_zeta[~bad] = np.log(zeta[~bad])
    refined = 0
    for i in np.nonzero(bad)[0]:
        k = lo + int(i)
        log_zeta[i], arg_phi[i] = _step_log(
            e[k], d[k], e[k + 1], d[k + 1],
            float(path.grid.t[k]), float(path.grid.t[k + 1]),
            decompose, 0,
        )
        refined += 1
        if abs(log_zeta[i].imag) > math.pi / 2.0:
            raise BranchJump(
                f"transport across t in [{path.grid.t[k]:.4f}, {path.grid.t[k + 1]:.4f}] "
                f"rotated by {log_zeta[i].imag:.3f} rad even after refinement"
            )
    beta = 1j * np.sum(log_zeta) + np.sum(arg_phi)
    return PhaseResult(
        label=path.label if path.label is not None else -1,
        beta=complex(beta),
        grid_points=path.grid.n,
        truncation=path.grid.truncation,
        diagnostics={
            "min_overlap": min_ov,
            "min_gap": float(np.min(path.gaps[lo : hi + 1])),
            "window_t": (float(path.grid.t[lo]), float(path.grid.t[hi])),
            "refined_steps": refined,
            "method": "step-product",
        },
    )


def pair_geometric_phases(path_a: EigenPath, path_b: EigenPath) -> tuple[PhaseResult, PhaseResult]:
    """Eigenphases of the accumulated 2x2 transport product of a close pair.

    Used when two same-sector eigenvalues are not mutually resolvable: the
    eigenvalues of the path-ordered product of per-step overlap matrices are
    invariant under arbitrary mixing of the pair basis at interior points, so
    the two phases survive even where the individual eigenvectors are
    numerically undefined.  The window requires only isolation of the pair
    from the rest of its sector.  Assignment of the two eigenphases to the
    two labels is by proximity of the accumulated eigenvalue path; where the
    pair is truly degenerate the two phases agree and the order is moot.
    """
    assert path_a.sector == path_b.sector
    grid = path_a.grid
    all_lam = path_a.sector_lambdas
    assert all_lam is not None
    # isolation of the pair subspace from the rest of the sector: for each
    # point, the distance from either member to any non-member eigenvalue
    n, d = all_lam.shape
    rest_slots = [j for j in range(d) if j not in (path_a.slot, path_b.slot)]
    if rest_slots:
        pair_vals = np.stack([path_a.lambdas, path_b.lambdas], axis=1)  # (n, 2)
        rest_vals = all_lam[:, rest_slots]  # (n, r)
        dist = np.abs(pair_vals[:, :, None] - rest_vals[:, None, :])
        scale = np.maximum(np.max(np.abs(all_lam), axis=1), 1e-300)
        iso = dist.min(axis=(1, 2)) / scale
    else:
        iso = np.full(n, np.inf)
    lo, hi = _largest_true_run(iso > RESOLVE_TOL)
    if lo < 0 or hi <= lo:
        raise LostTrack("no isolation window for the pair")

    w = np.eye(2, dtype=complex)
    for k in range(lo, hi):
        el = np.vstack([path_a.lefts[k], path_b.lefts[k]])
        dr = np.column_stack([path_a.rights[k], path_b.rights[k]])
        dr_next = np.column_stack([path_a.rights[k + 1], path_b.rights[k + 1]])
        r = el @ dr
        z = el @ dr_next
        w = w @ np.linalg.solve(r, z)
    eigw = np.linalg.eigvals(w)
    betas = 1j * np.log(eigw)
    # deterministic attribution; where the pair product is invoked the two
    # phases coincide to within the resolvability budget anyway
    if (betas[0].real, betas[0].imag) > (betas[1].real, betas[1].imag):
        betas = betas[::-1]
    results = []
    for path, beta in zip((path_a, path_b), betas):
        results.append(
            PhaseResult(
                label=path.label if path.label is not None else -1,
                beta=complex(beta),
                grid_points=grid.n,
                truncation=grid.truncation,
                diagnostics={
                    "min_overlap": math.nan,
                    "min_gap": float(np.min(iso[lo : hi + 1])),
                    "window_t": (float(grid.t[lo]), float(grid.t[hi])),
                    "method": "pair-product",
                },
            )
        )
    return results[0], results[1]


def labelled_phases(
    p: PulseParams,
    rates: DecayRates,
    grid: ThetaGrid | None = None,
    labels: tuple[int, ...] = tuple(range(1, 10)),
    n: int = 2000,
) -> dict[int, PhaseResult]:
    """Track, label, and compute phases for the requested labels.

    Scalar step products are used wherever a path is resolvable across a
    usable window; a same-sector pair whose members stay mutually unresolved
    (the near-closed-limit regime) is handed to the 2x2 pair product.
    """
    if grid is None:
        grid = ThetaGrid.for_pulse(p, n=n)
    paths = label_paths_closed_limit(track_eigenpaths(grid, p, rates), p, rates)
    by_label = {path.label: path for path in paths}
    results: dict[int, PhaseResult] = {}
    min_points = max(16, grid.n // 10)
    done: set[int] = set()
    for label in labels:
        if label in done:
            continue
        path = by_label[label]
        lo, hi = path.window
        if hi - lo + 1 >= min_points:
            results[label] = geometric_phase(path, p, rates)
            done.add(label)
            continue
        # find the same-sector partner blocking resolution and use the pair product
        partner = _nearest_partner(path, by_label)
        ra, rb = pair_geometric_phases(path, partner)
        results[path.label] = ra
        results[partner.label] = rb
        done.update({path.label, partner.label})
    return {label: results[label] for label in labels}


def _nearest_partner(path: EigenPath, by_label: dict[int, EigenPath]) -> EigenPath:
    """Same-sector path whose eigenvalue stays closest mid-grid."""
    k = path.grid.n // 2
    best, best_d = None, np.inf
    for other in by_label.values():
        if other is path or other.sector != path.sector:
            continue
        d = abs(other.lambdas[k] - path.lambdas[k])
        if d < best_d:
            best, best_d = other, d
    assert best is not None
    return best


def phase_sweep(
    schedule: list[DecayRates],
    p: PulseParams,
    labels: tuple[int, ...] = (1, 9),
    n: int = 2000,
    t_min: float | None = None,
    t_max: float | None = None,
    max_workers: int | None = None,
) -> list[tuple[int, DecayRates, PhaseResult]]:
    """Phases for every (schedule entry, label), in deterministic row order.

    Entries are independent and dispatched to a bounded thread pool (the
    dense eigensolves release the GIL); failures carry the schedule index.
    """
    import concurrent.futures as cf
    import os

    if not schedule:
        return []
    grid = ThetaGrid.for_pulse(p, n=n, t_min=t_min, t_max=t_max)

    def run(idx: int):
        try:
            return labelled_phases(p, schedule[idx], grid=grid, labels=labels)
        except Exception as exc:
            raise RuntimeError(f"schedule entry {idx}: {exc}") from exc

    workers = max_workers or min(8, os.cpu_count() or 1)
    rows: list[tuple[int, DecayRates, PhaseResult]] = []
    with cf.ThreadPoolExecutor(max_workers=workers) as pool:
        outs = list(pool.map(run, range(len(schedule))))
    for idx, out in enumerate(outs):
        for label in labels:
            rows.append((idx, schedule[idx], out[label]))
    return rows
