"""Dense complex linear algebra for non-normal matrices.

Spectral decompositions with paired left/right eigenvectors under the
*bilinear* pairing <<E|D>> = E . D (no conjugation), deterministic
bi-orthonormalization, and a numerically tolerant Jordan normal form built
from SVD rank decisions.

All operations are pure functions; returned arrays are freshly allocated and
never aliased to the inputs.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.linalg

__all__ = [
    "EigenSystem",
    "JordanForm",
    "NonFinite",
    "DefectiveMatrix",
    "NearDegenerate",
    "IllConditionedTransform",
    "TolClash",
    "MatrixParseError",
    "spectral_decompose",
    "biorthonormalize",
    "jordan_form",
    "read_matrix",
    "write_matrix",
]

_EPS = np.finfo(float).eps


class NonFinite(ValueError):
    """Input contains NaN or infinity."""


class DefectiveMatrix(RuntimeError):
    """Fewer independent eigenvectors than the dimension; use jordan_form."""


class NearDegenerate(RuntimeError):
    """Eigenvalues too close for a well-conditioned bi-orthonormal pairing."""


class IllConditionedTransform(RuntimeError):
    """Condition estimate of the Jordan transform exceeds the configured bound."""


class TolClash(RuntimeError):
    """Distinct eigenvalue clusters are not separated clearly beyond clusterTol."""


class MatrixParseError(ValueError):
    """Matrix file does not follow the plain-text format."""


def _check_finite(m: np.ndarray) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m.real)) or not np.all(np.isfinite(m.imag)):
        raise NonFinite("matrix contains non-finite entries")
    return m


@dataclass(frozen=True)
class EigenSystem:
    """Eigenvalues with right column vectors and left row covectors.

    ``rights[:, k]`` and ``lefts[k, :]`` belong to ``eigenvalues[k]``;
    ``tolerance`` is the residual bound (relative to ||M||) each triple was
    checked against.
    """

    eigenvalues: np.ndarray
    rights: np.ndarray
    lefts: np.ndarray
    tolerance: float

    @property
    def dim(self) -> int:
        return len(self.eigenvalues)

    def overlaps(self) -> np.ndarray:
        """Bilinear pairing matrix <<E_a|D_b>> = (lefts @ rights)[a, b]."""
        return self.lefts @ self.rights


def spectral_decompose(m: np.ndarray, tol: float = 1e-9) -> EigenSystem:
    """Full left/right eigendecomposition with residual checks.

    Left covectors are eigenvectors of the transpose (bilinear pairing), taken
    index-aligned with the rights from a single LAPACK call so conjugate pairs
    stay matched.  Raises DefectiveMatrix when the right eigenvectors do not
    span the space at working precision.
    """
    m = _check_finite(m)
    if tol <= 0:
        raise ValueError("tol must be positive")
    n = m.shape[0]
    w, vl, vr = scipy.linalg.eig(m, left=True, right=True)
    lefts = vl.conj().T  # rows satisfy lefts[k] @ m = w[k] * lefts[k]

    scale = np.linalg.norm(m, 2)
    right_res = np.linalg.norm(m @ vr - vr * w[np.newaxis, :], axis=0)
    left_res = np.linalg.norm(lefts @ m - w[:, np.newaxis] * lefts, axis=1)
    worst = max(right_res.max(), left_res.max())
    if worst > tol * max(scale, 1e-300):
        raise RuntimeError(f"eigen residual {worst:.3e} exceeds {tol:.1e} * ||M||")

    sv = np.linalg.svd(vr, compute_uv=False)
    if sv[-1] < n * np.sqrt(_EPS) * sv[0]:
        raise DefectiveMatrix(
            f"right eigenvectors are rank deficient (sigma ratio {sv[-1] / sv[0]:.2e}); "
            "fall back to jordan_form"
        )
    return EigenSystem(eigenvalues=w, rights=vr, lefts=lefts, tolerance=tol)


def fix_gauge(vec: np.ndarray) -> np.ndarray:
    """Normalize to unit 2-norm and rotate the largest-magnitude entry real
    positive (ties broken by lowest index)."""
    v = vec / np.linalg.norm(vec)
    i = int(np.argmax(np.abs(v).round(15)))
    pivot = v[i]
    if pivot == 0:
        return v
    return v * (abs(pivot) / pivot)


def biorthonormalize(sys: EigenSystem, cluster_tol: float | None = None) -> EigenSystem:
    """Rescale the pairs so <<E_a|D_b>> = delta_ab with a deterministic gauge.

    Rights are unit-normalized with their largest entry made real positive;
    lefts absorb the inverse overlap.  Requires pairwise distinct eigenvalues:
    raises NearDegenerate when two eigenvalues sit within ``cluster_tol``
    (default 1e-7 times the spectral scale), where the bilinear pairing
    becomes ill-conditioned.
    """
    w = sys.eigenvalues
    scale = max(np.max(np.abs(w)), 1e-300)
    if cluster_tol is None:
        cluster_tol = 1e-7 * scale
    n = sys.dim
    if n > 1:
        dist = np.abs(w[:, None] - w[None, :]) + np.diag(np.full(n, np.inf))
        gap = dist.min()
        if gap < cluster_tol:
            raise NearDegenerate(
                f"minimum eigenvalue gap {gap:.3e} below cluster tolerance "
                f"{cluster_tol:.3e}; pairing is ill-conditioned"
            )
    rights = np.empty_like(sys.rights)
    lefts = np.empty_like(sys.lefts)
    for k in range(n):
        d = fix_gauge(sys.rights[:, k])
        overlap = sys.lefts[k] @ d
        if abs(overlap) < 1e-12 * np.linalg.norm(sys.lefts[k]):
            raise NearDegenerate(
                f"left/right pair {k} nearly orthogonal (|<<E|D>>| = {abs(overlap):.2e})"
            )
        rights[:, k] = d
        lefts[k] = sys.lefts[k] / overlap
    return EigenSystem(eigenvalues=w.copy(), rights=rights, lefts=lefts, tolerance=sys.tolerance)


# ---------------------------------------------------------------------------
# Jordan normal form
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class JordanForm:
    """Similarity transform and block structure, M ~= S J S^{-1}.

    ``blocks`` is a tuple of (eigenvalue, size); block columns appear in S in
    the same order, each chain starting with its true eigenvector.  The
    reported ``residual`` is ||S J S^{-1} - M||_F / ||M||_F and ``condition``
    is the 2-norm condition number of S.
    """

    transform: np.ndarray
    blocks: tuple[tuple[complex, int], ...]
    cluster_tolerance: float
    residual: float
    condition: float

    @property
    def dim(self) -> int:
        return sum(size for _, size in self.blocks)

    def jordan_matrix(self) -> np.ndarray:
        j = np.zeros((self.dim, self.dim), dtype=complex)
        pos = 0
        for lam, size in self.blocks:
            for i in range(size):
                j[pos + i, pos + i] = lam
                if i + 1 < size:
                    j[pos + i, pos + i + 1] = 1.0
            pos += size
        return j


def _cluster_eigenvalues(w: np.ndarray, cluster_tol: float) -> list[np.ndarray]:
    """Single-linkage clustering of eigenvalues by absolute distance."""
    n = len(w)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(w[i] - w[j]) <= cluster_tol:
                parent[find(i)] = find(j)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    clusters = [np.array(idx) for idx in groups.values()]
    clusters.sort(key=lambda idx: (w[idx].mean().real, w[idx].mean().imag))
    return clusters


def _null_space(a: np.ndarray, rank_tol: float) -> np.ndarray:
    """Orthonormal basis of the numerical null space (columns)."""
    u, s, vh = np.linalg.svd(a)
    if s.size == 0 or s[0] == 0.0:
        return np.eye(a.shape[1], dtype=complex)
    rank = int(np.sum(s > rank_tol * s[0]))
    return vh[rank:].conj().T


def _chain_tops(
    e: np.ndarray, mult: int, rank_tol: float
) -> list[tuple[np.ndarray, int]]:
    """Generalized-eigenvector chain tops (vector, height) for one cluster.

    Uses the Weyr characteristic from the nullity chain of E^k, then extracts
    tops at each height by projecting the null basis of E^k against both the
    null space of E^{k-1} and the vectors descended from taller chains.
    """
    n = e.shape[0]
    powers = [np.eye(n, dtype=complex)]
    nulls: list[np.ndarray] = [np.zeros((n, 0), dtype=complex)]
    nullities = [0]
    while nullities[-1] < mult:
        powers.append(powers[-1] @ e)
        ns = _null_space(powers[-1], rank_tol)
        nulls.append(ns)
        if ns.shape[1] <= nullities[-1]:
            raise TolClash(
                "nullity chain stalled before reaching the algebraic multiplicity; "
                "rank or cluster tolerance is inconsistent with the spectrum"
            )
        nullities.append(ns.shape[1])
    p = len(nullities) - 1  # index of the eigenvalue cluster
    weyr = [nullities[k] - nullities[k - 1] for k in range(1, p + 1)]  # blocks >= k
    weyr.append(0)

    tops: list[tuple[np.ndarray, int]] = []
    for k in range(p, 0, -1):
        count = weyr[k - 1] - weyr[k]
        if count == 0:
            continue
        descended = [np.linalg.matrix_power(e, h - k) @ v for v, h in tops if h > k]
        blockers = [nulls[k - 1]] + [d[:, None] for d in descended]
        b = np.hstack(blockers) if blockers else np.zeros((n, 0), dtype=complex)
        cand = nulls[k]
        if b.shape[1]:
            q, _ = np.linalg.qr(b)
            cand = cand - q @ (q.conj().T @ cand)
        u, s, _ = np.linalg.svd(cand, full_matrices=False)
        for i in range(count):
            tops.append((u[:, i], k))
    return tops


def jordan_form(
    m: np.ndarray,
    cluster_tol: float | None = None,
    rank_tol: float = 1e-8,
    cond_limit: float = 1e12,
) -> JordanForm:
    """Numerically tolerant Jordan canonical form.

    Eigenvalues within ``cluster_tol`` (absolute distance; default 1e-7 times
    ||M||) are treated as one eigenvalue; chains are built from SVD null
    spaces with rank decisions at ``rank_tol`` times the largest singular
    value.  Raises TolClash when distinct clusters land within 10x the
    cluster tolerance (the tolerance cannot tell noise from true degeneracy)
    and IllConditionedTransform when cond(S) exceeds ``cond_limit``.
    """
    m = _check_finite(m)
    if cluster_tol is not None and cluster_tol <= 0:
        raise ValueError("cluster_tol must be positive")
    if rank_tol <= 0:
        raise ValueError("rank_tol must be positive")
    n = m.shape[0]
    scale = np.linalg.norm(m, 2)
    if cluster_tol is None:
        cluster_tol = 1e-7 * max(scale, 1e-300)

    w = np.linalg.eigvals(m)
    clusters = _cluster_eigenvalues(w, cluster_tol)
    centers = [w[idx].mean() for idx in clusters]
    for i in range(len(centers)):
        for j in range(i + 1, len(centers)):
            if abs(centers[i] - centers[j]) < 10.0 * cluster_tol:
                raise TolClash(
                    f"clusters at {centers[i]:.6g} and {centers[j]:.6g} are closer "
                    f"than 10x the cluster tolerance {cluster_tol:.2e}"
                )

    blocks: list[tuple[complex, int]] = []
    columns: list[np.ndarray] = []
    for idx, lam in zip(clusters, centers):
        mult = len(idx)
        if mult == 1:
            e = m - lam * np.eye(n)
            vec = _null_space(e, max(rank_tol, 1e-12))
            if vec.shape[1] == 0:
                # isolated simple eigenvalue: smallest right singular vector
                _, _, vh = np.linalg.svd(e)
                vec = vh[-1:].conj().T
            blocks.append((complex(lam), 1))
            columns.append(fix_gauge(vec[:, 0]))
            continue
        e = m - lam * np.eye(n)
        tops = _chain_tops(e, mult, rank_tol)
        tops.sort(key=lambda vh: -vh[1])  # larger blocks first
        for v, h in tops:
            chain = [v]
            for _ in range(h - 1):
                chain.append(e @ chain[-1])
            chain.reverse()  # eigenvector first
            norm = max(np.linalg.norm(c) for c in chain)
            columns.extend(c / norm for c in chain)
            blocks.append((complex(lam), h))

    s = np.column_stack(columns)
    sv = np.linalg.svd(s, compute_uv=False)
    condition = float(sv[0] / sv[-1]) if sv[-1] > 0 else np.inf
    if condition > cond_limit:
        raise IllConditionedTransform(
            f"condition estimate {condition:.3e} of the transform exceeds {cond_limit:.1e}"
        )
    form = JordanForm(
        transform=s,
        blocks=tuple(blocks),
        cluster_tolerance=float(cluster_tol),
        residual=0.0,
        condition=condition,
    )
    recon = s @ form.jordan_matrix() @ np.linalg.inv(s)
    residual = float(
        np.linalg.norm(recon - m, "fro") / max(np.linalg.norm(m, "fro"), 1e-300)
    )
    object.__setattr__(form, "residual", residual)
    return form


# ---------------------------------------------------------------------------
# Plain-text matrix files: first line "dim", then dim^2 lines "re im"
# row-major.
# ---------------------------------------------------------------------------


def read_matrix(path: str | Path) -> np.ndarray:
    lines = [ln.strip() for ln in Path(path).read_text().splitlines() if ln.strip()]
    if not lines:
        raise MatrixParseError(f"{path}: empty file")
    try:
        dim = int(lines[0])
    except ValueError as exc:
        raise MatrixParseError(f"{path}: first line must be the dimension") from exc
    if dim <= 0:
        raise MatrixParseError(f"{path}: dimension must be positive, got {dim}")
    if len(lines) != 1 + dim * dim:
        raise MatrixParseError(
            f"{path}: expected {dim * dim} entry lines, found {len(lines) - 1}"
        )
    entries = np.empty(dim * dim, dtype=complex)
    for i, ln in enumerate(lines[1:]):
        parts = ln.split()
        if len(parts) != 2:
            raise MatrixParseError(f"{path}: line {i + 2}: expected 're im', got {ln!r}")
        try:
            entries[i] = complex(float(parts[0]), float(parts[1]))
        except ValueError as exc:
            raise MatrixParseError(f"{path}: line {i + 2}: bad number in {ln!r}") from exc
    return entries.reshape(dim, dim)


def write_matrix(path: str | Path, m: np.ndarray) -> None:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    lines = [str(m.shape[0])]
    for row in m:
        lines.extend(f"{z.real:.17g} {z.imag:.17g}" for z in row)
    Path(path).write_text("\n".join(lines) + "\n")
