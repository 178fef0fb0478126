"""Eigendecomposition of normal matrices and elementary perturbation identities.

The decomposition wraps LAPACK: Hermitian input goes through the symmetric
solver, anything else through a complex Schur factorization (whose basis is
unitary by construction, which keeps degenerate eigenvalue clusters
well-behaved). Eigenvalues are sorted lexicographically by (real, imag) so
results are reproducible; ordering is bookkeeping only, never semantics.

On top of the decomposition sit three cheap cross-checks relating a
perturbation to the two spectra: the coupling-matrix identity
``(lam'_{j'} - lam_j) u_j^H v_{j'} = u_j^H (Mtilde - M) v_{j'}``, the
per-eigenvector residual-norm sum formulas it implies, and the resulting
one-sided Hausdorff bound on eigenvalue movement (Bauer-Fike for normal
matrices).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DimensionMismatch, NotNormal, NotSquare
from .setdist import PointMultiset
from .subspace import OrthonormalFrame

RECONSTRUCTION_RTOL = 1e-8


@dataclass(frozen=True)
class NormalEigenSystem:
    """Full eigensystem of one normal matrix.

    ``eigenvalues[j]`` pairs with column j of ``eigenvectors``; the basis is
    unitary, and for degenerate eigenvalues any orthonormal basis of the
    eigenspace is considered valid (consumers must only rely on spans and
    basis-invariant quantities). ``source_norm`` caches the matrix 2-norm.
    """

    n: int
    eigenvalues: np.ndarray
    eigenvectors: OrthonormalFrame
    source_norm: float

    @property
    def eigenvalue_multiset(self) -> PointMultiset:
        return PointMultiset(self.eigenvalues)

    def reconstruct(self) -> np.ndarray:
        """U diag(eigenvalues) U^H."""
        u = self.eigenvectors.columns
        return (u * self.eigenvalues[None, :]) @ u.conj().T


def _as_square(m) -> np.ndarray:
    mat = np.array(m, dtype=complex)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise NotSquare(f"expected a square matrix, got shape {mat.shape}")
    return mat


def commutator_norm(m) -> float:
    """||M M^H - M^H M||_F, the defect of normality."""
    mat = _as_square(m)
    mh = mat.conj().T
    return float(np.linalg.norm(mat @ mh - mh @ mat))


def two_norm(m) -> float:
    """Matrix 2-norm (largest singular value)."""
    return float(np.linalg.norm(np.asarray(m), 2))


def _lexicographic_order(eigvals: np.ndarray, scale: float) -> np.ndarray:
    """Sort by (real, imag), treating real parts within noise as equal.

    Without the grouping, rounding noise in a real part (e.g. 2.8e-17 vs an
    exact 0) would scramble the within-group imaginary order and make the
    reported ordering input-noise dependent.
    """
    order = np.lexsort((eigvals.imag, eigvals.real))
    tol = 1e-12 * max(1.0, scale)
    sorted_vals = eigvals[order]
    out = np.array(order)
    i, n = 0, len(eigvals)
    while i < n:
        j = i + 1
        while j < n and sorted_vals[j].real - sorted_vals[j - 1].real <= tol:
            j += 1
        if j - i > 1:
            sub = np.argsort(sorted_vals[i:j].imag, kind="stable")
            out[i:j] = out[i:j][sub]
        i = j
    return out


def decompose_normal(m, tol: float = 1e-8) -> NormalEigenSystem:
    """Eigendecompose a normal matrix into a unitary basis and sorted spectrum.

    ``tol`` scales the normality test: the commutator Frobenius norm must not
    exceed ``tol * max(1, ||M||_F^2)`` (user matrices arrive from
    floating-point pipelines, hence the relative form). Raises NotNormal or
    NotSquare on bad input.
    """
    mat = _as_square(m)
    comm = commutator_norm(mat)
    limit = tol * max(1.0, np.linalg.norm(mat) ** 2)
    if comm > limit:
        raise NotNormal(
            f"commutator norm {comm:.3e} exceeds {limit:.3e}", commutator_norm=comm
        )
    herm_defect = np.linalg.norm(mat - mat.conj().T)
    if herm_defect <= 1e-12 * max(1.0, np.linalg.norm(mat)):
        herm = (mat + mat.conj().T) / 2.0
        eigvals_real, vecs = np.linalg.eigh(herm)
        eigvals = eigvals_real.astype(complex)
    else:
        t, z = scipy.linalg.schur(mat, output="complex")
        eigvals = np.diag(t).copy()
        vecs = z
    norm2 = two_norm(mat)
    order = _lexicographic_order(eigvals, norm2)
    eigvals = eigvals[order]
    eigvals.setflags(write=False)
    vecs = np.ascontiguousarray(vecs[:, order])
    frame = OrthonormalFrame(vecs)
    worst = float(
        np.max(np.linalg.norm(mat @ vecs - vecs * eigvals[None, :], axis=0))
    )
    if worst > RECONSTRUCTION_RTOL * max(norm2, 1e-300):
        raise NotNormal(
            f"eigenpair residual {worst:.3e} exceeds "
            f"{RECONSTRUCTION_RTOL:g} * ||M||_2; matrix is too far from normal"
        )
    return NormalEigenSystem(
        n=mat.shape[0], eigenvalues=eigvals, eigenvectors=frame, source_norm=norm2
    )


def _check_pair(sys_a: NormalEigenSystem, sys_b: NormalEigenSystem, mdiff) -> np.ndarray:
    diff = _as_square(mdiff)
    if not (sys_a.n == sys_b.n == diff.shape[0]):
        raise DimensionMismatch(
            f"sizes differ: {sys_a.n}, {sys_b.n}, {diff.shape[0]}"
        )
    return diff


@dataclass(frozen=True)
class CouplingMatrix:
    """Eigenbasis coupling matrix with its identity self-check.

    ``matrix[j, j']`` is ``(lam'_{j'} - lam_j) * u_j^H v_{j'}``, which must
    coincide with ``U^H (Mtilde - M) V``; ``max_abs_error`` is the largest
    elementwise deviation between the two computations and ``self_check_ok``
    records whether it stayed within tolerance.
    """

    matrix: np.ndarray
    self_check_ok: bool
    max_abs_error: float


def coupling_matrix(
    base: NormalEigenSystem, perturbed: NormalEigenSystem, mdiff
) -> CouplingMatrix:
    """Build the coupling matrix elementwise and verify it against U^H (Mtilde-M) V."""
    diff = _check_pair(base, perturbed, mdiff)
    u = base.eigenvectors.columns
    v = perturbed.eigenvectors.columns
    overlaps = u.conj().T @ v
    gaps = perturbed.eigenvalues[None, :] - base.eigenvalues[:, None]
    direct = gaps * overlaps
    via_matrices = u.conj().T @ diff @ v
    err = float(np.max(np.abs(direct - via_matrices)))
    # Absolute floor covers the zero-perturbation case, where both sides are
    # rounding noise proportional to the matrix scale rather than to mdiff.
    tol = 1e-9 * np.linalg.norm(diff) + 1e-12 * (base.source_norm + perturbed.source_norm)
    return CouplingMatrix(matrix=direct, self_check_ok=err <= tol, max_abs_error=err)


@dataclass(frozen=True)
class ResidualNorms:
    """Perturbation residuals per eigenvector, with the sum-formula cross-check.

    ``per_base_vector[j] = ||(Mtilde - M) u_j||_2`` and
    ``per_perturbed_vector[j'] = ||(Mtilde - M) v_{j'}||_2``; each is also
    reproduced through the eigenvalue-gap/overlap sum formula, and
    ``self_check_ok`` reports agreement to 1e-9 relative.
    """

    per_base_vector: np.ndarray
    per_perturbed_vector: np.ndarray
    op_norm: float
    frob_norm: float
    self_check_ok: bool
    max_rel_error: float


def residual_norms(
    base: NormalEigenSystem, perturbed: NormalEigenSystem, mdiff
) -> ResidualNorms:
    diff = _check_pair(base, perturbed, mdiff)
    u = base.eigenvectors.columns
    v = perturbed.eigenvectors.columns
    per_base = np.linalg.norm(diff @ u, axis=0)
    per_pert = np.linalg.norm(diff @ v, axis=0)
    overlap_sq = np.abs(u.conj().T @ v) ** 2
    gap_sq = np.abs(perturbed.eigenvalues[None, :] - base.eigenvalues[:, None]) ** 2
    formula_pert = np.sqrt((gap_sq * overlap_sq).sum(axis=0))
    formula_base = np.sqrt((gap_sq * overlap_sq).sum(axis=1))
    floor = 1e-12 * (base.source_norm + perturbed.source_norm + np.linalg.norm(diff))
    rel = 0.0
    for direct, formula in ((per_base, formula_base), (per_pert, formula_pert)):
        denom = np.maximum(np.maximum(direct, formula), floor)
        with np.errstate(invalid="ignore"):
            r = np.abs(direct - formula) / np.where(denom > 0, denom, 1.0)
        rel = max(rel, float(np.max(r)) if r.size else 0.0)
    return ResidualNorms(
        per_base_vector=per_base,
        per_perturbed_vector=per_pert,
        op_norm=two_norm(diff),
        frob_norm=float(np.linalg.norm(diff)),
        self_check_ok=rel <= 1e-9,
        max_rel_error=rel,
    )


def bauer_fike_gap(base: NormalEigenSystem, perturbed: NormalEigenSystem) -> float:
    """max over base eigenvalues of the distance to the nearest perturbed one.

    For normal matrices this never exceeds ||Mtilde - M||_2 (a caller-side
    invariant; the symmetric statement holds too, so both directions of the
    Hausdorff distance are controlled).
    """
    if base.n != perturbed.n:
        raise DimensionMismatch(f"sizes differ: {base.n} vs {perturbed.n}")
    d = np.abs(perturbed.eigenvalues[None, :] - base.eigenvalues[:, None])
    return float(d.min(axis=1).max())
