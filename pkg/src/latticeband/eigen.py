"""Generalized Hermitian eigenproblem (K(mu) - omega^2 M) q = 0.

M is diagonal positive, so the problem reduces to the standard Hermitian
one for H = M^{-1/2} K M^{-1/2}. Frequencies are omega = sqrt(lambda) with
tiny negative eigenvalues clamped to zero; a significantly negative
eigenvalue means a bug or a negative stiffness input and is a hard error.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import assembly
from .errors import EigenNoConvergence, IndefiniteStiffness, NotHermitian
from .model import LatticeModel

# Negative eigenvalues below -INDEFINITE_RTOL * ||H||_2 are treated as errors;
# anything above clamps to zero (K is PSD by construction when all k >= 0).
INDEFINITE_RTOL = 1e-9
RESIDUAL_RTOL = 1e-9
HERMITICITY_RTOL = 1e-10


@dataclass(frozen=True)
class ModeSet:
    """Sorted angular frequencies (and optionally mode shapes) at one mu.

    ``vectors`` columns are unit-normalized under the mass inner product
    v^H M v = 1.
    """

    mu: np.ndarray
    omegas: np.ndarray
    vectors: np.ndarray | None = None


def eig_hermitian(H: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix with contract checks.

    Returns (eigenvalues ascending, eigenvector matrix with orthonormal
    columns). Raises NotHermitian if the input violates the Hermiticity
    tolerance and EigenNoConvergence if LAPACK fails or the residual /
    orthonormality contract does not hold.
    """
    H = np.asarray(H)
    scale = max(1.0, float(np.max(np.abs(H))) if H.size else 0.0)
    herm_defect = float(np.max(np.abs(H - H.conj().T))) if H.size else 0.0
    if herm_defect > HERMITICITY_RTOL * scale:
        raise NotHermitian(f"|H - H^H|_max = {herm_defect:.3e} exceeds tolerance")
    try:
        w, v = np.linalg.eigh(H)
    except np.linalg.LinAlgError as exc:
        raise EigenNoConvergence(str(exc)) from exc
    norm2 = float(np.max(np.abs(w))) if w.size else 0.0
    resid = float(np.max(np.abs(H @ v - v * w[None, :])))
    if resid > RESIDUAL_RTOL * max(norm2, np.finfo(float).tiny):
        raise EigenNoConvergence(f"residual {resid:.3e} exceeds {RESIDUAL_RTOL:.0e}*|H|_2")
    ortho = float(np.max(np.abs(v.conj().T @ v - np.eye(v.shape[0]))))
    if ortho > RESIDUAL_RTOL:
        raise EigenNoConvergence(f"eigenvectors not orthonormal, defect {ortho:.3e}")
    return w, v


def _omegas_from_eigenvalues(lam: np.ndarray, mus=None) -> np.ndarray:
    """sqrt of eigenvalues with the clamp/error policy applied.

    ``lam`` is (..., n) ascending per row; ``mus`` (matching leading shape)
    is only used to report the offending wavevector.
    """
    norm2 = np.max(np.abs(lam), axis=-1, keepdims=True)
    bad = lam < -INDEFINITE_RTOL * norm2
    if np.any(bad):
        where = np.argwhere(bad)[0]
        mu = None if mus is None else np.asarray(mus)[tuple(where[:-1])]
        raise IndefiniteStiffness(
            f"eigenvalue {lam[tuple(where)]:.3e} below -{INDEFINITE_RTOL:.0e}*|H|_2",
            mu=mu,
        )
    return np.sqrt(np.clip(lam, 0.0, None))


def dispersion_at(model: LatticeModel, mu, with_vectors: bool = False) -> ModeSet:
    """Angular frequencies of the unit cell at one wavevector.

    Assembles K(mu) from the per-offset blocks, reduces with the diagonal
    mass matrix, and solves the standard Hermitian problem. Frequencies come
    back ascending, one per node.
    """
    mu = np.atleast_1d(np.asarray(mu, dtype=float))
    K = assembly.reduced_stiffness(model, mu)
    minv = 1.0 / np.sqrt(np.asarray(model.masses()))
    H = K * minv[:, None] * minv[None, :]
    w, v = eig_hermitian(H)
    omegas = _omegas_from_eigenvalues(w[None, :], mus=mu[None, :])[0]
    if not with_vectors:
        return ModeSet(mu=mu, omegas=omegas)
    # Back-transform: columns q = M^{-1/2} v are orthonormal under M.
    return ModeSet(mu=mu, omegas=omegas, vectors=minv[:, None] * v)


def omegas_batch(model: LatticeModel, mus, backend: str | None = None) -> np.ndarray:
    """Sorted frequencies for a batch of wavevectors, shape (M, n).

    The hot path: batch-assembles K via the kernel and diagonalizes the
    whole stack in one LAPACK call. Pointwise equal to dispersion_at.
    """
    mus = np.atleast_2d(np.asarray(mus, dtype=float))
    K = assembly.reduced_stiffness_batch(model, mus, backend=backend)
    minv = 1.0 / np.sqrt(np.asarray(model.masses()))
    K *= minv[None, :, None]
    K *= minv[None, None, :]
    try:
        lam = np.linalg.eigvalsh(K)
    except np.linalg.LinAlgError as exc:
        raise EigenNoConvergence(str(exc)) from exc
    return _omegas_from_eigenvalues(lam, mus=mus)
