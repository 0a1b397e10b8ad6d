"""Per-offset stiffness blocks and the reduced Bloch stiffness.

Springs are grouped by their cell offset. Each group forms a 2n x 2n
stiffness acting on (reference cell, displaced cell) coordinates, stored as
blocks [[A, B], [B^T, C]]. Under a Bloch ansatz the displaced coordinates
are phase-scaled copies of the reference ones, q_displaced = p * q with
p = exp(i mu . offset), and the group contracts to the n x n contribution

    A + C + p B + conj(p) B^T.

Summing over offsets (plus the internal block for offset zero) gives the
Hermitian reduced stiffness K(mu) of the unit cell. Treating each neighbor
order with its own operator is what makes the boundary force terms cancel;
collapsing all neighbors into a single nearest-neighbor-style operator does
not (see naive_combined_assembly).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import LatticeBandError
from .model import LatticeModel, require_valid


@dataclass(frozen=True)
class OffsetBlock:
    """Blocks of the 2n x 2n stiffness for one cell offset.

    A acts on the reference cell, C on the displaced cell, B couples them
    (rows = reference coordinates, columns = displaced coordinates). For the
    zero offset only A is populated; it is the internal stiffness.
    """

    offset: tuple[int, ...]
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray

    @property
    def full(self) -> np.ndarray:
        """The assembled [[A, B], [B^T, C]] matrix (2n x 2n)."""
        return np.block([[self.A, self.B], [self.B.T, self.C]])


@dataclass(frozen=True)
class ReducedMatrices:
    """Diagonal mass matrix and reduced stiffness at one wavevector."""

    mass: np.ndarray
    stiffness: np.ndarray


def offset_blocks(model: LatticeModel) -> dict[tuple[int, ...], OffsetBlock]:
    """Build one OffsetBlock per distinct canonical offset in the model.

    Stamping rule per spring (a, b, offset, k):
      offset = 0:  A[a,a] += k, A[b,b] += k, A[a,b] -= k, A[b,a] -= k
      offset != 0: A[a,a] += k, C[b,b] += k, B[a,b] -= k
    Every spring's 2x2 stamp has zero row sums, so the full block does too.
    """
    require_valid(model)
    n = model.n
    index = model.node_index
    blocks: dict[tuple[int, ...], tuple[np.ndarray, np.ndarray, np.ndarray]] = {}
    for s in model.springs:
        if s.offset not in blocks:
            blocks[s.offset] = (np.zeros((n, n)), np.zeros((n, n)), np.zeros((n, n)))
        A, B, C = blocks[s.offset]
        ia, ib = index[s.a], index[s.b]
        if all(c == 0 for c in s.offset):
            A[ia, ia] += s.k
            A[ib, ib] += s.k
            A[ia, ib] -= s.k
            A[ib, ia] -= s.k
        else:
            A[ia, ia] += s.k
            C[ib, ib] += s.k
            B[ia, ib] -= s.k
    return {off: OffsetBlock(off, A, B, C) for off, (A, B, C) in blocks.items()}


def phase(offset, mu) -> complex:
    """Bloch phase factor exp(i mu . offset) for an integer cell offset."""
    off = np.asarray(offset, dtype=float)
    mu = np.asarray(mu, dtype=float)
    if off.shape != mu.shape:
        raise LatticeBandError(f"offset {offset} and mu {mu} have different lengths")
    return complex(np.exp(1j * float(off @ mu)))


def mass_matrix(model: LatticeModel) -> np.ndarray:
    """Diagonal mass matrix in node order."""
    require_valid(model)
    return np.diag(np.asarray(model.masses(), dtype=float))


def reduced_stiffness(model: LatticeModel, mu) -> np.ndarray:
    """Reduced Hermitian stiffness K(mu), n x n complex.

    K(mu) = A_0 + sum over nonzero offsets of (A + C + p B + conj(p) B^T),
    with p = phase(offset, mu). 2*pi periodic per component; K(0) has the
    rigid translation vector in its null space.
    """
    n = model.n
    K = np.zeros((n, n), dtype=np.complex128)
    for off, blk in offset_blocks(model).items():
        if all(c == 0 for c in off):
            K += blk.A
        else:
            p = phase(off, mu)
            K += blk.A + blk.C + p * blk.B + np.conj(p) * blk.B.T
    return K


def reduced_matrices(model: LatticeModel, mu) -> ReducedMatrices:
    return ReducedMatrices(mass_matrix(model), reduced_stiffness(model, mu))


@dataclass(frozen=True)
class SpringArrays:
    """Flat spring data for the batch kernels.

    ``static`` is the mu-independent part of K (A_0 plus all A + C);
    the index/stiffness/offset arrays describe the nonzero-offset springs
    whose coupling entries pick up phase factors.
    """

    static: np.ndarray   # (n, n) float64
    a_idx: np.ndarray    # (S,) int64
    b_idx: np.ndarray    # (S,) int64
    ks: np.ndarray       # (S,) float64
    offsets: np.ndarray  # (S, d) float64


def spring_arrays(model: LatticeModel) -> SpringArrays:
    require_valid(model)
    n = model.n
    index = model.node_index
    static = np.zeros((n, n))
    a_idx, b_idx, ks, offs = [], [], [], []
    for s in model.springs:
        ia, ib = index[s.a], index[s.b]
        if all(c == 0 for c in s.offset):
            static[ia, ia] += s.k
            static[ib, ib] += s.k
            static[ia, ib] -= s.k
            static[ib, ia] -= s.k
        else:
            static[ia, ia] += s.k
            static[ib, ib] += s.k
            a_idx.append(ia)
            b_idx.append(ib)
            ks.append(s.k)
            offs.append(s.offset)
    return SpringArrays(
        static=np.ascontiguousarray(static),
        a_idx=np.asarray(a_idx, dtype=np.int64),
        b_idx=np.asarray(b_idx, dtype=np.int64),
        ks=np.asarray(ks, dtype=np.float64),
        offsets=np.asarray(offs, dtype=np.float64).reshape(len(ks), model.dimension),
    )


def reduced_stiffness_batch(model: LatticeModel, mus, backend: str | None = None) -> np.ndarray:
    """K(mu) for a whole batch of wavevectors at once, shape (M, n, n).

    Matches reduced_stiffness pointwise; this is the hot path used by the
    dispersion sampler. ``backend`` picks the kernel ("compiled"/"python",
    default = compiled when built).
    """
    mus = np.ascontiguousarray(np.atleast_2d(np.asarray(mus, dtype=np.float64)))
    if mus.shape[1] != model.dimension:
        raise LatticeBandError(
            f"wavevectors have {mus.shape[1]} components, model is {model.dimension}-D"
        )
    arr = spring_arrays(model)
    return kernels.assemble_batch(
        arr.static, arr.a_idx, arr.b_idx, arr.ks, arr.offsets, mus, backend=backend
    )


def naive_combined_assembly(model: LatticeModel, mu) -> float:
    """Single-operator (incorrect) assembly for the two-neighbor chain.

    Documented negative result: wrapping both neighbor orders in one
    nearest-neighbor-style push-forward gives the stiffness polynomial
    4 K1 + 2 K2 - 2 K1 (e^{i mu} + e^{-i mu}) - K2 (e^{i 2 mu} + e^{-i 2 mu}),
    which for K2 != 0 differs from twice the correct reduced stiffness by
    K2 (2 - e^{i 2 mu} - e^{-i 2 mu}): the leftover boundary force on the
    interior mass. Only valid for chain2n-like models (one node, 1-D,
    offsets within {1, 2}).
    """
    require_valid(model)
    if model.dimension != 1 or model.n != 1:
        raise LatticeBandError("naive assembly is defined for single-mass 1-D chains only")
    k1 = sum(s.k for s in model.springs if s.offset == (1,))
    k2 = sum(s.k for s in model.springs if s.offset == (2,))
    if any(s.offset not in ((1,), (2,)) for s in model.springs):
        raise LatticeBandError("naive assembly expects offsets {1, 2} only")
    mu = float(np.asarray(mu, dtype=float).reshape(()))
    return float(4 * k1 + 2 * k2 - 4 * k1 * np.cos(mu) - 2 * k2 * np.cos(2 * mu))
