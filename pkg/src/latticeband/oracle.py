"""Brute-force verification against a finite cyclic supercell.

A block of N1 x ... x Nd unit cells wrapped into a torus (Born-von Karman
boundary conditions) is assembled directly from the spring list, with no
use of the per-offset blocks or the reduced stiffness: springs wrap
cyclically, each one stamping k * (e_p - e_q)(e_p - e_q)^T. The sorted
eigenfrequencies of that system must equal, as a multiset, the union of the
Bloch frequencies at the commensurate wavevectors mu_k = 2 pi k / N. This
identity is exact for every N and is the end-to-end check of the
per-neighbor force treatment, including the claim that the boundary force
terms cancel.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import eigen
from .errors import LatticeBandError, SizeMismatch
from .model import LatticeModel, require_valid


@dataclass(frozen=True)
class SupercellSystem:
    """Finite cyclic lattice: full real stiffness plus diagonal masses."""

    cells: tuple[int, ...]
    stiffness: np.ndarray  # (size, size) real symmetric, zero row sums
    masses: np.ndarray     # (size,) positive

    @property
    def size(self) -> int:
        return self.masses.shape[0]


@dataclass(frozen=True)
class OracleResult:
    cells: tuple[int, ...]
    deviation: float
    tolerance: float
    omega_max: float
    size: int

    @property
    def passed(self) -> bool:
        return self.deviation <= self.tolerance


def row_index(cells: tuple[int, ...], n_nodes: int, cell, node: int) -> int:
    """Row of (cell multi-index, node) in the supercell ordering."""
    return int(np.ravel_multi_index(tuple(cell), cells)) * n_nodes + node


def build_supercell(model: LatticeModel, cells) -> SupercellSystem:
    """Assemble the cyclic supercell stiffness and mass from the spring list.

    For each cell c and spring (a, b, offset, k) the partner coordinate is
    ((c + offset) mod N, b). A spring that wraps onto its own coordinate
    stamps zero and is skipped. Springs should stay distinguishable, so
    N_i >= 2*max|offset_i| + 1 is recommended (smaller N stays exact but
    lets distinct springs collapse onto the same pair).
    """
    require_valid(model)
    cells = tuple(int(c) for c in cells)
    if len(cells) != model.dimension or any(c < 1 for c in cells):
        raise LatticeBandError(f"cell counts {cells} invalid for {model.dimension}-D model")
    n = model.n
    index = model.node_index
    size = n * int(np.prod(cells))
    K = np.zeros((size, size))
    for c in np.ndindex(*cells):
        for s in model.springs:
            partner = tuple((ci + oi) % ni for ci, oi, ni in zip(c, s.offset, cells))
            p = row_index(cells, n, c, index[s.a])
            q = row_index(cells, n, partner, index[s.b])
            if p == q:
                continue
            K[p, p] += s.k
            K[q, q] += s.k
            K[p, q] -= s.k
            K[q, p] -= s.k
    masses = np.tile(np.asarray(model.masses(), dtype=float), int(np.prod(cells)))
    return SupercellSystem(cells=cells, stiffness=K, masses=masses)


def supercell_frequencies(system: SupercellSystem) -> np.ndarray:
    """Sorted eigenfrequencies of the finite cyclic lattice."""
    minv = 1.0 / np.sqrt(system.masses)
    H = system.stiffness * minv[:, None] * minv[None, :]
    w, _ = eigen.eig_hermitian(H)
    return eigen._omegas_from_eigenvalues(w[None, :])[0]


def commensurate_wavevectors(cells: tuple[int, ...]) -> np.ndarray:
    """mu_k = 2 pi k / N for all integer multi-indices k, ((prod N), d)."""
    ks = np.array(list(np.ndindex(*cells)), dtype=float)
    return 2.0 * np.pi * ks / np.asarray(cells, dtype=float)


def bloch_frequencies(model: LatticeModel, cells) -> np.ndarray:
    """Sorted union of Bloch frequencies at the commensurate wavevectors."""
    cells = tuple(int(c) for c in cells)
    collected = [
        eigen.dispersion_at(model, mu).omegas
        for mu in commensurate_wavevectors(cells)
    ]
    return np.sort(np.concatenate(collected))


def oracle_check(model: LatticeModel, cells) -> OracleResult:
    """Compare supercell and Bloch frequency multisets.

    Both sides are sorted ascending and compared pairwise; pass means the
    maximum deviation stays within 1e-8 * (1 + omega_max).
    """
    system = build_supercell(model, cells)
    w_super = supercell_frequencies(system)
    w_bloch = bloch_frequencies(model, cells)
    if w_super.shape != w_bloch.shape:
        raise SizeMismatch(
            f"supercell has {w_super.shape[0]} modes, Bloch union has {w_bloch.shape[0]}"
        )
    omega_max = float(max(w_super.max(initial=0.0), w_bloch.max(initial=0.0)))
    deviation = float(np.max(np.abs(w_super - w_bloch))) if w_super.size else 0.0
    return OracleResult(
        cells=system.cells,
        deviation=deviation,
        tolerance=1e-8 * (1.0 + omega_max),
        omega_max=omega_max,
        size=system.size,
    )
