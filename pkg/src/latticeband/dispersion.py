"""Wavevector sampling and band-structure post-processing.

Produces band tables along polyline paths and over full-zone grids, and
derives the quantities of interest from them: band gaps, non-monotonic
branches, interior extrema (which for beyond-nearest-neighbor coupling need
not sit on the irreducible-zone boundary), and iso-frequency crossing
counts.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import eigen
from .errors import DegenerateSegment, LatticeBandError
from .model import LatticeModel

PATH_PRESETS: dict[str, tuple[tuple[float, ...], ...]] = {
    # Zone tour used for the five-mass 2-D structure: (0,0) -> (pi,0) ->
    # (pi,pi) and back along the diagonal.
    "paper-2d-path": ((0.0, 0.0), (np.pi, 0.0), (np.pi, np.pi), (0.0, 0.0)),
}

# Batches below this size are not worth spreading over threads.
_THREAD_CHUNK_MIN = 2048


@dataclass(frozen=True)
class PathSpec:
    """Polyline in wavevector space with a fixed sample count per segment."""

    vertices: tuple[tuple[float, ...], ...]
    samples_per_segment: int = 101

    def __post_init__(self):
        if len(self.vertices) < 2:
            raise LatticeBandError("path needs at least 2 vertices")
        if self.samples_per_segment < 2:
            raise LatticeBandError("samples_per_segment must be >= 2")

    @property
    def dimension(self) -> int:
        return len(self.vertices[0])

    @property
    def n_segments(self) -> int:
        return len(self.vertices) - 1


@dataclass(frozen=True)
class BandTable:
    """Sampled dispersion data: rows of (path parameter, mu, sorted omegas)."""

    s: np.ndarray       # (M,) strictly increasing cumulative path parameter
    mus: np.ndarray     # (M, d)
    omegas: np.ndarray  # (M, n) ascending along axis 1

    @property
    def n_bands(self) -> int:
        return self.omegas.shape[1]

    def band(self, j: int) -> np.ndarray:
        return self.omegas[:, j]


@dataclass(frozen=True)
class BandGap:
    """Frequency interval free of bands, between band j and band j+1 (0-based)."""

    band: int
    omega_low: float
    omega_high: float

    @property
    def width(self) -> float:
        return self.omega_high - self.omega_low


@dataclass(frozen=True)
class GapReport:
    gaps: tuple[BandGap, ...] = field(default_factory=tuple)


@dataclass(frozen=True)
class ExtremumReport:
    """Grid-plus-refinement extrema of one band over the full zone."""

    band: int
    argmax_mu: np.ndarray
    max_omega: float
    argmin_mu: np.ndarray
    min_omega: float
    max_on_boundary: bool


def sample_path(spec: PathSpec) -> np.ndarray:
    """Wavevectors along the polyline, (1 + segments*(samples-1), d).

    Linear interpolation per segment with endpoints included; shared
    corners are emitted once. Raises DegenerateSegment for a zero-length
    segment.
    """
    verts = np.asarray(spec.vertices, dtype=float)
    out = [verts[:1]]
    for i in range(spec.n_segments):
        v0, v1 = verts[i], verts[i + 1]
        if not np.any(v1 != v0):
            raise DegenerateSegment(f"segment {i} has coincident endpoints {tuple(v0)}")
        seg = np.linspace(v0, v1, spec.samples_per_segment)
        out.append(seg[1:])
    return np.vstack(out)


def _worker_count(n_samples: int) -> int:
    raw = os.environ.get("LATTICEBAND_THREADS", "")
    try:
        cap = int(raw) if raw else 0
    except ValueError:
        cap = 0
    if cap <= 0:
        cap = os.cpu_count() or 1
    if n_samples < 2 * _THREAD_CHUNK_MIN:
        return 1
    return max(1, min(cap, n_samples // _THREAD_CHUNK_MIN))


def omega_table(model: LatticeModel, mus: np.ndarray) -> np.ndarray:
    """Frequencies for a set of wavevectors, (M, n); threaded for large M.

    Rows are computed independently and reassembled in index order, so the
    result does not depend on the thread count (LATTICEBAND_THREADS).
    """
    mus = np.atleast_2d(np.asarray(mus, dtype=float))
    workers = _worker_count(mus.shape[0])
    if workers == 1:
        return eigen.omegas_batch(model, mus)
    chunks = np.array_split(mus, workers)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(lambda c: eigen.omegas_batch(model, c), chunks))
    return np.vstack(parts)


def band_structure(model: LatticeModel, spec: PathSpec) -> BandTable:
    """Dispersion along a path; the path parameter is arc length in mu space."""
    mus = sample_path(spec)
    steps = np.linalg.norm(np.diff(mus, axis=0), axis=1)
    s = np.concatenate(([0.0], np.cumsum(steps)))
    return BandTable(s=s, mus=mus, omegas=omega_table(model, mus))


def detect_nonmonotonic(table: BandTable, band: int) -> tuple[bool, list[int]]:
    """Whether band ``band`` (0-based) reverses direction inside the path.

    Looks for sign changes of the discrete differences, ignoring steps below
    noise level. Returns the flag plus the sample indices where a reversal
    begins (interior extremum locations).
    """
    w = table.band(band)
    d = np.diff(w)
    tol = 1e-12 * max(1.0, float(np.max(np.abs(w))))
    signs = np.where(d > tol, 1, np.where(d < -tol, -1, 0))
    turning: list[int] = []
    last = 0
    for i, sgn in enumerate(signs):
        if sgn == 0:
            continue
        if last != 0 and sgn != last:
            turning.append(i)
        last = sgn
    return bool(turning), turning


def count_wavevectors(model: LatticeModel, omega_target: float, spec: PathSpec) -> int:
    """Number of path points where some band crosses omega_target.

    Counted as sign changes of omega_j - omega_target on the sampled path,
    summed over bands. Tangential touches (double roots) straddling a single
    sample can be missed; raise the sampling density to resolve them.
    """
    if omega_target <= 0:
        raise LatticeBandError("omega_target must be positive")
    if spec.n_segments != 1:
        raise LatticeBandError("crossing counts are defined on a single-segment path")
    table = band_structure(model, spec)
    total = 0
    for j in range(table.n_bands):
        f = table.band(j) - omega_target
        signs = np.sign(f)
        nz = signs[signs != 0]
        total += int(np.sum(nz[1:] != nz[:-1]))
    return total


def grid_wavevectors(dimension: int, resolution: int) -> np.ndarray:
    """Full-zone grid over [-pi, pi]^d, endpoints included, (R^d, d)."""
    if resolution < 2:
        raise LatticeBandError("grid resolution must be >= 2")
    axes = [np.linspace(-np.pi, np.pi, resolution)] * dimension
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def band_gaps(model: LatticeModel, resolution: int = 64) -> GapReport:
    """Global gaps between consecutive bands over the sampled zone.

    A gap exists where the maximum of band j stays below the minimum of
    band j+1; ordering of grid points does not matter.
    """
    if resolution < 16:
        raise LatticeBandError("gap detection needs resolution >= 16")
    omegas = omega_table(model, grid_wavevectors(model.dimension, resolution))
    low = omegas.max(axis=0)
    high = omegas.min(axis=0)
    gaps = []
    for j in range(omegas.shape[1] - 1):
        if high[j + 1] > low[j]:
            gaps.append(BandGap(band=j, omega_low=float(low[j]), omega_high=float(high[j + 1])))
    return GapReport(gaps=tuple(gaps))


def _refine_extremum(model: LatticeModel, band: int, mu0: np.ndarray, h: float,
                     sign: float) -> tuple[np.ndarray, float]:
    """One local refinement pass around a coarse grid extremum.

    Re-samples [mu0 - h, mu0 + h]^d on a fine local grid, then evaluates the
    per-axis parabola vertex through the best fine point. ``sign`` is +1 for
    a maximum, -1 for a minimum. Returns (argext, extremal omega).
    """
    local_res = 41
    axes = [np.linspace(c - h, c + h, local_res) for c in mu0]
    mesh = np.meshgrid(*axes, indexing="ij")
    mus = np.stack([m.ravel() for m in mesh], axis=1)
    w = sign * omega_table(model, mus)[:, band]
    best = int(np.argmax(w))
    best_mu = mus[best].copy()
    best_w = w[best]

    step = 2.0 * h / (local_res - 1)
    shape = (local_res,) * len(mu0)
    idx = np.unravel_index(best, shape)
    delta = np.zeros(len(mu0))
    wgrid = w.reshape(shape)
    for ax, i in enumerate(idx):
        if i == 0 or i == local_res - 1:
            continue
        lo = wgrid[idx[:ax] + (i - 1,) + idx[ax + 1:]]
        hi = wgrid[idx[:ax] + (i + 1,) + idx[ax + 1:]]
        denom = lo - 2.0 * best_w + hi
        if denom < 0:
            delta[ax] = 0.5 * step * (lo - hi) / denom
    candidate = best_mu + delta
    w_cand = sign * omega_table(model, candidate[None, :])[0, band]
    if w_cand > best_w:
        return candidate, sign * w_cand
    return best_mu, sign * best_w


def _fold_to_quadrant(mu: np.ndarray) -> np.ndarray:
    """Map mu into [0, pi]^d using 2*pi periodicity and inversion symmetry."""
    wrapped = mu - 2.0 * np.pi * np.round(mu / (2.0 * np.pi))
    return np.abs(wrapped)


def band_extrema(model: LatticeModel, band: int, resolution: int = 64) -> ExtremumReport:
    """Extrema of one band over the full zone: coarse grid + one local pass.

    The boundary flag reports whether the refined argmax, folded into
    [0, pi]^d, lies on that box's boundary; interior maxima are the
    signature of beyond-nearest-neighbor coupling.
    """
    if resolution < 16:
        raise LatticeBandError("extremum search needs resolution >= 16")
    if not 0 <= band < model.n:
        raise LatticeBandError(f"band index {band} out of range for {model.n} bands")
    mus = grid_wavevectors(model.dimension, resolution)
    w = omega_table(model, mus)[:, band]
    h = 2.0 * np.pi / (resolution - 1)
    argmax_mu, max_omega = _refine_extremum(model, band, mus[int(np.argmax(w))], h, +1.0)
    argmin_mu, min_omega = _refine_extremum(model, band, mus[int(np.argmin(w))], h, -1.0)

    folded = _fold_to_quadrant(argmax_mu)
    btol = h / (41 - 1) + 1e-9
    on_boundary = bool(np.any((folded < btol) | (np.abs(folded - np.pi) < btol)))
    return ExtremumReport(
        band=band,
        argmax_mu=argmax_mu,
        max_omega=float(max_omega),
        argmin_mu=argmin_mu,
        min_omega=float(min_omega),
        max_on_boundary=on_boundary,
    )
