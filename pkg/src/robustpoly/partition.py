"""Tensor grid on [-1,1]^n with per-axis breakpoints at the extrema of T_m.

Cells are indexed by j in [1..m]^n; per axis, cell j spans
[cos(pi*j/m), cos(pi*(j-1)/m)], so j=1 is the cell touching +1.  Shared
breakpoints are owned by the cell on the larger-coordinate side.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .sampling import SampleSet


@dataclass(frozen=True)
class ChebPartition:
    m: int
    n: int
    edges: np.ndarray  # m+1 ascending breakpoints, edges[0] = -1, edges[m] = 1

    @property
    def num_cells(self) -> int:
        return self.m**self.n


def build_partition(m: int, n: int) -> ChebPartition:
    if m < 1 or n < 1:
        raise ValueError(f"need m >= 1 and n >= 1, got m={m}, n={n}")
    edges = np.cos(np.pi * np.arange(m, -1, -1) / m)
    edges[0], edges[m] = -1.0, 1.0
    edges[np.abs(edges) < 1e-15] = 0.0
    return ChebPartition(m, n, edges)


def _axis_cells(part: ChebPartition, coords: np.ndarray) -> np.ndarray:
    if np.any(coords < -1.0) or np.any(coords > 1.0):
        raise ValueError("point outside [-1,1]^n")
    k = np.searchsorted(part.edges, coords, side="right") - 1
    k = np.clip(k, 0, part.m - 1)
    return part.m - k


def cell_of(part: ChebPartition, x) -> tuple[int, ...]:
    """Index of the cell containing x; interior breakpoints go to the cell above."""
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape != (part.n,):
        raise ValueError(f"point has dimension {x.shape[0]}, partition has {part.n}")
    return tuple(int(j) for j in _axis_cells(part, x))


def cells_of(part: ChebPartition, points: np.ndarray) -> np.ndarray:
    """Vectorized cell_of: (M, n) points -> (M, n) indices in [1..m]."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != part.n:
        raise ValueError(f"points must have shape (M, {part.n})")
    return _axis_cells(part, pts)


def cell_ids(part: ChebPartition, points: np.ndarray) -> np.ndarray:
    """Linear cell ids in [0, m^n) for grouping."""
    j = cells_of(part, points) - 1
    return np.ravel_multi_index(tuple(j.T), (part.m,) * part.n)


def id_to_index(part: ChebPartition, cid: int) -> tuple[int, ...]:
    return tuple(int(v) + 1 for v in np.unravel_index(int(cid), (part.m,) * part.n))


def cell_bounds(part: ChebPartition, j) -> tuple[np.ndarray, np.ndarray]:
    """(lo, hi) corners of cell j."""
    j = np.asarray(j, dtype=int).reshape(-1)
    if j.shape != (part.n,) or np.any(j < 1) or np.any(j > part.m):
        raise ValueError(f"invalid cell index {tuple(j)} for m={part.m}, n={part.n}")
    lo = part.edges[part.m - j]
    hi = part.edges[part.m - j + 1]
    return lo, hi


def cell_center(part: ChebPartition, j) -> np.ndarray:
    lo, hi = cell_bounds(part, j)
    return (lo + hi) / 2.0


def all_cell_centers(part: ChebPartition) -> np.ndarray:
    """Centers of all m^n cells, ordered by linear cell id."""
    mids = (part.edges[:-1] + part.edges[1:]) / 2.0
    ax = mids[::-1]  # axis value for j = 1..m
    grids = np.meshgrid(*([ax] * part.n), indexing="ij")
    return np.stack([g.reshape(-1) for g in grids], axis=1)


def cell_probability(part: ChebPartition, j, dist: str) -> float:
    """Mass of cell j under 'uniform' or 'chebyshev' sampling."""
    if dist == "chebyshev":
        cell_bounds(part, j)  # validates the index
        return float(part.m) ** (-part.n)
    if dist == "uniform":
        lo, hi = cell_bounds(part, j)
        return float(np.prod(hi - lo) / 2.0**part.n)
    raise ValueError(f"unknown distribution {dist!r}")


def interior_region(part: ChebPartition, j, band: float) -> tuple[np.ndarray, np.ndarray]:
    """Cell j shrunk by ``band`` on every face."""
    if band < 0:
        raise ValueError("band must be non-negative")
    lo, hi = cell_bounds(part, j)
    widths = hi - lo
    if np.any(2.0 * band >= widths) and band > 0:
        ax = int(np.argmax(2.0 * band >= widths))
        raise ValueError(
            f"band {band} too large for cell {tuple(int(v) for v in np.asarray(j))}: "
            f"axis {ax} width {widths[ax]:.3e}"
        )
    return lo + band, hi - band


def min_cell_width(part: ChebPartition) -> float:
    return float(np.diff(part.edges).min())


def refine3(part: ChebPartition) -> ChebPartition:
    """The 3m-cell refinement; every parent cell is a union of 3^n subcells."""
    return build_partition(3 * part.m, part.n)


def middle_subcell(j) -> tuple[int, ...]:
    """Index, in the refined grid, of the middle subcell of parent cell j."""
    j = np.asarray(j, dtype=int).reshape(-1)
    return tuple(int(3 * v - 1) for v in j)


def goodness_threshold(rho: float) -> float:
    """The outlier-fraction threshold (2*rho + 1) / 4 paired with rate rho."""
    return (2.0 * rho + 1.0) / 4.0


@dataclass
class GoodnessReport:
    alpha: float
    counts: np.ndarray            # samples per cell, linear id order
    outlier_counts: np.ndarray
    n_empty: int
    worst_fraction: float
    is_good: bool

    def fraction(self, cid: int) -> float:
        c = self.counts[cid]
        return float(self.outlier_counts[cid] / c) if c else 0.0


def alpha_goodness(
    part: ChebPartition,
    samples: SampleSet,
    inlier_flags: np.ndarray,
    alpha: float,
    strict: bool = False,
) -> GoodnessReport:
    """Per-cell outlier fractions and the verdict: every nonempty cell must
    have outlier fraction < alpha; in strict mode empty cells also fail."""
    flags = np.asarray(inlier_flags, dtype=bool)
    if flags.shape != (len(samples.labels),):
        raise ValueError("inlier_flags must align with samples")
    ids = cell_ids(part, samples.points)
    total = part.num_cells
    counts = np.bincount(ids, minlength=total)
    outliers = np.bincount(ids, weights=~flags, minlength=total).astype(int)
    nonempty = counts > 0
    fractions = np.zeros(total)
    fractions[nonempty] = outliers[nonempty] / counts[nonempty]
    worst = float(fractions.max()) if total else 0.0
    n_empty = int(total - nonempty.sum())
    good = bool(np.all(fractions[nonempty] < alpha))
    if strict and n_empty > 0:
        good = False
    return GoodnessReport(alpha, counts, outliers, n_empty, worst, good)
