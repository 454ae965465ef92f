"""Recovery pipelines: iterated median-based refinement, the
least-absolute-deviation bootstrap, and the finite-precision wrapper."""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import polynomial as poly
from .lp_core import cheb_value_matrix, linf_fit, weighted_l1_fit
from .partition import (
    ChebPartition,
    build_partition,
    cell_ids,
    goodness_threshold,
    min_cell_width,
)
from .polynomial import MultiPoly, coeff_abs_sum, evaluate_many, sub, sup_norm
from .sampling import SampleSet, round_bits, subset


class RecoveryError(RuntimeError):
    pass


@dataclass
class RecoveryConfig:
    d: int
    n: int
    eps: float = 0.5
    eta: float = 1e-3
    rho: float = 0.0
    m_override: Optional[int] = None
    c_grid: float = 2.0            # grid constant; the theory's absolute constant
    max_iters: int = 200
    variant: str = "plain"         # plain | with_l1 | finite_precision
    precision_bits: Optional[int] = None
    cell_budget: int = 200_000     # refuse l1 grids beyond this many cells
    fp_eps_constant: float = 1.0   # c0 in the eps >= c0*d*n*2^(-N/2) feasibility check

    def __post_init__(self):
        if not 0.0 < self.eps <= 0.5:
            raise ValueError(f"eps must lie in (0, 0.5], got {self.eps}")
        if self.variant not in ("plain", "with_l1", "finite_precision"):
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.variant == "plain" and self.eta <= 0:
            raise ValueError("eta must be positive for the plain variant")
        if self.variant == "finite_precision" and self.precision_bits is None:
            raise ValueError("finite_precision variant needs precision_bits")
        if not 0.0 <= self.rho < 0.5:
            raise ValueError(f"rho must lie in [0, 0.5), got {self.rho}")

    @property
    def eps_internal(self) -> float:
        # Rescaling that absorbs the analysis' constant-chasing: /7 for the
        # plain loop, /10 when bootstrapped by the l1 fit.
        return self.eps / (10.0 if self.variant == "with_l1" else 7.0)

    def grid_size(self) -> int:
        if self.m_override is not None:
            return self.m_override
        if self.variant == "with_l1":
            m = math.ceil((self.c_grid * self.d) ** (2 * self.n + 1) / self.eps)
        else:
            m = math.ceil(self.c_grid * self.d * self.n / self.eps_internal)
        return max(m, 1)


@dataclass
class FitReport:
    p_hat: MultiPoly
    errors: list[float]            # sup-norm error per iteration (needs truth)
    iterations: int
    m: int
    cells_skipped: int
    lp_stats: list[dict]
    seconds: float
    cap_hit: bool = False
    samples_used: int = 0
    extra: dict = field(default_factory=dict)


def chebyshev_sample_size(m: int, n: int, rho: float, delta: float, constant: float = 1.0) -> int:
    """Sample count (1-2*rho)^-2 * m^n * log(m^n / delta), scaled by an
    adjustable prefactor, under Chebyshev sampling.

    The guarantee that every cell stays majority-inlier hides an absolute
    constant (the concentration bounds need roughly 32); the default of 1
    keeps desk-scale experiments affordable and already recovers well.
    """
    cells = float(m) ** n
    return math.ceil(constant * (1.0 - 2.0 * rho) ** -2 * cells * math.log(cells / delta))


def uniform_sample_size(m: int, n: int, rho: float, delta: float, constant: float = 1.0) -> int:
    """Same guarantee under uniform sampling (cells can be much lighter)."""
    cells = float(m) ** n
    return math.ceil(
        constant * (1.0 - 2.0 * rho) ** -2 * cells**2 * math.log(4.0 * cells / delta)
    )


# ---------------------------------------------------------------------------
# The refinement step
# ---------------------------------------------------------------------------

class _Prepared:
    """Cell assignment, representatives, and the fit matrix, computed once
    per (samples, partition) pair and reused across refinement iterations."""

    def __init__(self, s: SampleSet, part: ChebPartition, d: int):
        if len(s) == 0:
            raise RecoveryError("sample set is empty: every cell is empty")
        self.samples = s
        self.part = part
        ids = cell_ids(part, s.points)
        order = np.argsort(ids, kind="stable")
        self.ids_sorted = ids[order]
        self.order = order
        uniq, counts = np.unique(self.ids_sorted, return_counts=True)
        self.counts = counts
        self.starts = np.concatenate([[0], np.cumsum(counts[:-1])])
        self.n_skipped = part.num_cells - len(uniq)

        j = np.array(np.unravel_index(uniq, (part.m,) * part.n)).T + 1
        lo = part.edges[part.m - j]
        hi = part.edges[part.m - j + 1]
        self.reps = (lo + hi) / 2.0  # cell centers
        self.value_matrix = cheb_value_matrix(self.reps, d, part.n)
        self.d = d

    def medians(self, residuals: np.ndarray) -> np.ndarray:
        """Lower median of the residuals within each nonempty cell."""
        r = residuals[self.order]
        full = np.lexsort((r, self.ids_sorted))
        med_pos = self.starts + (self.counts - 1) // 2
        return r[full[med_pos]]

    def step(self, p_hat: MultiPoly):
        residuals = self.samples.labels - evaluate_many(p_hat, self.samples.points)
        med = self.medians(residuals)
        r_poly, sol = linf_fit(
            self.reps, med, self.d, value_matrix=self.value_matrix, full_output=True
        )
        return poly.add(p_hat, r_poly), sol


def refine(s: SampleSet, part: ChebPartition, p_hat: MultiPoly) -> MultiPoly:
    """One refinement pass: per-cell lower median of residuals, minimax fit
    at cell centers, and the additive update.  Empty cells are skipped with a
    warning; an entirely empty grid is an error."""
    prep = _Prepared(s, part, p_hat.d)
    if prep.n_skipped:
        warnings.warn(f"{prep.n_skipped} empty cells skipped during refinement")
    updated, _ = prep.step(p_hat)
    return updated


# ---------------------------------------------------------------------------
# Recovery drivers
# ---------------------------------------------------------------------------

def _truth_error(s: SampleSet, p_hat: MultiPoly) -> Optional[float]:
    if s.truth is None:
        return None
    return sup_norm(sub(s.truth.poly, p_hat))


def _run_loop(s: SampleSet, cfg: RecoveryConfig, part: ChebPartition, eta: float) -> FitReport:
    t0 = time.perf_counter()
    prep = _Prepared(s, part, cfg.d)
    if prep.n_skipped:
        warnings.warn(f"{prep.n_skipped} empty cells skipped during recovery")

    p_hat = MultiPoly.zero(cfg.n, cfg.d)
    errors = []
    err = _truth_error(s, p_hat)
    if err is not None:
        errors.append(err)

    lp_stats = []
    p_hat, sol = prep.step(p_hat)
    lp_stats.append({"iterations": sol.iterations, "objective": sol.objective})
    err = _truth_error(s, p_hat)
    if err is not None:
        errors.append(err)

    bound = coeff_abs_sum(p_hat)
    eps_int = cfg.eps_internal
    n_iters = math.ceil(math.log((5.0 + 2.0 * bound) / eta) / math.log(1.0 / eps_int)) + 1
    n_iters = max(n_iters, 1)
    cap_hit = n_iters > cfg.max_iters
    if cap_hit:
        warnings.warn(f"iteration bound {n_iters} capped at {cfg.max_iters}")
        n_iters = cfg.max_iters

    for _ in range(n_iters - 1):
        p_hat, sol = prep.step(p_hat)
        lp_stats.append({"iterations": sol.iterations, "objective": sol.objective})
        err = _truth_error(s, p_hat)
        if err is not None:
            errors.append(err)

    return FitReport(
        p_hat=p_hat,
        errors=errors,
        iterations=n_iters,
        m=part.m,
        cells_skipped=prep.n_skipped,
        lp_stats=lp_stats,
        seconds=time.perf_counter() - t0,
        cap_hit=cap_hit,
        samples_used=len(s),
    )


def median_recover(s: SampleSet, cfg: RecoveryConfig) -> FitReport:
    """Iterated median-based recovery starting from the zero polynomial."""
    if cfg.variant != "plain":
        raise ValueError("median_recover requires the plain variant")
    m = cfg.grid_size()
    part = build_partition(m, cfg.n)
    return _run_loop(s, cfg, part, cfg.eta)


def median_recover_with_l1(s: SampleSet, cfg: RecoveryConfig) -> FitReport:
    """Recovery bootstrapped by a cell-weighted least-absolute-deviation fit;
    the iteration count depends only on (d, n, eps, rho), not on the scale of
    the target polynomial."""
    if cfg.variant != "with_l1":
        raise ValueError("median_recover_with_l1 requires the with_l1 variant")
    t0 = time.perf_counter()
    m = cfg.grid_size()
    if cfg.m_override is None and m**cfg.n > cfg.cell_budget:
        raise RecoveryError(
            f"l1 grid needs {m}^{cfg.n} cells, over the budget {cfg.cell_budget}; "
            "supply m_override"
        )
    if cfg.m_override is not None and m**cfg.n > cfg.cell_budget:
        warnings.warn(f"m_override {m} exceeds the cell budget; proceeding anyway")
    part = build_partition(m, cfg.n)

    ids = cell_ids(part, s.points)
    present = np.unique(ids)
    if len(present) < part.num_cells:
        raise RecoveryError(
            f"{part.num_cells - len(present)} empty cells in the l1 grid; "
            "the weighted fit requires every cell nonempty"
        )
    cells = {}
    for cid in present:
        mask = ids == cid
        j = np.array(np.unravel_index(int(cid), (part.m,) * part.n)) + 1
        lo = part.edges[part.m - j]
        hi = part.edges[part.m - j + 1]
        volume = float(np.prod(hi - lo))
        cells[tuple(int(v) for v in j)] = (
            s.points[mask],
            s.labels[mask],
            volume / int(mask.sum()),
        )
    p_hat, l1_sol = weighted_l1_fit(cells, cfg.d, cfg.n, full_output=True)

    errors = []
    err = _truth_error(s, p_hat)
    if err is not None:
        errors.append(err)

    eps_int = cfg.eps_internal
    alpha = goodness_threshold(cfg.rho)
    n_iters = math.ceil(
        (2.0 * cfg.n * math.log(2.0 * math.sqrt(2.0) * cfg.d) + math.log(1.0 / (1.0 - 2.0 * alpha)))
        / math.log(1.0 / eps_int)
    )
    n_iters = max(n_iters, 1)
    cap_hit = n_iters > cfg.max_iters
    if cap_hit:
        n_iters = cfg.max_iters

    prep = _Prepared(s, part, cfg.d)
    lp_stats = [{"iterations": l1_sol.iterations, "objective": l1_sol.objective}]
    for _ in range(n_iters):
        p_hat, sol = prep.step(p_hat)
        lp_stats.append({"iterations": sol.iterations, "objective": sol.objective})
        err = _truth_error(s, p_hat)
        if err is not None:
            errors.append(err)

    return FitReport(
        p_hat=p_hat,
        errors=errors,
        iterations=n_iters,
        m=m,
        cells_skipped=0,
        lp_stats=lp_stats,
        seconds=time.perf_counter() - t0,
        cap_hit=cap_hit,
        samples_used=len(s),
    )


# ---------------------------------------------------------------------------
# Finite precision
# ---------------------------------------------------------------------------

def sift_finite_precision(s: SampleSet, part: ChebPartition, bits: int) -> SampleSet:
    """Drop samples with any coordinate within 2^-bits of a grid breakpoint,
    so the cell assignment of the survivors is stable under rounding."""
    thr = 2.0 ** (-bits)
    width = min_cell_width(part)
    if width <= 4.0 * thr:
        raise RecoveryError(
            f"grid too fine for {bits}-bit precision: min cell width {width:.3e} "
            f"<= 4 * 2^-{bits}"
        )
    pts = s.points
    idx = np.searchsorted(part.edges, pts)
    below = part.edges[np.clip(idx - 1, 0, part.m)]
    above = part.edges[np.clip(idx, 0, part.m)]
    dist = np.minimum(np.abs(pts - below), np.abs(pts - above))
    keep = np.all(dist > thr, axis=1)
    return subset(s, keep)


def finite_precision_recover(s: SampleSet, cfg: RecoveryConfig) -> FitReport:
    """Round to N bits, sift boundary samples, then run the plain loop with
    additive accuracy eps * 2^-N."""
    if cfg.variant != "finite_precision":
        raise ValueError("finite_precision_recover requires the finite_precision variant")
    bits = cfg.precision_bits
    floor = cfg.fp_eps_constant * cfg.d * cfg.n * 2.0 ** (-bits / 2.0)
    if cfg.eps < floor:
        raise RecoveryError(
            f"eps={cfg.eps} too small for {bits}-bit precision (needs >= {floor:.3e})"
        )
    m = cfg.grid_size()
    part = build_partition(m, cfg.n)
    rounded = round_bits(s, bits)
    sifted = sift_finite_precision(rounded, part, bits)
    eta = cfg.eps * 2.0 ** (-bits)
    report = _run_loop(sifted, cfg, part, eta)
    report.extra["sifted_away"] = len(s) - len(sifted)
    return report


# ---------------------------------------------------------------------------
# Piecewise-constant approximation quality (used by verification suites)
# ---------------------------------------------------------------------------

def piecewise_constant_ratio(p: MultiPoly, m: int, grid: int = 601) -> float:
    """max |p - r| / max |p| where r is constant on each grid cell with value
    p(cell center); measured on a dense tensor grid."""
    from .partition import _axis_cells  # local import to avoid cycle at module load

    part = build_partition(m, p.n)
    ax = np.linspace(-1.0, 1.0, grid)
    vals = poly.eval_grid(p, [ax] * p.n)
    center_ax = ((part.edges[:-1] + part.edges[1:]) / 2.0)[::-1]  # ordered by j=1..m
    centers = poly.eval_grid(p, [center_ax] * p.n)
    j_ax = _axis_cells(part, ax) - 1
    r_vals = centers[np.ix_(*([j_ax] * p.n))]
    return float(np.abs(vals - r_vals).max() / sup_norm(p))
