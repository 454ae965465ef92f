"""Empirical sample-complexity lower-bound experiments.

Two setups: a shifted-Chebyshev product pair that no estimator can tell apart
unless a sample lands in a tiny corner box, and a high-dimensional linear
pair whose gap is invisible at any polynomial sample size.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from numpy.polynomial import chebyshev as _cheb
from numpy.polynomial import polynomial as _poly

from .polynomial import MultiPoly, UniPoly, eval_grid, product_poly, sub, sup_norm
from .sampling import NoiseModel, PairIndistinguishable, SampleSet, label_points


@dataclass
class AdversaryPair:
    f: MultiPoly
    g: MultiPoly
    region: tuple[np.ndarray, np.ndarray]  # distinguishable box (lo, hi)
    sigma_effective: float
    separation: float                      # sup|f - g|, certified at the corner
    approx_factor: float = 1.0


@dataclass
class ExperimentResult:
    trials: int
    failure_rate: float
    ci_low: float
    ci_high: float
    all_avoid_rate: Optional[float] = None
    extra: dict = None


def _binomial_ci(successes: int, trials: int, z: float = 1.96) -> tuple[float, float]:
    if trials == 0:
        return 0.0, 1.0
    p = successes / trials
    se = math.sqrt(max(p * (1.0 - p), 0.0) / trials)
    return max(0.0, p - z * se), min(1.0, p + z * se)


def _shifted_chebyshev(d: int, shift: float) -> UniPoly:
    """T_d(x + shift) in the monomial basis."""
    mono = _cheb.cheb2poly(np.eye(d + 1)[d])
    out = np.zeros(1)
    # compose with (x + shift) by Horner in the outer polynomial
    for c in mono[::-1]:
        out = _poly.polyadd(_poly.polymul(out, np.array([shift, 1.0])), np.array([c]))
    return UniPoly(d, out)


def cosh_chebyshev(d: int, x: float) -> float:
    """T_d(x) for x >= 1 via the hyperbolic form."""
    return math.cosh(d * math.acosh(x))


def build_uniform_adversary(d: int, n: int, approx_factor: float) -> AdversaryPair:
    """The pair (f, 0): f a normalized product of Chebyshev polynomials
    shifted by alpha/d^2 with alpha = 4*sqrt(C).  Outside the corner box
    [1 - alpha/d^2, 1]^n the pair differs by at most 1, yet its sup-norm gap
    exceeds 2C, so noise level sigma = 1 hides the difference."""
    if approx_factor <= 1.0:
        raise ValueError("approximation factor must exceed 1")
    alpha = 4.0 * math.sqrt(approx_factor)
    if d * d <= alpha / 2.0:
        raise ValueError(f"need d > sqrt(alpha/2) = {math.sqrt(alpha / 2):.3f}")
    shift = alpha / d**2
    axis = _shifted_chebyshev(d, shift)
    top = cosh_chebyshev(d, 1.0 + shift)
    f = product_poly([axis] * n)
    f = MultiPoly(n, d, f.coeffs / top ** (n - 1))
    g = MultiPoly.zero(n, d)
    lo = np.full(n, 1.0 - shift)
    hi = np.ones(n)
    pair = AdversaryPair(
        f, g, (lo, hi), sigma_effective=1.0, separation=top, approx_factor=approx_factor
    )
    _verify_pair(pair, shift)
    return pair


def _verify_pair(pair: AdversaryPair, shift: float, grid: int = 101) -> None:
    f, g = pair.f, pair.g
    n = f.n
    ax = np.linspace(-1.0, 1.0, grid)
    diff = np.abs(eval_grid(f, [ax] * n) - eval_grid(g, [ax] * n))
    inside = np.ones((grid,) * n, dtype=bool)
    for i in range(n):
        shape = [1] * n
        shape[i] = grid
        inside &= (ax >= pair.region[0][i]).reshape(shape)
    outside_max = float(diff[~inside].max())
    if outside_max > pair.sigma_effective + 1e-9:
        raise AssertionError(f"pair leaks outside the region: max diff {outside_max}")
    if pair.separation <= 2.0 * pair.sigma_effective:
        raise AssertionError("pair is not separated enough to force failure")


def region_uniform_mass(pair: AdversaryPair) -> float:
    lo, hi = pair.region
    return float(np.prod((hi - lo) / 2.0))


def run_indistinguishability_experiment(
    pair: AdversaryPair,
    M: int,
    trials: int,
    estimator: Callable[[SampleSet], MultiPoly],
    seed=0,
) -> ExperimentResult:
    """Per trial: the target is f or 0 by a fair coin; labels follow the
    adversary (truthful inside the corner box, a secret coin-flip pick
    outside).  A trial fails when the estimate is farther than C*sigma from
    the target.  Also tracks how often every sample avoids the box."""
    root = np.random.SeedSequence(seed)
    adversary = PairIndistinguishable(pair.f, pair.g, pair.region)
    model = NoiseModel(sigma=pair.sigma_effective, rho=0.0, adversary=adversary)
    threshold = pair.approx_factor * pair.sigma_effective
    failures = 0
    avoids = 0
    for ss in root.spawn(trials):
        rng = np.random.default_rng(ss)
        target = pair.f if rng.random() < 0.5 else pair.g
        pts = rng.uniform(-1.0, 1.0, size=(M, pair.f.n))
        sample = label_points(pts, target, model, rng)
        if M == 0 or not adversary.in_region(pts).any():
            avoids += 1
        p_hat = estimator(sample)
        if sup_norm(sub(p_hat, target)) > threshold:
            failures += 1
    lo, hi = _binomial_ci(failures, trials)
    return ExperimentResult(
        trials=trials,
        failure_rate=failures / trials,
        ci_low=lo,
        ci_high=hi,
        all_avoid_rate=avoids / trials,
        extra={"M": M},
    )


def run_linear_lb_experiment(
    n: int, sigma: float, approx_factor: float, M: int, trials: int, seed=0
) -> ExperimentResult:
    """Average-of-coordinates vs zero: a sample is 'bad' when the two labels
    agree to within sigma.  Counts trials where every sample is bad and
    compares with the concentration bound 1 - M*exp(-n*sigma^2/2)."""
    if sigma >= 1.0 / (2.0 * approx_factor):
        raise ValueError("need sigma < 1/(2C) for the pair to be separated")
    root = np.random.SeedSequence(seed)
    all_bad = 0
    for ss in root.spawn(trials):
        rng = np.random.default_rng(ss)
        rng.random()  # target pick g or h; the count below does not depend on it
        pts = rng.uniform(-1.0, 1.0, size=(M, n))
        h_vals = pts.mean(axis=1) if M else np.zeros(0)
        if np.all(np.abs(h_vals) <= sigma):
            all_bad += 1
    rate = all_bad / trials
    lo, hi = _binomial_ci(all_bad, trials)
    bound = 1.0 - M * math.exp(-n * sigma**2 / 2.0)
    return ExperimentResult(
        trials=trials,
        failure_rate=rate / 2.0,  # indistinguishable => a fair guess fails half the time
        ci_low=lo / 2.0,
        ci_high=hi / 2.0,
        all_avoid_rate=rate,
        extra={"M": M, "hoeffding_bound": bound, "all_bad_rate": rate},
    )


def write_failure_csv(rows: list[tuple[int, ExperimentResult]], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["M", "failure_rate", "ci_low", "ci_high"])
        for M, res in rows:
            w.writerow([M, f"{res.failure_rate:.6g}", f"{res.ci_low:.6g}", f"{res.ci_high:.6g}"])


# ---------------------------------------------------------------------------
# Node lattice utilities (building blocks for distribution-free adversaries)
# ---------------------------------------------------------------------------

def node_lattice(m: int) -> np.ndarray:
    """Nodes -1 + 2j/m for j = 1..m on each axis."""
    if m < 1:
        raise ValueError("m must be positive")
    return -1.0 + 2.0 * np.arange(1, m + 1) / m


def closest_node_index(x, m: int) -> tuple[int, ...]:
    """Per-axis nearest node (1-based), the l1-closest lattice node."""
    nodes = node_lattice(m)
    x = np.asarray(x, dtype=float).reshape(-1)
    return tuple(int(np.argmin(np.abs(nodes - xi))) + 1 for xi in x)
