"""Numerical verification of the sup/l1 norm comparisons on the cube: the
(2d)^(2n) sandwich, the Legendre-derivative family that nearly attains it,
super-level-set measure estimates, and the local flatness window around the
maximizer of a univariate polynomial."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as _poly

from .polynomial import (
    MultiPoly,
    UniPoly,
    evaluate,
    evaluate_many,
    l1_norm,
    legendre_p_derivative,
    product_poly,
    random_poly,
    sup_norm,
)


@dataclass
class SandwichReport:
    descriptor: str
    d: int
    n: int
    sup: float
    l1: float
    ratio: float
    bound: float
    passed: bool


def check_sandwich(p: MultiPoly, descriptor: str = "") -> SandwichReport:
    """Check sup|p| <= (2d)^(2n) * integral|p| on the cube."""
    sup = sup_norm(p)
    l1 = l1_norm(p)
    ratio = sup / l1 if l1 > 0 else math.inf if sup > 0 else 0.0
    bound = (2.0 * max(p.d, 1)) ** (2 * p.n)
    return SandwichReport(
        descriptor or f"poly(d={p.d}, n={p.n})",
        p.d,
        p.n,
        sup,
        l1,
        ratio,
        bound,
        ratio <= bound * (1.0 + 1e-6),
    )


def sandwich_sweep(count: int, max_d: int, max_n: int, seed) -> list[SandwichReport]:
    rng = np.random.default_rng(seed)
    reports = []
    for i in range(count):
        d = int(rng.integers(1, max_d + 1))
        n = int(rng.integers(1, max_n + 1))
        p = random_poly(n, d, rng)
        reports.append(check_sandwich(p, descriptor=f"random[{i}](d={d}, n={n})"))
    return reports


def write_sandwich_csv(reports: list[SandwichReport], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["d", "n", "ratio", "bound"])
        for r in reports:
            w.writerow([r.d, r.n, f"{r.ratio:.12g}", f"{r.bound:.12g}"])


def tightness_family(d: int, n: int) -> tuple[MultiPoly, float]:
    """The product polynomial whose sup/l1 ratio is ((m+1)(m+2)/2)^n exactly,
    built per axis as (x+1)/2 * (P'_{m+1}(x))^2 for odd d = 2m+1.

    Returns (polynomial, exact ratio).
    """
    if d < 1 or d % 2 == 0:
        raise ValueError(f"degree must be odd, got {d}")
    m = (d - 1) // 2
    dp = legendre_p_derivative(m + 1).coeffs      # degree m, monomial
    sq = _poly.polymul(dp, dp)                    # degree 2m
    f = _poly.polymul(sq, np.array([0.5, 0.5]))   # times (x+1)/2 -> degree 2m+1
    uni = UniPoly(d, f)
    ratio = ((m + 1) * (m + 2) / 2.0) ** n
    return product_poly([uni] * n), ratio


def large_value_region(
    p: MultiPoly, y, samples: int = 100_000, seed=0, threshold_scale: float | None = None
) -> tuple[float, float]:
    """Monte-Carlo Lebesgue measure of {x : |p(x)| >= |p(y)| / 2^n}.

    Returns (estimate, standard error); the guaranteed lower bound for this
    threshold is (2 d^2)^(-n).
    """
    y = np.asarray(y, dtype=float).reshape(-1)
    if y.shape != (p.n,) or np.abs(y).max() > 1.0:
        raise ValueError("y must be a point in the cube")
    thr = abs(evaluate(p, y)) * (threshold_scale if threshold_scale is not None else 2.0**-p.n)
    rng = np.random.default_rng(seed)
    pts = rng.uniform(-1.0, 1.0, size=(samples, p.n))
    frac = float(np.mean(np.abs(evaluate_many(p, pts)) >= thr))
    volume = 2.0**p.n
    se = volume * math.sqrt(max(frac * (1.0 - frac), 1e-12) / samples)
    return volume * frac, se


def check_univariate_window(g: UniPoly, grid: int = 20001) -> dict:
    """Around the maximizer x* of |g| on [-1,1], every x within 1/(2 d^2)
    keeps |g(x)| >= |g(x*)| / 2.  Verified on a dense grid."""
    xs = np.linspace(-1.0, 1.0, grid)
    vals = np.abs(g(xs))
    i = int(np.argmax(vals))
    x_star, g_star = xs[i], vals[i]
    if g_star == 0.0:
        return {"holds": True, "x_star": float(x_star), "min_in_window": 0.0, "target": 0.0}
    radius = 1.0 / (2.0 * max(g.degree, 1) ** 2)
    window = np.abs(xs - x_star) <= radius
    lo = float(vals[window].min())
    return {
        "holds": bool(lo >= g_star / 2.0 - 1e-9),
        "x_star": float(x_star),
        "min_in_window": lo,
        "target": float(g_star / 2.0),
    }
