"""Multivariate polynomials of bounded individual degree on the cube [-1,1]^n.

Coefficients are stored densely in the tensor-product Chebyshev basis
T_{a1}(x1) * ... * T_{an}(xn), which keeps evaluation well conditioned on the
cube.  Monomial-basis conversion is provided only so that independent oracles
can cross-check evaluation.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import chebyshev as _cheb
from numpy.polynomial import polynomial as _poly
from numpy.polynomial.legendre import leggauss


@dataclass(frozen=True)
class MultiPoly:
    """n-variate polynomial with degree at most d in each variable.

    coeffs has shape (d+1,)*n; entry [a1, ..., an] multiplies
    T_{a1}(x1) * ... * T_{an}(xn).
    """

    n: int
    d: int
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"dimension must be positive, got n={self.n}")
        if self.d < 0:
            raise ValueError(f"degree must be non-negative, got d={self.d}")
        c = np.asarray(self.coeffs, dtype=float)
        expected = (self.d + 1,) * self.n
        if c.shape != expected:
            raise ValueError(f"coeffs shape {c.shape} != {expected}")
        if not np.all(np.isfinite(c)):
            raise ValueError("coeffs must be finite")
        object.__setattr__(self, "coeffs", c)

    @staticmethod
    def zero(n: int, d: int) -> "MultiPoly":
        return MultiPoly(n, d, np.zeros((d + 1,) * n))

    @staticmethod
    def constant(n: int, d: int, value: float) -> "MultiPoly":
        c = np.zeros((d + 1,) * n)
        c[(0,) * n] = value
        return MultiPoly(n, d, c)


@dataclass(frozen=True)
class UniPoly:
    """Univariate polynomial; ``basis`` is 'monomial' or 'chebyshev'.

    coeffs are ascending (coeffs[k] multiplies x^k or T_k).
    """

    degree: int
    coeffs: np.ndarray
    basis: str = "monomial"

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        if c.shape != (self.degree + 1,):
            raise ValueError(f"need {self.degree + 1} coefficients, got {c.shape}")
        if self.basis not in ("monomial", "chebyshev"):
            raise ValueError(f"unknown basis {self.basis!r}")
        object.__setattr__(self, "coeffs", c)

    def __call__(self, x):
        if self.basis == "monomial":
            return _poly.polyval(x, self.coeffs)
        return _cheb.chebval(x, self.coeffs)


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

def evaluate_many(p: MultiPoly, points: np.ndarray) -> np.ndarray:
    """Evaluate p at each row of ``points`` (shape (M, n))."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != p.n:
        raise ValueError(f"points must have shape (M, {p.n}), got {pts.shape}")
    c = _cheb.chebval(pts[:, 0], p.coeffs)
    for i in range(1, p.n):
        c = _cheb.chebval(pts[:, i], c, tensor=False)
    return np.asarray(c, dtype=float)


def evaluate(p: MultiPoly, x) -> float:
    """Evaluate p at a single point x in R^n."""
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape != (p.n,):
        raise ValueError(f"point has dimension {x.shape[0]}, polynomial has {p.n}")
    return float(evaluate_many(p, x[None, :])[0])


def eval_grid(p: MultiPoly, axes: list[np.ndarray]) -> np.ndarray:
    """Evaluate p on the tensor grid axes[0] x ... x axes[n-1].

    Exploits separability: cost is one small matrix contraction per axis
    instead of one full evaluation per grid point.
    """
    if len(axes) != p.n:
        raise ValueError(f"need {p.n} axes, got {len(axes)}")
    c = p.coeffs
    for ax in axes:
        v = _cheb.chebvander(np.asarray(ax, dtype=float), p.d)  # (len, d+1)
        c = np.tensordot(c, v, axes=([0], [1]))
    return c


# ---------------------------------------------------------------------------
# Classical families
# ---------------------------------------------------------------------------

def chebyshev_t(d: int) -> UniPoly:
    """T_d in the monomial basis via T_{k+1} = 2x T_k - T_{k-1}."""
    if d < 0:
        raise ValueError("degree must be non-negative")
    if d == 0:
        return UniPoly(0, [1.0])
    prev = np.array([1.0])          # T_0
    cur = np.array([0.0, 1.0])      # T_1
    for _ in range(d - 1):
        nxt = np.zeros(len(cur) + 1)
        nxt[1:] = 2.0 * cur
        nxt[: len(prev)] -= prev
        prev, cur = cur, nxt
    return UniPoly(d, cur)


def legendre_p(k: int) -> UniPoly:
    """P_k in the monomial basis via Bonnet's recurrence."""
    if k < 0:
        raise ValueError("degree must be non-negative")
    if k == 0:
        return UniPoly(0, [1.0])
    prev = np.array([1.0])          # P_0
    cur = np.array([0.0, 1.0])      # P_1
    for j in range(1, k):
        # (j+1) P_{j+1} = (2j+1) x P_j - j P_{j-1}
        nxt = np.zeros(len(cur) + 1)
        nxt[1:] = (2 * j + 1) * cur
        nxt[: len(prev)] -= j * prev
        nxt /= j + 1
        prev, cur = cur, nxt
    return UniPoly(k, cur)


def legendre_p_derivative(k: int) -> UniPoly:
    """P_k' in the monomial basis (coefficient differentiation)."""
    pk = legendre_p(k)
    if k == 0:
        return UniPoly(0, [0.0])
    return UniPoly(k - 1, _poly.polyder(pk.coeffs))


# ---------------------------------------------------------------------------
# Arithmetic
# ---------------------------------------------------------------------------

def _common_degree(p: MultiPoly, q: MultiPoly) -> tuple[np.ndarray, np.ndarray, int]:
    if p.n != q.n:
        raise ValueError(f"dimension mismatch: {p.n} vs {q.n}")
    d = max(p.d, q.d)

    def pad(c, dd):
        if dd == d:
            return c
        out = np.zeros((d + 1,) * p.n)
        out[tuple(slice(0, dd + 1) for _ in range(p.n))] = c
        return out

    return pad(p.coeffs, p.d), pad(q.coeffs, q.d), d


def add(p: MultiPoly, q: MultiPoly) -> MultiPoly:
    a, b, d = _common_degree(p, q)
    return MultiPoly(p.n, d, a + b)


def sub(p: MultiPoly, q: MultiPoly) -> MultiPoly:
    a, b, d = _common_degree(p, q)
    return MultiPoly(p.n, d, a - b)


def scale(p: MultiPoly, c: float) -> MultiPoly:
    return MultiPoly(p.n, p.d, c * p.coeffs)


def coeff_abs_sum(p: MultiPoly) -> float:
    """Sum of |coefficients|; an upper bound on sup|p| since |T_k| <= 1."""
    return float(np.abs(p.coeffs).sum())


def partial_derivative(p: MultiPoly, axis: int) -> MultiPoly:
    """d p / d x_axis, zero-padded back to individual degree d."""
    if not 0 <= axis < p.n:
        raise ValueError(f"axis {axis} out of range for n={p.n}")
    dc = _cheb.chebder(p.coeffs, axis=axis)
    out = np.zeros((p.d + 1,) * p.n)
    sl = [slice(None)] * p.n
    sl[axis] = slice(0, dc.shape[axis])
    out[tuple(sl)] = dc
    return MultiPoly(p.n, p.d, out)


# ---------------------------------------------------------------------------
# Norms
# ---------------------------------------------------------------------------

def _nested_grid_size(d: int, resolution: int | None) -> int:
    # Sizes k with grid cos(pi*j/k) are nested when k doubles; quantizing the
    # requested resolution to this family makes sup_norm monotone in it.
    base = 4 * max(d, 1)
    want = max(base + 1, resolution or 0)
    k = base
    while k + 1 < want:
        k *= 2
    return k


def sup_norm(p: MultiPoly, resolution: int | None = None) -> float:
    """Max of |p| over a Chebyshev-point tensor grid plus one local refinement.

    Returns a certified lower bound on the true sup norm (every reported value
    is an actual evaluation); the grid family is nested so the result is
    non-decreasing in ``resolution``.
    """
    if p.d == 0:
        return abs(float(p.coeffs.reshape(-1)[0]))
    k = _nested_grid_size(p.d, resolution)
    ax = np.cos(np.pi * np.arange(k, -1, -1) / k)
    ax[0], ax[-1] = -1.0, 1.0
    vals = np.abs(eval_grid(p, [ax] * p.n))
    best = float(vals.max())
    idx = np.unravel_index(int(np.argmax(vals)), vals.shape)

    # One coordinate-wise golden-section pass around the grid argmax.
    x = np.array([ax[i] for i in idx])
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    for i in range(p.n):
        lo = ax[max(idx[i] - 1, 0)]
        hi = ax[min(idx[i] + 1, k)]
        a, b = lo, hi
        c1 = b - invphi * (b - a)
        c2 = a + invphi * (b - a)
        xa = x.copy()
        xa[i] = c1
        f1 = abs(evaluate(p, xa))
        xa[i] = c2
        f2 = abs(evaluate(p, xa))
        for _ in range(40):
            if b - a < 1e-13:
                break
            if f1 < f2:
                a, c1, f1 = c1, c2, f2
                c2 = a + invphi * (b - a)
                xa[i] = c2
                f2 = abs(evaluate(p, xa))
            else:
                b, c2, f2 = c2, c1, f1
                c1 = b - invphi * (b - a)
                xa[i] = c1
                f1 = abs(evaluate(p, xa))
        xi = c1 if f1 >= f2 else c2
        x[i] = xi
        best = max(best, abs(evaluate(p, x)))
    return best


def l1_norm(p: MultiPoly, resolution: int | None = None) -> float:
    """Integral of |p| over the cube by composite tensor Gauss-Legendre.

    ``resolution`` counts equal subdivisions per axis (default 32 for n <= 2,
    8 otherwise); each subcell gets d+2 nodes per axis, exact for |p| away
    from sign changes and converging as the subdivision refines.
    """
    res = resolution if resolution is not None else (32 if p.n <= 2 else 8)
    if res < 2:
        raise ValueError("resolution must be at least 2")
    nodes, wts = leggauss(p.d + 2)
    edges = np.linspace(-1.0, 1.0, res + 1)
    half = np.diff(edges) / 2.0                      # (res,)
    mid = (edges[:-1] + edges[1:]) / 2.0
    ax_pts = (mid[:, None] + half[:, None] * nodes[None, :]).reshape(-1)
    ax_w = (half[:, None] * wts[None, :]).reshape(-1)
    vals = np.abs(eval_grid(p, [ax_pts] * p.n))
    for _ in range(p.n):
        vals = np.tensordot(vals, ax_w, axes=([-1], [0]))
    return float(vals)


# ---------------------------------------------------------------------------
# Conversions and serialization
# ---------------------------------------------------------------------------

def to_monomial_coeffs(p: MultiPoly) -> np.ndarray:
    """Dense monomial-basis coefficient tensor (for oracle comparisons)."""
    c = p.coeffs
    for axis in range(p.n):
        c = np.apply_along_axis(lambda v: _cheb.cheb2poly(v) if len(v) > 1 else v, axis, c)
    return c


def from_monomial_coeffs(n: int, d: int, mono: np.ndarray) -> MultiPoly:
    """Build a MultiPoly from a dense monomial coefficient tensor."""
    c = np.asarray(mono, dtype=float)
    if c.shape != (d + 1,) * n:
        raise ValueError(f"coefficient tensor must have shape {(d + 1,) * n}")
    for axis in range(n):
        c = np.apply_along_axis(lambda v: _cheb.poly2cheb(v) if len(v) > 1 else v, axis, c)
    return MultiPoly(n, d, c)


def product_poly(factors: list[UniPoly]) -> MultiPoly:
    """Tensor product f_1(x1) * ... * f_n(xn) as a MultiPoly."""
    n = len(factors)
    d = max(f.degree for f in factors)
    axes = []
    for f in factors:
        c = f.coeffs if f.basis == "chebyshev" else _cheb.poly2cheb(f.coeffs)
        c = np.pad(c, (0, d + 1 - len(c)))
        axes.append(c)
    coeffs = axes[0]
    for c in axes[1:]:
        coeffs = np.multiply.outer(coeffs, c)
    return MultiPoly(n, d, coeffs)


def random_poly(n: int, d: int, rng: np.random.Generator, spread: float = 1.0) -> MultiPoly:
    """Random polynomial with i.i.d. uniform Chebyshev coefficients."""
    return MultiPoly(n, d, rng.uniform(-spread, spread, size=(d + 1,) * n))


def poly_to_json(p: MultiPoly) -> str:
    return json.dumps(
        {
            "n": p.n,
            "d": p.d,
            "basis": "chebyshev",
            "coeffs": p.coeffs.reshape(-1).tolist(),  # row-major, last axis fastest
        }
    )


def poly_from_json(text: str) -> MultiPoly:
    obj = json.loads(text)
    if obj.get("basis") != "chebyshev":
        raise ValueError(f"unsupported basis {obj.get('basis')!r}")
    n, d = int(obj["n"]), int(obj["d"])
    coeffs = np.asarray(obj["coeffs"], dtype=float).reshape((d + 1,) * n)
    return MultiPoly(n, d, coeffs)
