"""Self-contained linear programming plus the two polynomial-fitting programs.

The fits produce LPs with many constraint rows over few variables (minimax
and weighted least-absolute-deviation fits on fine grids).  ``solve`` rewrites
any input as  min c'x  s.t.  Gx >= h  with x free, then runs a two-phase
revised simplex on the dual  max h'y : G'y = c, y >= 0, whose basis has one
entry per primal *variable*; pricing over the many columns is a dense
mat-vec.  The optimal primal point is recovered from the simplex multipliers.

Tolerances: primal feasibility 1e-8 (after row equilibration), optimality /
complementary slackness 1e-7.  Pivoting is deterministic; a Bland-rule
fallback kicks in under degeneracy so fits are reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from numpy.polynomial import chebyshev as _cheb

from .polynomial import MultiPoly

FEAS_TOL = 1e-8
OPT_TOL = 1e-7
PIVOT_TOL = 1e-9


class LpError(RuntimeError):
    """Numerical breakdown or an unusable problem; never raised silently."""


@dataclass
class LinearProgram:
    """min objective'x subject to rows ``lhs x (<=|=) rhs`` and box bounds.

    bounds is None (all variables free) or a list of (lo, hi) pairs where
    None means unbounded on that side.
    """

    objective: np.ndarray
    lhs: np.ndarray
    relations: list[str]
    rhs: np.ndarray
    bounds: Optional[list[tuple[Optional[float], Optional[float]]]] = None

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.objective, dtype=float))
        a = np.asarray(self.lhs, dtype=float)
        b = np.atleast_1d(np.asarray(self.rhs, dtype=float))
        if a.ndim != 2 or a.shape[1] != c.shape[0]:
            raise ValueError(f"lhs shape {a.shape} incompatible with {c.shape[0]} variables")
        if b.shape[0] != a.shape[0] or len(self.relations) != a.shape[0]:
            raise ValueError("rhs/relations must align with lhs rows")
        for rel in self.relations:
            if rel not in ("<=", "="):
                raise ValueError(f"relation must be '<=' or '=', got {rel!r}")
        if not (np.all(np.isfinite(c)) and np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise ValueError("LP entries must be finite")
        if self.bounds is not None and len(self.bounds) != c.shape[0]:
            raise ValueError("bounds must have one (lo, hi) pair per variable")
        self.objective, self.lhs, self.rhs = c, a, b


@dataclass
class LpSolution:
    status: str                      # optimal | infeasible | unbounded
    x: Optional[np.ndarray]
    objective: Optional[float]
    iterations: int
    cs_residual: float = 0.0         # |y . (Gx - h)| at the returned point


# ---------------------------------------------------------------------------
# Simplex core on:  min f'y  s.t.  W y = b,  y >= 0
# ---------------------------------------------------------------------------

def _simplex(W, b, f, basis, bland=False, max_iters=None):
    """Returns (status, basis, y_basic, multipliers, iterations)."""
    k, r = W.shape
    if max_iters is None:
        max_iters = 2000 + 40 * k
    basis = list(basis)
    degenerate_streak = 0
    iters = 0
    while True:
        iters += 1
        if iters > max_iters:
            return "maxiter", basis, None, None, iters
        B = W[:, basis]
        try:
            yB = np.linalg.solve(B, b)
            pi = np.linalg.solve(B.T, f[basis])
        except np.linalg.LinAlgError:
            return "singular", basis, None, None, iters

        reduced = f - pi @ W
        reduced[basis] = 0.0
        if bland:
            neg = np.flatnonzero(reduced < -OPT_TOL)
            if neg.size == 0:
                return "optimal", basis, yB, pi, iters
            enter = int(neg[0])
        else:
            enter = int(np.argmin(reduced))
            if reduced[enter] >= -OPT_TOL:
                return "optimal", basis, yB, pi, iters

        u = np.linalg.solve(B, W[:, enter])
        pos = u > PIVOT_TOL
        if not pos.any():
            return "unbounded", basis, yB, pi, iters
        ratios = np.full(k, np.inf)
        ratios[pos] = np.maximum(yB[pos], 0.0) / u[pos]
        theta = ratios.min()
        ties = np.flatnonzero(ratios <= theta + 1e-12 * (1.0 + theta))
        leave = min(ties, key=lambda i: basis[i])  # Bland tie-break
        if theta <= 1e-12:
            degenerate_streak += 1
            if degenerate_streak >= 100:
                bland = True
        else:
            degenerate_streak = 0
        basis[leave] = enter


def _two_phase(W, b, f, bland=False):
    """Two-phase simplex; may drop redundant rows of (W, b).

    Returns (status, y_full, pi_full, iterations) where pi_full has one entry
    per *original* row (zeros on dropped redundant rows).  status is one of
    optimal / infeasible / unbounded / maxiter / singular.
    """
    k, r = W.shape
    kept = np.arange(k)
    sgn = np.where(b < 0, -1.0, 1.0)
    Ws = W * sgn[:, None]
    bs = b * sgn

    aug = np.hstack([Ws, np.eye(k)])
    f1 = np.concatenate([np.zeros(r), np.ones(k)])
    basis = list(range(r, r + k))
    status, basis, yB, _, it1 = _simplex(aug, bs, f1, basis, bland=bland)
    if status != "optimal":
        return ("maxiter" if status == "maxiter" else "singular"), None, None, it1
    if float(np.sum(yB[[i for i, v in enumerate(basis) if v >= r]], initial=0.0)) > 1e-7:
        return "infeasible", None, None, it1

    # Pivot remaining artificials out; rows that cannot pivot are redundant.
    while True:
        art_pos = [i for i, v in enumerate(basis) if v >= r]
        if not art_pos:
            break
        pos = art_pos[0]
        cur_W = np.hstack([Ws, np.eye(Ws.shape[0])])
        B = cur_W[:, basis]
        e = np.zeros(Ws.shape[0])
        e[pos] = 1.0
        w = np.linalg.solve(B.T, e)
        row = w @ Ws
        in_basis = set(basis)
        cand = [q for q in range(r) if q not in in_basis and abs(row[q]) > PIVOT_TOL]
        if cand:
            basis[pos] = cand[0]
        else:
            drop = basis[pos] - r  # row index in the current system
            keep_mask = np.ones(Ws.shape[0], dtype=bool)
            keep_mask[drop] = False
            Ws, bs, sgn, kept = Ws[keep_mask], bs[keep_mask], sgn[keep_mask], kept[keep_mask]
            del basis[pos]
            # re-index artificial columns to the shrunken row set
            basis = [v if v < r else r + (v - r) - (1 if (v - r) > drop else 0) for v in basis]

    status, basis, yB, pi, it2 = _simplex(Ws, bs, f, basis, bland=bland)
    if status != "optimal":
        return (status, None, None, it1 + it2)
    y = np.zeros(r)
    for i, v in enumerate(basis):
        y[v] = max(yB[i], 0.0)
    pi_full = np.zeros(k)
    pi_full[kept] = sgn * pi
    return "optimal", y, pi_full, it1 + it2


# ---------------------------------------------------------------------------
# Row-form conversion and the public solver
# ---------------------------------------------------------------------------

def _to_geq_form(lp: LinearProgram):
    """Rows of  Gx >= h  (equalities doubled, bounds appended), equilibrated."""
    blocks_g, blocks_h = [], []
    a, b = lp.lhs, lp.rhs
    le = np.array([rel == "<=" for rel in lp.relations])
    if le.any():
        blocks_g.append(-a[le])
        blocks_h.append(-b[le])
    if (~le).any():
        blocks_g.extend([a[~le], -a[~le]])
        blocks_h.extend([b[~le], -b[~le]])
    k = lp.objective.shape[0]
    if lp.bounds is not None:
        for i, (lo, hi) in enumerate(lp.bounds):
            if lo is not None:
                e = np.zeros(k)
                e[i] = 1.0
                blocks_g.append(e[None, :])
                blocks_h.append(np.array([lo]))
            if hi is not None:
                e = np.zeros(k)
                e[i] = -1.0
                blocks_g.append(e[None, :])
                blocks_h.append(np.array([-hi]))
    if blocks_g:
        G = np.vstack(blocks_g)
        h = np.concatenate(blocks_h)
    else:
        G = np.zeros((0, k))
        h = np.zeros(0)

    scalemax = np.abs(G).max(axis=1) if G.shape[0] else np.zeros(0)
    zero_rows = scalemax <= 0.0
    if zero_rows.any():
        if np.any(h[zero_rows] > FEAS_TOL):
            return None, None, None, True  # 0 >= positive: infeasible outright
        G, h, scalemax = G[~zero_rows], h[~zero_rows], scalemax[~zero_rows]
    if G.shape[0]:
        G = G / scalemax[:, None]
        h = h / scalemax
    return G, h, k, False


def _solve_geq(c, G, h, bland=False):
    r = G.shape[0]
    k = c.shape[0]
    if r == 0:
        if np.abs(c).max(initial=0.0) <= OPT_TOL:
            return LpSolution("optimal", np.zeros(k), 0.0, 0)
        return LpSolution("unbounded", None, None, 0)

    status, y, pi, iters = _two_phase(G.T.copy(), c.copy(), -h, bland=bland)
    if status in ("maxiter", "singular"):
        if not bland:
            return _solve_geq(c, G, h, bland=True)
        raise LpError(f"simplex breakdown ({status}) after {iters} iterations")
    if status == "unbounded":
        # dual unbounded: the primal is infeasible
        return LpSolution("infeasible", None, None, iters)
    if status == "infeasible":
        return _classify_dual_infeasible(c, G, h, iters)

    x = -pi
    slack = G @ x - h
    obj = float(c @ x)
    gap = abs(obj - float(-(-h) @ y))
    cs = float(abs(y @ slack))
    if slack.min(initial=0.0) < -1e-6 or gap > 1e-5 * (1.0 + abs(obj)):
        if not bland:
            return _solve_geq(c, G, h, bland=True)
        raise LpError(
            f"solution failed verification: min slack {slack.min():.2e}, gap {gap:.2e}"
        )
    return LpSolution("optimal", x, obj, iters, cs_residual=cs)


def _classify_dual_infeasible(c, G, h, iters):
    """Dual infeasible means the primal is unbounded or infeasible; decide by
    a phase-1-style feasibility program in (x, violation) variables."""
    r, k = G.shape
    if r > 5000:
        raise LpError("cannot classify infeasible vs unbounded at this size")
    cf = np.concatenate([np.zeros(k), np.ones(r)])
    Gf = np.block([[G, np.eye(r)], [np.zeros((r, k)), np.eye(r)]])
    hf = np.concatenate([h, np.zeros(r)])
    feas = _solve_geq(cf, Gf, hf)
    if feas.status != "optimal":
        raise LpError("feasibility subproblem did not solve")
    if feas.objective <= 1e-7 * (1.0 + np.abs(h).max(initial=0.0)):
        return LpSolution("unbounded", None, None, iters + feas.iterations)
    return LpSolution("infeasible", None, None, iters + feas.iterations)


def solve(lp: LinearProgram) -> LpSolution:
    """Solve the LP; status is 'optimal', 'infeasible', or 'unbounded'.

    Raises LpError on numerical breakdown (never silently).
    """
    G, h, k, trivially_infeasible = _to_geq_form(lp)
    if trivially_infeasible:
        return LpSolution("infeasible", None, None, 0)
    return _solve_geq(lp.objective, G, h)


# ---------------------------------------------------------------------------
# Fitting programs
# ---------------------------------------------------------------------------

def cheb_value_matrix(points: np.ndarray, d: int, n: int) -> np.ndarray:
    """(M, (d+1)^n) matrix of tensor Chebyshev basis values at the points.

    Column order matches MultiPoly.coeffs.reshape(-1): last axis fastest.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != n:
        raise ValueError(f"points must have shape (M, {n})")
    V = _cheb.chebvander(pts[:, 0], d)
    for i in range(1, n):
        Vi = _cheb.chebvander(pts[:, i], d)
        V = (V[:, :, None] * Vi[:, None, :]).reshape(pts.shape[0], -1)
    return V


def linf_fit(points, labels, d: int, value_matrix=None, full_output=False):
    """Fit the individual degree-d polynomial minimizing the max residual.

    Solves  min t  s.t.  -t <= p(x_i) - y_i <= t  as an LP over the tensor
    Chebyshev coefficients.
    """
    pts = np.asarray(points, dtype=float)
    y = np.asarray(labels, dtype=float)
    if pts.ndim != 2 or pts.shape[0] == 0:
        raise ValueError("need at least one point")
    if pts.min() < -1.0 or pts.max() > 1.0:
        raise ValueError("points must lie in [-1,1]^n")
    n = pts.shape[1]
    V = value_matrix if value_matrix is not None else cheb_value_matrix(pts, d, n)
    M, K = V.shape
    ones = np.ones((M, 1))
    lhs = np.vstack([np.hstack([V, -ones]), np.hstack([-V, -ones])])
    rhs = np.concatenate([y, -y])
    c = np.zeros(K + 1)
    c[K] = 1.0
    lp = LinearProgram(c, lhs, ["<="] * (2 * M), rhs)
    sol = solve(lp)
    if sol.status != "optimal":
        raise LpError(f"minimax fit LP ended with status {sol.status}")
    poly = MultiPoly(n, d, sol.x[:K].reshape((d + 1,) * n))
    if full_output:
        return poly, sol
    return poly


def weighted_l1_fit(cells: dict, d: int, n: int, full_output=False):
    """Cell-weighted least-absolute-deviations fit.

    ``cells`` maps a cell index to (points, labels, weight) with weight equal
    to cell volume / sample count; the fit minimizes
    sum_j weight_j * sum_{i in cell j} |p(x_i) - y_i|.
    """
    keys = sorted(cells.keys())
    if not keys:
        raise ValueError("no cells provided")
    pt_blocks, y_blocks, w_blocks = [], [], []
    for key in keys:
        pts_j, y_j, w_j = cells[key]
        pts_j = np.asarray(pts_j, dtype=float).reshape(-1, n)
        y_j = np.asarray(y_j, dtype=float).reshape(-1)
        if len(y_j) == 0:
            raise ValueError(f"cell {key} is empty")
        pt_blocks.append(pts_j)
        y_blocks.append(y_j)
        w_blocks.append(np.full(len(y_j), float(w_j)))
    pts = np.vstack(pt_blocks)
    y = np.concatenate(y_blocks)
    w = np.concatenate(w_blocks)

    V = cheb_value_matrix(pts, d, n)
    M, K = V.shape
    eye = np.eye(M)
    lhs = np.vstack([np.hstack([V, -eye]), np.hstack([-V, -eye])])
    rhs = np.concatenate([y, -y])
    c = np.concatenate([np.zeros(K), w])
    lp = LinearProgram(c, lhs, ["<="] * (2 * M), rhs)
    sol = solve(lp)
    if sol.status != "optimal":
        raise LpError(f"weighted l1 fit LP ended with status {sol.status}")
    poly = MultiPoly(n, d, sol.x[:K].reshape((d + 1,) * n))
    if full_output:
        return poly, sol
    return poly


def l1_objective(cells: dict, p: MultiPoly) -> float:
    """The weighted l1 objective at p (for minimizer certificates)."""
    total = 0.0
    for key, (pts_j, y_j, w_j) in cells.items():
        pts_j = np.asarray(pts_j, dtype=float).reshape(-1, p.n)
        V = cheb_value_matrix(pts_j, p.d, p.n)
        total += float(w_j) * float(np.abs(V @ p.coeffs.reshape(-1) - np.asarray(y_j)).sum())
    return total
