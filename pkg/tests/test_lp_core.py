import numpy as np
import pytest
from scipy.optimize import linprog

from robustpoly.lp_core import (
    LinearProgram,
    cheb_value_matrix,
    l1_objective,
    linf_fit,
    solve,
    weighted_l1_fit,
)
from robustpoly.polynomial import MultiPoly, evaluate_many, random_poly


def test_min_x_geq_3():
    lp = LinearProgram(np.array([1.0]), np.array([[-1.0]]), ["<="], np.array([-3.0]))
    sol = solve(lp)
    assert sol.status == "optimal"
    assert sol.x[0] == pytest.approx(3.0, abs=1e-9)
    assert sol.objective == pytest.approx(3.0, abs=1e-9)


def test_infeasible_pair():
    lp = LinearProgram(
        np.array([1.0]), np.array([[1.0], [-1.0]]), ["<=", "<="], np.array([0.0, -1.0])
    )
    assert solve(lp).status == "infeasible"


def test_unbounded():
    lp = LinearProgram(np.array([-1.0]), np.array([[-1.0]]), ["<="], np.array([0.0]))
    assert solve(lp).status == "unbounded"


def test_equality_and_bounds():
    # min x + y  s.t.  x + y = 1, 0 <= x,y <= 1
    lp = LinearProgram(
        np.array([1.0, 1.0]),
        np.array([[1.0, 1.0]]),
        ["="],
        np.array([1.0]),
        bounds=[(0.0, 1.0), (0.0, 1.0)],
    )
    sol = solve(lp)
    assert sol.status == "optimal"
    assert sol.objective == pytest.approx(1.0, abs=1e-9)


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        LinearProgram(np.array([1.0, 2.0]), np.array([[1.0]]), ["<="], np.array([0.0]))


def _random_lp(rng):
    k = int(rng.integers(3, 51))
    r = int(rng.integers(2, 21))
    A = rng.normal(size=(r, k))
    c = rng.normal(size=k)
    x0 = rng.normal(size=k)
    b = A @ x0 + rng.uniform(0.1, 2.0, size=r)
    rels = ["<="] * r
    for i in range(int(rng.integers(0, min(3, r)))):
        rels[i] = "="
        b[i] = float(A[i] @ x0)
    return LinearProgram(c, A, rels, b, bounds=[(-10.0, 10.0)] * k)


def _scipy_reference(lp):
    le = [i for i, rel in enumerate(lp.relations) if rel == "<="]
    eq = [i for i, rel in enumerate(lp.relations) if rel == "="]
    return linprog(
        lp.objective,
        A_ub=lp.lhs[le] if le else None,
        b_ub=lp.rhs[le] if le else None,
        A_eq=lp.lhs[eq] if eq else None,
        b_eq=lp.rhs[eq] if eq else None,
        bounds=lp.bounds,
        method="highs",
    )


def test_random_lps_match_oracle(rng):
    for _ in range(25):
        lp = _random_lp(rng)
        sol = solve(lp)
        ref = _scipy_reference(lp)
        assert (sol.status == "optimal") == ref.success
        if ref.success:
            assert sol.objective == pytest.approx(ref.fun, abs=1e-6)
            assert sol.cs_residual <= 1e-7


def test_solution_feasible_within_tolerance(rng):
    for _ in range(10):
        lp = _random_lp(rng)
        sol = solve(lp)
        if sol.status != "optimal":
            continue
        x = sol.x
        for a, rel, b in zip(lp.lhs, lp.relations, lp.rhs):
            scale = max(1.0, float(np.abs(a).max()))
            if rel == "<=":
                assert float(a @ x) <= b + 1e-8 * scale
            else:
                assert float(a @ x) == pytest.approx(b, abs=1e-7 * scale)


def test_determinism(rng):
    lp = _random_lp(rng)
    a = solve(lp)
    b = solve(lp)
    assert a.status == b.status and a.iterations == b.iterations
    if a.status == "optimal":
        assert np.array_equal(a.x, b.x)


# ---------------------------------------------------------------------------
# Minimax fit
# ---------------------------------------------------------------------------

def test_linf_interpolation_at_nodes(rng):
    d = 3
    p = random_poly(1, d, rng)
    nodes = np.cos(np.pi * (np.arange(d + 1) + 0.5) / (d + 1)).reshape(-1, 1)
    labels = evaluate_many(p, nodes)
    fit, sol = linf_fit(nodes, labels, d, full_output=True)
    assert sol.objective <= 1e-8
    assert np.allclose(fit.coeffs, p.coeffs, atol=1e-7)


def test_linf_three_point_closed_form():
    pts = np.array([[-1.0], [0.0], [1.0]])
    fit, sol = linf_fit(pts, np.array([0.0, 1.0, 0.0]), 1, full_output=True)
    assert sol.objective == pytest.approx(0.5, abs=1e-9)
    assert fit.coeffs[0] == pytest.approx(0.5, abs=1e-9)  # best line y = 1/2
    assert fit.coeffs[1] == pytest.approx(0.0, abs=1e-9)


def test_linf_shift_equivariance(rng):
    pts = np.sort(rng.uniform(-1, 1, 12)).reshape(-1, 1)
    y = rng.normal(size=12)
    _, sol = linf_fit(pts, y, 2, full_output=True)
    _, sol_shift = linf_fit(pts, y + 5.0, 2, full_output=True)
    assert sol_shift.objective == pytest.approx(sol.objective, abs=1e-8)


def test_linf_label_scaling(rng):
    pts = rng.uniform(-1, 1, (30, 2))
    y = rng.normal(size=30)
    _, sol = linf_fit(pts, y, 1, full_output=True)
    _, sol3 = linf_fit(pts, 3.0 * y, 1, full_output=True)
    assert sol3.objective == pytest.approx(3.0 * sol.objective, rel=1e-7, abs=1e-9)


def test_linf_reported_optimum_is_max_residual(rng):
    pts = rng.uniform(-1, 1, (40, 2))
    y = rng.normal(size=40)
    fit, sol = linf_fit(pts, y, 2, full_output=True)
    resid = np.abs(evaluate_many(fit, pts) - y).max()
    assert resid == pytest.approx(sol.objective, abs=1e-7)


def test_linf_minimizer_certificate(rng):
    pts = rng.uniform(-1, 1, (25, 1))
    y = rng.normal(size=25)
    fit, sol = linf_fit(pts, y, 2, full_output=True)
    V = cheb_value_matrix(pts, 2, 1)
    c0 = fit.coeffs.reshape(-1)
    for _ in range(100):
        c_pert = c0 + rng.normal(scale=0.05, size=c0.shape)
        assert np.abs(V @ c_pert - y).max() >= sol.objective - 1e-9


def test_linf_rejects_outside_cube():
    with pytest.raises(ValueError):
        linf_fit(np.array([[1.2]]), np.array([0.0]), 1)


# ---------------------------------------------------------------------------
# Weighted l1 fit
# ---------------------------------------------------------------------------

def test_l1_single_exact_sample():
    cells = {(1,): (np.array([[0.3]]), np.array([2.5]), 2.0)}
    fit, sol = weighted_l1_fit(cells, 0, 1, full_output=True)
    assert fit.coeffs[0] == pytest.approx(2.5, abs=1e-9)
    assert sol.objective == pytest.approx(0.0, abs=1e-9)


def test_l1_outlier_rejected_like_weighted_median():
    pts = np.linspace(-0.9, 0.9, 10).reshape(-1, 1)
    y = np.full(10, 1.5)
    y[4] = 1000.0
    cells = {(1,): (pts, y, 0.2)}
    fit = weighted_l1_fit(cells, 0, 1)
    # 1-d weighted-median oracle: constant minimizing sum|c - y_i| is any
    # median of the labels, here 1.5
    assert fit.coeffs[0] == pytest.approx(1.5, abs=1e-8)


def test_l1_empty_cell_rejected():
    cells = {(1,): (np.zeros((0, 1)), np.zeros(0), 1.0)}
    with pytest.raises(ValueError, match="empty"):
        weighted_l1_fit(cells, 1, 1)


def test_l1_optimum_beats_truth(rng):
    p = random_poly(1, 2, rng)
    cells = {}
    for j in range(1, 5):
        pts = rng.uniform(-1, 1, (6, 1))
        y = evaluate_many(p, pts) + rng.uniform(-0.05, 0.05, 6)
        y[0] = 50.0  # one outlier per cell
        cells[(j,)] = (pts, y, 0.5 / 6)
    fit = weighted_l1_fit(cells, 2, 1)
    assert l1_objective(cells, fit) <= l1_objective(cells, p) + 1e-9
