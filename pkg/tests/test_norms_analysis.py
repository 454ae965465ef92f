import math

import numpy as np
import pytest

from robustpoly.norms_analysis import (
    check_sandwich,
    check_univariate_window,
    large_value_region,
    sandwich_sweep,
    tightness_family,
    write_sandwich_csv,
)
from robustpoly.polynomial import (
    MultiPoly,
    UniPoly,
    chebyshev_t,
    legendre_p,
    product_poly,
    random_poly,
)


def test_sandwich_constant_n2():
    rep = check_sandwich(MultiPoly.constant(2, 1, 1.0))
    assert rep.ratio == pytest.approx(0.25, abs=1e-9)  # sup 1, integral 4
    assert rep.passed


def test_sandwich_power_product():
    h1 = UniPoly(3, [0.0, 0.0, 0.0, 1.0])
    rep = check_sandwich(product_poly([h1, h1]))
    assert rep.ratio == pytest.approx(4.0, rel=1e-5)  # ((d+1)/2)^2
    assert rep.passed


def test_sandwich_random_sweep():
    reports = sandwich_sweep(40, max_d=5, max_n=3, seed=99)
    assert all(r.passed for r in reports)


def test_sandwich_csv(tmp_path):
    reports = sandwich_sweep(5, max_d=3, max_n=2, seed=1)
    path = tmp_path / "sandwich.csv"
    write_sandwich_csv(reports, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "d,n,ratio,bound"
    assert len(lines) == 6


def test_tightness_family_values():
    for d, n, expect in ((3, 1, 3.0), (5, 1, 6.0), (3, 2, 9.0)):
        p, exact = tightness_family(d, n)
        assert exact == pytest.approx(expect)
        rep = check_sandwich(p)
        assert rep.ratio == pytest.approx(expect, rel=1e-5)
        assert rep.passed  # approaches but respects the (2d)^(2n) bound


def test_tightness_family_rejects_even_degree():
    with pytest.raises(ValueError):
        tightness_family(4, 1)


def test_large_value_region_constant():
    p = MultiPoly.constant(2, 1, 7.0)
    est, se = large_value_region(p, [0.0, 0.0], samples=20_000, seed=2)
    assert est == pytest.approx(4.0, abs=1e-9)  # whole cube, Lebesgue measure


def test_large_value_region_chebyshev_extremum():
    d = 4
    p = MultiPoly(1, d, np.eye(d + 1)[d])
    est, se = large_value_region(p, [1.0], samples=100_000, seed=3)
    assert est >= 1.0 / (2 * d * d) ** 1 - 4 * se


def test_large_value_region_threshold_monotone(rng):
    p = random_poly(2, 3, rng)
    y = [0.3, -0.2]
    loose, _ = large_value_region(p, y, samples=30_000, seed=4)
    tight, _ = large_value_region(p, y, samples=30_000, seed=4, threshold_scale=1.0)
    assert loose >= tight  # super-level sets are nested


def test_large_value_region_guarantee_random(rng):
    for _ in range(5):
        d = int(rng.integers(1, 5))
        n = int(rng.integers(1, 3))
        p = random_poly(n, d, rng)
        y = rng.uniform(-1, 1, n)
        est, se = large_value_region(p, y, samples=50_000, seed=int(rng.integers(1e6)))
        assert est >= (2.0 * d * d) ** -n - 4 * se


def test_univariate_window_chebyshev():
    for d in (1, 2, 6):
        out = check_univariate_window(chebyshev_t(d))
        assert out["holds"]


def test_univariate_window_constant_and_linear():
    assert check_univariate_window(UniPoly(0, [4.0]))["holds"]
    assert check_univariate_window(UniPoly(1, [0.0, 1.0]))["holds"]


def test_univariate_window_random(rng):
    for _ in range(10):
        d = int(rng.integers(1, 9))
        g = UniPoly(d, rng.normal(size=d + 1))
        assert check_univariate_window(g)["holds"]


def test_legendre_orthogonal_to_lower_degree(rng):
    # integral of P_n * f vanishes for deg f < n
    nodes, wts = np.polynomial.legendre.leggauss(24)
    for n in range(2, 9):
        pn = legendre_p(n)
        f = UniPoly(n - 1, rng.normal(size=n))
        val = float(np.sum(wts * pn(nodes) * f(nodes)))
        assert abs(val) < 1e-9
