import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from robustpoly.partition import (
    alpha_goodness,
    all_cell_centers,
    build_partition,
    cell_bounds,
    cell_of,
    cell_probability,
    cells_of,
    goodness_threshold,
    interior_region,
    middle_subcell,
    min_cell_width,
    refine3,
)
from robustpoly.regression import chebyshev_sample_size
from robustpoly.sampling import ConstBlowup, NoiseModel, SampleSet, draw_points, label_points
from robustpoly.polynomial import MultiPoly


def test_build_m2_edges():
    part = build_partition(2, 1)
    assert np.allclose(part.edges, [-1.0, 0.0, 1.0])
    assert part.edges[1] == 0.0  # snapped exactly


def test_build_m4_edges():
    part = build_partition(4, 1)
    r = math.sqrt(2) / 2
    assert np.allclose(part.edges, [-1.0, -r, 0.0, r, 1.0], atol=1e-12)
    assert part.edges[0] == -1.0 and part.edges[-1] == 1.0


def test_build_single_cell():
    part = build_partition(1, 3)
    assert np.allclose(part.edges, [-1.0, 1.0])
    assert cell_of(part, [0.3, -0.9, 0.0]) == (1, 1, 1)


def test_build_rejects_degenerate():
    with pytest.raises(ValueError):
        build_partition(0, 1)
    with pytest.raises(ValueError):
        build_partition(2, 0)


def test_cell_of_examples():
    part = build_partition(4, 1)
    assert cell_of(part, [0.5]) == (2,)     # cos(pi/4) > 0.5 >= cos(pi/2)
    assert cell_of(part, [1.0]) == (1,)     # top cell owns its upper endpoint
    part32 = build_partition(3, 2)
    assert cell_of(part32, [-1.0, -1.0]) == (3, 3)


def test_boundary_owned_by_upper_cell():
    part = build_partition(4, 1)
    for k in range(1, 4):
        x = part.edges[k]
        j = cell_of(part, [x])[0]
        lo, hi = cell_bounds(part, (j,))
        assert lo[0] == x  # breakpoint is the lower face of its owner


def test_cell_width_lower_bound():
    # the (pi/2m)^2 bound needs m >= 2 (at m=1 the single cell has width 2
    # while the bound evaluates to ~2.47)
    for m in (2, 5, 20, 168):
        part = build_partition(m, 1)
        assert min_cell_width(part) >= (math.pi / (2 * m)) ** 2 - 1e-15


def test_cell_of_out_of_cube():
    part = build_partition(3, 2)
    with pytest.raises(ValueError):
        cell_of(part, [1.5, 0.0])


@given(st.integers(1, 12), st.lists(st.floats(-1.0, 1.0), min_size=2, max_size=2))
@settings(max_examples=200, deadline=None)
def test_cell_contains_its_point(m, xs):
    part = build_partition(m, 2)
    j = cell_of(part, xs)
    lo, hi = cell_bounds(part, j)
    assert np.all(lo <= np.asarray(xs) + 1e-15) and np.all(np.asarray(xs) <= hi + 1e-15)


def test_cell_probability_chebyshev_uniform():
    part = build_partition(5, 2)
    assert cell_probability(part, (3, 4), "chebyshev") == pytest.approx(0.04)
    part1 = build_partition(1, 2)
    assert cell_probability(part1, (1, 1), "uniform") == pytest.approx(1.0)
    part2 = build_partition(2, 1)
    assert cell_probability(part2, (1,), "uniform") == pytest.approx(0.5)


def test_probabilities_sum_to_one():
    part = build_partition(6, 2)
    idx = [(i, j) for i in range(1, 7) for j in range(1, 7)]
    u = math.fsum(cell_probability(part, j, "uniform") for j in idx)
    c = math.fsum(cell_probability(part, j, "chebyshev") for j in idx)
    assert u == pytest.approx(1.0, abs=1e-12)
    assert c == pytest.approx(1.0, abs=1e-14)  # each mass is exactly m^-n


def test_chebyshev_sampler_matches_cell_mass():
    part = build_partition(8, 1)
    pts = draw_points("chebyshev", 100_000, 1, seed=5)
    ids = cells_of(part, pts)
    for j in range(1, 9):
        freq = float(np.mean(ids[:, 0] == j))
        se = math.sqrt((1 / 8) * (7 / 8) / 100_000)
        assert abs(freq - 1 / 8) <= 4 * se


def test_interior_region():
    part = build_partition(2, 1)
    lo, hi = interior_region(part, (2,), 0.0)
    assert np.allclose([lo[0], hi[0]], [-1.0, 0.0])
    lo, hi = interior_region(part, (2,), 0.25)
    assert np.allclose([lo[0], hi[0]], [-0.75, -0.25])


def test_interior_region_band_formula():
    m = 4
    part = build_partition(m, 1)
    band = (math.pi / (4 * m)) ** 2
    for j in range(1, m + 1):
        lo, hi = cell_bounds(part, (j,))
        ilo, ihi = interior_region(part, (j,), band)
        assert (ihi - ilo)[0] == pytest.approx((hi - lo)[0] - 2 * band)


def test_interior_region_band_too_large():
    part = build_partition(4, 1)
    with pytest.raises(ValueError, match="cell"):
        interior_region(part, (1,), 0.5)  # edge cell is narrow


def test_refine3_geometry():
    part = build_partition(2, 1)
    fine = refine3(part)
    assert fine.m == 6
    assert middle_subcell((1,)) == (2,)
    # every refined cell box sits inside its parent box
    for k in range(1, 7):
        lo, hi = cell_bounds(fine, (k,))
        parent = cell_of(part, [(lo[0] + hi[0]) / 2])
        plo, phi = cell_bounds(part, parent)
        assert plo[0] <= lo[0] + 1e-15 and hi[0] <= phi[0] + 1e-15


def test_refine3_middle_mass():
    part = build_partition(3, 2)
    fine = refine3(part)
    j = (2, 3)
    mid = middle_subcell(j)
    assert cell_probability(fine, mid, "chebyshev") == pytest.approx(
        cell_probability(part, j, "chebyshev") / 9.0
    )


def _toy_samples(points):
    pts = np.asarray(points, dtype=float)
    return SampleSet(pts, np.zeros(len(pts)))


def test_alpha_goodness_all_inliers():
    part = build_partition(2, 1)
    s = _toy_samples([[-0.5], [0.5]])
    rep = alpha_goodness(part, s, np.array([True, True]), alpha=0.01)
    assert rep.is_good and rep.worst_fraction == 0.0


def test_alpha_goodness_full_outlier_cell():
    part = build_partition(2, 1)
    s = _toy_samples([[-0.5], [0.5]])
    rep = alpha_goodness(part, s, np.array([False, True]), alpha=1.0)
    assert not rep.is_good  # a fully-outlier cell fails any alpha <= 1


def test_alpha_goodness_strict_mode_empty_cells():
    part = build_partition(4, 1)
    s = _toy_samples([[0.9]])
    rep = alpha_goodness(part, s, np.array([True]), alpha=0.5, strict=True)
    assert not rep.is_good and rep.n_empty == 3


def test_alpha_goodness_monte_carlo():
    # At the prescribed sample size, goodness at threshold (2*rho+1)/4 holds
    # in at least 90% of trials.  The concentration argument behind the size
    # formula carries an absolute constant near 32, passed explicitly here.
    rho, m, n, delta = 0.2, 4, 2, 0.1
    M = chebyshev_sample_size(m, n, rho, delta, constant=32.0)
    part = build_partition(m, n)
    alpha = goodness_threshold(rho)
    assert alpha == pytest.approx(0.35)
    p = MultiPoly.zero(n, 1)
    good = 0
    for t in range(50):
        pts = draw_points("chebyshev", M, n, seed=1000 + t)
        s = label_points(pts, p, NoiseModel(sigma=0.1, rho=rho, adversary=ConstBlowup(10.0)), seed=t)
        rep = alpha_goodness(part, s, s.truth.inlier_flags, alpha=alpha)
        good += rep.is_good
    assert good >= 45


def test_all_cell_centers_order():
    part = build_partition(3, 2)
    centers = all_cell_centers(part)
    assert centers.shape == (9, 2)
    ids = cells_of(part, centers)
    expect = np.array([(i, j) for i in range(1, 4) for j in range(1, 4)])
    assert np.array_equal(ids, expect)
