import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from quadevo.analysis import hypervolume_2d, hypervolume_convergence, mean_confidence_band, pareto_front
from quadevo.analysis.pareto import nondominated_indices
from quadevo.nsga2 import dominates

points = st.lists(st.tuples(st.floats(0, 30), st.floats(-1, 0)), min_size=1, max_size=40)


def grid_hypervolume(front, cells=2000):
    """Indicator oracle: count cell centres dominated by some point."""
    pts = np.asarray(front, dtype=float)
    top = pts[:, 0].max()
    xs = (np.arange(cells) + 0.5) / cells * top
    ys = -1.0 + (np.arange(cells) + 0.5) / cells
    covered = np.zeros((cells, cells), dtype=bool)
    for s, q in pts:
        covered |= (xs[:, None] <= s) & (ys[None, :] <= q)
    return covered.sum() * (top / cells) * (1.0 / cells)


def test_single_record():
    f = pareto_front([(3.0, -0.3)])
    assert len(f) == 1 and f.eval_count == 1


def test_strict_dominance():
    f = pareto_front([(10, -0.2), (12, -0.1)])
    np.testing.assert_array_equal(f.points, [[12, -0.1]])


def test_duplicates_collapse_to_first():
    assert nondominated_indices(np.array([[1.0, -0.5], [1.0, -0.5], [0.5, -0.1]])) == [0, 2]


@given(points)
def test_front_matches_pairwise_filter(pts):
    f = pareto_front(pts)
    expected = {p for p in pts if not any(dominates(q, p) for q in pts)}
    assert {tuple(p) for p in f.points.tolist()} == expected


def test_single_point_and_empty_hypervolume():
    assert hypervolume_2d(np.array([[10.0, -0.5]])) == 5.0
    assert hypervolume_2d(np.empty((0, 2))) == 0.0


def test_points_below_reference_are_clamped():
    assert hypervolume_2d([[5.0, -2.0]]) == 0.0
    assert hypervolume_2d([[2.0, -0.5], [-1.0, 0.0]]) == 1.0


def test_hypervolume_matches_grid_oracle(rng):
    s = np.sort(rng.uniform(0, 20, 15))
    q = -np.sort(rng.uniform(0, 1, 15))
    front = np.column_stack([s, q])
    assert hypervolume_2d(front) == pytest.approx(grid_hypervolume(front), rel=5e-3)


@given(points, st.randoms())
def test_hypervolume_invariances(pts, rnd):
    pts = np.array(pts)
    hv = hypervolume_2d(pts)
    perm = list(range(len(pts)))
    rnd.shuffle(perm)
    assert hypervolume_2d(pts[perm]) == hv
    # adding a dominated point changes nothing; adding any point never decreases
    p = pts[0]
    assert hypervolume_2d(np.vstack([pts, [p[0] * 0.5, (p[1] - 1) / 2]])) == hv
    assert hypervolume_2d(np.vstack([pts, [p[0] + 1, p[1]]])) >= hv - 1e-12


def test_convergence_series(rng):
    pts = np.column_stack([rng.uniform(0, 20, 50), -rng.uniform(0, 1, 50)])
    series = hypervolume_convergence(pts, stride=8)
    assert [k for k, _ in series] == [8, 16, 24, 32, 40, 48, 50]
    hv = [v for _, v in series]
    assert all(b >= a for a, b in zip(hv, hv[1:]))
    assert hv[-1] == hypervolume_2d(pareto_front(pts))


def test_confidence_band_matches_recomputation(rng):
    data = rng.normal(5, 1, size=(5, 12))
    mean, half = mean_confidence_band(data)
    for j in range(12):
        col = data[:, j]
        lo, hi = stats.t.interval(0.95, df=4, loc=col.mean(), scale=stats.sem(col))
        assert mean[j] == pytest.approx(col.mean())
        assert half[j] == pytest.approx((hi - lo) / 2)


def test_single_series_band_is_flat():
    mean, half = mean_confidence_band([[1.0, 2.0]])
    assert mean.tolist() == [1.0, 2.0] and half.tolist() == [0.0, 0.0]
