import itertools

import numpy as np
import pytest

from asuq import (
    corner_extrema,
    estimate_cdf,
    estimate_range,
    fit_quadratic,
    hyshot_space,
    inscribed_box,
    invert_safe_set,
    ridge_direction,
)
from asuq.param_space import sample_hypercube


def brute_force_corner(w):
    corners = np.array(list(itertools.product([-1.0, 1.0], repeat=len(w))))
    return corners[np.argmax(corners @ w)]


def box_product_oracle(w, y_max, x_min, step=1e-3):
    """Exhaustive product search over side-length grids.

    Only the first m-1 sides are gridded: the objective increases in every
    side, so the last one always takes its largest feasible value.
    """
    absw = np.abs(np.asarray(w, dtype=float))
    b = float(y_max - np.dot(w, x_min))
    if b < 0:
        return 0.0
    grid = np.arange(0.0, 2.0 + step, step)
    m = len(absw)
    if m == 1:
        return float(min(2.0, b / absw[0]))
    if m == 2:
        rem = b - absw[0] * grid
        s2 = np.clip(rem / absw[1], 0.0, 2.0)
        prod = np.where(rem >= 0, grid * s2, 0.0)
        return float(prod.max())
    if m == 3:
        s1 = grid[:, None]
        s2 = grid[None, :]
        rem = b - absw[0] * s1 - absw[1] * s2
        s3 = np.clip(rem / absw[2], 0.0, 2.0)
        prod = np.where(rem >= 0, s1 * s2 * s3, 0.0)
        return float(prod.max())
    raise NotImplementedError


@pytest.fixture
def safe_fixture():
    """Surrogate with known coefficients over a 3-parameter direction."""
    w = np.array([0.8, 0.36, 0.48])
    l1 = float(np.abs(w).sum())
    y = np.linspace(-l1, l1, 50)
    f = 2.0 + 0.5 * y + 0.1 * y ** 2
    rng = np.random.default_rng(17)
    f = f + 0.01 * (f.max() - f.min()) * rng.standard_normal(50)
    surr = fit_quadratic(y, f, y_domain=(-l1, l1))
    return surr, w, l1


class TestCornerExtrema:
    def test_two_dimensional_signs(self):
        x_min, x_max = corner_extrema([0.6, -0.8])
        np.testing.assert_array_equal(x_max, [1.0, -1.0])
        np.testing.assert_array_equal(x_min, [-1.0, 1.0])

    def test_low_fuel_pressure_direction_corners(self):
        w = np.array([0.6506, 0.5565, -0.0002, 0.3685, -0.3566, -0.0196, 0.0607])
        w = w / np.linalg.norm(w)
        _, x_max = corner_extrema(w)
        np.testing.assert_array_equal(x_max, [1, 1, -1, 1, -1, -1, 1])

    def test_zero_component_tie_break_positive(self):
        _, x_max = corner_extrema([1.0, 0.0])
        np.testing.assert_array_equal(x_max, [1.0, 1.0])

    def test_opposite_corners(self):
        rng = np.random.default_rng(3)
        for _ in range(25):
            w = rng.standard_normal(5)
            w /= np.linalg.norm(w)
            x_min, x_max = corner_extrema(w)
            np.testing.assert_array_equal(x_min, -x_max)
            assert np.dot(w, x_max) == pytest.approx(np.abs(w).sum())

    def test_matches_exhaustive_enumeration(self):
        rng = np.random.default_rng(11)
        for _ in range(100):
            w = rng.standard_normal(7)
            w /= np.linalg.norm(w)
            _, x_max = corner_extrema(w)
            np.testing.assert_array_equal(x_max, brute_force_corner(w))


class TestEstimateRange:
    def test_monotone_ridge_attains_corner_extrema(self):
        w = ridge_direction(4, seed=2)
        l1 = float(np.abs(w).sum())

        def f(x):
            t = float(np.dot(w, x))
            return t ** 3 + t

        X = sample_hypercube(4, 30, seed=5)
        f_samples = np.array([f(x) for x in X])
        est = estimate_range(w, f, f_samples)
        assert est.f_min == pytest.approx(-(l1 ** 3) - l1)
        assert est.f_max == pytest.approx(l1 ** 3 + l1)
        assert est.validated
        assert not est.monotone_caveat

    def test_strong_second_direction_defeats_heuristic(self):
        w = np.array([0.8, 0.6])
        v = np.array([-0.6, 0.8])

        def f(x):
            x = np.asarray(x, dtype=float)
            return float(w @ x + 2.0 * (v @ x) ** 2)

        X = sample_hypercube(2, 50, seed=12)
        f_samples = np.array([f(x) for x in X])
        est = estimate_range(w, f, f_samples)
        assert not est.validated
        assert np.max(f_samples) > est.f_max

    def test_decreasing_trend_reports_ordered_interval(self):
        w = ridge_direction(3, seed=9)
        l1 = float(np.abs(w).sum())

        def f(x):
            return -float(np.dot(w, x))

        X = sample_hypercube(3, 20, seed=1)
        f_samples = np.array([f(x) for x in X])
        est = estimate_range(w, f, f_samples)
        assert est.inverted
        assert est.f_min == pytest.approx(-l1)
        assert est.f_max == pytest.approx(l1)
        assert est.validated

    def test_constant_function(self):
        w = np.array([1.0, 0.0])
        est = estimate_range(w, lambda x: 7.0, np.full(5, 7.0))
        assert est.f_min == est.f_max == 7.0
        assert est.validated

    def test_corner_failure_yields_partial_result(self):
        w = np.array([1.0, 0.0])

        def f(x):
            if x[0] > 0:
                raise RuntimeError("solver blew up")
            return -1.0

        est = estimate_range(w, f, np.array([-0.5]))
        assert est.f_min == -1.0
        assert est.f_max is None
        assert not est.validated
        assert "at_x_max" in est.corner_errors

    def test_discordant_count_sets_caveat(self):
        w = np.array([1.0, 0.0])
        est = estimate_range(w, lambda x: float(x[0]), np.array([0.0]),
                             discordant_pairs=3)
        assert est.monotone_caveat


class TestInscribedBox:
    def test_two_parameter_water_filling(self):
        w = np.array([0.8, 0.6])
        x_min = corner_extrema(w)[0]
        box = inscribed_box(w, 0.0, x_min)
        np.testing.assert_allclose(box.sides, [0.875, 7.0 / 6.0], atol=1e-9)
        assert np.prod(box.sides) == pytest.approx(1.0208333333, abs=1e-6)
        assert not box.empty

    def test_full_budget_gives_whole_cube(self):
        w = ridge_direction(5, seed=4)
        x_min = corner_extrema(w)[0]
        box = inscribed_box(w, float(np.abs(w).sum()), x_min)
        np.testing.assert_allclose(box.sides, 2.0, atol=1e-12)

    def test_zero_weight_coordinate_gets_full_side(self):
        w = np.array([0.6, 0.8, 0.0])
        x_min = corner_extrema(w)[0]
        box = inscribed_box(w, -0.5, x_min)
        assert box.sides[2] == 2.0
        assert box.sides[0] < 2.0 and box.sides[1] < 2.0

    def test_negative_budget_is_empty(self):
        w = np.array([1.0, 0.0])
        x_min = corner_extrema(w)[0]
        box = inscribed_box(w, -1.5, x_min)
        assert box.empty
        np.testing.assert_array_equal(box.sides, 0.0)

    def test_kkt_stationarity_and_binding_budget(self):
        rng = np.random.default_rng(23)
        for _ in range(30):
            m = int(rng.integers(2, 7))
            w = rng.standard_normal(m)
            w /= np.linalg.norm(w)
            x_min = corner_extrema(w)[0]
            y_max = float(rng.uniform(-np.abs(w).sum(), np.abs(w).sum()))
            box = inscribed_box(w, y_max, x_min)
            b = y_max - float(w @ x_min)
            interior = (box.sides > 1e-12) & (box.sides < 2.0 - 1e-12)
            if interior.sum() >= 2:
                costs = box.sides[interior] * np.abs(w)[interior]
                assert np.ptp(costs) <= 1e-9
            if np.any(box.sides < 2.0 - 1e-12):
                assert abs(float(np.abs(w) @ box.sides) - b) <= 1e-9

    @pytest.mark.parametrize("m,seed", [(1, 0), (2, 1), (3, 2)])
    def test_matches_grid_search(self, m, seed):
        rng = np.random.default_rng(seed)
        for _ in range(3):
            w = rng.standard_normal(m)
            w /= np.linalg.norm(w)
            x_min = corner_extrema(w)[0]
            l1 = float(np.abs(w).sum())
            y_max = float(rng.uniform(-0.9 * l1, 0.9 * l1))
            box = inscribed_box(w, y_max, x_min)
            got = float(np.prod(box.sides))
            want = box_product_oracle(w, y_max, x_min)
            assert abs(got - want) <= 1e-3


class TestInvertSafeSet:
    def test_threshold_above_everything_is_full(self, safe_fixture):
        surr, w, l1 = safe_fixture
        result = invert_safe_set(surr, w, threshold=100.0)
        assert result.feasible == "full"
        assert result.y_max == pytest.approx(l1)
        np.testing.assert_allclose(result.box_sides, 2.0)

    def test_threshold_below_everything_is_empty(self, safe_fixture):
        surr, w, _ = safe_fixture
        result = invert_safe_set(surr, w, threshold=0.0)
        assert result.feasible == "empty"
        assert result.y_max is None
        np.testing.assert_array_equal(result.box_sides, 0.0)

    def test_bisection_hits_threshold(self, safe_fixture):
        surr, w, _ = safe_fixture
        result = invert_safe_set(surr, w, threshold=2.5)
        assert result.feasible == "partial"
        bound = surr.upper_confidence(result.y_max)
        assert abs(bound - 2.5) <= 1e-9

    def test_box_corner_stays_safe(self, safe_fixture):
        surr, w, _ = safe_fixture
        result = invert_safe_set(surr, w, threshold=2.5)
        corner = result.x_anchor * (1.0 - result.box_sides)
        assert float(w @ corner) <= result.y_max + 1e-9

    def test_monotone_in_threshold(self, safe_fixture):
        surr, w, _ = safe_fixture
        prev_y, prev_sides = -np.inf, np.zeros(3)
        for threshold in np.linspace(1.0, 4.0, 20):
            result = invert_safe_set(surr, w, threshold=float(threshold))
            y = -np.inf if result.y_max is None else result.y_max
            assert y >= prev_y - 1e-12
            assert np.all(result.box_sides >= prev_sides - 1e-9)
            prev_y, prev_sides = y, result.box_sides

    def test_full_feasibility_reports_original_ranges(self):
        space = hyshot_space()
        w = ridge_direction(7, seed=1)
        l1 = float(np.abs(w).sum())
        y = np.linspace(-l1, l1, 40)
        surr = fit_quadratic(y, 1.0 + 0.1 * y, y_domain=(-l1, l1))
        result = invert_safe_set(surr, w, threshold=50.0, space=space)
        assert result.feasible == "full"
        for entry, spec in zip(result.safe_ranges, space.params):
            assert not entry["restricted"]
            assert entry["min"] == pytest.approx(spec.min, abs=1e-12)
            assert entry["max"] == pytest.approx(spec.max, abs=1e-12)

    def test_restricted_parameters_marked(self, safe_fixture):
        surr, w, _ = safe_fixture
        from asuq import unit_space

        result = invert_safe_set(surr, w, threshold=2.5, space=unit_space(3))
        restricted = [e["restricted"] for e in result.safe_ranges]
        assert any(restricted)
        for entry in result.safe_ranges:
            assert entry["min"] >= -1.0 - 1e-12
            assert entry["max"] <= 1.0 + 1e-12


class TestEstimateCdf:
    def test_constant_surrogate_step_cdf(self):
        y = np.linspace(-1, 1, 10)
        surr = fit_quadratic(y, np.full(10, 3.0))
        cdf = estimate_cdf(surr, np.array([1.0]), m=1, n_samples=100, seed=0)
        assert cdf.degenerate
        assert cdf.bandwidth == 0.0
        assert cdf.evaluate(2.9) == 0.0
        assert cdf.evaluate(3.0) == 0.5
        assert cdf.evaluate(3.1) == 1.0

    def test_linear_surrogate_median(self):
        y = np.linspace(-1, 1, 20)
        surr = fit_quadratic(y, y, y_domain=(-1.0, 1.0))
        cdf = estimate_cdf(surr, np.array([1.0]), m=1, n_samples=5000, seed=42)
        assert cdf.evaluate(0.0) == pytest.approx(0.5, abs=0.02)

    def test_monotone_and_saturating(self, safe_fixture):
        surr, w, _ = safe_fixture
        cdf = estimate_cdf(surr, w, m=3, n_samples=2000, seed=7)
        assert np.all(np.diff(cdf.cdf) >= -1e-15)
        assert cdf.cdf[-1] >= 0.999
        assert cdf.cdf[0] <= 1e-3

    def test_tails_converge_past_extremes(self, safe_fixture):
        surr, w, _ = safe_fixture
        cdf = estimate_cdf(surr, w, m=3, n_samples=500, seed=3)
        lo = cdf.grid[0] - 2 * cdf.bandwidth   # 6 bandwidths below the extreme
        hi = cdf.grid[-1] + 2 * cdf.bandwidth
        assert cdf.evaluate(lo) <= 1e-6
        assert cdf.evaluate(hi) >= 1.0 - 1e-6

    def test_seed_reproducibility(self, safe_fixture):
        surr, w, _ = safe_fixture
        a = estimate_cdf(surr, w, m=3, n_samples=800, seed=5)
        b = estimate_cdf(surr, w, m=3, n_samples=800, seed=5)
        assert np.array_equal(a.grid, b.grid)
        assert np.array_equal(a.cdf, b.cdf)

    def test_silverman_bandwidth_value(self, safe_fixture):
        surr, w, _ = safe_fixture
        n = 1000
        cdf = estimate_cdf(surr, w, m=3, n_samples=n, seed=9)
        X = sample_hypercube(3, n, seed=9)
        g = surr.predict(X @ w)
        expected = 1.06 * np.std(g, ddof=1) * n ** (-0.2)
        assert cdf.bandwidth == pytest.approx(expected, rel=1e-12)

    def test_too_few_samples_rejected(self, safe_fixture):
        surr, w, _ = safe_fixture
        from asuq import DataError

        with pytest.raises(DataError):
            estimate_cdf(surr, w, m=3, n_samples=1, seed=0)
