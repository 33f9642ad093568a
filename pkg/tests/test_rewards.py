import numpy as np
import pytest

from cabeval.rewards import (
    ActionRange,
    BimodalQuarticModel,
    DegenerateModelError,
    ParabolaModel,
    _antiderivative_at,
    make_bimodal,
    make_bimodal_from_heights,
    make_model,
    make_parabola,
)

UNIT = ActionRange(0.0, 1.0)


class SequenceRng:
    """Stub generator returning preset values from rng.uniform."""

    def __init__(self, values):
        self.values = list(values)

    def uniform(self, lo, hi, size=None):
        v = self.values.pop(0)
        assert lo <= v <= hi, f"forced value {v} outside [{lo}, {hi}]"
        return v


def fd_derivative(f, x, h=1e-6):
    return (f(x + h) - f(x - h)) / (2 * h)


def fd_second(f, x, h=1e-4):
    return (f(x + h) - 2 * f(x) + f(x - h)) / h**2


def test_action_range_rejects_inverted():
    with pytest.raises(ValueError):
        ActionRange(1.0, 0.0)
    with pytest.raises(ValueError):
        ActionRange(0.5, 0.5)


class TestParabola:
    def test_forced_peak_direct_values(self):
        model = make_parabola(SequenceRng([0.5]), UNIT, noise_var=0.0)
        assert model.peak == 0.5
        assert model.scale == 1.0
        assert model.mean(0.5) == 0.0
        assert model.mean(0.3) == pytest.approx(-0.04)

    def test_peak_dominates_grid(self):
        model = make_parabola(np.random.default_rng(7), UNIT, 0.01)
        grid = np.linspace(0, 1, 1001)
        assert np.all(model.mean(model.peak) >= model.mean(grid))

    def test_symmetry_at_endpoints(self):
        model = ParabolaModel(peak=0.5, scale=1.0, noise_var=0.0, range=UNIT)
        assert model.mean(0.0) == model.mean(1.0) == pytest.approx(-0.25)

    def test_out_of_range_evaluation_allowed(self):
        model = ParabolaModel(peak=0.5, scale=1.0, noise_var=0.0, range=UNIT)
        assert model.mean(1.5) == pytest.approx(-1.0)

    def test_optimum(self):
        model = ParabolaModel(peak=0.5, scale=1.0, noise_var=0.0, range=UNIT)
        assert model.optimum() == (0.5, 0.0)


class TestBimodal:
    def test_symmetric_geometry_solved_analytically(self):
        # For symmetric stationary points any negative k keeps both peaks at
        # equal height; pick one and place the peaks at 1 via the offset.
        m1, m0, m2 = 0.25, 0.5, 0.75
        k = -64.0
        q1 = _antiderivative_at(m1, m1, m0, m2, 0.0)
        q2 = _antiderivative_at(m2, m1, m0, m2, 0.0)
        assert q1 == pytest.approx(q2, abs=1e-12)
        model = BimodalQuarticModel(
            m1=m1, m0=m0, m2=m2, k=k, c=1.0 - k * q1, noise_var=0.0, range=UNIT
        )
        assert model.mean(m1) == pytest.approx(1.0, abs=1e-9)
        assert model.mean(m2) == pytest.approx(1.0, abs=1e-9)
        assert fd_second(model.mean, m1) < 0

    def test_symmetric_geometry_degenerate_for_height_solve(self):
        with pytest.raises(DegenerateModelError):
            make_bimodal_from_heights(SequenceRng([0.25, 0.75, 0.5]), UNIT, 0.0)

    def test_height_solve_hits_targets(self):
        # Oracle: solve mean(m1)=h1, mean(m2)=h2 for (k, c) directly.
        rng = SequenceRng([0.2, 0.8, 0.45, 0.9, 0.6])
        model = make_bimodal_from_heights(rng, UNIT, 0.0)
        q1 = _antiderivative_at(0.2, 0.2, 0.45, 0.8, 0.0)
        q2 = _antiderivative_at(0.8, 0.2, 0.45, 0.8, 0.0)
        # This geometry forces the swapped assignment (larger height at m2):
        # the direct one would make the stationary points minima.
        k, c = np.linalg.solve([[q1, 1.0], [q2, 1.0]], [0.6, 0.9])
        assert k < 0
        assert model.k == pytest.approx(k)
        assert model.c == pytest.approx(c)
        assert model.mean(0.2) == pytest.approx(0.6, abs=1e-9)
        assert model.mean(0.8) == pytest.approx(0.9, abs=1e-9)
        a_star, r_star = model.optimum()
        assert abs(a_star - 0.8) < 1e-3
        assert r_star == pytest.approx(0.9, abs=1e-6)

    @pytest.mark.parametrize("seed", range(25))
    def test_stationary_derivatives_vanish(self, seed):
        model = make_bimodal(np.random.default_rng(seed), UNIT, 0.01)
        deriv = lambda x: model.k * (x - model.m1) * (x - model.m0) * (x - model.m2)
        for x in (model.m1, model.m0, model.m2):
            assert abs(deriv(x)) < 1e-9
            assert abs(fd_derivative(model.mean, x)) < 1e-4

    @pytest.mark.parametrize("seed", range(25))
    def test_grid_argmax_near_a_peak(self, seed):
        model = make_bimodal(np.random.default_rng(seed), UNIT, 0.01)
        grid = np.linspace(0, 1, 10_001)
        best = grid[np.argmax(model.mean(grid))]
        assert min(abs(best - model.m1), abs(best - model.m2)) < 1e-3

    def test_interior_minimum_below_both_peaks(self):
        model = make_bimodal(np.random.default_rng(11), UNIT, 0.01)
        assert model.mean(model.m0) < model.mean(model.m1)
        assert model.mean(model.m0) < model.mean(model.m2)

    def test_thousand_consecutive_seeds_valid(self):
        for seed in range(1000):
            model = make_bimodal(np.random.default_rng(seed), UNIT, 0.01)
            assert model.k < 0
            assert 0 < model.m1 < model.m0 < model.m2 < 1
            second_m1 = model.k * (model.m1 - model.m0) * (model.m1 - model.m2)
            second_m2 = model.k * (model.m2 - model.m0) * (model.m2 - model.m1)
            assert second_m1 < 0 and second_m2 < 0

    def test_height_solve_thousand_seeds_no_exhaustion(self):
        for seed in range(1000):
            model = make_bimodal_from_heights(np.random.default_rng(seed), UNIT, 0.01)
            assert model.k < 0


class TestOptimum:
    @pytest.mark.parametrize("family", ["parabola", "bimodal"])
    @pytest.mark.parametrize("seed", [0, 1, 2, 3, 4])
    def test_grid_never_beats_optimum(self, family, seed):
        model = make_model(family, np.random.default_rng(seed), UNIT, 0.01)
        a_star, r_star = model.optimum()
        grid = np.linspace(0, 1, 10_001)
        assert UNIT.lo <= a_star <= UNIT.hi
        assert np.max(model.mean(grid)) <= r_star + 1e-4
        assert np.all(model.mean(grid) <= r_star + 1e-12)


class TestDerivativeCheck:
    @pytest.mark.parametrize("family", ["parabola", "bimodal"])
    def test_finite_difference_matches_analytic(self, family):
        rng = np.random.default_rng(3)
        model = make_model(family, rng, UNIT, 0.01)
        if family == "parabola":
            analytic = lambda x: -2 * model.scale * (x - model.peak)
        else:
            analytic = lambda x: (
                model.k * (x - model.m1) * (x - model.m0) * (x - model.m2)
            )
        for x in rng.uniform(0, 1, 100):
            assert fd_derivative(model.mean, x) == pytest.approx(
                analytic(x), abs=1e-4
            )


class TestSampling:
    def test_zero_noise_is_exact(self):
        model = ParabolaModel(peak=0.5, scale=1.0, noise_var=0.0, range=UNIT)
        rng = np.random.default_rng(0)
        assert model.sample(0.3, rng) == model.mean(0.3)

    def test_sample_mean_concentrates(self):
        model = ParabolaModel(peak=0.5, scale=1.0, noise_var=0.01, range=UNIT)
        rng = np.random.default_rng(123)
        draws = model.sample(np.full(10_000, 0.3), rng)
        # CLT: sd of the mean is 0.1/100.
        assert abs(np.mean(draws) - model.mean(0.3)) < 4 * (0.1 / 100)

    def test_sample_variance_in_band(self):
        model = ParabolaModel(peak=0.5, scale=1.0, noise_var=0.01, range=UNIT)
        rng = np.random.default_rng(99)
        draws = model.sample(np.full(10_000, 0.7), rng)
        assert 0.008 < np.var(draws) < 0.012

    def test_same_seed_bit_reproducible(self):
        model = make_bimodal(np.random.default_rng(5), UNIT, 0.01)
        a = model.sample(np.linspace(0, 1, 50), np.random.default_rng(17))
        b = model.sample(np.linspace(0, 1, 50), np.random.default_rng(17))
        assert np.array_equal(a, b)
