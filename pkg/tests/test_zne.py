import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from schwinger_qem.report import region_error
from schwinger_qem.validation import ValidationError
from schwinger_qem.zne import (
    ZneExtrapolator,
    ZneSeries,
    extrapolate_point,
    mitigate_line_zne,
    sweep_fold_counts,
)


def intercept_oracle(folds, energies):
    """Zero-noise intercept via the textbook mean formulas."""
    f = np.asarray(folds, dtype=float)
    y = np.asarray(energies, dtype=float)
    slope = np.sum((f - f.mean()) * (y - y.mean())) / np.sum((f - f.mean()) ** 2)
    return y.mean() - slope * f.mean()


def odd_folds(n_evol):
    return tuple(2 * q - 1 for q in range(1, n_evol + 1))


class TestExtrapolatePoint:
    def test_two_point_example(self):
        assert abs(extrapolate_point((1, 3), [2.0, 2.2]) - 1.9) < 1e-12

    def test_constant_series_returns_constant(self):
        for n_evol in (2, 4, 7):
            value = extrapolate_point(odd_folds(n_evol), np.full(n_evol, 3.25))
            assert abs(value - 3.25) < 1e-12

    def test_exact_affine_data_recovered(self, rng):
        for _ in range(30):
            n_evol = int(rng.integers(2, 11))
            folds = odd_folds(n_evol)
            a, b = rng.normal(size=2)
            energies = a * np.asarray(folds) + b
            assert abs(extrapolate_point(folds, energies) - b) < 1e-10

    def test_matches_mean_formula_oracle(self, rng):
        for _ in range(100):
            n_evol = int(rng.integers(2, 11))
            folds = odd_folds(n_evol)
            energies = rng.normal(size=n_evol)
            ours = extrapolate_point(folds, energies)
            assert abs(ours - intercept_oracle(folds, energies)) < 1e-12

    def test_too_few_points_rejected(self):
        with pytest.raises(ValidationError):
            extrapolate_point((1,), [2.0])


class TestZneSeries:
    def test_fold_validation(self):
        with pytest.raises(ValidationError):
            ZneSeries((3, 5), np.zeros((2, 4)))  # must start at 1
        with pytest.raises(ValidationError):
            ZneSeries((1, 2), np.zeros((2, 4)))  # even factor
        with pytest.raises(ValidationError):
            ZneSeries((1, 5, 3), np.zeros((3, 4)))  # not ascending
        with pytest.raises(ValidationError):
            ZneSeries((1,), np.zeros((1, 4)))  # too short

    def test_shape_validation(self):
        with pytest.raises(ValidationError):
            ZneSeries((1, 3), np.zeros(4))

    def test_truncation_keeps_leading_factors(self):
        series = ZneSeries(odd_folds(5), np.arange(20.0).reshape(5, 4))
        # The two-evolution configuration is exactly {1, 3}.
        short = series.truncated(2)
        assert short.folds == (1, 3)
        assert np.array_equal(short.energies, series.energies[:2])
        with pytest.raises(ValidationError):
            series.truncated(6)
        with pytest.raises(ValidationError):
            series.truncated(1)

    def test_properties(self):
        series = ZneSeries(odd_folds(4), np.zeros((4, 7)))
        assert series.n_evol == 4
        assert series.n_points == 7


class TestMitigateLine:
    def test_matches_pointwise_extrapolation(self, rng):
        n_evol, n_points = 5, 13
        series = ZneSeries(odd_folds(n_evol),
                           rng.normal(size=(n_evol, n_points)))
        line = mitigate_line_zne(series)
        assert line.shape == (n_points,)
        for i in range(n_points):
            solo = extrapolate_point(series.folds, series.energies[:, i])
            assert abs(line[i] - solo) < 1e-12

    def test_identical_fold_lines_pass_through(self, rng):
        base = rng.normal(size=9)
        series = ZneSeries((1, 3, 5), np.tile(base, (3, 1)))
        assert np.allclose(mitigate_line_zne(series), base, atol=1e-12)


class TestSweep:
    def test_errors_per_fold_count(self, rng):
        n_points = 11
        ed = {0: rng.normal(size=n_points), 1: rng.normal(size=n_points)}
        series = {}
        for alpha in ed:
            # Energies affine in f with slope 0.1: every truncation recovers
            # the exact line, so all sweep entries must vanish.
            folds = odd_folds(6)
            energies = ed[alpha][None, :] + 0.1 * np.asarray(folds)[:, None]
            series[alpha] = ZneSeries(folds, energies)
        mask = np.ones(n_points, dtype=bool)

        def error_fn(mitigated):
            return region_error(mitigated, ed, mask, region="P", method="zne").value

        out = sweep_fold_counts(series, error_fn, n_evol_values=range(2, 7))
        assert sorted(out) == [2, 3, 4, 5, 6]
        assert all(v < 1e-9 for v in out.values())

    def test_sweep_uses_truncated_series(self, rng):
        # A quadratic term in f makes short truncations fit better than the
        # full series, which shows the sweep really re-fits per n_evol.
        n_points = 5
        folds = odd_folds(9)
        f = np.asarray(folds, dtype=float)[:, None]
        ed = {0: np.zeros(n_points)}
        energies = 0.05 * f**2 + np.ones((1, n_points))
        series = {0: ZneSeries(folds, energies)}
        mask = np.ones(n_points, dtype=bool)

        def error_fn(mitigated):
            return region_error(mitigated, ed, mask, region="P").value

        out = sweep_fold_counts(series, error_fn, n_evol_values=(2, 9))
        assert out[2] < out[9]


class TestEstimator:
    def test_fit_predict_matches_polyfit(self, rng):
        folds = np.asarray(odd_folds(5), dtype=float)
        y = rng.normal(size=5)
        est = ZneExtrapolator().fit(folds[:, None], y)
        slope, intercept = np.polyfit(folds, y, 1)
        assert abs(est.coef_[0] - slope) < 1e-10
        assert abs(est.intercept_[0] - intercept) < 1e-10
        assert abs(est.zero_noise_value() - intercept) < 1e-10
        pred = est.predict(np.array([[0.0], [1.0]]))
        assert abs(pred[0] - intercept) < 1e-10
        assert abs(pred[1] - (slope + intercept)) < 1e-10

    def test_multi_output_fit(self, rng):
        folds = np.asarray(odd_folds(4), dtype=float)
        y = rng.normal(size=(4, 6))
        est = ZneExtrapolator().fit(folds[:, None], y)
        zero = est.zero_noise_value()
        assert zero.shape == (6,)
        for j in range(6):
            assert abs(zero[j] - intercept_oracle(folds, y[:, j])) < 1e-12

    def test_unfitted_predict_rejected(self):
        with pytest.raises(NotFittedError):
            ZneExtrapolator().predict(np.array([[0.0]]))

    def test_clone_and_params(self):
        est = ZneExtrapolator()
        assert est.get_params() == {}
        cloned = clone(est)
        assert isinstance(cloned, ZneExtrapolator)

    def test_input_shape_validation(self):
        with pytest.raises(ValidationError):
            ZneExtrapolator().fit(np.zeros((3, 2)), np.zeros(3))
        with pytest.raises(ValidationError):
            ZneExtrapolator().fit(np.zeros((3, 1)), np.zeros(4))
