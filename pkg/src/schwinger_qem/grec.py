"""Per-time-point affine regression of noisy lines onto exact training data.

Training ramps end inside the learning window, where exact reference
energies are computable. At every time point i the noisy measurements of
the training ramps (one per conjugation realization r) form the rows of a
small least-squares system whose solution is an affine rule
eta_0 + sum_r eta_r * noisy_r. The same rule, learned per i, is then applied
to the main-ramp measurements at i, including points far outside the
learning window. Rank-deficient systems (a constant training ramp repeats
its first row, for example) take the minimum-norm solution, which keeps the
pipeline deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator

from .report import region_error
from .validation import check_array, check_int, require


@dataclass(frozen=True)
class TrainingSet:
    """Aligned training data of one level over the learning window.

    ideal[tau, i] is the exact energy of training ramp tau at time point i;
    noisy[tau, r, i] the measured energy under conjugation realization r.
    Ramps are ordered with endpoints nearest the prediction window first, so
    truncating to the first k ramps selects the k closest training lines.
    """

    ideal: np.ndarray
    noisy: np.ndarray
    taus: tuple[int, ...] = ()

    def __post_init__(self):
        ideal = check_array(self.ideal, "ideal", ndim=2, dtype=float)
        noisy = check_array(
            self.noisy,
            "noisy",
            shape=(ideal.shape[0], None, ideal.shape[1]),
            dtype=float,
        )
        taus = tuple(int(t) for t in self.taus) or tuple(range(1, ideal.shape[0] + 1))
        require(len(taus) == ideal.shape[0], "one label per ramp", field="taus")
        require(
            ideal.shape[0] >= noisy.shape[1] + 1,
            "need at least R + 1 training ramps",
            field="ideal",
        )
        object.__setattr__(self, "ideal", ideal)
        object.__setattr__(self, "noisy", noisy)
        object.__setattr__(self, "taus", taus)

    @property
    def n_train(self):
        return self.ideal.shape[0]

    @property
    def n_realizations(self):
        return self.noisy.shape[1]

    @property
    def n_points(self):
        return self.ideal.shape[1]

    def truncated(self, n_train):
        """First n_train ramps (the ones nearest the prediction window)."""
        n_train = check_int(n_train, "n_train", minimum=self.n_realizations + 1)
        require(n_train <= self.n_train, "not enough training ramps", field="n_train")
        return TrainingSet(
            self.ideal[:n_train], self.noisy[:n_train], self.taus[:n_train]
        )


@dataclass(frozen=True)
class EtaTable:
    """Learned mitigation rule: one affine row per time point.

    Column 0 holds the offset, column 1 + r the weight of realization r.
    """

    etas: np.ndarray
    residuals: np.ndarray
    pooled: bool = False

    def __post_init__(self):
        etas = check_array(self.etas, "etas", ndim=2, dtype=float)
        residuals = check_array(
            self.residuals, "residuals", shape=(etas.shape[0],), dtype=float
        )
        object.__setattr__(self, "etas", etas)
        object.__setattr__(self, "residuals", residuals)

    @property
    def n_realizations(self):
        return self.etas.shape[1] - 1


def _design(training, i):
    return np.column_stack(
        [training.noisy[:, :, i], np.ones(training.n_train)]
    )


def fit_eta_row(training, i):
    """Affine rule of one time point; returns (row, residual-norm).

    The row is ordered [eta_0, eta_1, ..., eta_R]. The fit minimizes the sum
    over training ramps of (eta_0 + sum_r eta_r * noisy[tau, r, i]
    - ideal[tau, i])^2 and ties are broken by the minimum-norm solution.
    """
    i = check_int(i, "i", minimum=0)
    require(i < training.n_points, "time point out of range", field="i")
    a = _design(training, i)
    target = training.ideal[:, i]
    coef, _, _, _ = np.linalg.lstsq(a, target, rcond=None)
    row = np.concatenate(([coef[-1]], coef[:-1]))
    residual = float(np.linalg.norm(a @ coef - target))
    return row, residual


def fit_etas(training):
    """Learn the affine rule at every time point independently."""
    rows = np.empty((training.n_points, training.n_realizations + 1))
    residuals = np.empty(training.n_points)
    for i in range(training.n_points):
        rows[i], residuals[i] = fit_eta_row(training, i)
    return EtaTable(etas=rows, residuals=residuals)


def fit_etas_pooled(training):
    """Single affine rule pooled over all time points (constant-rule mode).

    Solves one least-squares system with a row per (ramp, time point) and
    repeats the solution at every i, so mitigation code works unchanged.
    """
    blocks = [_design(training, i) for i in range(training.n_points)]
    a = np.vstack(blocks)
    target = training.ideal.T.reshape(-1)
    coef, _, _, _ = np.linalg.lstsq(a, target, rcond=None)
    row = np.concatenate(([coef[-1]], coef[:-1]))
    residual = float(np.linalg.norm(a @ coef - target))
    rows = np.tile(row, (training.n_points, 1))
    residuals = np.full(training.n_points, residual)
    return EtaTable(etas=rows, residuals=residuals, pooled=True)


def mitigate_line(noisy_main, etas):
    """Apply the learned rule to main-ramp measurements.

    Args:
        noisy_main: array (R, n_points) of measured energies per realization.
        etas: EtaTable with matching R and n_points.
    """
    noisy_main = check_array(
        noisy_main,
        "noisy_main",
        shape=(etas.n_realizations, etas.etas.shape[0]),
        dtype=float,
    )
    return etas.etas[:, 0] + np.einsum("ir,ri->i", etas.etas[:, 1:], noisy_main)


def sweep_training_lines(
    training_by_alpha,
    main_noisy_by_alpha,
    ed_by_alpha,
    mask,
    n_train_values=range(2, 12),
):
    """Prediction-window error for each training-line count.

    Returns {n_train: error}; the corresponding evolution budget per level is
    n_train + 1 ramps (training plus the main line).
    """
    out = {}
    for n_train in n_train_values:
        mitigated = {}
        for alpha, training in training_by_alpha.items():
            table = fit_etas(training.truncated(n_train))
            mitigated[alpha] = mitigate_line(main_noisy_by_alpha[alpha], table)
        out[int(n_train)] = region_error(
            mitigated, ed_by_alpha, mask, region="P", method="grec"
        ).value
    return out


def trend_check(mitigated, ideal, l0_values, learn_mask):
    """Linear trend of the residual over the learning window.

    Fits ideal - mitigated = a * l0 + b on learning-window points and
    returns (a, b, residual-norm). The correction is reported for
    diagnostics and never applied to the mitigated line.
    """
    l0_values = np.asarray(l0_values, dtype=float)
    learn_mask = np.asarray(learn_mask, dtype=bool)
    require(learn_mask.sum() >= 2, "need two learning points", field="learn_mask")
    x = l0_values[learn_mask]
    y = np.asarray(ideal, dtype=float)[learn_mask] - np.asarray(mitigated, dtype=float)[
        learn_mask
    ]
    a = np.column_stack([x, np.ones(len(x))])
    coef, _, _, _ = np.linalg.lstsq(a, y, rcond=None)
    residual = float(np.linalg.norm(a @ coef - y))
    return float(coef[0]), float(coef[1]), residual


class GrecMitigator(BaseEstimator):
    """Estimator wrapper around the per-time-point affine regression.

    fit(noisy, ideal) takes training arrays shaped (n_train, R, n_points)
    and (n_train, n_points); transform(noisy_main) mitigates main-ramp
    measurements shaped (R, n_points). ``pointwise=False`` pools all time
    points into a single rule.
    """

    def __init__(self, pointwise=True):
        self.pointwise = pointwise

    def fit(self, noisy, ideal):
        training = TrainingSet(ideal=ideal, noisy=noisy)
        self.eta_table_ = fit_etas(training) if self.pointwise else fit_etas_pooled(
            training
        )
        self.n_features_in_ = training.n_realizations
        return self

    def transform(self, noisy_main):
        from sklearn.utils.validation import check_is_fitted

        check_is_fitted(self, "eta_table_")
        return mitigate_line(noisy_main, self.eta_table_)

    def fit_transform(self, noisy, ideal, noisy_main):
        return self.fit(noisy, ideal).transform(noisy_main)
