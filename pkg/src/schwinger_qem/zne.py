"""Time-point-wise zero-noise extrapolation over odd folding factors.

Energies measured at noise factors f = 1, 3, ..., 2 n_evol - 1 are fitted
with an ordinary least-squares line in f, independently at every time point,
and read off at f = 0. The fit is unweighted: exact-mode energies carry no
per-point variance that would justify weights.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted

from .validation import check_array, require


@dataclass(frozen=True)
class ZneSeries:
    """Energies of one line at each noise factor, aligned on time points."""

    folds: tuple[int, ...]
    energies: np.ndarray  # (n_folds, n_points)

    def __post_init__(self):
        folds = tuple(int(f) for f in self.folds)
        require(len(folds) >= 2, "need at least two noise factors", field="folds")
        require(folds[0] == 1, "noise factors must start at 1", field="folds")
        for a, b in zip(folds, folds[1:]):
            require(a < b, "noise factors must ascend", field="folds")
        for f in folds:
            require(f % 2 == 1, "noise factors must be odd", field="folds")
        energies = check_array(
            self.energies, "energies", shape=(len(folds), None), dtype=float
        )
        object.__setattr__(self, "folds", folds)
        object.__setattr__(self, "energies", energies)

    @property
    def n_points(self):
        return self.energies.shape[1]

    @property
    def n_evol(self):
        return len(self.folds)

    def truncated(self, n_evol):
        """Series restricted to the first n_evol noise factors."""
        require(2 <= n_evol <= len(self.folds), "bad truncation", field="n_evol")
        return ZneSeries(self.folds[:n_evol], self.energies[:n_evol])


def _zero_intercepts(folds, energies):
    """OLS intercepts at f = 0 for every column of energies."""
    a = np.column_stack([np.asarray(folds, dtype=float), np.ones(len(folds))])
    coef, _, _, _ = np.linalg.lstsq(a, energies, rcond=None)
    return coef[1]


def extrapolate_point(folds, energies):
    """Zero-noise value of a single time point.

    Args:
        folds: noise factors, at least two.
        energies: measured values, one per factor.
    """
    energies = check_array(energies, "energies", ndim=1, dtype=float)
    require(len(folds) >= 2, "need at least two points", field="folds")
    require(len(folds) == len(energies), "length mismatch", field="energies")
    return float(_zero_intercepts(folds, energies))


def mitigate_line_zne(series):
    """Extrapolate every time point of the series to zero noise."""
    return np.asarray(_zero_intercepts(series.folds, series.energies), dtype=float)


def sweep_fold_counts(series, ed_lines_value_fn, n_evol_values=range(2, 11)):
    """Errors of the mitigated line for each number of noise factors.

    ``ed_lines_value_fn(mitigated_by_alpha)`` maps {alpha: line} to a scalar
    error; series is {alpha: ZneSeries}. Returns {n_evol: error}.
    """
    out = {}
    for n_evol in n_evol_values:
        mitigated = {a: mitigate_line_zne(s.truncated(n_evol)) for a, s in series.items()}
        out[n_evol] = float(ed_lines_value_fn(mitigated))
    return out


class ZneExtrapolator(BaseEstimator, RegressorMixin):
    """Least-squares linear model in the noise factor.

    fit(X, y) takes noise factors X of shape (n, 1) and energies y of shape
    (n,) or (n, m); predict evaluates the line and zero_noise_value() reads
    it at f = 0, which is the mitigated estimate.
    """

    def fit(self, X, y):
        X = check_array(np.asarray(X, dtype=float), "X", ndim=2)
        require(X.shape[1] == 1, "one feature (the noise factor)", field="X")
        y = np.asarray(y, dtype=float)
        require(len(y) == X.shape[0], "X and y disagree", field="y")
        a = np.column_stack([X[:, 0], np.ones(X.shape[0])])
        coef, _, _, _ = np.linalg.lstsq(a, y, rcond=None)
        self.coef_ = np.atleast_1d(coef[0])
        self.intercept_ = np.atleast_1d(coef[1])
        self.n_features_in_ = 1
        return self

    def predict(self, X):
        check_is_fitted(self, "coef_")
        X = np.asarray(X, dtype=float)
        return np.squeeze(np.outer(X[:, 0], self.coef_) + self.intercept_)

    def zero_noise_value(self):
        check_is_fitted(self, "coef_")
        return np.squeeze(self.intercept_)
