"""Scikit-learn estimator wrapping the projection-based recovery step.

The fit is a single pass: average y_i * a_i over the rows, then project
onto the configured constraint set. ``coef_`` is the scaled estimate
(targeting lambda * x) and ``direction_`` its normalization (targeting x
itself when lambda > 0).
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted, validate_data

from .recovery import ConstraintSet, normalize, project

__all__ = ["SingleIndexRegressor"]


class SingleIndexRegressor(RegressorMixin, BaseEstimator):
    """Correlation-and-project estimator for single-index observations.

    Parameters
    ----------
    constraint : str, default="full_space"
        One of "sparse", "l1_ball", "l2_ball", "full_space".
    sparsity : int, optional
        Number of kept coordinates for the sparse constraint.
    radius : float, optional
        Ball radius for the l1/l2 constraints.

    Attributes
    ----------
    coef_ : ndarray of shape (n_features,)
        The projected correlation vector, an estimate of lambda * x.
    direction_ : ndarray of shape (n_features,)
        Unit-normalized coef_ (zero vector if coef_ is zero).
    """

    def __init__(self, constraint="full_space", sparsity=None, radius=None):
        self.constraint = constraint
        self.sparsity = sparsity
        self.radius = radius

    def _constraint_set(self, dim):
        return ConstraintSet(
            variant=self.constraint, dim=dim, s=self.sparsity, radius=self.radius
        )

    def fit(self, X, y):
        X, y = validate_data(self, X, y, y_numeric=True)
        v_hat = np.sum(X * y[:, None], axis=0) / X.shape[0]
        self.coef_ = project(v_hat, self._constraint_set(X.shape[1]))
        self.direction_ = normalize(self.coef_)
        return self

    def predict(self, X):
        check_is_fitted(self)
        X = validate_data(self, X, reset=False)
        return np.sum(X * self.coef_, axis=1)
