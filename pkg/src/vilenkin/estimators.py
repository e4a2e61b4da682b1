"""scikit-learn style wrappers around the transform and square functions."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_grid_batch, check_radix
from .operators import family_masks
from .transform import forward, inverse, inverse_fast, forward_fast


class VilenkinTransformer(TransformerMixin, BaseEstimator):
    """Map samples of grid values to their Vilenkin coefficients.

    Parameters
    ----------
    radix : sequence of int
        The radix ``(p_0, ..., p_N)``; each sample has ``M = prod p_j`` values.
    method : {"fast", "naive"}
        Tensor-product transform or dense character matrix.
    """

    def __init__(self, radix=(2, 2), method: str = "fast"):
        self.radix = radix
        self.method = method

    def fit(self, X, y=None):
        self.radix_ = check_radix(self.radix)
        if self.method not in ("fast", "naive"):
            raise ValueError(f"unknown method {self.method!r}")
        check_grid_batch(X, self.radix_)
        self.n_features_in_ = self.radix_.M
        return self

    def transform(self, X):
        check_is_fitted(self, "radix_")
        return forward(check_grid_batch(X, self.radix_), self.radix_, self.method)

    def inverse_transform(self, X):
        check_is_fitted(self, "radix_")
        return inverse(check_grid_batch(X, self.radix_), self.radix_, self.method)


class SquareFunctionTransformer(TransformerMixin, BaseEstimator):
    """Pointwise square function ``(sum_s |P_{I_s} f|^2)^{1/2}`` of each sample.

    Parameters
    ----------
    radix : sequence of int
    intervals : list of (a, b) pairs or frequency sets
        Pairwise disjoint members of the family.
    """

    def __init__(self, radix=(2, 2), intervals=((0, 1),)):
        self.radix = radix
        self.intervals = intervals

    def fit(self, X, y=None):
        self.radix_ = check_radix(self.radix)
        self.masks_ = family_masks(list(self.intervals), self.radix_.M)
        check_grid_batch(X, self.radix_)
        self.n_features_in_ = self.radix_.M
        return self

    def components(self, X) -> np.ndarray:
        """``(n_samples, S, M)`` array of the projections."""
        check_is_fitted(self, "masks_")
        spec = forward_fast(check_grid_batch(X, self.radix_), self.radix_)
        return inverse_fast(spec[:, None, :] * self.masks_, self.radix_)

    def transform(self, X):
        return np.sqrt(np.sum(np.abs(self.components(X)) ** 2, axis=1))
