"""Scikit-learn style wrapper around the centroid reflectance estimator.

Lets the spectral estimator sit in sklearn pipelines: fit() ingests the
responsivity (CMF table plus illuminant), transform() maps an array of
response vectors to an array of reflectance spectra on the responsivity's
wavelength cells.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError
from sklearn.utils.validation import check_array

from .colorimetry import (
    DEFAULT_WINDOW,
    SpectraTable,
    build_responsivity,
    default_cmf_table,
    estimate_reflectance,
    hawkyard_estimate,
)
from .stepfn import StepFunction

__all__ = ["CentroidReflectanceEstimator"]


class CentroidReflectanceEstimator(BaseEstimator, TransformerMixin):
    """Map tristimulus vectors to estimated reflectance spectra.

    Parameters
    ----------
    method : 'centroid' or 'hawkyard'
    equalize : bool, use the neutral-exact equalized variant (centroid only)
    illuminant : column name in the CMF table, or None for Illuminant E
    window : wavelength window (a, b)
    """

    def __init__(self, method="centroid", equalize=True, illuminant=None,
                 window=DEFAULT_WINDOW):
        self.method = method
        self.equalize = equalize
        self.illuminant = illuminant
        self.window = window

    def fit(self, X=None, y=None):
        """X may be a SpectraTable of CMFs, a StepFunction responsivity, or
        None for the bundled CMF table."""
        if X is None:
            X = default_cmf_table()
        if isinstance(X, StepFunction):
            self.responsivity_ = X
        elif isinstance(X, SpectraTable):
            self.responsivity_ = build_responsivity(
                X, illuminant=self.illuminant, window=self.window)
        else:
            raise TypeError("fit expects a SpectraTable, StepFunction, or None")
        self.n_features_in_ = self.responsivity_.m
        self.wavelengths_ = self.responsivity_.breakpoints[:-1].copy()
        return self

    def transform(self, Y):
        """(k, m) response vectors -> (k, n_cells) reflectance values."""
        if not hasattr(self, "responsivity_"):
            raise NotFittedError("call fit() before transform()")
        Y = check_array(Y, ensure_2d=True, dtype=float)
        if Y.shape[1] != self.n_features_in_:
            raise ValueError(
                f"expected {self.n_features_in_} response channels, got {Y.shape[1]}")
        out = np.empty((Y.shape[0], self.responsivity_.n_cells))
        for i, yv in enumerate(Y):
            if self.method == "hawkyard":
                est = hawkyard_estimate(self.responsivity_, yv).clamped
            else:
                est = estimate_reflectance(self.responsivity_, yv,
                                           equalize=self.equalize).estimate
            out[i] = est.values[:, 0]
        return out
