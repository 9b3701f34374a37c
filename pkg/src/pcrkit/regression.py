"""Least-squares fits on increments and price-path reconstruction.

Two fits share one engine: a baseline OLS of the response increment on
the raw predictor increments, kept as a collinearity demonstration, and
the principal-components regression of the response increment on the
component scores.  The baseline is expected to fail or produce unstable
coefficients on strongly collinear data; the PCR fit is the product.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import InsufficientDataError, NonFiniteError, ShapeMismatchError
from .linalg import as_checked_array, solve_least_squares
from .pca import ScoreWeights
from .preprocess import StandardizedMatrix

# Residual variance below this fraction of the response variance is
# treated as an exact fit when guarding the R^2 division.
ZERO_VARIANCE_TOL = 1e-30


@dataclass(frozen=True, eq=False)
class OlsFit:
    """An ordinary least-squares fit with an intercept.

    ``coefficients[j]`` belongs to ``predictor_names[j]``; the intercept
    is kept separate.  ``residual_se`` uses n - p - 1 degrees of
    freedom.
    """

    predictor_names: tuple[str, ...]
    intercept: float
    coefficients: np.ndarray
    fitted: np.ndarray
    residuals: np.ndarray
    r_squared: float
    residual_se: float


def fit_ols(predictors, response, names: tuple[str, ...] | None = None) -> OlsFit:
    """Fit response = intercept + predictors @ beta by least squares.

    Parameters
    ----------
    predictors : array_like, shape (n, p)
    response : array_like, shape (n,)
    names : tuple of str, optional
        Predictor names for error messages and the fit record; defaults
        to X1..Xp.

    Raises
    ------
    InsufficientDataError
        Fewer than p + 2 observations (no residual degree of freedom).
    RankDeficiencyError
        A predictor is linearly dependent on earlier ones (or constant,
        which duplicates the intercept); the error names it.
    """
    x = as_checked_array(predictors, "predictors")
    if x.ndim == 1:
        x = x[:, None]
    y = as_checked_array(response, "response")
    n, p = x.shape
    if names is None:
        names = tuple(f"X{j + 1}" for j in range(p))
    if n < p + 2:
        raise InsufficientDataError(p + 2, n, f"ols with {p} predictors")
    design = np.column_stack([np.ones(n), x])
    design_names = ("intercept",) + tuple(names)
    beta = solve_least_squares(design, y, names=design_names)
    fitted = design @ beta
    residuals = y - fitted
    ss_res = float(residuals @ residuals)
    centered = y - y.mean()
    ss_tot = float(centered @ centered)
    if ss_tot <= ZERO_VARIANCE_TOL:
        warnings.warn(
            "response has zero variance; R^2 reported as 0.0", stacklevel=2
        )
        r_squared = 0.0
    else:
        r_squared = 1.0 - ss_res / ss_tot
    residual_se = float(np.sqrt(ss_res / (n - p - 1)))
    return OlsFit(
        predictor_names=tuple(names),
        intercept=float(beta[0]),
        coefficients=beta[1:].copy(),
        fitted=fitted,
        residuals=residuals,
        r_squared=r_squared,
        residual_se=residual_se,
    )


def fit_pcr(scores, response, component_names: tuple[str, ...]) -> OlsFit:
    """Principal-components regression: OLS of the response increment on
    component scores.

    The scores are orthogonal by construction on the training data, so
    this fit is immune to the collinearity that breaks the raw-variable
    baseline.  With all components retained it reproduces the baseline's
    fitted values exactly (the score basis spans the same column space).
    """
    return fit_ols(scores, response, names=component_names)


@dataclass(frozen=True, eq=False)
class PricePath:
    """A reconstructed level series: base level plus summed increments."""

    base: float
    years: np.ndarray
    increments: np.ndarray
    levels: np.ndarray


def reconstruct_prices(base: float, increments, years=None) -> PricePath:
    """Rebuild levels from a base level and a series of increments.

    ``levels[t] = base + increments[0] + ... + increments[t]``, computed
    by sequential addition so that reconstructing from exact differences
    replays the original series bit for bit.  ``years`` labels the
    increment positions; it defaults to 1..n.
    """
    inc = as_checked_array(increments, "increments")
    if inc.ndim != 1:
        raise ShapeMismatchError("increments", "(n,)", inc.shape)
    base_value = float(base)
    if not np.isfinite(base_value):
        raise NonFiniteError("base level", (0,))
    n = inc.shape[0]
    if years is None:
        years = np.arange(1, n + 1, dtype=np.int64)
    else:
        years = np.asarray(years, dtype=np.int64)
    levels = np.empty(n)
    running = base_value
    for i in range(n):
        running = running + inc[i]
        levels[i] = running
    return PricePath(base=base_value, years=years, increments=inc.copy(), levels=levels)


def predict_increment(
    fit: OlsFit,
    weights: ScoreWeights,
    scaler: StandardizedMatrix,
    row: dict[str, float],
) -> float:
    """Predict one response increment from raw predictor increments.

    ``row`` maps predictor names to raw (unstandardized) increment
    values.  The row is standardized with the training means and
    standard deviations carried by ``scaler``, projected onto the
    component scores, and pushed through the PCR coefficients.  At the
    training mean row the prediction is exactly the intercept.
    """
    aligned = scaler.select(weights.names)
    z_row = aligned.rescale_row(row)
    scores = z_row @ weights.weights
    return float(fit.intercept + scores @ fit.coefficients)
