"""Yearly-table preparation: differencing, standardization, correlation.

The pipeline works on short macro series (around twenty yearly rows), so
everything here favours explicit validation over generality.  Levels are
turned into year-over-year increments, increments are standardized to
zero mean and unit sample variance, and the Pearson correlation matrix
of the standardized columns is the object the component analysis runs
on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    InsufficientDataError,
    NameMismatchError,
    NotPositiveDefiniteError,
    PreprocessError,
    ZeroVarianceError,
)
from .linalg import as_checked_array, check_symmetric, eigen_symmetric

# A correlation matrix may dip this far below zero in its smallest
# eigenvalue before it is rejected as indefinite.
PSD_TOL = 1e-8

DIFFERENCE_MODES = ("absolute", "percent", "off")


@dataclass(frozen=True, eq=False)
class TimeSeriesTable:
    """A rectangular block of yearly observations.

    ``values[i, j]`` is variable ``names[j]`` in year ``years[i]``.
    Years must be consecutive integers; all values must be finite; one
    column is designated the response.
    """

    years: np.ndarray
    names: tuple[str, ...]
    values: np.ndarray
    response: str = "IY"

    def __post_init__(self):
        years = np.asarray(self.years, dtype=np.int64)
        values = as_checked_array(self.values, "table values")
        if values.ndim != 2:
            raise PreprocessError(f"table values must be 2-d, got shape {values.shape}")
        if years.ndim != 1 or years.shape[0] != values.shape[0]:
            raise PreprocessError(
                f"{years.shape[0] if years.ndim == 1 else '?'} years for "
                f"{values.shape[0]} rows"
            )
        if len(self.names) != values.shape[1]:
            raise PreprocessError(
                f"{len(self.names)} names for {values.shape[1]} columns"
            )
        if len(set(self.names)) != len(self.names):
            raise PreprocessError("duplicate column names")
        if years.size > 1 and not np.all(np.diff(years) == 1):
            gap = int(np.argmax(np.diff(years) != 1))
            raise PreprocessError(
                f"years must be consecutive: {years[gap]} is followed by {years[gap + 1]}"
            )
        if self.response not in self.names:
            raise PreprocessError(
                f"response column {self.response!r} not among {list(self.names)}"
            )
        object.__setattr__(self, "years", years)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "names", tuple(self.names))

    @property
    def n_years(self) -> int:
        return int(self.years.shape[0])

    @property
    def predictor_names(self) -> tuple[str, ...]:
        return tuple(n for n in self.names if n != self.response)

    def column(self, name: str) -> np.ndarray:
        if name not in self.names:
            raise NameMismatchError(missing=(name,), extra=())
        return self.values[:, self.names.index(name)].copy()


def difference(table: TimeSeriesTable, mode: str = "absolute") -> TimeSeriesTable:
    """Year-over-year increments of every column.

    ``absolute`` takes plain first differences; ``percent`` divides each
    difference by the previous level; ``off`` returns the table as is
    for data that already arrives in increments.  The output drops the
    first year.  Needs at least three years so downstream statistics
    have two increments to work with.
    """
    if mode not in DIFFERENCE_MODES:
        raise PreprocessError(f"unknown difference mode {mode!r}")
    if mode == "off":
        return table
    if table.n_years < 3:
        raise InsufficientDataError(3, table.n_years, "differencing")
    current = table.values[1:, :]
    previous = table.values[:-1, :]
    deltas = current - previous
    if mode == "percent":
        zero = np.argwhere(previous == 0.0)
        if zero.size:
            i, j = zero[0]
            raise PreprocessError(
                f"percent differencing divides by zero at year "
                f"{int(table.years[int(i)])}, column {table.names[int(j)]!r}"
            )
        deltas = deltas / previous
    return TimeSeriesTable(
        years=table.years[1:],
        names=table.names,
        values=deltas,
        response=table.response,
    )


def accumulate(diffed: TimeSeriesTable, base_row, base_year: int) -> TimeSeriesTable:
    """Inverse of absolute differencing.

    Rebuilds levels from increments by sequential addition, starting
    from ``base_row`` at ``base_year``.  With increments produced by
    :func:`difference` in absolute mode and the original first row as
    base, the reconstruction is bit-exact because each addition replays
    the subtraction that produced the increment.
    """
    base = as_checked_array(base_row, "base row")
    if base.shape != (len(diffed.names),):
        raise PreprocessError(
            f"base row has {base.shape} values for {len(diffed.names)} columns"
        )
    if int(diffed.years[0]) != base_year + 1:
        raise PreprocessError(
            f"increments start at year {int(diffed.years[0])}, "
            f"expected {base_year + 1}"
        )
    n = diffed.n_years
    levels = np.empty((n + 1, len(diffed.names)))
    levels[0] = base
    for i in range(n):
        levels[i + 1] = levels[i] + diffed.values[i]
    years = np.arange(base_year, base_year + n + 1, dtype=np.int64)
    return TimeSeriesTable(
        years=years, names=diffed.names, values=levels, response=diffed.response
    )


@dataclass(frozen=True, eq=False)
class StandardizedMatrix:
    """Columns scaled to zero mean and unit sample variance (ddof=1).

    Keeps the means and standard deviations used, so new observations
    can be placed on the training scale and predictions can be mapped
    back.
    """

    names: tuple[str, ...]
    values: np.ndarray
    means: np.ndarray
    sds: np.ndarray

    @property
    def n_obs(self) -> int:
        return int(self.values.shape[0])

    def select(self, names: tuple[str, ...]) -> "StandardizedMatrix":
        """Subset (and reorder) columns by name."""
        missing = tuple(n for n in names if n not in self.names)
        if missing:
            raise NameMismatchError(missing=missing, extra=())
        idx = [self.names.index(n) for n in names]
        return StandardizedMatrix(
            names=tuple(names),
            values=self.values[:, idx].copy(),
            means=self.means[idx].copy(),
            sds=self.sds[idx].copy(),
        )

    def rescale_row(self, row: dict[str, float]) -> np.ndarray:
        """Standardize one observation given as a name-to-value mapping."""
        missing = tuple(n for n in self.names if n not in row)
        if missing:
            raise NameMismatchError(missing=missing, extra=())
        raw = np.array([float(row[n]) for n in self.names])
        return (raw - self.means) / self.sds


def standardize(table: TimeSeriesTable) -> StandardizedMatrix:
    """Standardize every column of ``table`` to mean 0, sample sd 1.

    Raises :class:`ZeroVarianceError` naming the first constant column
    and :class:`InsufficientDataError` below two rows.
    """
    if table.n_years < 2:
        raise InsufficientDataError(2, table.n_years, "standardization")
    values = table.values
    means = values.mean(axis=0)
    sds = values.std(axis=0, ddof=1)
    for j, sd in enumerate(sds):
        if sd == 0.0:
            raise ZeroVarianceError(table.names[j])
    return StandardizedMatrix(
        names=table.names,
        values=(values - means) / sds,
        means=means,
        sds=sds,
    )


@dataclass(frozen=True, eq=False)
class CorrelationMatrix:
    """A validated Pearson correlation matrix with named rows/columns.

    Construction enforces symmetry, a unit diagonal, entries in
    [-1, 1], and positive semidefiniteness up to ``PSD_TOL``.  The
    eigenvalues found during validation are kept for reuse.
    """

    names: tuple[str, ...]
    values: np.ndarray
    eigenvalues: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        values = check_symmetric(self.values, where="correlation matrix")
        if values.shape[0] == 0:
            raise PreprocessError("correlation matrix has no variables")
        if len(self.names) != values.shape[0]:
            raise PreprocessError(
                f"{len(self.names)} names for a {values.shape[0]}-row matrix"
            )
        if not np.allclose(np.diagonal(values), 1.0, rtol=0.0, atol=1e-12):
            j = int(np.argmax(np.abs(np.diagonal(values) - 1.0)))
            raise PreprocessError(
                f"diagonal entry for {self.names[j]!r} is {values[j, j]!r}, not 1.0"
            )
        if np.abs(values).max() > 1.0 + 1e-12:
            i, j = np.unravel_index(int(np.argmax(np.abs(values))), values.shape)
            raise PreprocessError(
                f"correlation out of [-1, 1] at ({self.names[i]}, {self.names[j]}): "
                f"{values[i, j]!r}"
            )
        eig = eigen_symmetric(values)
        smallest = float(eig.eigenvalues[-1])
        if smallest < -PSD_TOL:
            raise NotPositiveDefiniteError(smallest, "correlation matrix")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "eigenvalues", eig.eigenvalues)

    @property
    def p(self) -> int:
        return int(self.values.shape[0])

    def submatrix(self, names: tuple[str, ...]) -> "CorrelationMatrix":
        """Principal submatrix for the given variable names, in that order."""
        missing = tuple(n for n in names if n not in self.names)
        if missing:
            raise NameMismatchError(missing=missing, extra=())
        idx = [self.names.index(n) for n in names]
        return CorrelationMatrix(
            names=tuple(names), values=self.values[np.ix_(idx, idx)].copy()
        )


def correlation_matrix(z: StandardizedMatrix) -> CorrelationMatrix:
    """Pearson correlations of standardized columns.

    With unit-variance columns the matrix is Z'Z / (n - 1).  Entries are
    clipped to [-1, 1] against rounding spill, the result is exactly
    symmetrized, and the diagonal is pinned to 1 before validation.
    """
    n = z.n_obs
    if n < 2:
        raise InsufficientDataError(2, n, "correlation")
    r = z.values.T @ z.values / (n - 1)
    r = np.clip(r, -1.0, 1.0)
    r = (r + r.T) / 2.0
    np.fill_diagonal(r, 1.0)
    return CorrelationMatrix(names=z.names, values=r)


def pearson(x, y) -> float:
    """Plain two-variable Pearson correlation (convenience wrapper)."""
    xv = as_checked_array(x, "x")
    yv = as_checked_array(y, "y")
    if xv.shape != yv.shape or xv.ndim != 1:
        raise PreprocessError(f"mismatched series shapes {xv.shape} and {yv.shape}")
    table = TimeSeriesTable(
        years=np.arange(xv.shape[0]),
        names=("x", "y"),
        values=np.column_stack([xv, yv]),
        response="x",
    )
    return float(correlation_matrix(standardize(table)).values[0, 1])


@dataclass(frozen=True, eq=False)
class ScatterPair:
    """One unordered variable pair with aligned observation vectors."""

    x_name: str
    y_name: str
    x: np.ndarray
    y: np.ndarray


def scatter_pairs(table: TimeSeriesTable) -> tuple[ScatterPair, ...]:
    """All p(p-1)/2 variable pairs, ordered lexicographically by name.

    This is the flat-file counterpart of a scatterplot matrix: each pair
    appears once, x carrying the alphabetically earlier variable.
    """
    ordered = sorted(table.names)
    pairs = []
    for a in range(len(ordered) - 1):
        for b in range(a + 1, len(ordered)):
            pairs.append(
                ScatterPair(
                    x_name=ordered[a],
                    y_name=ordered[b],
                    x=table.column(ordered[a]),
                    y=table.column(ordered[b]),
                )
            )
    return tuple(pairs)


def vif(z: StandardizedMatrix) -> dict[str, float]:
    """Variance inflation factor of every column against the others.

    Each column is regressed on all remaining columns (no intercept is
    needed on standardized data) and VIF_j = 1 / (1 - R_j^2).  A column
    reproduced exactly by the others (R_j^2 within 1e-12 of 1) gets
    ``math.inf`` rather than an arbitrary huge float, so perfectly
    collinear blocks are unmistakable in the output.  Minimum-norm least
    squares is used here deliberately: diagnosing collinear data must
    not itself fall over on collinear data.
    """
    n, p = z.values.shape
    if p < 2:
        raise InsufficientDataError(2, p, "vif")
    if n < p + 1:
        raise InsufficientDataError(p + 1, n, f"vif over {p} variables")
    out: dict[str, float] = {}
    for j, name in enumerate(z.names):
        target = z.values[:, j]
        others = np.delete(z.values, j, axis=1)
        beta, *_ = np.linalg.lstsq(others, target, rcond=None)
        resid = target - others @ beta
        ss_res = float(resid @ resid)
        ss_tot = float(target @ target)
        r2 = 1.0 - ss_res / ss_tot
        if r2 >= 1.0 - 1e-12:
            out[name] = math.inf
        else:
            out[name] = max(1.0 / (1.0 - r2), 1.0)
    return out
