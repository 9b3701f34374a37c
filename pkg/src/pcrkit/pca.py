"""Principal components of a correlation matrix, varimax, score weights.

Components are extracted from the correlation matrix, not the data, so
the same code drives both the full data pipeline and matrix-only runs
where a published correlation table is all that survives of a study.
Loadings follow the factor-analysis convention: column j of the loading
matrix is sqrt(lambda_j) times the j-th eigenvector, so squared loadings
sum to the eigenvalue down a column and to the communality across a row.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import (
    ComponentCountError,
    ConvergenceError,
    NameMismatchError,
    NotPositiveDefiniteError,
    SingularCorrelationError,
)
from .linalg import eigen_symmetric, invert_spd
from .preprocess import CorrelationMatrix, StandardizedMatrix

# Kaiser criterion: keep components whose eigenvalue exceeds this.
KAISER_THRESHOLD = 1.0
# Varimax stops when a full sweep improves the criterion by less than
# this relative amount.
VARIMAX_TOL = 1e-12
VARIMAX_MAX_SWEEPS = 100
# Ridge added to the correlation diagonal when score weights are
# requested on a numerically singular matrix.
RIDGE = 1e-8


@dataclass(frozen=True, eq=False)
class PcaSolution:
    """Extraction (and optionally rotation) of principal components.

    ``eigenvalues`` holds the full spectrum in descending order even
    when fewer components are retained.  ``loadings`` is p x k for the
    retained components.  After rotation, ``rotated_loadings`` and the
    k x k orthogonal ``rotation`` satisfy
    ``rotated_loadings == loadings @ rotation`` and the rotated columns
    are ordered by descending sum of squared loadings.

    Variance proportions are reported for both conventions: per
    unrotated component, lambda_j / p; per rotated component, the sum of
    squared rotated loadings over p.  Their cumulative sums over the
    retained components agree because rotation only redistributes
    explained variance.
    """

    names: tuple[str, ...]
    n_components: int
    eigenvalues: np.ndarray
    loadings: np.ndarray
    proportion: np.ndarray
    cumulative: np.ndarray
    communality: np.ndarray
    uniqueness: np.ndarray
    rotated_loadings: np.ndarray | None = None
    rotation: np.ndarray | None = None
    rotated_proportion: np.ndarray | None = None
    rotated_cumulative: np.ndarray | None = None
    rotation_sweeps: int = 0

    @property
    def p(self) -> int:
        return len(self.names)

    @property
    def component_names(self) -> tuple[str, ...]:
        prefix = "PC" if self.rotated_loadings is None else "RC"
        return tuple(f"{prefix}{j + 1}" for j in range(self.n_components))

    @property
    def effective_loadings(self) -> np.ndarray:
        """Rotated loadings when present, otherwise the unrotated ones."""
        if self.rotated_loadings is not None:
            return self.rotated_loadings
        return self.loadings


def extract(r: CorrelationMatrix, components: int | str = "auto") -> PcaSolution:
    """Extract principal components from a correlation matrix.

    Parameters
    ----------
    r : CorrelationMatrix
        Validated correlation matrix.
    components : int or "auto"
        Number of components to retain.  ``"auto"`` applies the Kaiser
        rule (eigenvalue strictly above 1); an integer must lie in
        [1, p].

    Raises
    ------
    ComponentCountError
        If the count is out of range, or if ``"auto"`` retains nothing
        because no eigenvalue clears the threshold.
    """
    p = r.p
    eig = _eigen_of(r)
    values, vectors = eig
    if components == "auto":
        k = int(np.sum(values > KAISER_THRESHOLD))
        if k == 0:
            raise ComponentCountError(
                "automatic retention kept no components: largest eigenvalue "
                f"{float(values[0]) if p else 0.0!r} does not exceed "
                f"{KAISER_THRESHOLD}"
            )
    else:
        k = int(components)
        if not 1 <= k <= p:
            raise ComponentCountError(
                f"component count must be in [1, {p}], got {components!r}"
            )
    # Eigenvalues can round a hair below zero on a semidefinite matrix;
    # clamp only for the square root.
    lam = values[:k]
    loadings = vectors[:, :k] * np.sqrt(np.maximum(lam, 0.0))
    communality = (loadings**2).sum(axis=1)
    proportion = lam / p
    return PcaSolution(
        names=r.names,
        n_components=k,
        eigenvalues=values.copy(),
        loadings=loadings,
        proportion=proportion,
        cumulative=np.cumsum(proportion),
        communality=communality,
        uniqueness=1.0 - communality,
    )


def _eigen_of(r: CorrelationMatrix):
    # CorrelationMatrix already ran the eigensolver for its PSD check,
    # but it only kept the eigenvalues; rerun for the vectors.
    eig = eigen_symmetric(r.values)
    return eig.eigenvalues, eig.eigenvectors


def _varimax_criterion(b: np.ndarray) -> float:
    p = b.shape[0]
    sq = b**2
    return float(((sq**2).sum(axis=0) - (sq.sum(axis=0) ** 2) / p).sum())


def rotate_varimax(
    solution: PcaSolution,
    normalize: bool = True,
    max_sweeps: int = VARIMAX_MAX_SWEEPS,
) -> PcaSolution:
    """Varimax rotation of the retained loadings.

    Classic pairwise formulation: for every column pair the closed-form
    angle maximizing the varimax criterion for that plane is applied,
    and full sweeps repeat until the criterion stops improving.  Kaiser
    normalization (rows scaled to unit communality during rotation) is
    on by default.

    The rotated columns are reordered by descending sum of squared
    loadings and sign-fixed so each column's largest-magnitude loading
    is positive; the returned ``rotation`` matrix absorbs both, so
    ``loadings @ rotation`` reproduces ``rotated_loadings`` exactly.

    A single retained component is returned unchanged with the identity
    rotation, as there is no plane to rotate in.
    """
    a = solution.loadings
    p, k = a.shape
    if k == 1:
        return replace(
            solution,
            rotated_loadings=a.copy(),
            rotation=np.eye(1),
            rotated_proportion=solution.proportion.copy(),
            rotated_cumulative=solution.cumulative.copy(),
            rotation_sweeps=0,
        )

    h = np.sqrt((a**2).sum(axis=1)) if normalize else np.ones(p)
    h = np.where(h == 0.0, 1.0, h)
    b = a / h[:, None]
    t = np.eye(k)

    previous = _varimax_criterion(b)
    improvement = float("inf")
    sweeps = 0
    while True:
        if sweeps >= max_sweeps:
            raise ConvergenceError("varimax rotation", sweeps, improvement)
        sweeps += 1
        for i in range(k - 1):
            for j in range(i + 1, k):
                x = b[:, i].copy()
                y = b[:, j].copy()
                u = x * x - y * y
                v = 2.0 * x * y
                num = 2.0 * (float(u @ v) - u.sum() * v.sum() / p)
                den = float(u @ u - v @ v) - (u.sum() ** 2 - v.sum() ** 2) / p
                phi = 0.25 * np.arctan2(num, den)
                c = np.cos(phi)
                s = np.sin(phi)
                b[:, i] = c * x + s * y
                b[:, j] = -s * x + c * y
                ti = t[:, i].copy()
                tj = t[:, j].copy()
                t[:, i] = c * ti + s * tj
                t[:, j] = -s * ti + c * tj
        current = _varimax_criterion(b)
        improvement = current - previous
        if improvement <= VARIMAX_TOL * max(abs(previous), 1e-30):
            break
        previous = current

    rotated = b * h[:, None]
    # Order by explained variance and fix signs; fold both into t so the
    # factorization loadings @ t == rotated stays exact.
    ss = (rotated**2).sum(axis=0)
    order = np.argsort(-ss, kind="stable")
    rotated = rotated[:, order]
    t = t[:, order]
    for j in range(k):
        col = rotated[:, j]
        pivot = int(np.argmax(np.abs(col)))
        if col[pivot] < 0.0:
            rotated[:, j] = -col
            t[:, j] = -t[:, j]
    proportion = (rotated**2).sum(axis=0) / p
    return replace(
        solution,
        rotated_loadings=rotated,
        rotation=t,
        rotated_proportion=proportion,
        rotated_cumulative=np.cumsum(proportion),
        rotation_sweeps=sweeps,
    )


@dataclass(frozen=True, eq=False)
class ScoreWeights:
    """Regression-method weights mapping standardized data to scores.

    ``weights`` is p x k: component scores are ``Z @ weights``.  The
    weights solve R @ W = L for the effective loadings L, so on the data
    that produced R the scores are the least-squares projections of the
    components.
    """

    names: tuple[str, ...]
    component_names: tuple[str, ...]
    weights: np.ndarray
    method: str = "regression"


def score_weights(
    r: CorrelationMatrix, solution: PcaSolution, ridge: bool = False
) -> ScoreWeights:
    """Regression-method component score weights W = R^-1 L.

    ``r`` must carry exactly the variables of ``solution`` in the same
    order.  A numerically singular correlation matrix raises
    :class:`SingularCorrelationError`; passing ``ridge=True`` adds
    ``RIDGE`` to the diagonal first, which is enough to score data whose
    collinearity is exact (duplicated columns) at the cost of a
    negligible bias in the weights.
    """
    if r.names != solution.names:
        missing = tuple(n for n in solution.names if n not in r.names)
        extra = tuple(n for n in r.names if n not in solution.names)
        raise NameMismatchError(missing=missing, extra=extra)
    values = r.values
    if ridge:
        values = values + RIDGE * np.eye(r.p)
    try:
        r_inv = invert_spd(values, context="correlation matrix")
    except NotPositiveDefiniteError as err:
        raise SingularCorrelationError(err.smallest) from err
    weights = r_inv @ solution.effective_loadings
    return ScoreWeights(
        names=r.names,
        component_names=solution.component_names,
        weights=weights,
    )


def component_scores(z: StandardizedMatrix, w: ScoreWeights) -> np.ndarray:
    """Component scores of standardized observations, one row per year.

    The columns of ``z`` must match the weight rows exactly (use
    ``StandardizedMatrix.select`` to align a wider matrix first).
    """
    if z.names != w.names:
        missing = tuple(n for n in w.names if n not in z.names)
        extra = tuple(n for n in z.names if n not in w.names)
        raise NameMismatchError(missing=missing, extra=extra)
    return z.values @ w.weights


def tucker_congruence(a, b) -> float:
    """Tucker congruence |a.b| / (|a||b|) between two loading vectors."""
    av = np.asarray(a, dtype=np.float64)
    bv = np.asarray(b, dtype=np.float64)
    denom = np.sqrt(float(av @ av) * float(bv @ bv))
    if denom == 0.0:
        return 0.0
    return float(abs(av @ bv) / denom)
