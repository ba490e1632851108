"""Data containers and the numerical kernel.

Residual Gram matrices ``Y'Q_jY`` are formed from the thin QR factor of
``X_j``; the n x n projectors are never built. Per-variable kick-one-out
quantities come from a single factorization of the full design through the
rank-one identity

    Q_{w\\j} = Q_w + b_j b_j',    b_j = Q_{w\\j} x_j / ||Q_{w\\j} x_j||,

so that ``log|Y'Q_{w\\j}Y| = log|Y'Q_wY| + log(1 + q_j)`` with
``q_j = b_j'Y (Y'Q_wY)^{-1} Y'b_j``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy import linalg as sla

from .errors import (
    DimensionRegime,
    NonFinite,
    NotPositiveDefinite,
    RankDeficient,
    RowMismatch,
)

PD_RTOL = 1e-12
# residual Gram pivots below this fraction of max diag(Y'Y) are round-off (exact fit)
RESIDUAL_RTOL = 1e-20


def _as_matrix(a, name: str) -> np.ndarray:
    arr = np.asarray(a, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise ValueError(f"{name} must be a 2-D matrix, got shape {arr.shape}")
    return arr


@dataclass(frozen=True)
class Dataset:
    """Validated response/design pair for ``Y = X Theta + E``.

    Build instances with :func:`validate_dataset`; the constructor itself does
    not re-check the invariants.
    """

    y: np.ndarray
    x: np.ndarray

    @property
    def n(self) -> int:
        return self.y.shape[0]

    @property
    def p(self) -> int:
        return self.y.shape[1]

    @property
    def k(self) -> int:
        return self.x.shape[1]

    @property
    def alpha_k(self) -> float:
        return self.k / self.n

    @property
    def c_n(self) -> float:
        return self.p / self.n

    def transform_responses(self, t: np.ndarray) -> "Dataset":
        """Return the dataset with ``Y`` replaced by ``Y T``."""
        return Dataset(y=self.y @ np.asarray(t, dtype=np.float64), x=self.x)

    def permute_predictors(self, perm: Sequence[int]) -> "Dataset":
        """Reorder the columns of ``X``: new column ``i`` is old column ``perm[i]`` (0-based)."""
        return Dataset(y=self.y, x=self.x[:, list(perm)])


@dataclass(frozen=True)
class ModelIndex:
    """A candidate submodel: a strictly increasing tuple of 1-based predictor indices."""

    indices: tuple[int, ...] = ()

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        if any(i < 1 for i in idx):
            raise ValueError(f"model indices are 1-based, got {idx}")
        if any(a >= b for a, b in zip(idx, idx[1:])):
            raise ValueError(f"model indices must be strictly increasing, got {idx}")
        object.__setattr__(self, "indices", idx)

    @classmethod
    def of(cls, indices: Iterable[int]) -> "ModelIndex":
        """Build from any iterable of 1-based indices (sorted, de-duplicated)."""
        return cls(tuple(sorted(set(int(i) for i in indices))))

    @classmethod
    def full(cls, k: int) -> "ModelIndex":
        return cls(tuple(range(1, k + 1)))

    @property
    def size(self) -> int:
        return len(self.indices)

    def zero_based(self) -> list[int]:
        return [i - 1 for i in self.indices]

    def without(self, j: int) -> "ModelIndex":
        return ModelIndex(tuple(i for i in self.indices if i != j))

    def check(self, k: int) -> None:
        if self.indices and self.indices[-1] > k:
            raise ValueError(f"index {self.indices[-1]} exceeds k={k}")

    def __iter__(self):
        return iter(self.indices)

    def __len__(self):
        return len(self.indices)

    def __contains__(self, item) -> bool:
        return item in self.indices


@dataclass(frozen=True)
class ResidualGram:
    """``Y'Q_jY`` (which equals n times the residual covariance) with its log-determinant."""

    gram: np.ndarray
    model: ModelIndex
    logdet: float


@dataclass(frozen=True)
class FullModelCache:
    """Quantities of the full model reused by every kick-one-out statistic.

    Attributes
    ----------
    gram_full : (p, p) ndarray
        ``Y'Q_wY``.
    gram_full_inverse : (p, p) ndarray
        Its inverse.
    logdet_full : float
        ``log|Y'Q_wY|``.
    unit_residuals : (n, k) ndarray
        Column ``j`` is ``b_j``, the normalized residual of ``x_j`` on the
        other predictors.
    qforms : (k,) ndarray
        ``q_j = b_j'Y (Y'Q_wY)^{-1} Y'b_j``.
    """

    n: int
    p: int
    k: int
    gram_full: np.ndarray
    gram_full_inverse: np.ndarray
    logdet_full: float
    unit_residuals: np.ndarray = field(repr=False)
    qforms: np.ndarray

    @property
    def alpha_k(self) -> float:
        return self.k / self.n

    @property
    def c_n(self) -> float:
        return self.p / self.n

    def logdet_drop(self, j: int) -> float:
        """``log|Y'Q_{w\\j}Y|`` for the 1-based predictor ``j`` via the rank-one path."""
        return self.logdet_full + float(np.log1p(self.qforms[j - 1]))


def logdet_spd(m: np.ndarray) -> float:
    """Log-determinant of a symmetric positive definite matrix.

    Sums the logs of the Cholesky pivots, so the determinant itself is never
    formed.

    Raises
    ------
    NotPositiveDefinite
        If the factorization meets a non-positive pivot.
    """
    m = np.asarray(m, dtype=np.float64)
    if m.size == 0:
        return 0.0
    try:
        chol = np.linalg.cholesky(m)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(f"matrix of order {m.shape[0]} is not positive definite") from exc
    d = np.diagonal(chol)
    if np.any(d <= 0.0) or not np.all(np.isfinite(d)):
        raise NotPositiveDefinite(f"matrix of order {m.shape[0]} has a non-positive pivot")
    return float(2.0 * np.sum(np.log(d)))


def validate_dataset(y_raw, x_raw) -> Dataset:
    """Check the regression invariants and wrap the matrices.

    Requires equal row counts, finite entries, ``n - k > p`` and a design
    whose Gram matrix ``X'X`` passes a Cholesky factorization with every
    pivot above ``1e-12`` times the largest diagonal entry.
    """
    y = _as_matrix(y_raw, "y")
    x = _as_matrix(x_raw, "x")
    if y.shape[0] != x.shape[0]:
        raise RowMismatch(f"y has {y.shape[0]} rows but x has {x.shape[0]}")
    if not (np.all(np.isfinite(y)) and np.all(np.isfinite(x))):
        raise NonFinite("y and x must contain only finite values")
    n, p = y.shape
    k = x.shape[1]
    if k < 1 or p < 1:
        raise DimensionRegime(f"need k >= 1 and p >= 1, got k={k}, p={p}")
    if n - k <= p:
        raise DimensionRegime(f"need n - k > p, got n={n}, k={k}, p={p} (n - k = {n - k})")
    xtx = x.T @ x
    scale = float(np.max(np.diagonal(xtx)))
    try:
        chol = np.linalg.cholesky(xtx)
    except np.linalg.LinAlgError as exc:
        raise RankDeficient(f"X'X ({k}x{k}) is not positive definite") from exc
    pivots = np.diagonal(chol) ** 2
    if scale <= 0.0 or float(np.min(pivots)) <= PD_RTOL * scale:
        worst = int(np.argmin(pivots)) + 1
        raise RankDeficient(
            f"X'X ({k}x{k}) is numerically singular: pivot {worst} is "
            f"{float(np.min(pivots)):.3e} against max diagonal {scale:.3e}"
        )
    return Dataset(y=y, x=x)


def _residual(x_j: np.ndarray, y: np.ndarray) -> np.ndarray:
    if x_j.shape[1] == 0:
        return y
    q, _ = np.linalg.qr(x_j, mode="reduced")
    return y - q @ (q.T @ y)


def residual_gram(d: Dataset, j: ModelIndex) -> ResidualGram:
    """``Y'Q_jY`` from the thin QR factor of ``X_j``; ``Y'Y`` for the empty model.

    ``logdet`` is ``-inf`` when the Gram matrix is numerically singular (for
    instance a noiseless fit).
    """
    j.check(d.k)
    res = _residual(d.x[:, j.zero_based()], d.y)
    gram = res.T @ res
    gram = 0.5 * (gram + gram.T)
    floor = RESIDUAL_RTOL * float(np.max(np.einsum("ij,ij->j", d.y, d.y)))
    try:
        chol = np.linalg.cholesky(gram)
        pivots = np.diagonal(chol)
        singular = bool(np.any(pivots ** 2 <= floor))
    except np.linalg.LinAlgError:
        singular = True
    logdet = -math.inf if singular else float(2.0 * np.sum(np.log(pivots)))
    return ResidualGram(gram=gram, model=j, logdet=logdet)


def build_full_cache(d: Dataset) -> FullModelCache:
    """Factor the full model once and derive every ``b_j`` and ``q_j``.

    With ``X = QR``, ``X (X'X)^{-1} = Q R^{-T}``; its columns ``u_j`` satisfy
    ``Q_{w\\j} x_j = u_j / [(X'X)^{-1}]_{jj}``, hence ``b_j = u_j / ||u_j||``.
    """
    q, r = np.linalg.qr(d.x, mode="reduced")
    r_inv = sla.solve_triangular(r, np.eye(d.k), lower=False)
    u = q @ r_inv.T
    b = u / np.linalg.norm(u, axis=0)

    res = d.y - q @ (q.T @ d.y)
    gram = res.T @ res
    gram = 0.5 * (gram + gram.T)
    try:
        chol = np.linalg.cholesky(gram)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite("Y'Q_wY is not positive definite") from exc
    logdet = float(2.0 * np.sum(np.log(np.diagonal(chol))))
    z = sla.solve_triangular(chol, d.y.T @ b, lower=True)
    qforms = np.einsum("ij,ij->j", z, z)
    gram_inv = sla.cho_solve((chol, True), np.eye(d.p))
    return FullModelCache(
        n=d.n,
        p=d.p,
        k=d.k,
        gram_full=gram,
        gram_full_inverse=0.5 * (gram_inv + gram_inv.T),
        logdet_full=logdet,
        unit_residuals=b,
        qforms=qforms,
    )
