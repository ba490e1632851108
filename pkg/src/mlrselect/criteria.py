"""AIC, BIC and Mallows' Cp for the multivariate linear model, plus exhaustive argmin search."""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass

import numpy as np

from .core import Dataset, FullModelCache, ModelIndex, build_full_cache, residual_gram
from .errors import NotPositiveDefinite, TooManyPredictors

ENUMERATION_GUARD = 25
LOG_2PI_PLUS_1 = math.log(2.0 * math.pi) + 1.0


class CriterionKind(str, enum.Enum):
    AIC = "AIC"
    BIC = "BIC"
    CP = "CP"


@dataclass(frozen=True)
class CriterionValue:
    model: ModelIndex
    kind: CriterionKind
    value: float


def _likelihood_term(n: int, p: int, logdet_gram: float) -> float:
    # n log|Sigma_j| with Sigma_j = gram / n
    return n * (logdet_gram - p * math.log(n)) + n * p * LOG_2PI_PLUS_1


def _penalty_units(k_j: int, p: int) -> float:
    return k_j * p + 0.5 * p * (p + 1)


def _aic_from_logdet(n: int, p: int, k_j: int, logdet_gram: float) -> float:
    return _likelihood_term(n, p, logdet_gram) + 2.0 * _penalty_units(k_j, p)


def _bic_from_logdet(n: int, p: int, k_j: int, logdet_gram: float) -> float:
    return _likelihood_term(n, p, logdet_gram) + math.log(n) * _penalty_units(k_j, p)


def _cp_from_trace(n: int, k: int, p: int, k_j: int, trace: float) -> float:
    return (n - k) * trace + 2.0 * p * k_j


def _checked(d: Dataset, j: ModelIndex):
    rg = residual_gram(d, j)
    if not math.isfinite(rg.logdet):
        raise NotPositiveDefinite(
            f"residual Gram of model {list(j.indices)} is singular (n={d.n}, p={d.p}, k_j={j.size})")
    return rg


def aic(d: Dataset, cache: FullModelCache | None, j: ModelIndex) -> CriterionValue:
    """``A_j = n log|S_j| + 2[k_j p + p(p+1)/2] + n p (log 2 pi + 1)``, ``S_j = Y'Q_jY / n``."""
    rg = _checked(d, j)
    return CriterionValue(j, CriterionKind.AIC, _aic_from_logdet(d.n, d.p, j.size, rg.logdet))


def bic(d: Dataset, cache: FullModelCache | None, j: ModelIndex) -> CriterionValue:
    """As :func:`aic` with penalty weight ``log n`` instead of 2."""
    rg = _checked(d, j)
    return CriterionValue(j, CriterionKind.BIC, _bic_from_logdet(d.n, d.p, j.size, rg.logdet))


def cp(d: Dataset, cache: FullModelCache | None, j: ModelIndex) -> CriterionValue:
    """``C_j = (n - k) tr((Y'Q_wY)^{-1} Y'Q_jY) + 2 p k_j``."""
    if cache is None:
        cache = build_full_cache(d)
    rg = _checked(d, j)
    trace = float(np.sum(cache.gram_full_inverse * rg.gram))
    return CriterionValue(j, CriterionKind.CP, _cp_from_trace(d.n, d.k, d.p, j.size, trace))


_SINGLE = {CriterionKind.AIC: aic, CriterionKind.BIC: bic, CriterionKind.CP: cp}


def criterion(d: Dataset, cache: FullModelCache | None, j: ModelIndex,
              kind: CriterionKind | str) -> CriterionValue:
    return _SINGLE[CriterionKind(kind)](d, cache, j)


@dataclass(frozen=True)
class ExhaustiveResult:
    """Outcome of an exhaustive search.

    ``masks[i]`` encodes the subset scored ``scores[i]``: bit ``t`` set means
    predictor ``t + 1`` is in the model. Rows are ordered by cardinality, then
    lexicographically.
    """

    best: CriterionValue
    masks: np.ndarray
    scores: np.ndarray

    def subset(self, i: int) -> ModelIndex:
        m = int(self.masks[i])
        return ModelIndex(tuple(t + 1 for t in range(m.bit_length()) if m >> t & 1))


def _compress(d: Dataset) -> tuple[np.ndarray, np.ndarray]:
    """Replace (X, Y) by the R factor of [X Y]; all inner products are preserved."""
    r = np.linalg.qr(np.hstack([d.x, d.y]), mode="r")
    return r[:, : d.k], r[:, d.k:]


def _batched_logdets(xc: np.ndarray, yc: np.ndarray, combos: np.ndarray,
                     gram_inv: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Log-determinants and Cp traces of ``Y'Q_jY`` for a batch of equal-size subsets."""
    a = xc[:, combos].transpose(1, 0, 2)  # (batch, m, s)
    q, _ = np.linalg.qr(a, mode="reduced")
    res = yc[None, :, :] - q @ (q.transpose(0, 2, 1) @ yc[None, :, :])
    grams = res.transpose(0, 2, 1) @ res
    try:
        chol = np.linalg.cholesky(grams)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite("a residual Gram matrix is numerically singular") from exc
    diag = np.diagonal(chol, axis1=1, axis2=2)
    if np.any(diag <= 0.0):
        raise NotPositiveDefinite("a residual Gram matrix has a non-positive pivot")
    logdets = 2.0 * np.sum(np.log(diag), axis=1)
    traces = np.einsum("ij,bij->b", gram_inv, grams)
    return logdets, traces


def select_exhaustive(d: Dataset, kind: CriterionKind | str, max_k: int | None = None,
                      guard: int | None = ENUMERATION_GUARD,
                      batch_size: int = 16384) -> ExhaustiveResult:
    """Minimize a criterion over every non-empty subset of the predictors.

    Subsets are scored independently on the QR-compressed data, grouped by
    size so that each group is one batched factorization. Ties go to the
    smaller model, then to the lexicographically first index set.

    Parameters
    ----------
    kind : CriterionKind or {"AIC", "BIC", "CP"}
    max_k : int, optional
        Only consider models with at most this many predictors.
    guard : int or None
        Refuse ``k > guard`` (``2**k - 1`` evaluations). ``None`` disables it.
    """
    kind = CriterionKind(kind)
    if guard is not None and d.k > guard:
        raise TooManyPredictors(
            f"exhaustive search over k={d.k} predictors needs {2 ** d.k - 1} evaluations; "
            f"the guard is k <= {guard}"
        )
    top = d.k if max_k is None else min(max_k, d.k)
    cache = build_full_cache(d)
    xc, yc = _compress(d)
    n, p, k = d.n, d.p, d.k

    all_masks, all_scores = [], []
    best_val, best_mask = math.inf, 0
    for size in range(1, top + 1):
        combos_iter = itertools.combinations(range(k), size)
        while True:
            chunk = list(itertools.islice(combos_iter, batch_size))
            if not chunk:
                break
            combos = np.asarray(chunk, dtype=np.intp)
            logdets, traces = _batched_logdets(xc, yc, combos, cache.gram_full_inverse)
            if kind is CriterionKind.AIC:
                scores = n * (logdets - p * math.log(n)) + n * p * LOG_2PI_PLUS_1 \
                    + 2.0 * _penalty_units(size, p)
            elif kind is CriterionKind.BIC:
                scores = n * (logdets - p * math.log(n)) + n * p * LOG_2PI_PLUS_1 \
                    + math.log(n) * _penalty_units(size, p)
            else:
                scores = (n - k) * traces + 2.0 * p * size
            masks = np.sum(np.left_shift(np.int64(1), combos.astype(np.int64)), axis=1)
            i = int(np.argmin(scores))
            if scores[i] < best_val:
                best_val, best_mask = float(scores[i]), int(masks[i])
            all_masks.append(masks)
            all_scores.append(scores)

    masks = np.concatenate(all_masks)
    scores = np.concatenate(all_scores)
    best = ModelIndex(tuple(t + 1 for t in range(k) if best_mask >> t & 1))
    return ExhaustiveResult(best=CriterionValue(best, kind, best_val), masks=masks, scores=scores)
