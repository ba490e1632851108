"""Asymptotic consistency conditions for the large-model, large-sample, large-dimension regime.

With ``k/n -> alpha`` and ``p/n -> c`` (``alpha + c < 1``), the signs of

    phi(alpha, c) = 2 c alpha + log[(1-c)^(1-c) (1-alpha)^(1-alpha) / (1-c-alpha)^(1-c-alpha)]
    psi(alpha, c) = c (alpha - 1) / (1 - alpha - c) + 2 c

decide whether AIC and Cp overfit, while the kick-one-out versions are
governed by ``V1 = 2c - log((1-alpha)/(1-alpha-c))`` and
``V2 = 2(1-alpha-c) - (1-alpha)``. The noncentrality functionals ``tau`` and
``kappa`` of a candidate model decide whether it underfits.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import optimize
from scipy.special import xlogy

from .core import ModelIndex, logdet_spd
from .errors import DomainError, RankDeficient

BOUNDARY_TOL = 1e-12


@dataclass(frozen=True)
class AsymptoticParams:
    alpha: float
    c: float

    def __post_init__(self):
        check_simplex(self.alpha, self.c)


def check_simplex(alpha: float, c: float, allow_zero_alpha: bool = False) -> None:
    ok_alpha = alpha >= 0 if allow_zero_alpha else alpha > 0
    if not (ok_alpha and c > 0 and alpha + c < 1 and math.isfinite(alpha) and math.isfinite(c)):
        lo = ">= 0" if allow_zero_alpha else "> 0"
        raise DomainError(
            f"(alpha, c) = ({alpha}, {c}) is outside the admissible region "
            f"alpha {lo}, c > 0, alpha + c < 1"
        )


def _xlogx(x: float) -> float:
    return float(xlogy(x, x))


def phi(alpha: float, c: float) -> float:
    """AIC boundary function; ``alpha = 0`` is accepted (fixed-k limit)."""
    check_simplex(alpha, c, allow_zero_alpha=True)
    return 2.0 * c * alpha + _xlogx(1.0 - c) + _xlogx(1.0 - alpha) - _xlogx(1.0 - c - alpha)


def psi(alpha: float, c: float) -> float:
    """Cp boundary function; ``alpha = 0`` is accepted (fixed-k limit)."""
    check_simplex(alpha, c, allow_zero_alpha=True)
    return c * (alpha - 1.0) / (1.0 - alpha - c) + 2.0 * c


def aic_fixed_k_boundary() -> float:
    """Root of ``log(1 - c) + 2c`` on (0, 1): the AIC consistency edge when k stays fixed (~0.797)."""
    return float(optimize.bisect(lambda c: math.log1p(-c) + 2.0 * c, 0.5, 0.99, xtol=1e-12))


@dataclass(frozen=True)
class ConditionValues:
    """Kick-one-out condition values; V3 and V4 are None without truth-derived inputs."""

    alpha: float
    c: float
    v1: float
    v2: float
    v3: float | None = None
    v4: float | None = None


def koo_condition_values(alpha: float, c: float, log_tau: float | None = None,
                         kappa: float | None = None) -> ConditionValues:
    check_simplex(alpha, c)
    rest = 1.0 - alpha - c
    v1 = 2.0 * c - math.log((1.0 - alpha) / rest)
    v2 = 2.0 * rest - (1.0 - alpha)
    v3 = None if log_tau is None else log_tau - math.log(rest) - 2.0 * c
    v4 = None if kappa is None else kappa - c * (1.0 - alpha - 2.0 * c) / (1.0 - alpha)
    return ConditionValues(alpha, c, v1, v2, v3, v4)


@dataclass(frozen=True, eq=False)
class NoncentralityReport:
    """Noncentrality of a candidate model ``j`` against a known truth.

    ``phi_j`` is ``Theta*' X*' Q_j X* Theta* / n``; ``log_tau`` is
    ``(s - p) log(1 - m/n) + log|(1 - m/n) I + phi_j|`` and ``kappa`` is
    ``tr(phi_j)``. ``m`` counts the spurious predictors in ``j``, ``s`` the true
    ones it misses. ``kick_one_out`` marks ``j = w \\ {j'}`` with ``j'`` true.
    Infinite ``log_tau``/``kappa`` declare a divergent noncentrality.
    """

    log_tau: float
    kappa: float
    m: int
    s: int
    phi_j: np.ndarray | None = None
    kick_one_out: bool = False


def noncentrality(x: np.ndarray, theta_star: np.ndarray, j_star: ModelIndex,
                  j: ModelIndex) -> NoncentralityReport:
    x = np.asarray(x, dtype=np.float64)
    theta_star = np.atleast_2d(np.asarray(theta_star, dtype=np.float64))
    n, k = x.shape
    p = theta_star.shape[1]
    j_star.check(k)
    j.check(k)
    if theta_star.shape[0] != j_star.size:
        raise ValueError(f"theta_star has {theta_star.shape[0]} rows for {j_star.size} true predictors")
    # residualize the k* true columns rather than the n x p signal
    x_true = x[:, j_star.zero_based()]
    x_j = x[:, j.zero_based()]
    if j.size:
        q, r = np.linalg.qr(x_j, mode="reduced")
        d = np.abs(np.diagonal(r))
        if d.min() <= 1e-12 * max(d.max(), 1.0):
            raise RankDeficient(f"X_j for j={list(j.indices)} is rank deficient")
        x_true = x_true - q @ (q.T @ x_true)
    g = x_true.T @ x_true / n
    g = 0.5 * (g + g.T)
    phi_j = theta_star.T @ g @ theta_star
    phi_j = 0.5 * (phi_j + phi_j.T)

    true_set = set(j_star.indices)
    m = sum(1 for i in j.indices if i not in true_set)
    s = sum(1 for i in true_set if i not in j)
    alpha_m = m / n
    # |a I_p + T'GT| = a^p |I_k* + G T T' / a|; the k* x k* factor need not be symmetric,
    # so use the symmetric form I + L'TT'L/a with G = LL' (G may be singular: use eigh).
    w, v = np.linalg.eigh(g)
    root = v * np.sqrt(np.clip(w, 0.0, None))
    inner = np.eye(j_star.size) + root.T @ theta_star @ theta_star.T @ root / (1.0 - alpha_m)
    log_tau = s * math.log1p(-alpha_m) + logdet_spd(0.5 * (inner + inner.T))
    kappa = float(np.sum(g * (theta_star @ theta_star.T)))
    kick_one_out = s == 1 and j.size == k - 1
    return NoncentralityReport(log_tau=float(log_tau), kappa=kappa, m=m, s=s,
                               phi_j=phi_j, kick_one_out=kick_one_out)


class Verdict(str, enum.Enum):
    CONSISTENT = "consistent"
    OVERSPECIFIED = "overspecified"
    UNDERSPECIFIED = "underspecified"
    INDETERMINATE = "indeterminate"


METHODS = ("AIC", "BIC", "CP", "KOO-AIC", "KOO-BIC", "KOO-CP", "GKOO-A", "GKOO-C")


def _sign(v: float) -> int:
    if v > BOUNDARY_TOL:
        return 1
    if v < -BOUNDARY_TOL:
        return -1
    return 0


def _compare_all(pairs: list[tuple[float, float]]) -> Verdict:
    """Consistent if every lhs > rhs, underspecified if some lhs < rhs, else indeterminate."""
    signs = [_sign(lhs - rhs) for lhs, rhs in pairs]
    if any(s < 0 for s in signs):
        return Verdict.UNDERSPECIFIED
    if signs and all(s > 0 for s in signs):
        return Verdict.CONSISTENT
    return Verdict.INDETERMINATE


def _koo_verdict(edge_sign: int, divergent: bool, bounded: bool,
                 pairs: list[tuple[float, float]]) -> Verdict:
    if edge_sign < 0:
        return Verdict.OVERSPECIFIED
    if edge_sign == 0:
        return Verdict.INDETERMINATE
    if divergent:
        return Verdict.CONSISTENT
    if bounded and pairs:
        return _compare_all(pairs)
    return Verdict.INDETERMINATE


def classify_theorems(params: AsymptoticParams,
                      worst_case: Sequence[NoncentralityReport] | None = None) -> dict[str, Verdict]:
    """Per-method consistency verdicts from the strict-inequality cases of the limit theorems.

    ``worst_case`` lists noncentrality summaries of underspecified candidates.
    All-finite entries mean bounded noncentrality; all-infinite entries mean
    divergent noncentrality; a mix, or none at all, leaves truth-dependent
    verdicts indeterminate. Equalities are always indeterminate.
    """
    a, c = params.alpha, params.c
    rest = 1.0 - a - c
    reports = list(worst_case or [])
    finite = [r for r in reports if math.isfinite(r.log_tau) and math.isfinite(r.kappa)]
    bounded = bool(reports) and len(finite) == len(reports)
    divergent = bool(reports) and not finite
    koo_sets = [r for r in reports if r.kick_one_out]
    koo_finite = [r for r in koo_sets if math.isfinite(r.log_tau) and math.isfinite(r.kappa)]

    out: dict[str, Verdict] = {}
    aic_edge = math.log1p(-c) + 2.0 * c
    ph, ps = _sign(phi(a, c)), _sign(psi(a, c))

    # classical criteria
    if ph < 0:
        out["AIC"] = Verdict.OVERSPECIFIED
    elif ph == 0:
        out["AIC"] = Verdict.INDETERMINATE
    elif divergent:
        out["AIC"] = Verdict.CONSISTENT
    elif bounded:
        out["AIC"] = _compare_all([(r.log_tau, (r.s - r.m) * aic_edge) for r in finite])
    else:
        out["AIC"] = Verdict.INDETERMINATE

    out["BIC"] = Verdict.UNDERSPECIFIED if bounded else Verdict.INDETERMINATE

    cp_scale = psi(a, c) * rest / (1.0 - a)
    if ps < 0:
        out["CP"] = Verdict.OVERSPECIFIED
    elif ps == 0:
        out["CP"] = Verdict.INDETERMINATE
    elif divergent:
        out["CP"] = Verdict.CONSISTENT
    elif bounded:
        out["CP"] = _compare_all([(r.kappa, (r.s - r.m) * cp_scale) for r in finite])
    else:
        out["CP"] = Verdict.INDETERMINATE

    # kick-one-out. A negative V1 (V2) makes the tau (kappa) requirement automatic,
    # since tau >= (1 - alpha_m)^s and kappa >= 0 > c(1 - a - 2c)/(1 - a).
    vals = koo_condition_values(a, c)
    out["KOO-AIC"] = _koo_verdict(
        _sign(vals.v1), divergent, bounded,
        [(r.log_tau, math.log(rest) + 2.0 * c) for r in koo_finite])
    out["KOO-BIC"] = Verdict.UNDERSPECIFIED if bounded else Verdict.INDETERMINATE
    out["KOO-CP"] = _koo_verdict(
        _sign(vals.v2), divergent, bounded,
        [(r.kappa, c * (1.0 - a - 2.0 * c) / (1.0 - a)) for r in koo_finite])

    general = Verdict.INDETERMINATE
    if koo_sets and all(_sign(r.kappa) > 0 for r in koo_sets):
        general = Verdict.CONSISTENT
    out["GKOO-A"] = general
    out["GKOO-C"] = general
    return out


@dataclass(frozen=True)
class GridPoint:
    alpha: float
    c: float
    phi: float
    psi: float

    @property
    def phi_sign(self) -> int:
        return _sign(self.phi)

    @property
    def psi_sign(self) -> int:
        return _sign(self.psi)


def region_grid(resolution: int) -> list[GridPoint]:
    """Evaluate phi and psi on the lattice ``(i/r, j/r)`` with ``i, j >= 1`` and ``i + j < r``."""
    if resolution < 2:
        raise ValueError(f"resolution must be >= 2, got {resolution}")
    pts = []
    for i in range(1, resolution):
        for j in range(1, resolution - i):
            a, c = i / resolution, j / resolution
            pts.append(GridPoint(a, c, phi(a, c), psi(a, c)))
    return pts
