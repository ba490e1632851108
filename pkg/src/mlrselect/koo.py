"""Kick-one-out statistics and their selection rules.

Every statistic is a function of ``q_j`` from :class:`~mlrselect.core.FullModelCache`:

=========  ==========================================
flavor     statistic
=========  ==========================================
A_tilde    ``log(1 + q_j) - 2 c_n``
B_tilde    ``log(1 + q_j) - c_n log n``
C_tilde    ``(1 - alpha_k)(p + q_j) - (n - k + 2) c_n``
A_breve    ``log(1 + q_j)``
C_breve    ``p + q_j``
=========  ==========================================

The tilde flavors keep ``{j : stat_j > 0}``. The breve (general KOO) flavors
are compared with the null limit ``log((1-a)/(1-a-c))`` or ``c/(1-a-c) + p``
shifted by a margin: a fixed ``vartheta`` or a multiple of the spread of the
k statistics.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from .core import Dataset, FullModelCache, ModelIndex, build_full_cache
from .errors import DegenerateSpread, WrongFlavor

MAD_SCALE = 1.4826


class Flavor(str, enum.Enum):
    A_TILDE = "A_tilde"
    B_TILDE = "B_tilde"
    C_TILDE = "C_tilde"
    A_BREVE = "A_breve"
    C_BREVE = "C_breve"

    @property
    def is_tilde(self) -> bool:
        return self in (Flavor.A_TILDE, Flavor.B_TILDE, Flavor.C_TILDE)


TILDE_FLAVORS = (Flavor.A_TILDE, Flavor.B_TILDE, Flavor.C_TILDE)
BREVE_FLAVORS = (Flavor.A_BREVE, Flavor.C_BREVE)


@dataclass(frozen=True)
class Theory:
    """Fixed margin ``vartheta`` above the null limit."""

    vartheta: float

    def __post_init__(self):
        if not self.vartheta > 0:
            raise ValueError(f"vartheta must be > 0, got {self.vartheta}")

    def __str__(self) -> str:
        return f"theory:{self.vartheta!r}"


@dataclass(frozen=True)
class SdRule:
    """Null limit plus ``m`` sample standard deviations of the statistics."""

    m: float

    def __post_init__(self):
        if not self.m > 0:
            raise ValueError(f"SD multiplier must be > 0, got {self.m}")

    def __str__(self) -> str:
        return f"sd:{self.m!r}"


@dataclass(frozen=True)
class MadRule:
    """Null limit plus ``m`` times the normal-consistent MAD (``1.4826 * MAD``)."""

    m: float

    def __post_init__(self):
        if not self.m > 0:
            raise ValueError(f"MAD multiplier must be > 0, got {self.m}")

    def __str__(self) -> str:
        return f"mad:{self.m!r}"


ThresholdRule = Theory | SdRule | MadRule


def parse_rule(text: str) -> ThresholdRule:
    """Parse ``"sd:2"``, ``"mad:1.5"`` or ``"theory:0.1"``."""
    name, _, value = text.strip().partition(":")
    kinds = {"sd": SdRule, "mad": MadRule, "theory": Theory}
    if name.lower() not in kinds or not value:
        raise ValueError(f"unknown threshold rule {text!r}; expected sd:M, mad:M or theory:V")
    return kinds[name.lower()](float(value))


@dataclass(frozen=True)
class KooProfile:
    """The k per-variable statistics of one flavor, with the threshold once a rule is applied."""

    flavor: Flavor
    stats: np.ndarray
    n: int
    p: int
    k: int
    threshold: float | None = None
    selected: ModelIndex | None = None

    @property
    def alpha_k(self) -> float:
        return self.k / self.n

    @property
    def c_n(self) -> float:
        return self.p / self.n


def koo_statistics(cache: FullModelCache, flavor: Flavor | str) -> np.ndarray:
    flavor = Flavor(flavor)
    n, p, k = cache.n, cache.p, cache.k
    a, c = k / n, p / n
    q = cache.qforms
    if flavor is Flavor.A_BREVE:
        return np.log1p(q)
    if flavor is Flavor.A_TILDE:
        return np.log1p(q) - 2.0 * c
    if flavor is Flavor.B_TILDE:
        return np.log1p(q) - c * math.log(n)
    if flavor is Flavor.C_BREVE:
        return p + q
    return (1.0 - a) * (p + q) - (n - k + 2) * c


def koo_profile(d: Dataset | None, cache: FullModelCache | None, flavor: Flavor | str) -> KooProfile:
    """Statistics of one flavor; the threshold and selection are left unset."""
    if cache is None:
        cache = build_full_cache(d)
    flavor = Flavor(flavor)
    return KooProfile(flavor=flavor, stats=koo_statistics(cache, flavor),
                      n=cache.n, p=cache.p, k=cache.k)


def _above(stats: np.ndarray, threshold: float) -> ModelIndex:
    return ModelIndex(tuple(int(i) + 1 for i in np.flatnonzero(stats > threshold)))


def koo_select(profile: KooProfile) -> KooProfile:
    """Keep ``{j : stat_j > 0}`` for a tilde flavor."""
    if not profile.flavor.is_tilde:
        raise WrongFlavor(f"koo_select takes A_tilde, B_tilde or C_tilde, got {profile.flavor.value}")
    return replace(profile, threshold=0.0, selected=_above(profile.stats, 0.0))


def null_limit(flavor: Flavor | str, alpha: float, c: float, p: int) -> float:
    """Limit of a breve statistic for a predictor outside the true model."""
    flavor = Flavor(flavor)
    if flavor is Flavor.A_BREVE:
        return math.log((1.0 - alpha) / (1.0 - alpha - c))
    if flavor is Flavor.C_BREVE:
        return c / (1.0 - alpha - c) + p
    raise WrongFlavor(f"no null limit for {flavor.value}")


def breve_threshold(profile: KooProfile, rule: ThresholdRule) -> float:
    flavor = profile.flavor
    a, c, p = profile.alpha_k, profile.c_n, profile.p
    if isinstance(rule, Theory):
        if flavor is Flavor.A_BREVE:
            return math.log((1.0 - a + rule.vartheta) / (1.0 - a - c))
        return (rule.vartheta + c) / (1.0 - a - c) + p
    base = null_limit(flavor, a, c, p)
    stats = profile.stats
    if isinstance(rule, SdRule):
        spread = float(np.std(stats, ddof=1)) if stats.size > 1 else 0.0
        label = "standard deviation"
    else:
        spread = MAD_SCALE * float(np.median(np.abs(stats - np.median(stats))))
        label = "median absolute deviation"
    if not spread > 0.0:
        raise DegenerateSpread(f"{label} of the {stats.size} {flavor.value} statistics is zero")
    return base + rule.m * spread


def general_koo_select(profile: KooProfile, rule: ThresholdRule) -> KooProfile:
    """Keep the predictors whose breve statistic exceeds the rule's threshold."""
    if profile.flavor not in BREVE_FLAVORS:
        raise WrongFlavor(f"general_koo_select takes A_breve or C_breve, got {profile.flavor.value}")
    t = breve_threshold(profile, rule)
    return replace(profile, threshold=t, selected=_above(profile.stats, t))


def select(cache: FullModelCache, flavor: Flavor | str, rule: ThresholdRule | None = None) -> KooProfile:
    """Compute a profile and apply the matching selector in one call."""
    prof = koo_profile(None, cache, flavor)
    if prof.flavor.is_tilde:
        return koo_select(prof)
    if rule is None:
        raise ValueError(f"{prof.flavor.value} needs a threshold rule")
    return general_koo_select(prof, rule)
