"""Seeded Monte Carlo experiments for the kick-one-out selectors.

Designs have i.i.d. U(1, 5) entries, the first ``k_star`` predictors are
active with coefficient rows ``scale * theta_star`` where
``theta_star = ((-0.5)^0, ..., (-0.5)^(p-1))``, and the errors are i.i.d.
standardized draws. Setting I uses ``scale = 1`` (bounded noncentrality),
Setting II ``scale = sqrt(n)`` (noncentrality growing like ``n``).

Replication ``r`` draws from its own stream ``SeedSequence(seed, spawn_key=(r,))``,
so results do not depend on the number of workers or on scheduling.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .consistency import ConditionValues, koo_condition_values, noncentrality
from .core import Dataset, ModelIndex, build_full_cache, validate_dataset
from .errors import ConfigError
from .koo import Flavor, SdRule, ThresholdRule, parse_rule, select


class Setting(str, enum.Enum):
    I = "I"
    II = "II"


class ErrorDist(str, enum.Enum):
    NORMAL = "normal"
    T3 = "t3"
    CHISQ2 = "chisq2"


METHOD_NAMES = {
    "koo-aic": Flavor.A_TILDE,
    "koo-bic": Flavor.B_TILDE,
    "koo-cp": Flavor.C_TILDE,
    "gkoo-a": Flavor.A_BREVE,
    "gkoo-c": Flavor.C_BREVE,
}
_FLAVOR_NAMES = {v: k for k, v in METHOD_NAMES.items()}


@dataclass(frozen=True)
class Method:
    """A KOO flavor plus, for the general KOO flavors, its threshold rule."""

    flavor: Flavor
    rule: ThresholdRule | None = None

    def __post_init__(self):
        object.__setattr__(self, "flavor", Flavor(self.flavor))
        if self.flavor.is_tilde:
            object.__setattr__(self, "rule", None)
        elif self.rule is None:
            raise ConfigError(f"{self.flavor.value} needs a threshold rule")

    @property
    def name(self) -> str:
        return _FLAVOR_NAMES[self.flavor]

    @property
    def rule_label(self) -> str:
        return "none" if self.rule is None else str(self.rule)

    @property
    def key(self) -> str:
        return self.name if self.rule is None else f"{self.name}[{self.rule}]"

    @classmethod
    def parse(cls, name: str, rule: str | ThresholdRule | None = None) -> "Method":
        if name not in METHOD_NAMES:
            raise ConfigError(f"unknown method {name!r}; choose from {', '.join(METHOD_NAMES)}")
        flavor = METHOD_NAMES[name]
        if flavor.is_tilde:
            return cls(flavor)
        if isinstance(rule, str):
            rule = parse_rule(rule)
        return cls(flavor, rule)


def default_methods(rule: ThresholdRule = SdRule(2.0)) -> tuple[Method, ...]:
    return tuple(Method(f, None if f.is_tilde else rule) for f in Flavor)


@dataclass(frozen=True)
class SimulationConfig:
    setting: Setting
    dist: ErrorDist
    n: int
    c_target: float
    alpha_target: float
    k_star: int = 5
    reps: int = 200
    seed: int = 0
    methods: tuple[Method, ...] = field(default_factory=default_methods)

    def __post_init__(self):
        object.__setattr__(self, "setting", Setting(self.setting))
        object.__setattr__(self, "dist", ErrorDist(self.dist))
        object.__setattr__(self, "methods", tuple(self.methods))
        if not (0 < self.c_target < 1 and 0 < self.alpha_target < 1):
            raise ConfigError(f"need 0 < c < 1 and 0 < alpha < 1, got c={self.c_target}, "
                              f"alpha={self.alpha_target}")
        if self.alpha_target + self.c_target >= 1:
            raise ConfigError(
                f"alpha + c = {self.alpha_target + self.c_target:g} >= 1: the limits must satisfy "
                f"c in (0, 1) and alpha in (0, 1 - c)"
            )
        if self.p < 1 or self.k < 1:
            raise ConfigError(f"n={self.n} gives p={self.p}, k={self.k}; both must be positive")
        if self.p + self.k >= self.n:
            raise ConfigError(f"p + k = {self.p + self.k} must be below n = {self.n} (n - k > p)")
        if not 1 <= self.k_star <= self.k:
            raise ConfigError(f"k_star={self.k_star} must lie in [1, k={self.k}]")
        if self.reps < 1:
            raise ConfigError(f"reps must be >= 1, got {self.reps}")
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if not self.methods:
            raise ConfigError("at least one method is required")

    @property
    def p(self) -> int:
        return int(round(self.c_target * self.n))

    @property
    def k(self) -> int:
        return int(round(self.alpha_target * self.n))

    @property
    def j_star(self) -> ModelIndex:
        return ModelIndex(tuple(range(1, self.k_star + 1)))


def rep_rng(seed: int, rep_index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(rep_index,)))


def sample_errors(dist: ErrorDist | str, n: int, p: int, rng: np.random.Generator) -> np.ndarray:
    """i.i.d. errors with mean 0 and variance 1: N(0,1), t_3/sqrt(3) or (chi2_2 - 2)/2."""
    dist = ErrorDist(dist)
    if dist is ErrorDist.NORMAL:
        return rng.standard_normal((n, p))
    if dist is ErrorDist.T3:
        return rng.standard_t(3, size=(n, p)) / math.sqrt(3.0)
    return (rng.chisquare(2, size=(n, p)) - 2.0) / 2.0


def theta_star(p: int) -> np.ndarray:
    return (-0.5) ** np.arange(p, dtype=np.float64)


def signal_scale(setting: Setting | str, n: int) -> float:
    return 1.0 if Setting(setting) is Setting.I else math.sqrt(n)


@dataclass(frozen=True)
class Truth:
    j_star: ModelIndex
    theta: np.ndarray  # k_star x p


def generate_setting(cfg: SimulationConfig, rep_index: int,
                     zero_noise: bool = False) -> tuple[Dataset, Truth]:
    rng = rep_rng(cfg.seed, rep_index)
    n, p, k = cfg.n, cfg.p, cfg.k
    x = rng.uniform(1.0, 5.0, size=(n, k))
    theta = signal_scale(cfg.setting, n) * np.outer(np.ones(cfg.k_star), theta_star(p))
    e = sample_errors(cfg.dist, n, p, rng)
    if zero_noise:
        e = np.zeros_like(e)
    y = x[:, : cfg.k_star] @ theta + e
    return validate_dataset(y, x), Truth(cfg.j_star, theta)


class Bucket(str, enum.Enum):
    UNDER = "under"
    EXACT = "exact"
    OVER = "over"


def classify(selected: ModelIndex, j_star: ModelIndex) -> Bucket:
    sel, true = set(selected.indices), set(j_star.indices)
    if sel == true:
        return Bucket.EXACT
    if sel > true:
        return Bucket.OVER
    return Bucket.UNDER


@dataclass(frozen=True)
class MethodSummary:
    method: Method
    reps: int
    count_under: int
    count_exact: int
    count_over: int
    over_size_total: int

    @property
    def fraction_under(self) -> float:
        return self.count_under / self.reps

    @property
    def fraction_exact(self) -> float:
        return self.count_exact / self.reps

    @property
    def fraction_over(self) -> float:
        return self.count_over / self.reps

    @property
    def mean_over_size(self) -> float:
        # 0/0 := 0
        return self.over_size_total / self.count_over if self.count_over else 0.0


@dataclass(frozen=True)
class SimulationReport:
    config: SimulationConfig
    summaries: tuple[MethodSummary, ...]

    def summary(self, key: str) -> MethodSummary:
        for s in self.summaries:
            if s.method.key == key or (s.method.name == key):
                return s
        raise KeyError(key)

    def to_flat_dict(self) -> dict:
        cfg = self.config
        out = {
            "setting": cfg.setting.value,
            "dist": cfg.dist.value,
            "n": cfg.n,
            "p": cfg.p,
            "k": cfg.k,
            "k_star": cfg.k_star,
            "c_target": cfg.c_target,
            "alpha_target": cfg.alpha_target,
            "reps": cfg.reps,
            "seed": cfg.seed,
            "methods": ",".join(s.method.key for s in self.summaries),
        }
        for s in self.summaries:
            key = s.method.key
            out[f"{key}.fraction_under"] = s.fraction_under
            out[f"{key}.fraction_exact"] = s.fraction_exact
            out[f"{key}.fraction_over"] = s.fraction_over
            out[f"{key}.mean_over_size"] = s.mean_over_size
        return out

    def to_rows(self) -> list[dict]:
        cfg = self.config
        return [
            {
                "setting": cfg.setting.value,
                "dist": cfg.dist.value,
                "n": cfg.n,
                "method": s.method.name,
                "rule": s.method.rule_label,
                "p": cfg.p,
                "k": cfg.k,
                "reps": cfg.reps,
                "seed": cfg.seed,
                "fraction_under": s.fraction_under,
                "fraction_exact": s.fraction_exact,
                "fraction_over": s.fraction_over,
                "mean_over_size": s.mean_over_size,
            }
            for s in self.summaries
        ]


def run_replication(cfg: SimulationConfig, rep_index: int) -> list[tuple[Bucket, int]]:
    """Bucket and selected-model size for each configured method on one replication."""
    d, truth = generate_setting(cfg, rep_index)
    cache = build_full_cache(d)
    out = []
    for method in cfg.methods:
        prof = select(cache, method.flavor, method.rule)
        out.append((classify(prof.selected, truth.j_star), prof.selected.size))
    return out


def run_monte_carlo(cfg: SimulationConfig, workers: int = 1) -> SimulationReport:
    if workers <= 1:
        results = [run_replication(cfg, r) for r in range(cfg.reps)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda r: run_replication(cfg, r), range(cfg.reps)))

    summaries = []
    for i, method in enumerate(cfg.methods):
        counts = {b: 0 for b in Bucket}
        over_sizes = 0
        for rep in results:
            bucket, size = rep[i]
            counts[bucket] += 1
            if bucket is Bucket.OVER:
                over_sizes += size
        summaries.append(MethodSummary(method, cfg.reps, counts[Bucket.UNDER],
                                       counts[Bucket.EXACT], counts[Bucket.OVER], over_sizes))
    return SimulationReport(cfg, tuple(summaries))


@dataclass(frozen=True)
class Table1Estimate:
    values: ConditionValues
    log_tau: float
    kappa: float
    draws: int

    @property
    def v3(self) -> float:
        return self.values.v3

    @property
    def v4(self) -> float:
        return self.values.v4


def table1_estimates(n: int, c: float, alpha: float, seed: int = 0, draws: int = 32,
                     k_star: int = 5) -> Table1Estimate:
    """V3 and V4 for Setting I from the noncentrality of ``w \\ {1}``.

    ``log tau`` and ``kappa`` depend only on the design, so each draw is one
    U(1, 5) matrix; the estimates are averaged over ``draws`` independent
    designs to bring the Monte Carlo error well below the second decimal.
    """
    p, k = int(round(c * n)), int(round(alpha * n))
    if p + k >= n or not 1 <= k_star <= k:
        raise ConfigError(f"n={n}, c={c}, alpha={alpha} gives p={p}, k={k}: need p + k < n, k >= k_star")
    theta = np.outer(np.ones(k_star), theta_star(p))
    j_star = ModelIndex(tuple(range(1, k_star + 1)))
    drop_first = ModelIndex(tuple(range(2, k + 1)))
    log_taus, kappas = [], []
    for r in range(draws):
        x = rep_rng(seed, r).uniform(1.0, 5.0, size=(n, k))
        rep = noncentrality(x, theta, j_star, drop_first)
        log_taus.append(rep.log_tau)
        kappas.append(rep.kappa)
    log_tau, kappa = float(np.mean(log_taus)), float(np.mean(kappas))
    vals = koo_condition_values(k / n, p / n, log_tau=log_tau, kappa=kappa)
    return Table1Estimate(vals, log_tau, kappa, draws)
