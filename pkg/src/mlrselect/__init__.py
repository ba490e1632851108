"""Variable selection for high-dimensional multivariate linear regression.

Classical AIC/BIC/Cp with exhaustive search, the kick-one-out (KOO)
statistics, the penalty-free general KOO selectors, the asymptotic
consistency conditions, and a seeded Monte Carlo harness.
"""

from .consistency import (
    AsymptoticParams,
    NoncentralityReport,
    Verdict,
    aic_fixed_k_boundary,
    classify_theorems,
    koo_condition_values,
    noncentrality,
    phi,
    psi,
    region_grid,
)
from .core import (
    Dataset,
    FullModelCache,
    ModelIndex,
    ResidualGram,
    build_full_cache,
    logdet_spd,
    residual_gram,
    validate_dataset,
)
from .criteria import CriterionKind, CriterionValue, aic, bic, cp, select_exhaustive
from .errors import MlrSelectError
from .koo import (
    Flavor,
    KooProfile,
    MadRule,
    SdRule,
    Theory,
    general_koo_select,
    koo_profile,
    koo_select,
)
from .simulation import (
    ErrorDist,
    Method,
    Setting,
    SimulationConfig,
    SimulationReport,
    generate_setting,
    run_monte_carlo,
    sample_errors,
    table1_estimates,
)

__version__ = "0.1.0"
