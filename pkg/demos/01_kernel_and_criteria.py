# %% [markdown]
# # Residual Gram matrices, AIC/BIC/Cp and exhaustive search
#
# A multivariate regression `Y = X Theta + E` with `n` rows, `p` responses
# and `k` candidate predictors. Every criterion depends on the data only
# through the residual Gram matrix `Y'Q_jY` of a submodel `j`.

# %%
import numpy as np

from mlrselect import ModelIndex, aic, bic, build_full_cache, cp, residual_gram, select_exhaustive, validate_dataset

rng = np.random.default_rng(0)
n, p, k = 120, 4, 8
x = rng.uniform(1, 5, size=(n, k))
theta = np.zeros((k, p))
theta[[0, 2, 5]] = rng.normal(size=(3, p))
y = x @ theta + rng.normal(size=(n, p))
d = validate_dataset(y, x)
print(d.n, d.p, d.k, "alpha_k =", d.alpha_k, "c_n =", d.c_n)

# %% [markdown]
# Growing the model never increases the residual: the Gram matrix of a
# smaller model dominates that of a larger one.

# %%
small = residual_gram(d, ModelIndex((1, 3)))
large = residual_gram(d, ModelIndex((1, 3, 6)))
print("log|Y'Q_jY|:", small.logdet, ">=", large.logdet)
print("smallest eigenvalue of the difference:", np.linalg.eigvalsh(small.gram - large.gram).min())

# %% [markdown]
# Criterion values for a few candidate models. The true model is {1, 3, 6}.

# %%
cache = build_full_cache(d)
for j in [(1, 3), (1, 3, 6), (1, 3, 6, 8), tuple(range(1, k + 1))]:
    mi = ModelIndex(j)
    print(f"{str(j):28s} AIC={aic(d, cache, mi).value:10.2f}  BIC={bic(d, cache, mi).value:10.2f}"
          f"  Cp={cp(d, cache, mi).value:8.2f}")

# %% [markdown]
# Exhaustive search scores all `2^k - 1` subsets in batches.

# %%
for kind in ("AIC", "BIC", "CP"):
    res = select_exhaustive(d, kind)
    print(kind, "->", res.best.model.indices, f"({res.scores.size} subsets)")
