# %% [markdown]
# # Where the selectors are consistent
#
# With `k/n -> alpha` and `p/n -> c`, the sign of `phi(alpha, c)` decides
# whether AIC eventually overfits, `psi(alpha, c)` does the same for Cp,
# and `V1`, `V2` govern the kick-one-out versions.

# %%
from mlrselect import AsymptoticParams, aic_fixed_k_boundary, classify_theorems, koo_condition_values, phi, psi, region_grid
from mlrselect.simulation import table1_estimates

print("fixed-k AIC edge: c <", round(aic_fixed_k_boundary(), 4), "; fixed-k Cp edge: c <", 0.5)

# %%
for alpha in (0.1, 0.2):
    for c in (0.2, 0.4, 0.6):
        v = koo_condition_values(alpha, c)
        print(f"alpha={alpha} c={c}: phi={phi(alpha, c):+.3f} psi={psi(alpha, c):+.3f} V1={v.v1:+.2f} V2={v.v2:+.2f}")

# %% [markdown]
# `V3` and `V4` depend on the true signal. For the bounded-signal design they
# are estimated from the design itself.

# %%
est = table1_estimates(1500, 0.2, 0.1, draws=8)
print(f"log tau={est.log_tau:.3f} kappa={est.kappa:.3f} V3={est.v3:.2f} V4={est.v4:.2f}")

# %%
print(classify_theorems(AsymptoticParams(0.1, 0.6)))

# %% [markdown]
# A coarse text map of the regions (`+` both positive, `a` only phi,
# `c` only psi, `.` neither). Rows are c, columns alpha.

# %%
r = 20
signs = {(round(g.alpha * r), round(g.c * r)): (g.phi_sign > 0, g.psi_sign > 0) for g in region_grid(r)}
for j in range(r - 1, 0, -1):
    row = ""
    for i in range(1, r):
        s = signs.get((i, j))
        row += " " if s is None else {(True, True): "+", (True, False): "a", (False, True): "c"}.get(s, ".")
    print(f"c={j / r:4.2f} {row}")
