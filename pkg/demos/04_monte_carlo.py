# %% [markdown]
# # Monte Carlo selection percentages
#
# Each replication draws a U(1, 5) design, a rank-one coefficient matrix on
# the first five predictors and standardized errors. Replication `r` uses
# its own random stream, so the report does not depend on the number of
# worker threads.

# %%
from mlrselect import SimulationConfig, run_monte_carlo

for setting in ("I", "II"):
    for n in (300, 600):
        cfg = SimulationConfig(setting, "t3", n, c_target=0.2, alpha_target=0.1, reps=40, seed=7)
        rep = run_monte_carlo(cfg, workers=4)
        print(f"Setting {setting}, n={n}")
        for s in rep.summaries:
            print(f"  {s.method.key:16s} under={s.fraction_under:.3f} exact={s.fraction_exact:.3f} "
                  f"over={s.fraction_over:.3f} mean size when over={s.mean_over_size:.1f}")

# %% [markdown]
# The same experiment from the command line:
#
#     mlrselect simulate --setting I --dist t3 --n 300 --c 0.2 --alpha 0.1 --reps 40 --seed 7 --out r.csv
