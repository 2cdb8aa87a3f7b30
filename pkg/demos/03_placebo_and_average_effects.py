# Specification checks and the two aggregation-based extensions.
#
# 1. Placebo tests: pretend treatment started tau periods before it did and
#    test a zero effect on pre-treatment data alone.  Rejections indicate a
#    broken model or dependence assumption, not a treatment effect.
# 2. Average-effect test: block-aggregate the panel so the hypothesis about
#    the post-treatment *average* becomes a one-period sharp null.
# 3. Multiple treated units: average the treated units and test their mean
#    effect trajectory.

import numpy as np

import synthconf as sc

rng = np.random.default_rng(11)

# --- placebo checks on a well-specified panel --------------------------
panel = sc.simulate_panel(sc.DgpSpec(t0=24, n_controls=10, weights_kind="DGP1", seed=5))
print("placebo p-values (well-specified difference-in-differences):")
for tau in (1, 2, 3):
    result = sc.placebo_test(panel, tau, sc.EstimatorSpec.did())
    print(f"  tau={tau}: p={result.p_value:.3f}")

# ... and on a misspecified one: the treated unit trends, the proxy cannot.
# A single p-value is coarse (it can only take values k/22 here), so we
# look at how often the placebo rejects across fresh draws: a correct
# specification would reject ~10% of the time.
rejections = 0
for _ in range(200):
    controls = rng.standard_normal((24, 6))
    trending = 1.5 * np.arange(24) + rng.standard_normal(24)
    bad_panel = sc.PanelData(np.column_stack([trending, controls]), t0=22)
    result = sc.placebo_test(bad_panel, 2, sc.EstimatorSpec.lasso(1e9))
    rejections += result.p_value <= 0.1
print(f"intercept-only proxy on a trending unit: placebo rejects in "
      f"{rejections / 200:.0%} of draws (10% would be correct)")
print("placebo residuals are returned for plotting:", np.round(result.residuals[:5], 2), "...")

# --- average effect over time ------------------------------------------
# 36 periods, 6 of them post-treatment: the panel aggregates into 6 blocks.
controls = rng.standard_normal((36, 8))
treated = controls.mean(axis=1) + rng.standard_normal(36)
treated[30:] += np.array([0.5, 1.0, 1.5, 2.0, 2.5, 3.0])  # average = 1.75
avg_panel = sc.PanelData(np.column_stack([treated, controls]), t0=30)
for a_bar in (0.0, 1.75):
    result = sc.test_average_effect(avg_panel, a_bar, sc.EstimatorSpec.did())
    print(f"H0: average effect = {a_bar:<5} p={result.p_value:.3f} "
          f"(effective sample size {result.metadata['effective_sample_size']})")

# --- several treated units ----------------------------------------------
controls = rng.standard_normal((20, 8))
base = controls.mean(axis=1)
treated_a = base + rng.standard_normal(20)
treated_b = base + rng.standard_normal(20)
treated_a[18:] += 2.0
treated_b[18:] += 1.0  # cross-unit average effect = 1.5
multi = sc.PanelData(
    np.column_stack([treated_a, treated_b, controls]), t0=18, n_treated=2
)
for traj in ([0.0, 0.0], [1.5, 1.5]):
    result = sc.test_multi_unit(multi, traj, sc.EstimatorSpec.did())
    print(f"H0: mean trajectory {traj}: p={result.p_value:.3f}")
