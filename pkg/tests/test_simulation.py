import math

import numpy as np
import pytest

from mlrselect import ModelIndex, SimulationConfig, generate_setting, run_monte_carlo, sample_errors
from mlrselect.errors import ConfigError
from mlrselect.koo import SdRule
from mlrselect.simulation import (
    Bucket,
    Method,
    classify,
    default_methods,
    rep_rng,
    table1_estimates,
    theta_star,
)


@pytest.mark.parametrize("dist", ["normal", "t3", "chisq2"])
def test_error_moments(dist):
    e = sample_errors(dist, 1_000_000, 1, np.random.default_rng(1)).ravel()
    assert abs(e.mean()) < 0.01
    # t3 has no fourth moment, so its sample variance converges slowly
    assert e.var() == pytest.approx(1.0, abs=0.05 if dist == "t3" else 0.01)


def test_error_shapes_differ():
    rng = np.random.default_rng(2)
    chi = sample_errors("chisq2", 200_000, 1, rng).ravel()
    assert chi.min() >= -1.0  # (chi2 - 2) / 2 is bounded below by -1
    skew = np.mean(chi ** 3)
    assert skew == pytest.approx(2.0, abs=0.15)  # chi2_2 skewness is 2


def test_theta_star():
    np.testing.assert_allclose(theta_star(4), [1.0, -0.5, 0.25, -0.125])


def small_cfg(**kw):
    base = dict(setting="I", dist="normal", n=100, c_target=0.2, alpha_target=0.1, reps=10, seed=3)
    base.update(kw)
    return SimulationConfig(**base)


def test_generated_truth_is_rank_one():
    cfg = small_cfg()
    d, truth = generate_setting(cfg, 0)
    assert (d.n, d.p, d.k) == (100, 20, 10)
    assert truth.j_star == ModelIndex((1, 2, 3, 4, 5))
    assert np.linalg.matrix_rank(truth.theta) == 1
    assert d.x.min() >= 1.0 and d.x.max() <= 5.0


def test_zero_noise_is_an_exact_fit():
    d, truth = generate_setting(small_cfg(), 2, zero_noise=True)
    resid = d.y - d.x[:, :5] @ truth.theta
    assert np.abs(resid).max() < 1e-12 * np.abs(d.y).max()


def test_setting_two_scales_signal_by_root_n():
    d1, t1 = generate_setting(small_cfg(setting="I"), 4, zero_noise=True)
    d2, t2 = generate_setting(small_cfg(setting="II"), 4, zero_noise=True)
    np.testing.assert_array_equal(d1.x, d2.x)
    np.testing.assert_allclose(d2.y, math.sqrt(100) * d1.y, rtol=1e-13)
    np.testing.assert_allclose(t2.theta, math.sqrt(100) * t1.theta, rtol=1e-15)


def test_classify_buckets():
    j = ModelIndex((1, 2))
    assert classify(ModelIndex((1, 2)), j) is Bucket.EXACT
    assert classify(ModelIndex((1, 2, 5)), j) is Bucket.OVER
    assert classify(ModelIndex((1,)), j) is Bucket.UNDER
    assert classify(ModelIndex((1, 5)), j) is Bucket.UNDER  # misses a true predictor
    assert classify(ModelIndex(), j) is Bucket.UNDER


def test_single_rep_fractions_are_one_hot():
    rep = run_monte_carlo(small_cfg(reps=1))
    for s in rep.summaries:
        assert sorted([s.fraction_under, s.fraction_exact, s.fraction_over]) == [0.0, 0.0, 1.0]


def test_counts_sum_to_reps_and_mean_over_size():
    rep = run_monte_carlo(small_cfg(reps=25))
    for s in rep.summaries:
        assert s.count_under + s.count_exact + s.count_over == 25
        if s.count_over:
            assert s.mean_over_size > 5
        else:
            assert s.mean_over_size == 0.0


def test_determinism_across_workers():
    cfg = small_cfg(reps=16, dist="t3")
    ref = run_monte_carlo(cfg, workers=1).to_flat_dict()
    for w in (4, 8):
        assert run_monte_carlo(cfg, workers=w).to_flat_dict() == ref


def test_rep_streams_are_independent_of_order():
    a = rep_rng(5, 3).standard_normal(4)
    rep_rng(5, 0).standard_normal(100)
    np.testing.assert_array_equal(rep_rng(5, 3).standard_normal(4), a)
    assert not np.array_equal(rep_rng(5, 4).standard_normal(4), a)


def test_report_serialization():
    rep = run_monte_carlo(small_cfg(reps=3))
    flat = rep.to_flat_dict()
    assert flat["n"] == 100 and flat["reps"] == 3
    assert "gkoo-a[sd:2.0].fraction_exact" in flat
    rows = rep.to_rows()
    assert [r["method"] for r in rows] == ["koo-aic", "koo-bic", "koo-cp", "gkoo-a", "gkoo-c"]
    assert rows[3]["rule"] == "sd:2.0" and rows[0]["rule"] == "none"
    assert rep.summary("koo-cp").method.name == "koo-cp"


@pytest.mark.parametrize("kw", [
    dict(c_target=0.6, alpha_target=0.5),
    dict(c_target=0.0),
    dict(reps=0),
    dict(k_star=11),
    dict(n=5),
    dict(methods=()),
])
def test_config_errors(kw):
    with pytest.raises(ConfigError):
        small_cfg(**kw)


def test_constraint_message_names_the_limit():
    with pytest.raises(ConfigError, match="alpha \\+ c"):
        small_cfg(c_target=0.6, alpha_target=0.5)


def test_method_parsing():
    assert Method.parse("gkoo-c", "mad:1.5").key == "gkoo-c[mad:1.5]"
    assert Method.parse("koo-bic", "sd:2").rule is None
    with pytest.raises(ConfigError):
        Method.parse("lasso")
    with pytest.raises(ConfigError):
        Method.parse("gkoo-a")
    assert len(default_methods(SdRule(1.0))) == 5


def test_table1_estimates_small_n():
    est = table1_estimates(300, 0.2, 0.1, draws=4)
    assert est.draws == 4
    assert math.isfinite(est.v3) and math.isfinite(est.v4)
    # noncentrality stays bounded under Setting I: kappa ~ (1 - alpha) * (4/3)^2
    assert est.kappa == pytest.approx(0.9 * 16 / 9, rel=0.2)
