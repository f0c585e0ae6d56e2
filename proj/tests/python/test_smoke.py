import math

import numpy as np
import pytest

import shotrb


def test_measure_recovers_noise_free_factors():
    samples = shotrb.trajectory((0.0, 24.0), (0.0, 0.0), depth=12.0, left_right=-1.5, entry_angle=44.0)
    assert samples.shape[1] == 4
    f = shotrb.measure_shot(samples, (0.0, 24.0), (0.0, 0.0), outcome=1)
    assert f["valid"]
    assert f["fill_prob"] is None
    # The hoop pseudo-points pull the fit slightly, so allow a fraction of an inch.
    assert f["depth"] == pytest.approx(12.0, abs=0.5)
    assert f["left_right"] == pytest.approx(-1.5, abs=0.5)
    assert f["entry_angle"] == pytest.approx(44.0, abs=1.0)

    # A planar track leaves the cross-track terms undetermined without a prior.
    ols = shotrb.measure_shot(samples, (0.0, 24.0), (0.0, 0.0), method="ols")
    assert not ols["valid"]
    assert ols["reason"] == "fit_failed"

    noisy = shotrb.trajectory((0.0, 24.0), (0.0, 0.0), 12.0, -1.5, 44.0, xy_noise=0.15, z_noise=0.1, seed=5)
    assert shotrb.measure_shot(noisy, (0.0, 24.0), (0.0, 0.0), method="ols")["valid"]


def test_short_track_is_filled_with_outcome():
    samples = shotrb.trajectory((0.0, 24.0), (0.0, 0.0), 11.0, 0.0, 45.0)[:4]
    f = shotrb.measure_shot(samples, (0.0, 24.0), (0.0, 0.0), outcome=1)
    assert not f["valid"]
    assert f["fill_prob"] == 1.0
    assert f["reason"] != "none"


def test_logistic_round_trip():
    factors, p, y = shotrb.sample_factors(20000, seed=3)
    model = shotrb.train_logistic(factors, y)
    assert model.converged
    assert len(model.raw_coef) == len(shotrb.expand_factors(11.0, 0.0, 45.0)) == 10
    pred = model.predict(factors)
    assert abs(pred.mean() - y.mean()) < 1e-6
    assert shotrb.score_brier(pred, y) < shotrb.score_brier(np.full(len(y), y.mean()), y)
    assert abs(shotrb.score_misclassification(pred, y) - np.minimum(p, 1 - p).mean()) < 0.02


def test_one_class_raises():
    factors, _, _ = shotrb.sample_factors(100, seed=4)
    with pytest.raises(shotrb.ShotrbError, match="OneClass"):
        shotrb.train_logistic(factors, np.ones(100, dtype=int))


def test_scores_of_constant_predictor():
    y = np.array([1] * 35 + [0] * 65)
    c = np.full(100, 0.35)
    assert shotrb.score_brier(c, y) == pytest.approx(0.2275)
    assert shotrb.score_logloss(c, y) == pytest.approx(-(0.35 * math.log(0.35) + 0.65 * math.log(0.65)))


def test_estimators():
    assert shotrb.raw_fg_pct(np.array([1, 0, 1, 1])) == 0.75
    assert shotrb.rb_fg_pct(np.array([0.2, 0.4, 0.9])) == pytest.approx(0.5)
    assert shotrb.shrink_estimate(0.4, 90.0) == pytest.approx(0.395, abs=1e-12)
    assert shotrb.shrink_estimate(0.9, 0.0) == pytest.approx(0.35)
    lo, hi = shotrb.normal_ci(0.309, 0.0274**2, 0.9)
    assert lo == pytest.approx(0.264, abs=1e-3)
    assert hi == pytest.approx(0.354, abs=1e-3)
    assert shotrb.raw_variance(0.5, 100) == pytest.approx(0.0025)
    a, b, n = 3.5, 6.5, 10
    assert shotrb.rb_variance(a, b, n) == pytest.approx(a * b / (n * (a + b) ** 2 * (a + b + 1)))


def test_beta_mle():
    rng = np.random.default_rng(7)
    fit = shotrb.fit_beta_mle(rng.beta(3.5, 6.5, size=5000))
    assert fit["converged"]
    assert fit["theta"] == pytest.approx(0.35, abs=0.01)
    assert fit["v"] == pytest.approx(10.0, rel=0.15)


def test_pipeline_runs_deterministically(tmp_path):
    text = "\n".join(
        [
            "sim.n_players = 12",
            "sim.n_games = 8",
            "sim.shots_min.3PT = 10",
            "sim.shots_max.3PT = 12",
            "sim.shots_min.FT = 6",
            "sim.shots_max.FT = 8",
            "sim.shots_min.2PT = 10",
            "sim.shots_max.2PT = 12",
            "eval.min_attempts = 2",
            "eval.rmse_seeds = 2",
            "eval.sd_repeats = 2",
        ]
    )
    assert "sim.n_players" in shotrb.default_config()
    a = shotrb.run_pipeline(str(tmp_path / "a"), text)
    b = shotrb.run_pipeline(str(tmp_path / "b"), text, jobs=2)
    manifest_a = (tmp_path / "a" / "manifest.json").read_text()
    assert manifest_a == (tmp_path / "b" / "manifest.json").read_text()
    assert a.endswith("a") and b.endswith("b")
    with pytest.raises(shotrb.ShotrbError, match="ConfigError"):
        shotrb.run_pipeline(str(tmp_path / "c"), "no.such.key = 1")
