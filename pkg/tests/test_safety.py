import numpy as np
import pytest

from slice_orch.common import make_rng
from slice_orch.core import Action, Episode, PolicySource, SliceKind, SliceSpec, State, Transition
from slice_orch.env import StepResult
from slice_orch.errors import EmptyDatasetError, UntrainedEstimatorError
from slice_orch.harness.experiments import run_estimator_calibration
from slice_orch.safety import (
    CostValueEstimator,
    EstimatorConfig,
    SafetyConfig,
    SafetyGuard,
    cost_to_go_dataset,
    fit_estimator,
    load_estimator,
    refit_estimator,
    run_guarded_episode,
    save_estimator,
    should_switch,
    suffix_sums,
)

FAST = EstimatorConfig(hidden=(8,), lr=1e-2, epochs=300)


class FixedPredictor:
    def __init__(self, mu, sigma=0.0):
        self.mu = mu
        self.sigma = sigma
        self.calls = 0

    def predict(self, state):
        self.calls += 1
        return self.mu, self.sigma


class ConstantCostEnv:
    """One slice; every slot costs the same regardless of the action."""

    def __init__(self, horizon=5, cost=0.5, sla=0.2):
        self.horizon = horizon
        self.cost = cost
        self.slices = [SliceSpec(0, SliceKind("RDC", 0.99), sla, 10.0)]
        self.slot = 0
        self.cum = 0.0

    def _state(self):
        return State(self.slot, 0.5, 0.7, 0.0, 0.0, 0.0, 0.0, self.slices[0].sla_threshold, self.cum, self.horizon)

    def reset(self, episode_index):
        self.slot, self.cum = 0, 0.0
        return [self._state()]

    def step(self, actions):
        self.slot += 1
        self.cum += self.cost
        state = self._state() if self.slot < self.horizon else None
        return [StepResult(state, -1.0, self.cost, 0.9, 1.0, 0.7)]


def _state(t=0, cum_cost=0.0, horizon=10):
    return State(t, 0.5, 0.7, 0.0, 0.0, 0.0, 0.0, 0.1, cum_cost, horizon)


def _episode(costs, sources=None, truncation=None):
    sources = sources or [PolicySource.BASELINE] * len(costs)
    transitions = [
        Transition(_state(t, sum(costs[:t]), len(costs)), Action.uniform(0.2), -1.2, c, s, 0.0)
        for t, (c, s) in enumerate(zip(costs, sources))
    ]
    return Episode(transitions, 0.1, truncation)


def test_should_switch_ties_switch():
    cfg = SafetyConfig(eta=1.0)
    assert should_switch(1.0, 0.5, 0.5, cfg, 10, 0.2)
    assert not should_switch(1.0, 0.5, 0.49, cfg, 10, 0.2)
    assert not should_switch(1.0, 0.5, 0.5, SafetyConfig(eta=0.0), 10, 0.2)


def test_safety_config_validation():
    with pytest.raises(ValueError):
        SafetyConfig(mode="sometimes")
    with pytest.raises(ValueError):
        SafetyConfig(eta=-1.0)


def test_guard_is_sticky():
    predictor = FixedPredictor(5.0)
    guard = SafetyGuard(SafetyConfig(), predictor, 10, 0.1)
    assert guard.check(_state(3))
    assert guard.truncation_slot == 3
    predictor.mu = 0.0
    assert guard.check(_state(4))
    assert guard.truncation_slot == 3
    assert predictor.calls == 1


def test_guard_modes():
    big = FixedPredictor(100.0)
    never = SafetyGuard(SafetyConfig(mode="never"), big, 10, 0.1)
    assert not never.check(_state(0, cum_cost=5.0))
    reactive = SafetyGuard(SafetyConfig(mode="reactive"), big, 10, 0.1)
    assert not reactive.check(_state(0, cum_cost=0.5))
    assert reactive.check(_state(1, cum_cost=1.0))
    assert big.calls == 0


def test_estimator_noise_is_seeded():
    cfg = SafetyConfig(est_noise_std=1.0)
    a = SafetyGuard(cfg, FixedPredictor(0.0), 10, 0.1, noise_rng=make_rng(0, "n"))
    b = SafetyGuard(cfg, FixedPredictor(0.0), 10, 0.1, noise_rng=make_rng(0, "n"))
    a.check(_state())
    b.check(_state())
    assert a.last_prediction == b.last_prediction
    assert a.last_prediction[0] != 0.0


def test_guarded_episode_reactive_switch_slot():
    env = ConstantCostEnv(horizon=5, cost=0.5, sla=0.2)
    episode = run_guarded_episode(
        lambda s: Action.uniform(0.5),
        None,
        lambda s: Action.uniform(1.0),
        env,
        SafetyConfig(mode="reactive"),
    )
    # budget T * C_max = 1.0 is reached after two slots
    assert episode.truncation_slot == 2
    assert [tr.source for tr in episode.transitions] == [PolicySource.LEARNED] * 2 + [PolicySource.BASELINE] * 3
    assert all(tr.action == Action.uniform(1.0) for tr in episode.transitions[2:])


def test_guarded_episode_proactive_switches_early():
    env = ConstantCostEnv(horizon=5, cost=0.5, sla=0.2)
    episode = run_guarded_episode(
        lambda s: Action.uniform(0.5),
        FixedPredictor(1.0),
        lambda s: Action.uniform(1.0),
        env,
        SafetyConfig(mode="proactive"),
    )
    assert episode.truncation_slot == 0
    assert episode.effective() == []


def test_guarded_episode_never_switches():
    env = ConstantCostEnv()
    episode = run_guarded_episode(
        lambda s: Action.uniform(0.5), FixedPredictor(99.0), lambda s: Action.uniform(1.0), env, SafetyConfig(mode="never")
    )
    assert not episode.switched
    assert len(episode.effective()) == env.horizon


def test_suffix_sums():
    assert suffix_sums([1.0, 2.0, 3.0]).tolist() == [6.0, 5.0, 3.0]


def test_cost_to_go_dataset_filters_learned_slots():
    baseline = _episode([0.1, 0.2, 0.0, 0.3])
    truncated = _episode(
        [0.1, 0.2, 0.0, 0.3],
        [PolicySource.LEARNED, PolicySource.LEARNED, PolicySource.BASELINE, PolicySource.BASELINE],
        truncation=2,
    )
    learned = _episode([0.1, 0.1], [PolicySource.LEARNED] * 2)
    x, y = cost_to_go_dataset([baseline, truncated, learned], baseline_only=True)
    assert x.shape == (6, 9)
    assert y.tolist() == pytest.approx([0.6, 0.5, 0.3, 0.3, 0.3, 0.3])
    _, y_all = cost_to_go_dataset([learned])
    assert y_all.tolist() == pytest.approx([0.2, 0.1])


def test_estimator_requires_fit():
    est = CostValueEstimator(FAST)
    with pytest.raises(UntrainedEstimatorError):
        est.predict(_state())
    with pytest.raises(EmptyDatasetError):
        est.train(np.empty((0, 9)), np.empty(0))
    with pytest.raises(EmptyDatasetError):
        fit_estimator(est, [])


def _fitted_estimator():
    rng = make_rng(0, "est-data")
    x = rng.uniform(size=(200, 9))
    y = np.full(200, 2.0)
    est = CostValueEstimator(FAST, seed=1)
    stats = est.train(x, y)
    return est, x, stats


def test_estimator_fits_constant_target():
    est, x, stats = _fitted_estimator()
    assert stats.final_loss < stats.initial_loss
    assert est.target_scale == 2.0
    mu, sigma = est.predict_features(x[:20], 16, make_rng(2))
    assert np.mean(mu) == pytest.approx(2.0, abs=0.3)
    assert np.all(sigma > 0)


def test_estimator_prediction_is_deterministic():
    est, _, _ = _fitted_estimator()
    assert est.predict(_state(3)) == est.predict(_state(3))


def test_uncertainty_grows_off_support():
    est, x, _ = _fitted_estimator()
    _, inside = est.predict_features(x[:1], 32, make_rng(5))
    _, outside = est.predict_features(np.full((1, 9), 50.0), 32, make_rng(5))
    assert outside[0] > inside[0]


def test_refit_uses_offline_data_and_window():
    est = CostValueEstimator(EstimatorConfig(hidden=(8,), epochs=5, window_transitions=3), seed=0)
    assert refit_estimator(est, [_episode([0.1, 0.2], [PolicySource.LEARNED] * 2)]) is None
    fit_estimator(est, [_episode([0.1, 0.2, 0.0])])
    stats = refit_estimator(est, [_episode([0.1, 0.2, 0.0, 0.3])], epochs=2)
    assert stats.samples == 3 + 3
    assert est.fits == 2


def test_estimator_checkpoint(tmp_path):
    est, x, _ = _fitted_estimator()
    save_estimator(tmp_path / "est.json", est)
    loaded = load_estimator(tmp_path / "est.json", FAST, seed=1, slice_id=0)
    a = est.predict_features(x[:5], 8, make_rng(3))
    b = loaded.predict_features(x[:5], 8, make_rng(3))
    np.testing.assert_allclose(a[0], b[0])
    np.testing.assert_allclose(a[1], b[1])


@pytest.mark.slow
def test_estimator_is_calibrated():
    result = run_estimator_calibration(seed=0)
    assert result.mean == pytest.approx(result.target_mean, rel=0.1)
    assert result.std == pytest.approx(result.target_std, rel=0.25)
