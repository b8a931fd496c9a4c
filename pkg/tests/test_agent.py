import numpy as np
import pytest
import torch

from slice_orch.agent import (
    AgentConfig,
    RolloutBuffer,
    act,
    act_features,
    add_episode,
    bc_dataset,
    bc_pretrain,
    clipped_surrogate,
    init_agent,
    load_agent,
    log_prob,
    mean_action,
    ppo_update,
    save_agent,
    shaped_reward,
    update_lambda,
    value,
)
from slice_orch.agent.lagrange import dual_step
from slice_orch.common import make_rng
from slice_orch.core import Action, Episode, PolicySource, State, Transition
from slice_orch.errors import EmptyDatasetError
from slice_orch.harness.experiments import run_constrained_bandit, run_toy_mdp
from slice_orch.nn import as_tensor

SMALL = AgentConfig(hidden=(8,), epochs_per_update=2, minibatch_size=16)


def _agent(config=SMALL, seed=0, **kwargs):
    return init_agent(config, make_rng(seed, "agent-test"), **kwargs)


def _constant_critic(agent, level):
    with torch.no_grad():
        for layer in agent.critic.linears():
            layer.weight.zero_()
            layer.bias.zero_()
        agent.critic.linears()[-1].bias.fill_(level)


def _state(t, horizon=4, cum_cost=0.0):
    return State(t, 0.5, 0.7, 0.5, 0.5, -1.0, 0.0, 0.05, cum_cost, horizon)


def _transition(t, source=PolicySource.LEARNED, cost=0.0, action=None, proposed=None):
    action = action or Action.uniform(0.3)
    return Transition(_state(t), action, -1.8, cost, source, 0.0, proposed=proposed)


def test_shaped_reward():
    assert shaped_reward(-2.0, 0.5, 4.0, 2) == pytest.approx(-3.0)
    assert shaped_reward(-2.0, 0.5, 0.0, 2) == -2.0
    with pytest.raises(ValueError):
        shaped_reward(-2.0, 0.5, 1.0, 0)


def test_dual_step_projects_onto_nonnegative():
    assert dual_step(1.0, 10.0, 0.15, 0.05) == pytest.approx(2.0)
    assert dual_step(0.2, 10.0, 0.0, 0.05) == 0.0


def test_update_lambda():
    agent = _agent(AgentConfig(hidden=(8,), lambda_lr=100.0))
    episodes = [Episode([_transition(0, cost=0.1), _transition(1, cost=0.1)], 0.05)]
    assert update_lambda(agent, episodes) == pytest.approx(5.0)
    with pytest.raises(EmptyDatasetError):
        update_lambda(agent, [])


def test_config_validation():
    with pytest.raises(ValueError):
        AgentConfig(clip_ratio=1.5)
    with pytest.raises(ValueError):
        AgentConfig(modified_action_policy="ignore")


def test_act_stays_in_unit_box():
    agent = _agent()
    for t in range(4):
        action, logp = act(agent, _state(t), explore=True)
        assert np.all((action.as_array() >= 0) & (action.as_array() <= 1))
        assert np.isfinite(logp)


def test_exploration_is_centered_on_mean_action():
    agent = _agent(zero_actor=True)
    x = _state(0).features()
    greedy, _ = act_features(agent, x, explore=False)
    np.testing.assert_allclose(greedy, 0.5)
    samples = np.stack([act_features(agent, x, explore=True)[0] for _ in range(2000)])
    np.testing.assert_allclose(samples.mean(axis=0), 0.5, atol=0.02)
    assert samples.std() > 0.01


def test_log_prob_matches_sampling_density():
    agent = _agent()
    x = _state(1).features()
    a, logp = act_features(agent, x, explore=True)
    assert log_prob(agent, x, a)[0] == pytest.approx(logp, rel=1e-6, abs=1e-6)


def test_clipped_surrogate():
    ratio = as_tensor([1.5, 0.5])
    assert float(clipped_surrogate(ratio, as_tensor([1.0, 1.0]), 0.2).mean()) == pytest.approx(0.85)
    assert float(clipped_surrogate(ratio, as_tensor([-1.0, -1.0]), 0.2).mean()) == pytest.approx(-1.15)


def test_gae_with_zero_critic():
    agent = _agent(AgentConfig(hidden=(4,), gamma=0.5, gae_lambda=1.0))
    _constant_critic(agent, 0.0)
    buffer = RolloutBuffer()
    for _ in range(3):
        buffer.add(np.zeros(9), np.full(10, 0.5), 0.0, 1.0)
    buffer.finish_path(agent)
    assert buffer.advantages == pytest.approx([1.75, 1.5, 1.0])
    assert buffer.returns == pytest.approx([1.75, 1.5, 1.0])


def test_truncated_path_bootstraps():
    agent = _agent(AgentConfig(hidden=(4,), gamma=0.5, gae_lambda=1.0))
    _constant_critic(agent, 2.0)
    buffer = RolloutBuffer()
    buffer.add(np.zeros(9), np.full(10, 0.5), 0.0, 1.0)
    buffer.finish_path(agent, bootstrap_x=np.zeros(9))
    buffer.add(np.zeros(9), np.full(10, 0.5), 0.0, 1.0)
    buffer.finish_path(agent)
    assert buffer.advantages == pytest.approx([0.0, -1.0])


def test_add_episode_uses_learned_prefix_only():
    agent = _agent()
    episode = Episode(
        [
            _transition(0),
            _transition(1),
            _transition(2, PolicySource.BASELINE),
            _transition(3, PolicySource.BASELINE),
        ],
        0.05,
        truncation_slot=2,
    )
    buffer = RolloutBuffer()
    assert add_episode(buffer, agent, episode) == 2
    assert len(buffer.advantages) == 2


def test_add_episode_discards_modified_actions():
    agent = _agent(AgentConfig(hidden=(8,), modified_action_policy="discard"))
    episode = Episode(
        [
            _transition(0, proposed=Action.uniform(0.3)),
            _transition(1, proposed=Action.uniform(0.6)),
        ],
        0.05,
    )
    buffer = RolloutBuffer()
    add_episode(buffer, agent, episode)
    assert buffer.mask == [True, False]


def test_ppo_update_requires_finished_data():
    agent = _agent()
    with pytest.raises(EmptyDatasetError):
        ppo_update(agent, RolloutBuffer())
    buffer = RolloutBuffer()
    buffer.add(np.zeros(9), np.full(10, 0.5), 0.0, 1.0)
    with pytest.raises(ValueError):
        ppo_update(agent, buffer)


def test_ppo_prefers_higher_advantage_action():
    agent = _agent(AgentConfig(hidden=(8,), epochs_per_update=5, minibatch_size=64, actor_lr=1e-2))
    x = _state(0).features()
    good, bad = np.full(10, 0.8), np.full(10, 0.2)
    buffer = RolloutBuffer()
    for _ in range(16):
        for action, reward in ((good, 1.0), (bad, -1.0)):
            buffer.add(x, action, float(log_prob(agent, x, action)[0]), reward)
            buffer.finish_path(agent)
    before = log_prob(agent, x, good)[0] - log_prob(agent, x, bad)[0]
    stats = ppo_update(agent, buffer)
    after = log_prob(agent, x, good)[0] - log_prob(agent, x, bad)[0]
    assert after > before
    assert stats.samples == 32
    assert bool((agent.log_std >= SMALL.min_log_std).all())


def test_behavior_cloning_fits_constant_action():
    agent = _agent(AgentConfig(hidden=(8,), bc_lr=1e-2, bc_batch_size=64))
    features = make_rng(1).uniform(size=(128, 9))
    target = np.full((128, 10), 0.3)
    stats = bc_pretrain(agent, features, target, epochs=500)
    assert stats.final_mse < stats.initial_mse
    assert stats.final_mse < 1e-3
    np.testing.assert_allclose(mean_action(agent, features[0]), 0.3, atol=0.05)


def test_bc_dataset():
    episode = Episode([_transition(0, PolicySource.BASELINE), _transition(1, PolicySource.BASELINE)], 0.05)
    features, actions = bc_dataset([episode])
    assert features.shape == (2, 9)
    assert actions.shape == (2, 10)
    with pytest.raises(EmptyDatasetError):
        bc_dataset([])
    with pytest.raises(ValueError):
        bc_pretrain(_agent(), features, actions[:1])


def test_agent_checkpoint(tmp_path):
    agent = _agent()
    bc_pretrain(agent, make_rng(1).uniform(size=(8, 9)), np.full((8, 10), 0.3), epochs=2)
    agent.lam = 3.5
    agent.updates = 2
    save_agent(tmp_path / "agent.json", agent)
    loaded = load_agent(tmp_path / "agent.json", SMALL, seed=0, slice_id=1)
    x = make_rng(2).uniform(size=(3, 9))
    assert np.array_equal(mean_action(loaded, x), mean_action(agent, x))
    assert np.array_equal(value(loaded, x), value(agent, x))
    assert loaded.lam == 3.5
    assert loaded.updates == 2
    saved, restored = agent.bc_opt.state_dict()["state"], loaded.bc_opt.state_dict()["state"]
    assert saved.keys() == restored.keys() and saved
    for idx in saved:
        assert torch.equal(saved[idx]["exp_avg"], restored[idx]["exp_avg"])


@pytest.mark.slow
def test_primal_dual_reaches_constrained_optimum():
    result = run_constrained_bandit(seed=0)
    assert result.mean_cost == pytest.approx(0.05, abs=0.02)
    assert 0.5 * result.optimal_lam <= result.lam <= 2.0 * result.optimal_lam


@pytest.mark.slow
def test_ppo_solves_two_state_chain():
    greedy, optimal = run_toy_mdp(seed=0)
    assert optimal == pytest.approx(9.0)
    assert greedy >= 0.95 * optimal
