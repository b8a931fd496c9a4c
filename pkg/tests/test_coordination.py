import logging

import numpy as np
import pytest
import torch

from slice_orch.baseline import KEY_DIMS
from slice_orch.common import make_rng
from slice_orch.coordination import (
    CoordConfig,
    CoordState,
    ModifierConfig,
    ModifierDataset,
    ModifierNet,
    NoisyModifier,
    OracleModifier,
    brute_force_modify,
    build_modifier_dataset,
    coordinate,
    demand,
    exponential_beta_sampler,
    fixed_beta_actions,
    h_objective,
    load_modifier,
    modify,
    relative_gap,
    save_modifier,
    train_modifier,
)
from slice_orch.core import COUNTED_INDICES, Action, PolicySource, ResourceVector, SliceKind, SliceSpec, State, Transition
from slice_orch.env import EnvConfig, SlicingNetwork, gen_traffic
from slice_orch.env.models import UL_BW, UL_MCS
from slice_orch.errors import EmptyDatasetError
from slice_orch.nn import forward

CAPS = ResourceVector.full(1.0)


def _state(t=0):
    return State(t, 0.5, 0.7, 0.0, 0.0, 0.0, 0.0, 0.05, 0.0, 8)


def no_cost(state, action):
    return 0.0


def bandwidth_cost(state, action):
    return max(0.0, 0.5 - action.u_ul_bw)


def identity(state, a, beta):
    return a


def test_h_objective():
    a = Action.uniform(0.5)
    assert h_objective(_state(), a, a, ResourceVector(), no_cost) == 0.0
    assert h_objective(_state(), a, a, ResourceVector.full(1.0), no_cost) == pytest.approx(3.0)
    assert h_objective(_state(), a, Action.uniform(0.0), ResourceVector(), bandwidth_cost) == pytest.approx(10 * 0.25 + 0.5)


def test_relative_gap():
    assert relative_gap(1.1, 1.0) == pytest.approx(0.1)
    assert relative_gap(1.0, 0.0) == pytest.approx(100.0)


def test_brute_force_keeps_action_at_zero_price():
    a = Action.uniform(0.5)
    assert brute_force_modify(_state(), a, ResourceVector(), no_cost, (UL_BW, UL_MCS)) == a


def test_brute_force_reacts_to_price_and_cost():
    a = Action.uniform(0.5)
    beta = ResourceVector(ul_bw=10.0, dl_bw=0.4)
    cheap = brute_force_modify(_state(), a, beta, no_cost, (UL_BW,))
    assert cheap.u_ul_bw == 0.0
    # dims outside the key set are left alone even when priced
    assert cheap.u_dl_bw == 0.5
    assert cheap.u_tn_bw == 0.5
    # an SLA cost can outweigh a modest price
    kept = brute_force_modify(_state(), a, ResourceVector(ul_bw=0.5), bandwidth_cost, (UL_BW,))
    assert kept.u_ul_bw == 0.5


def _mar_network():
    spec = SliceSpec(0, SliceKind("MAR", 250.0), 0.05, 5.0)
    traces = {spec.id: gen_traffic(spec, 16, 0, 8)}
    return SlicingNetwork(EnvConfig(slots_per_episode=8), [spec], traces, 0), spec


def _busy_state(t=0):
    return State(t, 1.0, 0.7, 0.5, 0.5, -1.0, 0.0, 0.05, 0.0, 8)


def test_brute_force_never_worse_than_the_proposed_action():
    network, spec = _mar_network()

    def cost_fn(state, action):
        return network.expected_cost(0, state, action)

    a = Action(u_ul_bw=1.0, u_tn_bw=1.0, u_cpu=1.0, u_ram=0.3)
    beta = ResourceVector(ram=0.6)
    best = brute_force_modify(_busy_state(), a, beta, cost_fn, KEY_DIMS[spec.kind.tag])
    # ram is not a key knob for this slice, so the price on it cannot move it
    assert best.u_ram == 0.3
    h_best = h_objective(_busy_state(), a, best, beta, cost_fn)
    assert h_best <= h_objective(_busy_state(), a, a, beta, cost_fn) + 1e-12


def test_dataset_targets_dominate_logged_actions_under_env_cost():
    network, spec = _mar_network()
    rng = make_rng(11)
    log = [
        Transition(
            _busy_state(t % 8),
            Action.from_array(rng.uniform(size=10)),
            -3.0,
            0.0,
            PolicySource.BASELINE,
            0.0,
        )
        for t in range(12)
    ]
    data = build_modifier_dataset(
        log,
        exponential_beta_sampler(0.5),
        lambda s, a: network.expected_cost(0, s, a),
        KEY_DIMS[spec.kind.tag],
        resolution=3,
        betas_per_pair=2,
        rng=make_rng(12),
    )
    assert len(data) == 24
    assert all(hs <= ho + 1e-12 for hs, ho in zip(data.h_star, data.h_original))


def test_brute_force_rejects_coarse_grid():
    with pytest.raises(ValueError):
        brute_force_modify(_state(), Action.uniform(0.5), ResourceVector(), no_cost, (UL_BW,), resolution=1)


def test_coordinate_feasible_demand_takes_one_round():
    actions = [Action.uniform(0.3)] * 3
    coord = CoordState()
    result = coordinate([_state()] * 3, actions, [identity] * 3, coord, CAPS)
    assert result.converged
    assert result.rounds == 1
    assert result.actions == actions
    assert np.all(result.beta == 0.0)


def test_coordinate_converges_with_price_responsive_modifiers():
    modifier = OracleModifier(no_cost, COUNTED_INDICES)
    coord = CoordState(CoordConfig(step=0.5, max_rounds=50))
    result = coordinate([_state()] * 3, [Action.uniform(0.5)] * 3, [modifier] * 3, coord, CAPS)
    assert result.converged
    assert 1 < result.rounds < 50
    assert np.all(demand(result.actions) <= 1.0 + 1e-6)
    assert np.all(result.beta > 0.0)


def test_coordinate_falls_back_to_projection(caplog):
    coord = CoordState(CoordConfig(max_rounds=3))
    with caplog.at_level(logging.WARNING):
        result = coordinate([_state()] * 3, [Action.uniform(0.5)] * 3, [identity] * 3, coord, CAPS)
    assert not result.converged
    assert result.rounds == 3
    assert np.all(demand(result.actions) <= 1.0)
    assert "did not converge" in caplog.text


def test_coordinate_warm_start():
    actions = [Action.uniform(0.5)] * 3
    warm = CoordState(CoordConfig(max_rounds=2))
    coordinate([_state()] * 3, actions, [identity] * 3, warm, CAPS)
    first = warm.beta.copy()
    coordinate([_state()] * 3, actions, [identity] * 3, warm, CAPS)
    assert np.all(warm.beta > first)

    cold = CoordState(CoordConfig(max_rounds=2, warm_start=False))
    coordinate([_state()] * 3, actions, [identity] * 3, cold, CAPS)
    coordinate([_state()] * 3, actions, [identity] * 3, cold, CAPS)
    np.testing.assert_allclose(cold.beta, first)


def test_coord_state_validation():
    with pytest.raises(ValueError):
        CoordState(beta=np.full(6, -1.0))
    with pytest.raises(ValueError):
        CoordConfig(max_rounds=0)


def test_fixed_beta_actions_are_feasible():
    modifier = OracleModifier(no_cost, COUNTED_INDICES)
    out = fixed_beta_actions([_state()] * 3, [Action.uniform(0.5)] * 3, [modifier] * 3, ResourceVector.full(0.4), CAPS)
    # per counted dim (v - 0.5)^2 + 0.4 v is smallest at 0.25 on the 5-point grid
    assert all(a.u_ul_bw == pytest.approx(0.25) for a in out)
    assert all(a.u_ul_mcs == 0.5 for a in out)
    assert np.all(demand(out) <= 1.0)


def test_noisy_modifier():
    quiet = NoisyModifier(identity, 0.0, make_rng(0))
    assert quiet(_state(), Action.uniform(0.4), ResourceVector()) == Action.uniform(0.4)
    loud = NoisyModifier(identity, 5.0, make_rng(0))
    out = loud(_state(), Action.uniform(0.4), ResourceVector()).as_array()
    assert np.all((out >= 0.0) & (out <= 1.0))


def _transitions(n=40):
    return [
        Transition(_state(t % 8), Action.uniform(0.5), -3.0, 0.0, PolicySource.BASELINE, 0.0) for t in range(n)
    ]


def test_build_modifier_dataset():
    data = build_modifier_dataset(
        _transitions(10), exponential_beta_sampler(0.5), bandwidth_cost, (UL_BW,), betas_per_pair=2, rng=make_rng(1)
    )
    assert len(data) == 20
    assert all(hs <= ho + 1e-12 for hs, ho in zip(data.h_star, data.h_original))
    x, y = data.arrays()
    assert x.shape == (20, 9 + 10 + 6)
    assert y.shape == (20, 10)
    with pytest.raises(EmptyDatasetError):
        build_modifier_dataset([], exponential_beta_sampler(0.5), no_cost, (UL_BW,))


def test_train_modifier_reduces_error():
    config = ModifierConfig(hidden=(16,), lr=1e-2, epochs=100, batch_size=32)
    data = build_modifier_dataset(_transitions(), exponential_beta_sampler(0.5), bandwidth_cost, (UL_BW,), rng=make_rng(2))
    net = ModifierNet.create(config, make_rng(3))
    x, y = data.arrays()
    initial = float(np.mean((forward(net.mlp, x) - y) ** 2))
    stats = train_modifier(net, data, cost_fn=bandwidth_cost, rng=make_rng(4))
    assert stats.train_size == 32
    assert stats.holdout_size == 8
    assert stats.train_mse < initial
    assert 0.0 <= stats.within_tolerance <= 1.0
    with pytest.raises(EmptyDatasetError):
        train_modifier(net, ModifierDataset())


def test_modifier_checkpoint(tmp_path):
    config = ModifierConfig(hidden=(4,))
    net = ModifierNet.create(config, make_rng(0))
    save_modifier(tmp_path / "modifier.json", net)
    loaded = load_modifier(tmp_path / "modifier.json", config)
    beta = ResourceVector.full(0.3)
    assert loaded(_state(), Action.uniform(0.5), beta) == net(_state(), Action.uniform(0.5), beta)


def test_modify_clips_into_unit_box():
    net = ModifierNet.create(ModifierConfig(hidden=(4,)), make_rng(5))
    with torch.no_grad():
        net.mlp.linears()[-1].bias.fill_(10.0)
    out = modify(net, _state(), Action.uniform(0.5), ResourceVector.full(0.2))
    assert np.all((out.as_array() >= 0.0) & (out.as_array() <= 1.0))
    assert out == net(_state(), Action.uniform(0.5), ResourceVector.full(0.2))
