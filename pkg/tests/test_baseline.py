import logging

import numpy as np
import pytest

from slice_orch.baseline import (
    BaselineConfig,
    baseline_act,
    build_table,
    load_tables,
    model_based_act,
    project_actions,
    save_tables,
)
from slice_orch.baseline.grid import grid_values
from slice_orch.baseline.model_based import hvs_downlink_share, mar_uplink_share
from slice_orch.core import Action, ResourceVector, SliceKind, SliceSpec, State, counted_resources, reward_from_action
from slice_orch.env import EnvConfig
from slice_orch.env.models import DL_BW, TN_PATH, UL_MCS, downlink_capacity, quantize_offset

SMALL = BaselineConfig(resolution=3, traffic_buckets=4, eval_slots=4)


def _spec(tag, target, max_traffic, sid=0):
    return SliceSpec(sid, SliceKind(tag, target), 0.05, max_traffic)


def _state(f_prev, h_prev=0.7):
    return State(0, f_prev, h_prev, 0.0, 0.0, 0.0, 0.0, 0.05, 0.0, 96)


def test_grid_values():
    # counted resource: never zero
    assert grid_values(0, 4).tolist() == pytest.approx([0.25, 0.5, 0.75, 1.0])
    # MCS offset knob includes zero
    assert grid_values(UL_MCS, 3).tolist() == pytest.approx([0.0, 0.5, 1.0])


def test_projection_leaves_feasible_actions_alone():
    actions = [Action.uniform(0.3), Action.uniform(0.4)]
    out = project_actions(actions, ResourceVector.full(1.0))
    assert out == actions


def test_projection_scales_overrequested_resources():
    actions = [Action(u_ul_bw=0.8, u_ul_mcs=0.9, u_cpu=0.2), Action(u_ul_bw=0.4, u_cpu=0.3)]
    out = project_actions(actions, ResourceVector.full(1.0))
    assert sum(a.u_ul_bw for a in out) <= 1.0
    assert out[0].u_ul_bw / out[1].u_ul_bw == pytest.approx(2.0)
    # feasible resources and uncounted knobs keep their values
    assert [a.u_cpu for a in out] == [0.2, 0.3]
    assert out[0].u_ul_mcs == 0.9


def test_projection_respects_every_capacity():
    rng = np.random.default_rng(4)
    actions = [Action.from_array(rng.uniform(size=10)) for _ in range(3)]
    caps = ResourceVector(0.5, 1.0, 0.7, 1.0, 0.9, 0.3)
    totals = np.sum([counted_resources(a).as_array() for a in project_actions(actions, caps)], axis=0)
    assert np.all(totals <= caps.as_array())
    assert project_actions([], caps) == []


def test_build_table_meets_sla_margin():
    for spec in (_spec("MAR", 500.0, 5.0), _spec("HVS", 30.0, 2.0), _spec("RDC", 0.99999, 100.0)):
        table = build_table(EnvConfig(), spec, SMALL, seed=0)
        assert table.num_buckets == 4
        for ok, cost in zip(table.feasible, table.mean_costs):
            if ok:
                assert cost <= SMALL.safety_margin * spec.sla_threshold


def test_build_table_prefers_low_usage():
    # an idle slice is served by the cheapest grid point
    table = build_table(EnvConfig(), _spec("MAR", 500.0, 0.0), SMALL)
    action = table.actions[0]
    assert all(table.feasible)
    assert action.u_ul_bw == pytest.approx(1 / 3)
    assert action.u_cpu == pytest.approx(1 / 3)
    assert action.u_tn_path == SMALL.default_path


def test_build_table_is_deterministic():
    spec = _spec("HVS", 30.0, 2.0)
    a = build_table(EnvConfig(), spec, SMALL, seed=3)
    b = build_table(EnvConfig(), spec, SMALL, seed=3)
    assert a.actions == b.actions
    assert a.mean_costs == b.mean_costs


def test_infeasible_bucket_falls_back_to_max_resources(caplog):
    spec = _spec("MAR", 1.0, 5.0)
    with caplog.at_level(logging.WARNING):
        table = build_table(EnvConfig(), spec, SMALL)
    assert not any(table.feasible)
    assert table.actions[-1].u_ul_bw == 1.0
    assert table.actions[-1].u_cpu == 1.0
    assert "No grid point meets the SLA" in caplog.text


def test_bucket_lookup():
    table = build_table(EnvConfig(), _spec("RDC", 0.99999, 100.0), SMALL)
    assert table.bucket(0.0) == 0
    assert table.bucket(0.25) == 0
    assert table.bucket(0.26) == 1
    assert table.bucket(1.0) == 3
    assert baseline_act(table, _state(0.9)) == table.actions[3]


def test_tables_round_trip(tmp_path):
    specs = [_spec("MAR", 500.0, 5.0, 0), _spec("RDC", 0.99999, 100.0, 1)]
    tables = {s.id: build_table(EnvConfig(), s, SMALL) for s in specs}
    save_tables(tmp_path / "tables.json", tables)
    loaded = load_tables(tmp_path / "tables.json")
    assert sorted(loaded) == [0, 1]
    for sid, table in tables.items():
        assert loaded[sid].actions == table.actions
        assert loaded[sid].feasible == table.feasible
        assert loaded[sid].key_dims == table.key_dims


def test_mar_uplink_share():
    cfg = EnvConfig()
    spec = _spec("MAR", 500.0, 5.0)
    assert mar_uplink_share(0.0, spec, 0.7, cfg) == 0.0
    assert mar_uplink_share(2.0, _spec("MAR", 50.0, 5.0), 0.7, cfg) == 1.0
    u = mar_uplink_share(2.0, spec, 0.7, cfg)
    assert 0.0 < u < mar_uplink_share(4.0, spec, 0.7, cfg) <= 1.0


def test_hvs_downlink_share_meets_target():
    cfg = EnvConfig()
    spec = _spec("HVS", 30.0, 2.0)
    base = np.full(10, 0.5)
    u = hvs_downlink_share(1.0, spec, 0.7, cfg, base)
    a = base.copy()
    a[DL_BW] = u
    assert downlink_capacity(a, 0.7, cfg) == pytest.approx(30.0 * cfg.hvs.frame_mbits * 1.0, rel=1e-6)


def test_model_based_act():
    cfg = EnvConfig()
    rdc = model_based_act(_state(0.5), _spec("RDC", 0.99999, 100.0), cfg, fixed_level=0.4)
    assert rdc.u_ul_mcs == 0.6
    assert rdc.u_dl_mcs == 0.0
    assert rdc.as_array()[TN_PATH] == 0.4
    mar = model_based_act(_state(0.0), _spec("MAR", 500.0, 5.0), cfg)
    assert mar.u_ul_bw == 0.0
    assert reward_from_action(mar) == pytest.approx(-2.5)


def test_model_based_rdc_mcs_follows_offset_grid():
    cfg = EnvConfig(max_mcs_offset=20)
    rdc = model_based_act(_state(0.5), _spec("RDC", 0.99999, 100.0), cfg)
    assert rdc.u_ul_mcs == pytest.approx(0.3)
    assert quantize_offset(rdc.u_ul_mcs, cfg.max_mcs_offset) == 6
    assert quantize_offset(rdc.u_dl_mcs, cfg.max_mcs_offset) == 0


def test_baseline_config_validation():
    with pytest.raises(ValueError, match="resolution"):
        BaselineConfig(resolution=1)
    with pytest.raises(ValueError, match="safety_margin"):
        BaselineConfig(safety_margin=1.5)
    BaselineConfig(resolution=2)
