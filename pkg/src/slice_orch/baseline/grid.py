"""Rule-based baseline: an offline grid search over each slice's key knobs, bucketed by traffic."""

import itertools
import logging
from dataclasses import dataclass, field

import numpy as np

from ..common import make_rng, read_json, write_json
from ..core import ACTION_DIM, COUNTED_INDICES, Action, SliceSpec, SliceTag, State, cost_from_perf
from ..env.channel import ChannelProcess
from ..env.models import (
    CPU,
    DL_BW,
    DL_MCS,
    RAM,
    TN_BW,
    TN_PATH,
    UL_BW,
    UL_MCS,
    EnvConfig,
    apply_noise,
    performance,
)

logger = logging.getLogger(__name__)

KEY_DIMS = {
    SliceTag.MAR: (UL_BW, TN_BW, CPU),
    SliceTag.HVS: (DL_BW, TN_BW),
    SliceTag.RDC: (UL_MCS, DL_MCS),
}


@dataclass
class BaselineConfig:
    """Grid-search settings.

    ``safety_margin`` scales the per-slot cost threshold C_max, not the
    performance target: a grid point is feasible when its mean cost over the
    evaluation slots is at most ``safety_margin * C_max``.
    """

    resolution: int = 5
    traffic_buckets: int = 10
    eval_slots: int = 8
    safety_margin: float = 0.9
    default_bandwidth: float = 0.1
    default_ram: float = 0.3
    default_path: float = 0.0
    model_based_level: float = 0.5

    def __post_init__(self):
        if self.resolution < 2:
            raise ValueError(f"resolution must be >= 2, got {self.resolution}")
        if not 0.0 < self.safety_margin <= 1.0:
            raise ValueError(f"safety_margin must be in (0, 1], got {self.safety_margin}")
        if self.traffic_buckets < 1:
            raise ValueError(f"traffic_buckets must be >= 1, got {self.traffic_buckets}")
        if self.eval_slots < 1:
            raise ValueError(f"eval_slots must be >= 1, got {self.eval_slots}")


@dataclass
class GridPolicyTable:
    """Per-bucket minimal-usage actions for one slice.

    ``edges`` are normalized traffic boundaries over [0, 1]; bucket b covers
    (edges[b], edges[b + 1]] with the first bucket closed at 0.
    """

    slice_id: int
    key_dims: tuple[int, ...]
    edges: np.ndarray
    actions: list[Action]
    feasible: list[bool] = field(default_factory=list)
    mean_costs: list[float] = field(default_factory=list)

    def __post_init__(self):
        self.edges = np.asarray(self.edges, dtype=float)
        if len(self.edges) != len(self.actions) + 1:
            raise ValueError(f"{len(self.actions)} buckets need {len(self.actions) + 1} edges")
        if not self.feasible:
            self.feasible = [True] * len(self.actions)

    @property
    def num_buckets(self) -> int:
        return len(self.actions)

    def bucket(self, f_norm: float) -> int:
        # side="left" keeps traffic exactly on an edge in the lower bucket
        return int(np.searchsorted(self.edges[1:-1], f_norm, side="left"))


def default_action_vector(spec: SliceSpec, config: BaselineConfig) -> np.ndarray:
    """Non-key dims: MCS offset 0, round-robin, shortest path tier, fixed RAM and bandwidth shares."""
    a = np.zeros(ACTION_DIM)
    for idx in COUNTED_INDICES:
        a[idx] = config.default_bandwidth
    a[TN_PATH] = config.default_path
    a[RAM] = config.default_ram
    return a


def grid_values(dim: int, resolution: int) -> np.ndarray:
    if dim in COUNTED_INDICES:
        # zero share of a counted resource never serves traffic
        return np.linspace(1.0 / resolution, 1.0, resolution)
    return np.linspace(0.0, 1.0, resolution)


def evaluate_candidate(
    spec: SliceSpec,
    arr: np.ndarray,
    f: float,
    channels: np.ndarray,
    noise: np.ndarray,
    env_config: EnvConfig,
) -> float:
    """Mean cost of one action over the bucket's representative slots."""
    costs = []
    for h, xi in zip(channels, noise):
        p = performance(spec.kind.tag, f, arr, h, env_config, spec.max_traffic)
        p = apply_noise(spec.kind.tag, p, xi, env_config)
        costs.append(cost_from_perf(p, spec.kind))
    return float(np.mean(costs))


def build_table(env_config: EnvConfig, spec: SliceSpec, config: BaselineConfig, seed: int = 0) -> GridPolicyTable:
    key_dims = KEY_DIMS[spec.kind.tag]
    edges = np.linspace(0.0, 1.0, config.traffic_buckets + 1)
    base = default_action_vector(spec, config)
    grid = list(itertools.product(*[grid_values(d, config.resolution) for d in key_dims]))
    budget = config.safety_margin * spec.sla_threshold

    actions, feasible, mean_costs = [], [], []
    for b in range(config.traffic_buckets):
        logger.debug("[%d/%d] Searching bucket for slice %d", b + 1, config.traffic_buckets, spec.id)
        # evaluate at the bucket's upper edge so every traffic level inside it is covered
        f = edges[b + 1] * spec.max_traffic
        channel = ChannelProcess(
            make_rng(seed, "grid-channel", spec.id, b),
            rho=env_config.channel_rho,
            mean=env_config.channel_mean,
            noise_std=env_config.channel_noise_std,
        )
        channels = channel.stationary_samples(config.eval_slots)
        noise = make_rng(seed, "grid-noise", spec.id, b).standard_normal(config.eval_slots)

        best = None
        for point in grid:
            arr = base.copy()
            arr[list(key_dims)] = point
            cost = evaluate_candidate(spec, arr, f, channels, noise, env_config)
            if cost > budget:
                continue
            usage = float(arr[list(COUNTED_INDICES)].sum())
            rank = (usage, cost, point)
            if best is None or rank < best[0]:
                best = (rank, arr, cost)

        if best is None:
            arr = base.copy()
            for d in key_dims:
                arr[d] = 1.0
            cost = evaluate_candidate(spec, arr, f, channels, noise, env_config)
            logger.warning(
                "No grid point meets the SLA for slice %d in traffic bucket %d (mean cost %.4f); "
                "recording the max-resource action",
                spec.id,
                b,
                cost,
            )
            actions.append(Action.from_array(arr))
            feasible.append(False)
            mean_costs.append(cost)
        else:
            actions.append(Action.from_array(best[1]))
            feasible.append(True)
            mean_costs.append(best[2])
    return GridPolicyTable(spec.id, key_dims, edges, actions, feasible, mean_costs)


def baseline_act(table: GridPolicyTable, state: State) -> Action:
    return table.actions[table.bucket(state.f_prev)]


def table_to_doc(table: GridPolicyTable) -> dict:
    return {
        "slice_id": table.slice_id,
        "key_dims": list(table.key_dims),
        "edges": [float(e) for e in table.edges],
        "actions": [a.as_array().tolist() for a in table.actions],
        "feasible": list(table.feasible),
        "mean_costs": list(table.mean_costs),
    }


def table_from_doc(doc: dict) -> GridPolicyTable:
    return GridPolicyTable(
        slice_id=int(doc["slice_id"]),
        key_dims=tuple(doc["key_dims"]),
        edges=np.asarray(doc["edges"], dtype=float),
        actions=[Action.from_array(a) for a in doc["actions"]],
        feasible=[bool(x) for x in doc["feasible"]],
        mean_costs=[float(x) for x in doc.get("mean_costs", [])],
    )


def save_tables(path, tables: dict[int, GridPolicyTable]) -> None:
    write_json(path, {"tables": [table_to_doc(t) for t in tables.values()]})


def load_tables(path) -> dict[int, GridPolicyTable]:
    doc = read_json(path, stage="collect-baseline")
    tables = [table_from_doc(d) for d in doc["tables"]]
    return {t.slice_id: t for t in tables}
