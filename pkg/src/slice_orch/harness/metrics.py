"""Per-epoch metrics and their CSV form."""

from collections.abc import Sequence
from dataclasses import asdict, dataclass

import numpy as np
import pandas as pd

from ..common import write_text
from ..core import Episode, usage_pct
from ..errors import EmptyDatasetError

METRICS_COLUMNS = [
    "epoch",
    "slice_id",
    "usage_pct",
    "violation_pct",
    "mean_cost",
    "lambda",
    "switch_rate",
    "coord_rounds",
    "transitions",
    "excess_cost_pct",
]


@dataclass
class MetricsRecord:
    epoch: int
    slice_id: int | str
    usage_pct: float
    violation_pct: float
    mean_cost: float
    lam: float
    switch_rate: float
    coord_rounds: float
    transitions: int
    excess_cost_pct: float
    wall_clock: float = 0.0

    def row(self) -> dict:
        doc = asdict(self)
        doc["lambda"] = doc.pop("lam")
        doc.pop("wall_clock")
        return {k: doc[k] for k in METRICS_COLUMNS}


def compute_metrics(
    episodes: Sequence[Episode],
    epoch: int = 0,
    slice_id: int | str = "all",
    lam: float = 0.0,
    transitions: int = 0,
    wall_clock: float = 0.0,
) -> MetricsRecord:
    """Usage is the mean over slots of -reward / 6 * 100; an episode violates when its mean cost exceeds C_max."""
    if not episodes:
        raise EmptyDatasetError("compute_metrics needs at least one episode")
    rewards = np.concatenate([ep.rewards for ep in episodes])
    costs = np.concatenate([ep.costs for ep in episodes])
    rounds = [r for ep in episodes for r in ep.coord_rounds]
    excess = [max(0.0, ep.mean_cost - ep.sla_threshold) for ep in episodes]
    return MetricsRecord(
        epoch=epoch,
        slice_id=slice_id,
        usage_pct=float(np.mean([usage_pct(r) for r in rewards])),
        violation_pct=100.0 * float(np.mean([ep.violated for ep in episodes])),
        mean_cost=float(costs.mean()),
        lam=lam,
        switch_rate=float(np.mean([ep.switched for ep in episodes])),
        coord_rounds=float(np.mean(rounds)) if rounds else 0.0,
        transitions=transitions,
        excess_cost_pct=100.0 * float(np.mean(excess)),
        wall_clock=wall_clock,
    )


def epoch_records(
    episodes_by_slice: dict[int, list[Episode]],
    epoch: int,
    lambdas: dict[int, float] | None = None,
    transitions: int = 0,
    wall_clock: float = 0.0,
) -> list[MetricsRecord]:
    """One record per slice plus an ``all`` aggregate (lambda averaged over slices)."""
    lambdas = lambdas or {}
    records = [
        compute_metrics(eps, epoch, sid, lambdas.get(sid, 0.0), transitions, wall_clock)
        for sid, eps in sorted(episodes_by_slice.items())
    ]
    everything = [ep for _, eps in sorted(episodes_by_slice.items()) for ep in eps]
    mean_lam = float(np.mean(list(lambdas.values()))) if lambdas else 0.0
    records.append(compute_metrics(everything, epoch, "all", mean_lam, transitions, wall_clock))
    return records


def metrics_frame(records: Sequence[MetricsRecord], extra: dict[str, Sequence] | None = None) -> pd.DataFrame:
    frame = pd.DataFrame([r.row() for r in records], columns=METRICS_COLUMNS)
    for name, values in (extra or {}).items():
        frame.insert(0, name, list(values))
    return frame


def write_metrics_csv(path, records: Sequence[MetricsRecord], extra: dict[str, Sequence] | None = None) -> None:
    frame = metrics_frame(records, extra)
    write_text(path, frame.to_csv(index=False, float_format="%.6f", lineterminator="\n"))
