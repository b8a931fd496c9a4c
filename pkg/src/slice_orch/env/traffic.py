"""Synthetic diurnal traffic traces and the trace CSV format."""

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd

from ..common import make_rng, write_text
from ..core import SliceSpec, SliceTag

logger = logging.getLogger(__name__)

PEAK_HOURS = {SliceTag.MAR: 14.0, SliceTag.HVS: 20.0, SliceTag.RDC: 11.0}
NIGHT_FLOOR = 0.1
NOISE_SIGMA = 0.1
DAY_SCALE_RANGE = (0.85, 1.0)

TRACE_COLUMNS = ["slot", "slice_id", "arrival_rate"]


@dataclass
class TrafficTrace:
    """Per-slot arrival rates (users/s) of one slice."""

    slice_id: int
    rates: np.ndarray
    max_traffic: float

    def __post_init__(self):
        self.rates = np.asarray(self.rates, dtype=float)
        if np.any(self.rates < 0) or np.any(self.rates > self.max_traffic + 1e-12):
            raise ValueError(f"slice {self.slice_id}: rates must lie in [0, {self.max_traffic}]")

    def __len__(self) -> int:
        return len(self.rates)

    def episode(self, index: int, slots_per_episode: int) -> np.ndarray:
        """Rates of one day, wrapping around the trace."""
        days = max(len(self.rates) // slots_per_episode, 1)
        start = (index % days) * slots_per_episode
        return self.rates[start:start + slots_per_episode]


def diurnal_shape(hours: np.ndarray, peak_hour: float) -> np.ndarray:
    wave = 0.5 * (1.0 + np.cos(2.0 * np.pi * (hours - peak_hour) / 24.0))
    return NIGHT_FLOOR + (1.0 - NIGHT_FLOOR) * wave


def gen_traffic(
    spec: SliceSpec,
    num_slots: int,
    seed: int,
    slots_per_episode: int = 96,
) -> TrafficTrace:
    """Generate a seeded diurnal trace: low at night, peak mid-day, log-normal noise.

    A slot's rate is the intensity of the Poisson arrivals within it.
    """
    if num_slots < 1:
        raise ValueError(f"num_slots must be >= 1, got {num_slots}")
    rng = make_rng(seed, "traffic", spec.id)
    slots = np.arange(num_slots)
    hours = (slots % slots_per_episode) * 24.0 / slots_per_episode
    days = slots // slots_per_episode
    day_scale = rng.uniform(*DAY_SCALE_RANGE, size=int(days.max()) + 1)[days]
    noise = np.exp(rng.normal(0.0, NOISE_SIGMA, size=num_slots) - NOISE_SIGMA**2 / 2)
    level = np.clip(day_scale * diurnal_shape(hours, PEAK_HOURS[spec.kind.tag]) * noise, 0.0, 1.0)
    return TrafficTrace(slice_id=spec.id, rates=spec.max_traffic * level, max_traffic=spec.max_traffic)


def write_traces(path, traces: list[TrafficTrace]) -> None:
    frames = [
        pd.DataFrame(
            {"slot": np.arange(len(tr)), "slice_id": tr.slice_id, "arrival_rate": tr.rates}
        )
        for tr in traces
    ]
    table = pd.concat(frames, ignore_index=True)[TRACE_COLUMNS]
    write_text(Path(path), table.to_csv(index=False, float_format="%.17g"))
    logger.info("Wrote %d trace rows to %s", len(table), path)


def read_traces(path, specs: list[SliceSpec]) -> dict[int, TrafficTrace]:
    table = pd.read_csv(path)
    missing = set(TRACE_COLUMNS) - set(table.columns)
    if missing:
        raise ValueError(f"{path}: trace CSV lacks columns {sorted(missing)}")
    traces = {}
    for spec in specs:
        rows = table[table["slice_id"] == spec.id].sort_values("slot")
        traces[spec.id] = TrafficTrace(
            slice_id=spec.id,
            rates=rows["arrival_rate"].to_numpy(dtype=float),
            max_traffic=spec.max_traffic,
        )
    return traces
