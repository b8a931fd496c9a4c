"""Domain types, index spaces and the reward/cost arithmetic shared by every module."""

from dataclasses import dataclass, field, fields
from enum import Enum

import numpy as np

ACTION_FIELDS = (
    "u_ul_bw",
    "u_ul_mcs",
    "u_ul_sched",
    "u_dl_bw",
    "u_dl_mcs",
    "u_dl_sched",
    "u_tn_bw",
    "u_tn_path",
    "u_cpu",
    "u_ram",
)
ACTION_DIM = len(ACTION_FIELDS)

# Fixed resource-kind order; part of the wire/API contract.
RESOURCE_KINDS = ("ul_bw", "dl_bw", "tn_bw", "tn_path", "cpu", "ram")
NUM_RESOURCES = len(RESOURCE_KINDS)

# Position of each counted resource inside the action vector.
COUNTED_INDICES = (0, 3, 6, 7, 8, 9)

STATE_DIM = 9


class SliceTag(str, Enum):
    MAR = "MAR"
    HVS = "HVS"
    RDC = "RDC"


class PerfDirection(str, Enum):
    LOWER_IS_BETTER = "lower-is-better"
    HIGHER_IS_BETTER = "higher-is-better"


_DIRECTIONS = {
    SliceTag.MAR: PerfDirection.LOWER_IS_BETTER,
    SliceTag.HVS: PerfDirection.HIGHER_IS_BETTER,
    SliceTag.RDC: PerfDirection.HIGHER_IS_BETTER,
}


class PolicySource(str, Enum):
    LEARNED = "learned"
    BASELINE = "baseline"


@dataclass(frozen=True)
class SliceKind:
    """Slice application type and its performance target P.

    P is in ms for MAR (latency), FPS for HVS, success probability for RDC.
    """

    tag: SliceTag
    perf_target: float

    def __post_init__(self):
        object.__setattr__(self, "tag", SliceTag(self.tag))
        if not self.perf_target > 0:
            raise ValueError(f"perf_target must be > 0, got {self.perf_target}")

    @property
    def perf_direction(self) -> PerfDirection:
        return _DIRECTIONS[self.tag]


@dataclass(frozen=True)
class SliceSpec:
    id: int
    kind: SliceKind
    sla_threshold: float
    max_traffic: float

    def __post_init__(self):
        if not 0 < self.sla_threshold < 1:
            raise ValueError(f"sla_threshold must be in (0, 1), got {self.sla_threshold}")
        # Zero is admitted so an idle slice can be described.
        if self.max_traffic < 0:
            raise ValueError(f"max_traffic must be >= 0, got {self.max_traffic}")


@dataclass(frozen=True)
class Action:
    """Normalized 10-dimensional resource-orchestration vector."""

    u_ul_bw: float = 0.0
    u_ul_mcs: float = 0.0
    u_ul_sched: float = 0.0
    u_dl_bw: float = 0.0
    u_dl_mcs: float = 0.0
    u_dl_sched: float = 0.0
    u_tn_bw: float = 0.0
    u_tn_path: float = 0.0
    u_cpu: float = 0.0
    u_ram: float = 0.0

    def __post_init__(self):
        for f in fields(self):
            value = float(getattr(self, f.name))
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"Action.{f.name} must be in [0, 1], got {value}")
            object.__setattr__(self, f.name, value)

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, name) for name in ACTION_FIELDS], dtype=float)

    @classmethod
    def from_array(cls, values, clip: bool = False) -> "Action":
        values = np.asarray(values, dtype=float).ravel()
        if values.shape != (ACTION_DIM,):
            raise ValueError(f"action vector must have length {ACTION_DIM}, got {values.shape}")
        if clip:
            values = np.clip(values, 0.0, 1.0)
        return cls(*values.tolist())

    @classmethod
    def uniform(cls, level: float) -> "Action":
        return cls(*([level] * ACTION_DIM))


@dataclass(frozen=True)
class ResourceVector:
    """One non-negative value per constrained resource kind, in RESOURCE_KINDS order."""

    ul_bw: float = 0.0
    dl_bw: float = 0.0
    tn_bw: float = 0.0
    tn_path: float = 0.0
    cpu: float = 0.0
    ram: float = 0.0

    def __post_init__(self):
        for f in fields(self):
            value = float(getattr(self, f.name))
            if value < 0 or not np.isfinite(value):
                raise ValueError(f"ResourceVector.{f.name} must be finite and >= 0, got {value}")
            object.__setattr__(self, f.name, value)

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, name) for name in RESOURCE_KINDS], dtype=float)

    @classmethod
    def from_array(cls, values) -> "ResourceVector":
        values = np.asarray(values, dtype=float).ravel()
        if values.shape != (NUM_RESOURCES,):
            raise ValueError(f"resource vector must have length {NUM_RESOURCES}, got {values.shape}")
        return cls(*values.tolist())

    @classmethod
    def full(cls, level: float) -> "ResourceVector":
        return cls(*([level] * NUM_RESOURCES))


@dataclass(frozen=True)
class State:
    """Per-slice observation at the start of slot t (previous-slot statistics)."""

    slot_index: int
    f_prev: float
    h_prev: float
    g_prev: float
    w_prev: float
    r_prev: float
    c_prev: float
    sla_threshold: float
    cum_cost: float
    horizon: int = 96

    def __post_init__(self):
        if not 0 <= self.slot_index < self.horizon:
            raise ValueError(f"slot_index {self.slot_index} outside [0, {self.horizon})")
        for name in ("f_prev", "h_prev", "g_prev", "w_prev", "c_prev"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"State.{name} must be in [0, 1], got {value}")
        if self.cum_cost < 0:
            raise ValueError(f"cum_cost must be >= 0, got {self.cum_cost}")

    def features(self) -> np.ndarray:
        """Normalized feature vector fed to every policy network."""
        budget = self.horizon * self.sla_threshold
        return np.array(
            [
                self.slot_index / self.horizon,
                self.f_prev,
                self.h_prev,
                self.g_prev,
                self.w_prev,
                -self.r_prev / NUM_RESOURCES,
                self.c_prev,
                self.sla_threshold,
                min(self.cum_cost / budget, 2.0),
            ],
            dtype=float,
        )


@dataclass(frozen=True)
class Transition:
    state: State
    action: Action
    reward: float
    cost: float
    source: PolicySource
    perf_raw: float
    proposed: Action | None = None

    def __post_init__(self):
        object.__setattr__(self, "source", PolicySource(self.source))
        if not 0.0 <= self.cost <= 1.0:
            raise ValueError(f"cost must be in [0, 1], got {self.cost}")


@dataclass
class Episode:
    transitions: list[Transition]
    sla_threshold: float
    truncation_slot: int | None = None
    slice_id: int = 0
    coord_rounds: list[int] = field(default_factory=list)

    def __post_init__(self):
        if not self.transitions:
            raise ValueError("an episode needs at least one transition")
        if self.truncation_slot is not None:
            tail = self.transitions[self.truncation_slot:]
            if any(tr.source is not PolicySource.BASELINE for tr in tail):
                raise ValueError("transitions after the truncation slot must be baseline-sourced")

    @property
    def horizon(self) -> int:
        return len(self.transitions)

    @property
    def costs(self) -> np.ndarray:
        return np.array([tr.cost for tr in self.transitions], dtype=float)

    @property
    def rewards(self) -> np.ndarray:
        return np.array([tr.reward for tr in self.transitions], dtype=float)

    @property
    def mean_cost(self) -> float:
        return float(self.costs.mean())

    @property
    def violated(self) -> bool:
        return self.mean_cost > self.sla_threshold

    @property
    def switched(self) -> bool:
        return self.truncation_slot is not None

    def effective(self) -> list[Transition]:
        """Transitions run by the learned policy (the prefix before t_r)."""
        end = self.truncation_slot if self.truncation_slot is not None else self.horizon
        return [tr for tr in self.transitions[:end] if tr.source is PolicySource.LEARNED]


def cost_from_perf(p: float, kind: SliceKind) -> float:
    """Normalized per-slot performance shortfall in [0, 1].

    Higher-is-better kinds use 1 - clip(p/P, 0, 1). Lower-is-better kinds
    (latency) map p to the achievement ratio P/p first, so the cost is
    1 - clip(P/p, 0, 1); a non-positive latency meets the target.
    """
    target = kind.perf_target
    if kind.perf_direction is PerfDirection.LOWER_IS_BETTER:
        if p <= 0:
            return 0.0
        ratio = target / p
    else:
        ratio = p / target
    return float(1.0 - np.clip(ratio, 0.0, 1.0))


def counted_resources(a: Action) -> ResourceVector:
    values = a.as_array()[list(COUNTED_INDICES)]
    return ResourceVector.from_array(values)


def reward_from_action(a: Action) -> float:
    """Negative total virtual resource usage; MCS offsets and schedulers are not counted."""
    return -float(counted_resources(a).as_array().sum())


def usage_pct(reward: float) -> float:
    return -reward / NUM_RESOURCES * 100.0
