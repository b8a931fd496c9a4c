"""Learned action modifier: regresses the oracle's argmin from (state, action, beta)."""

import logging
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

import numpy as np
import torch
import torch.nn.functional as F

from ..common import make_rng, read_json, write_json
from ..core import ACTION_DIM, NUM_RESOURCES, STATE_DIM, Action, ResourceVector, State, Transition
from ..errors import EmptyDatasetError
from ..nn import Mlp, as_tensor, forward, init_mlp, make_adam, mlp_from_doc, mlp_to_doc, optim_step
from .oracle import CostFn, brute_force_modify, h_objective, relative_gap

logger = logging.getLogger(__name__)

BetaSampler = Callable[[np.random.Generator], np.ndarray]


@dataclass
class ModifierConfig:
    hidden: tuple[int, ...] = (64, 32)
    lr: float = 1e-3
    epochs: int = 200
    batch_size: int = 256
    beta_mean: float = 0.5
    betas_per_pair: int = 1
    max_pairs: int = 2000
    grid_resolution: int = 5
    holdout_fraction: float = 0.2
    gap_tolerance: float = 0.05

    def __post_init__(self):
        if not 0.0 <= self.holdout_fraction < 1.0:
            raise ValueError(f"holdout_fraction must be in [0, 1), got {self.holdout_fraction}")


def exponential_beta_sampler(mean: float) -> BetaSampler:
    """Independent exponential prices per resource, so both near-zero and heavy regimes are covered."""

    def sample(rng: np.random.Generator) -> np.ndarray:
        return rng.exponential(mean, size=NUM_RESOURCES)

    return sample


def modifier_input(state: State, a: Action, beta: ResourceVector) -> np.ndarray:
    return np.concatenate([state.features(), a.as_array(), beta.as_array()])


class ModifierNet:
    def __init__(self, mlp: Mlp, config: ModifierConfig | None = None):
        self.mlp = mlp
        self.config = config or ModifierConfig()
        self.opt = make_adam(mlp.parameters(), self.config.lr)

    @classmethod
    def create(cls, config: ModifierConfig, rng: np.random.Generator, zero: bool = False) -> "ModifierNet":
        dims = [STATE_DIM + ACTION_DIM + NUM_RESOURCES, *config.hidden, ACTION_DIM]
        return cls(init_mlp(dims, rng, output_activation="sigmoid", zero=zero), config)

    def __call__(self, state: State, a: Action, beta: ResourceVector) -> Action:
        return modify(self, state, a, beta)


def modify(net: ModifierNet, state: State, a: Action, beta: ResourceVector) -> Action:
    return Action.from_array(forward(net.mlp, modifier_input(state, a, beta)), clip=True)


@dataclass
class ModifierDataset:
    states: list[State] = field(default_factory=list)
    actions: list[Action] = field(default_factory=list)
    betas: list[ResourceVector] = field(default_factory=list)
    targets: list[Action] = field(default_factory=list)
    h_star: list[float] = field(default_factory=list)
    h_original: list[float] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.targets)

    def arrays(self, idx=None) -> tuple[np.ndarray, np.ndarray]:
        idx = range(len(self)) if idx is None else idx
        x = np.stack([modifier_input(self.states[i], self.actions[i], self.betas[i]) for i in idx])
        y = np.stack([self.targets[i].as_array() for i in idx])
        return x, y


def build_modifier_dataset(
    transitions: Sequence[Transition],
    beta_sampler: BetaSampler,
    cost_fn: CostFn,
    key_dims: Sequence[int],
    resolution: int = 5,
    betas_per_pair: int = 1,
    rng: np.random.Generator | None = None,
) -> ModifierDataset:
    if not transitions:
        raise EmptyDatasetError("build_modifier_dataset needs a non-empty transition log")
    rng = rng if rng is not None else make_rng(0, "modifier-dataset")
    data = ModifierDataset()
    for tr in transitions:
        for _ in range(betas_per_pair):
            beta = ResourceVector.from_array(beta_sampler(rng))
            target = brute_force_modify(tr.state, tr.action, beta, cost_fn, key_dims, resolution)
            data.states.append(tr.state)
            data.actions.append(tr.action)
            data.betas.append(beta)
            data.targets.append(target)
            data.h_star.append(h_objective(tr.state, tr.action, target, beta, cost_fn))
            data.h_original.append(h_objective(tr.state, tr.action, tr.action, beta, cost_fn))
    return data


@dataclass
class ModifierStats:
    train_mse: float
    holdout_mse: float
    mean_gap: float
    within_tolerance: float
    train_size: int
    holdout_size: int


def holdout_gaps(net: ModifierNet, data: ModifierDataset, idx, cost_fn: CostFn) -> np.ndarray:
    gaps = []
    for i in idx:
        out = modify(net, data.states[i], data.actions[i], data.betas[i])
        h = h_objective(data.states[i], data.actions[i], out, data.betas[i], cost_fn)
        gaps.append(relative_gap(h, data.h_star[i]))
    return np.asarray(gaps)


def train_modifier(
    net: ModifierNet,
    data: ModifierDataset,
    epochs: int | None = None,
    cost_fn: CostFn | None = None,
    rng: np.random.Generator | None = None,
) -> ModifierStats:
    """Squared-error regression onto oracle targets with an objective-gap report on a held-out split."""
    if len(data) == 0:
        raise EmptyDatasetError("train_modifier needs a non-empty dataset")
    cfg = net.config
    epochs = cfg.epochs if epochs is None else epochs
    rng = rng if rng is not None else make_rng(0, "modifier-train")
    order = rng.permutation(len(data))
    n_hold = int(len(data) * cfg.holdout_fraction)
    hold_idx, train_idx = order[:n_hold], order[n_hold:]
    if len(train_idx) == 0:
        train_idx, hold_idx = order, order[:0]
    x, y = data.arrays(train_idx)
    xt, yt = as_tensor(x), as_tensor(y)

    for _ in range(epochs):
        perm = torch.as_tensor(rng.permutation(len(x)))
        for start in range(0, len(x), cfg.batch_size):
            idx = perm[start : start + cfg.batch_size]
            loss = F.mse_loss(net.mlp(xt[idx]), yt[idx])
            optim_step(net.mlp, loss, net.opt)

    train_mse = float(np.mean((forward(net.mlp, x) - y) ** 2))
    holdout_mse, mean_gap, within = float("nan"), float("nan"), float("nan")
    if len(hold_idx):
        xh, yh = data.arrays(hold_idx)
        holdout_mse = float(np.mean((forward(net.mlp, xh) - yh) ** 2))
        if cost_fn is not None:
            gaps = holdout_gaps(net, data, hold_idx, cost_fn)
            mean_gap = float(gaps.mean())
            within = float(np.mean(gaps <= cfg.gap_tolerance))
    logger.info(
        "Modifier trained on %d pairs: train MSE %.5f, held-out MSE %.5f, mean objective gap %.4f",
        len(train_idx),
        train_mse,
        holdout_mse,
        mean_gap,
    )
    return ModifierStats(train_mse, holdout_mse, mean_gap, within, len(train_idx), len(hold_idx))


def save_modifier(path, net: ModifierNet) -> None:
    write_json(path, mlp_to_doc(net.mlp))


def load_modifier(path, config: ModifierConfig) -> ModifierNet:
    return ModifierNet(mlp_from_doc(read_json(path, stage="pretrain")), config)
