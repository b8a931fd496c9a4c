"""Variational cost-to-go estimator trained on baseline rollouts."""

import logging
from collections import deque
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
import torch

from ..common import make_rng, read_json, write_json
from ..core import STATE_DIM, Episode, PolicySource, State
from ..errors import EmptyDatasetError, UntrainedEstimatorError
from ..nn import (
    DTYPE,
    as_tensor,
    dist_from_doc,
    dist_to_doc,
    elbo_loss,
    init_gaussian,
    make_adam,
    optim_step,
    predictive,
    torch_generator,
)

logger = logging.getLogger(__name__)

OBS_LOG_STD_BOUNDS = (-7.0, 2.0)


@dataclass
class EstimatorConfig:
    hidden: tuple[int, ...] = (64, 32)
    prior_std: float = 1.0
    init_log_std: float = -5.0
    obs_log_std_init: float = -2.0
    lr: float = 1e-3
    epochs: int = 300
    batch_size: int = 256
    train_samples: int = 1
    window_transitions: int = 5000

    def __post_init__(self):
        if self.train_samples < 1:
            raise ValueError(f"train_samples must be >= 1, got {self.train_samples}")
        if not self.prior_std > 0:
            raise ValueError(f"prior_std must be > 0, got {self.prior_std}")


@dataclass
class EstimatorStats:
    initial_loss: float
    final_loss: float
    samples: int


def suffix_sums(costs) -> np.ndarray:
    """Cost-to-go at every slot: sum of c over [t, T)."""
    costs = np.asarray(costs, dtype=float)
    return np.cumsum(costs[::-1])[::-1].copy()


def cost_to_go_dataset(episodes: Sequence[Episode], baseline_only: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """Pair every state with the realized cost from its slot to the episode end.

    With ``baseline_only`` only slots whose remaining trajectory ran under the
    baseline are kept, so targets stay samples of the baseline's cost-to-go.
    """
    xs, ys = [], []
    for ep in episodes:
        targets = suffix_sums(ep.costs)
        start = 0
        if baseline_only:
            start = ep.truncation_slot if ep.truncation_slot is not None else ep.horizon
            if all(tr.source is PolicySource.BASELINE for tr in ep.transitions):
                start = 0
        for tr, y in zip(ep.transitions[start:], targets[start:]):
            xs.append(tr.state.features())
            ys.append(y)
    if not xs:
        return np.empty((0, STATE_DIM)), np.empty(0)
    return np.stack(xs), np.asarray(ys)


class CostValueEstimator:
    """Gaussian posterior over an MLP from state features to the remaining episode cost.

    Targets are divided by a fixed scale picked at the first fit; the learned
    observation noise lives in the same scaled units.
    """

    def __init__(self, config: EstimatorConfig, seed: int = 0, slice_id: int = 0, state_dim: int = STATE_DIM):
        self.config = config
        self.seed = seed
        self.slice_id = slice_id
        self.dist = init_gaussian(
            [state_dim, *config.hidden, 1],
            make_rng(seed, "estimator-init", slice_id),
            prior_std=config.prior_std,
            init_log_std=config.init_log_std,
        )
        self.obs_log_std = torch.nn.Parameter(torch.tensor([config.obs_log_std_init], dtype=DTYPE))
        self.target_scale = 1.0
        self.fitted = False
        self.fits = 0
        self.n_samples = 32
        self.opt = self.make_optimizer()
        self.offline: tuple[np.ndarray, np.ndarray] | None = None
        self.window: deque[tuple[np.ndarray, float]] = deque(maxlen=config.window_transitions)

    def make_optimizer(self) -> torch.optim.Adam:
        return make_adam([*self.dist.parameters(), self.obs_log_std], self.config.lr)

    def _loss(self, x, y) -> float:
        gen = torch_generator(make_rng(self.seed, "estimator-eval"))
        with torch.no_grad():
            res = elbo_loss(self.dist, x, y / self.target_scale, 1, gen, self.obs_log_std, len(y))
        return float(res.loss)

    def train(self, x: np.ndarray, y: np.ndarray, epochs: int | None = None) -> EstimatorStats:
        if len(y) == 0:
            raise EmptyDatasetError("the cost-to-go estimator needs at least one transition")
        cfg = self.config
        epochs = cfg.epochs if epochs is None else epochs
        if not self.fitted:
            self.target_scale = max(1.0, float(np.max(np.abs(y))))
        rng = make_rng(self.seed, "estimator-fit", self.slice_id, self.fits)
        gen = torch_generator(rng)
        initial = self._loss(x, y)
        n = len(y)
        xt, yt = as_tensor(x), as_tensor(y) / self.target_scale
        for _ in range(epochs):
            order = torch.as_tensor(rng.permutation(n))
            for start in range(0, n, cfg.batch_size):
                idx = order[start : start + cfg.batch_size]
                res = elbo_loss(self.dist, xt[idx], yt[idx], cfg.train_samples, gen, self.obs_log_std, dataset_size=n)
                optim_step(self.dist, res.loss, self.opt)
                with torch.no_grad():
                    self.obs_log_std.clamp_(*OBS_LOG_STD_BOUNDS)
        self.fitted = True
        self.fits += 1
        final = self._loss(x, y)
        logger.info("Estimator fit %d on %d samples: loss %.4f -> %.4f", self.fits, n, initial, final)
        return EstimatorStats(initial_loss=initial, final_loss=final, samples=n)

    def predict_features(self, x, n_samples: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
        if not self.fitted:
            raise UntrainedEstimatorError("predict called before the estimator was fitted")
        mu, sigma = predictive(self.dist, x, n_samples, torch_generator(rng), float(self.obs_log_std))
        return mu * self.target_scale, sigma * self.target_scale

    def predict(
        self, state: State, n_samples: int | None = None, rng: np.random.Generator | None = None
    ) -> tuple[float, float]:
        if rng is None:
            rng = make_rng(self.seed, "estimator-predict", self.slice_id, self.fits, state.slot_index)
        mu, sigma = self.predict_features(state.features(), n_samples or self.n_samples, rng)
        return float(mu[0]), float(sigma[0])


def fit_estimator(est: CostValueEstimator, episodes: Sequence[Episode], epochs: int | None = None) -> EstimatorStats:
    """Fit on offline baseline episodes; they are kept for every later refit."""
    x, y = cost_to_go_dataset(episodes)
    if len(y) == 0:
        raise EmptyDatasetError("fit_estimator needs at least one baseline episode")
    est.offline = (x, y)
    return est.train(x, y, epochs)


def refit_estimator(est: CostValueEstimator, episodes: Sequence[Episode], epochs: int | None = None) -> EstimatorStats | None:
    """Incremental refit on the offline set plus a sliding window of fresh baseline-run slots."""
    x_new, y_new = cost_to_go_dataset(episodes, baseline_only=True)
    est.window.extend(zip(x_new, y_new))
    parts_x, parts_y = [], []
    if est.offline is not None:
        parts_x.append(est.offline[0])
        parts_y.append(est.offline[1])
    if est.window:
        parts_x.append(np.stack([w[0] for w in est.window]))
        parts_y.append(np.asarray([w[1] for w in est.window]))
    if not parts_y:
        logger.debug("Nothing to refit the estimator on")
        return None
    return est.train(np.concatenate(parts_x), np.concatenate(parts_y), epochs)


def save_estimator(path, est: CostValueEstimator) -> None:
    doc = dist_to_doc(est.dist, float(est.obs_log_std))
    write_json(path, {**doc, "target_scale": est.target_scale, "fitted": est.fitted, "fits": est.fits})


def load_estimator(path, config: EstimatorConfig, seed: int, slice_id: int) -> CostValueEstimator:
    doc = read_json(path, stage="pretrain")
    est = CostValueEstimator(config, seed, slice_id)
    est.dist = dist_from_doc(doc)
    est.obs_log_std = torch.nn.Parameter(torch.tensor([float(doc["obs_log_std"])], dtype=DTYPE))
    est.opt = est.make_optimizer()
    est.target_scale = float(doc["target_scale"])
    est.fitted = bool(doc["fitted"])
    est.fits = int(doc.get("fits", 0))
    return est
