"""Mean-field Gaussian posterior over MLP parameters, trained by maximizing the ELBO.

Every weight and bias carries a mean and a ``rho`` with sigma = softplus(rho).
The KL term against the N(0, prior_std^2) prior is closed form; the expected
log-likelihood uses reparameterized weight samples W = mu + sigma * xi.
"""

from dataclasses import dataclass

import numpy as np
import torch
import torch.nn.functional as F
from torch import nn
from torch.distributions import Normal, kl_divergence

from ..errors import DimensionError, EmptyDatasetError
from .mlp import DTYPE, as_tensor, check_dims, torch_generator


def rho_for_std(std: float) -> float:
    """Inverse softplus."""
    return float(np.log(np.expm1(std)))


class BayesianLinear(nn.Module):
    def __init__(self, in_features: int, out_features: int, prior_std: float = 1.0):
        super().__init__()
        if not prior_std > 0:
            raise ValueError(f"prior_std must be > 0, got {prior_std}")
        self.in_features = in_features
        self.out_features = out_features
        self.prior_std = float(prior_std)
        self.weight_mu = nn.Parameter(torch.zeros(out_features, in_features, dtype=DTYPE))
        self.weight_rho = nn.Parameter(torch.zeros(out_features, in_features, dtype=DTYPE))
        self.bias_mu = nn.Parameter(torch.zeros(out_features, dtype=DTYPE))
        self.bias_rho = nn.Parameter(torch.zeros(out_features, dtype=DTYPE))

    def posteriors(self) -> list[Normal]:
        return [
            Normal(self.weight_mu, F.softplus(self.weight_rho)),
            Normal(self.bias_mu, F.softplus(self.bias_rho)),
        ]

    def kl(self) -> torch.Tensor:
        total = torch.zeros((), dtype=DTYPE)
        for q in self.posteriors():
            prior = Normal(torch.zeros_like(q.loc), torch.full_like(q.scale, self.prior_std))
            total = total + kl_divergence(q, prior).sum()
        return total

    def forward(self, x: torch.Tensor, generator: torch.Generator | None = None) -> torch.Tensor:
        """A fresh weight sample per call; no generator means the posterior mean."""
        if generator is None:
            return F.linear(x, self.weight_mu, self.bias_mu)
        w_sigma = F.softplus(self.weight_rho)
        b_sigma = F.softplus(self.bias_rho)
        w = self.weight_mu + w_sigma * torch.randn(w_sigma.shape, generator=generator, dtype=DTYPE)
        b = self.bias_mu + b_sigma * torch.randn(b_sigma.shape, generator=generator, dtype=DTYPE)
        return F.linear(x, w, b)


class BayesianMlp(nn.Module):
    """Rectifier network whose layers are all :class:`BayesianLinear`; linear output."""

    def __init__(self, dims, prior_std: float = 1.0):
        super().__init__()
        self.dims = check_dims(dims)
        self.prior_std = float(prior_std)
        self.layers = nn.ModuleList(
            BayesianLinear(fan_in, fan_out, prior_std) for fan_in, fan_out in zip(self.dims[:-1], self.dims[1:])
        )

    @property
    def input_dim(self) -> int:
        return self.dims[0]

    def kl(self) -> torch.Tensor:
        return sum((layer.kl() for layer in self.layers), torch.zeros((), dtype=DTYPE))

    def forward(self, x: torch.Tensor, generator: torch.Generator | None = None) -> torch.Tensor:
        if x.shape[-1] != self.input_dim:
            raise DimensionError(f"expected input width {self.input_dim}, got {x.shape[-1]}")
        for i, layer in enumerate(self.layers):
            if i:
                x = F.relu(x)
            x = layer(x, generator)
        return x


def init_gaussian(
    dims,
    rng: np.random.Generator,
    prior_std: float = 1.0,
    init_log_std: float = -5.0,
) -> BayesianMlp:
    """Means U(±1/sqrt(fan_in)) drawn from ``rng``; every sigma starts at exp(init_log_std)."""
    dist = BayesianMlp(dims, prior_std)
    gen = torch_generator(rng)
    rho = rho_for_std(np.exp(init_log_std))
    with torch.no_grad():
        for layer in dist.layers:
            bound = 1.0 / np.sqrt(layer.in_features)
            layer.weight_mu.uniform_(-bound, bound, generator=gen)
            layer.bias_mu.uniform_(-bound, bound, generator=gen)
            layer.weight_rho.fill_(rho)
            layer.bias_rho.fill_(rho)
    return dist


def prior_dist(dims, prior_std: float = 1.0) -> BayesianMlp:
    """A posterior identical to the prior (zero mean, prior_std everywhere)."""
    dist = BayesianMlp(dims, prior_std)
    with torch.no_grad():
        for layer in dist.layers:
            layer.weight_rho.fill_(rho_for_std(prior_std))
            layer.bias_rho.fill_(rho_for_std(prior_std))
    return dist


def kl_to_prior(dist: BayesianMlp) -> float:
    with torch.no_grad():
        return max(float(dist.kl()), 0.0)


@dataclass
class ElboResult:
    loss: torch.Tensor
    nll: float
    kl: float


def elbo_loss(
    dist: BayesianMlp,
    inputs,
    targets,
    n_samples: int,
    generator: torch.Generator,
    obs_log_std: torch.Tensor,
    dataset_size: int | None = None,
) -> ElboResult:
    """Negative ELBO per datum.

    loss = mean Gaussian NLL over the batch and weight samples
           + KL[q || prior] / dataset_size
    """
    if n_samples < 1:
        raise ValueError(f"n_samples must be >= 1, got {n_samples}")
    x = torch.atleast_2d(torch.as_tensor(inputs, dtype=DTYPE))
    y = torch.as_tensor(targets, dtype=DTYPE).reshape(-1)
    if len(y) == 0:
        raise EmptyDatasetError("elbo_loss needs at least one target")
    dataset_size = dataset_size or len(y)
    noise = Normal(torch.zeros((), dtype=DTYPE), obs_log_std.exp().reshape(()))
    nll = torch.zeros((), dtype=DTYPE)
    for _ in range(n_samples):
        resid = dist(x, generator).reshape(-1) - y
        nll = nll - noise.log_prob(resid).mean()
    nll = nll / n_samples
    kl = dist.kl()
    return ElboResult(loss=nll + kl / dataset_size, nll=float(nll), kl=float(kl))


def predictive(
    dist: BayesianMlp,
    inputs,
    n_samples: int,
    generator: torch.Generator,
    obs_log_std: float = 0.0,
) -> tuple[np.ndarray, np.ndarray]:
    """Predictive mean and std; the std adds sampling spread and observation noise."""
    x = torch.atleast_2d(as_tensor(inputs))
    with torch.no_grad():
        samples = torch.stack([dist(x, generator).reshape(-1) for _ in range(max(1, n_samples))]).numpy()
    mu = samples.mean(axis=0)
    sigma = np.sqrt(samples.var(axis=0) + np.exp(2.0 * obs_log_std))
    return mu, sigma
