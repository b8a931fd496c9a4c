"""Fixed-topology multilayer perceptrons."""

import numpy as np
import torch
from torch import nn

from ..errors import DimensionError

OUTPUT_ACTIVATIONS = ("identity", "sigmoid")
DEFAULT_HIDDEN = (128, 64, 32)
# double precision keeps reruns byte-identical with the numpy side of the testbed
DTYPE = torch.float64


def as_tensor(x) -> torch.Tensor:
    return torch.as_tensor(np.asarray(x, dtype=float), dtype=DTYPE)


def torch_generator(rng: np.random.Generator) -> torch.Generator:
    """A torch stream seeded from a numpy one, so both follow the run seed."""
    return torch.Generator().manual_seed(int(rng.integers(2**62)))


def check_dims(dims) -> list[int]:
    dims = [int(d) for d in dims]
    if len(dims) < 2 or min(dims) < 1:
        raise DimensionError(f"need at least an input and an output width, got {dims}")
    return dims


class Mlp(nn.Module):
    """Rectifier hidden layers; the last layer is linear, optionally squashed into (0, 1)."""

    def __init__(self, dims, output_activation: str = "identity"):
        super().__init__()
        if output_activation not in OUTPUT_ACTIVATIONS:
            raise ValueError(f"unknown output activation {output_activation!r}")
        self.dims = check_dims(dims)
        self.output_activation = output_activation
        layers: list[nn.Module] = []
        for i, (fan_in, fan_out) in enumerate(zip(self.dims[:-1], self.dims[1:])):
            if i:
                layers.append(nn.ReLU())
            layers.append(nn.Linear(fan_in, fan_out, dtype=DTYPE))
        self.body = nn.Sequential(*layers)
        self.squash = nn.Sigmoid() if output_activation == "sigmoid" else nn.Identity()

    @property
    def input_dim(self) -> int:
        return self.dims[0]

    @property
    def output_dim(self) -> int:
        return self.dims[-1]

    def linears(self) -> list[nn.Linear]:
        return [m for m in self.body if isinstance(m, nn.Linear)]

    def logits(self, x: torch.Tensor) -> torch.Tensor:
        """Output before the squashing nonlinearity."""
        if x.shape[-1] != self.input_dim:
            raise DimensionError(f"expected input width {self.input_dim}, got {x.shape[-1]}")
        return self.body(x)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.squash(self.logits(x))


def init_mlp(dims, rng: np.random.Generator, output_activation: str = "identity", zero: bool = False) -> Mlp:
    """U(±1/sqrt(fan_in)) weights and biases drawn from ``rng``; ``zero`` gives an all-zero net."""
    net = Mlp(dims, output_activation)
    gen = torch_generator(rng)
    with torch.no_grad():
        for layer in net.linears():
            if zero:
                layer.weight.zero_()
                layer.bias.zero_()
                continue
            bound = 1.0 / np.sqrt(layer.in_features)
            layer.weight.uniform_(-bound, bound, generator=gen)
            layer.bias.uniform_(-bound, bound, generator=gen)
    return net


def forward(net: nn.Module, x) -> np.ndarray:
    """Evaluate without tracking gradients; a 1-D input gives a 1-D output."""
    with torch.no_grad():
        return net(as_tensor(x)).numpy()


def grad(net: nn.Module, x, upstream) -> list[torch.Tensor]:
    """Gradient of sum(upstream * net(x)) with respect to every parameter of ``net``."""
    out = net(as_tensor(x))
    return list(torch.autograd.grad((out * as_tensor(upstream)).sum(), list(net.parameters())))
