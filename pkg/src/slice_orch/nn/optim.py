import torch
from torch import nn


def make_adam(params, lr: float) -> torch.optim.Adam:
    return torch.optim.Adam(params, lr=lr)


def optim_step(
    net: nn.Module,
    loss: torch.Tensor,
    optimizer: torch.optim.Optimizer,
    max_grad_norm: float | None = None,
) -> nn.Module:
    """One Adam step on ``loss``; the norm clip covers every parameter the optimizer owns."""
    optimizer.zero_grad()
    loss.backward()
    if max_grad_norm is not None:
        params = [p for group in optimizer.param_groups for p in group["params"]]
        nn.utils.clip_grad_norm_(params, max_grad_norm)
    optimizer.step()
    return net
