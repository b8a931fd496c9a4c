"""JSON checkpoints for networks, their variational wrappers and Adam state."""

import torch
from torch import nn

from ..common import array_from_json, array_to_json, read_json, write_json
from .mlp import DTYPE, Mlp
from .variational import BayesianMlp


def _state_to_doc(module: nn.Module) -> dict:
    return {name: array_to_json(t.detach().numpy()) for name, t in module.state_dict().items()}


def _load_state(module: nn.Module, doc: dict) -> None:
    module.load_state_dict({name: torch.as_tensor(array_from_json(t), dtype=DTYPE) for name, t in doc.items()})


def mlp_to_doc(net: Mlp) -> dict:
    arch = {"dims": net.dims, "hidden_activation": "relu", "output_activation": net.output_activation}
    return {"arch": arch, "tensors": _state_to_doc(net)}


def mlp_from_doc(doc: dict) -> Mlp:
    arch = doc["arch"]
    if arch.get("hidden_activation", "relu") != "relu":
        raise ValueError(f"unknown hidden activation {arch['hidden_activation']!r}")
    net = Mlp(arch["dims"], arch["output_activation"])
    _load_state(net, doc["tensors"])
    return net


def dist_to_doc(dist: BayesianMlp, obs_log_std: float | None = None) -> dict:
    doc = {
        "arch": {"dims": dist.dims, "hidden_activation": "relu", "output_activation": "identity"},
        "variational": True,
        "prior_std": dist.prior_std,
        "tensors": _state_to_doc(dist),
    }
    if obs_log_std is not None:
        doc["obs_log_std"] = float(obs_log_std)
    return doc


def dist_from_doc(doc: dict) -> BayesianMlp:
    if not doc.get("variational"):
        raise ValueError("document does not hold a variational network")
    dist = BayesianMlp(doc["arch"]["dims"], float(doc["prior_std"]))
    _load_state(dist, doc["tensors"])
    return dist


def optimizer_to_doc(opt: torch.optim.Optimizer) -> dict:
    state = opt.state_dict()
    moments = {}
    for idx, slot in state["state"].items():
        moments[str(idx)] = {
            key: array_to_json(value.detach().numpy()) if torch.is_tensor(value) else value
            for key, value in slot.items()
        }
    groups = [dict(group) for group in state["param_groups"]]
    return {"state": moments, "param_groups": groups}


def optimizer_from_doc(opt: torch.optim.Optimizer, doc: dict) -> torch.optim.Optimizer:
    """Load saved moments into a freshly built optimizer over the same parameter layout."""
    state = {}
    for idx, slot in doc["state"].items():
        state[int(idx)] = {
            key: (
                torch.as_tensor(array_from_json(value), dtype=torch.float32 if key == "step" else DTYPE)
                if isinstance(value, dict)
                else value
            )
            for key, value in slot.items()
        }
    opt.load_state_dict({"state": state, "param_groups": doc["param_groups"]})
    return opt


def save_mlp(path, net: Mlp) -> None:
    write_json(path, mlp_to_doc(net))


def load_mlp(path, stage: str = "pretrain") -> Mlp:
    return mlp_from_doc(read_json(path, stage))
