from .checkpoint import (
    dist_from_doc,
    dist_to_doc,
    load_mlp,
    mlp_from_doc,
    mlp_to_doc,
    optimizer_from_doc,
    optimizer_to_doc,
    save_mlp,
)
from .mlp import DEFAULT_HIDDEN, DTYPE, Mlp, as_tensor, forward, grad, init_mlp, torch_generator
from .optim import make_adam, optim_step
from .variational import (
    BayesianLinear,
    BayesianMlp,
    ElboResult,
    elbo_loss,
    init_gaussian,
    kl_to_prior,
    predictive,
    prior_dist,
)

__all__ = [
    "DEFAULT_HIDDEN",
    "DTYPE",
    "BayesianLinear",
    "BayesianMlp",
    "ElboResult",
    "Mlp",
    "as_tensor",
    "dist_from_doc",
    "dist_to_doc",
    "elbo_loss",
    "forward",
    "grad",
    "init_gaussian",
    "init_mlp",
    "kl_to_prior",
    "load_mlp",
    "make_adam",
    "mlp_from_doc",
    "mlp_to_doc",
    "optim_step",
    "optimizer_from_doc",
    "optimizer_to_doc",
    "predictive",
    "prior_dist",
    "save_mlp",
    "torch_generator",
]
