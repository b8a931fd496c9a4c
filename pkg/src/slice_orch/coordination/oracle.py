"""Exhaustive minimization of the action-modification objective over a slice's key knobs."""

import itertools
from collections.abc import Callable, Sequence

import numpy as np

from ..core import COUNTED_INDICES, Action, ResourceVector, State

CostFn = Callable[[State, Action], float]


def h_objective(state: State, a: Action, modified: Action, beta: ResourceVector, cost_fn: CostFn) -> float:
    """|a_hat - a|^2 + sum_k beta^k * a_hat^k + c(s, a_hat)."""
    diff = modified.as_array() - a.as_array()
    usage = modified.as_array()[list(COUNTED_INDICES)]
    return float(diff @ diff + beta.as_array() @ usage + cost_fn(state, modified))


def relative_gap(h_value: float, h_star: float) -> float:
    return (h_value - h_star) / max(abs(h_star), 0.01)


def brute_force_modify(
    state: State,
    a: Action,
    beta: ResourceVector,
    cost_fn: CostFn,
    key_dims: Sequence[int],
    resolution: int = 5,
) -> Action:
    """Grid argmin of the objective over ``key_dims``; ties go to the smallest usage, then lexicographic.

    Every other dim is copied from ``a``. ``a`` itself is also a candidate, so
    the result never scores worse than leaving the action alone.
    """
    if resolution < 2:
        raise ValueError(f"grid resolution must be >= 2, got {resolution}")
    key_dims = list(key_dims)
    base = a.as_array()
    values = np.linspace(0.0, 1.0, resolution)
    points = [tuple(base[key_dims]), *itertools.product(values, repeat=len(key_dims))]
    best = None
    for point in points:
        arr = base.copy()
        arr[key_dims] = point
        candidate = Action.from_array(arr)
        h = h_objective(state, a, candidate, beta, cost_fn)
        rank = (h, float(arr[list(COUNTED_INDICES)].sum()), tuple(float(v) for v in point))
        if best is None or rank < best[0]:
            best = (rank, candidate)
    return best[1]


class OracleModifier:
    """Callable modifier backed by the brute-force argmin."""

    def __init__(self, cost_fn: CostFn, key_dims: Sequence[int], resolution: int = 5):
        self.cost_fn = cost_fn
        self.key_dims = tuple(key_dims)
        self.resolution = resolution

    def __call__(self, state: State, a: Action, beta: ResourceVector) -> Action:
        return brute_force_modify(state, a, beta, self.cost_fn, self.key_dims, self.resolution)
