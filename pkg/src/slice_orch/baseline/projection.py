from collections.abc import Sequence

import numpy as np

from ..core import COUNTED_INDICES, Action, ResourceVector


def project_actions(actions: Sequence[Action], capacities: ResourceVector | Sequence[float]) -> list[Action]:
    """Scale down every over-requested resource proportionally across slices.

    Resource k with sum_i a^{i,k} > L^k is multiplied by L^k / sum; feasible
    resources are untouched. The factor is nudged down by ulps until the
    rounded sum respects the capacity exactly.
    """
    caps = capacities.as_array() if isinstance(capacities, ResourceVector) else np.asarray(capacities, dtype=float)
    matrix = np.array([a.as_array() for a in actions], dtype=float)
    if matrix.size == 0:
        return []
    for k, idx in enumerate(COUNTED_INDICES):
        column = matrix[:, idx].copy()
        total = column.sum()
        if total <= caps[k]:
            continue
        factor = caps[k] / total
        scaled = column * factor
        while scaled.sum() > caps[k]:
            factor = np.nextafter(factor, 0.0)
            scaled = column * factor
        matrix[:, idx] = scaled
    return [Action.from_array(row, clip=True) for row in matrix]
