"""Model-based comparator: invert each slice's closed-form performance model.

The inversions are one-dimensional and monotone, so a root finder replaces a
general convex solver. Resources the model does not cover sit at a fixed level.
"""

import numpy as np
from scipy.optimize import brentq

from ..core import ACTION_DIM, COUNTED_INDICES, Action, SliceSpec, SliceTag, State
from ..env.models import DL_BW, DL_MCS, UL_BW, UL_MCS, EnvConfig, downlink_capacity, efficiency

# MCS offsets held by the RDC comparator, in grid steps
RDC_UL_MCS_OFFSET = 6
RDC_DL_MCS_OFFSET = 0


def _fixed_vector(level: float) -> np.ndarray:
    a = np.zeros(ACTION_DIM)
    a[list(COUNTED_INDICES)] = level
    return a


def mar_uplink_share(f: float, spec: SliceSpec, h: float, env_config: EnvConfig) -> float:
    """U_u = f*s / ((P - l_s) * capacity * efficiency), clamped to [0, 1]."""
    m = env_config.mar
    if f <= 0:
        return 0.0
    slack_ms = spec.kind.perf_target - m.static_latency_ms
    if slack_ms <= 0:
        return 1.0
    full_rate = env_config.ul_capacity_mbps * efficiency(h, 0, False, env_config)
    u = 1000.0 * f * m.frame_mbits / (slack_ms * full_rate)
    return float(min(1.0, u))


def hvs_downlink_share(f: float, spec: SliceSpec, h: float, env_config: EnvConfig, base: np.ndarray) -> float:
    """Smallest U_d whose downlink rate sustains the FPS target per stream."""
    m = env_config.hvs
    streams = max(f, m.min_streams)
    target = min(spec.kind.perf_target, m.max_fps)

    def shortfall(u: float) -> float:
        a = base.copy()
        a[DL_BW] = u
        return downlink_capacity(a, h, env_config) / (m.frame_mbits * streams) - target

    if shortfall(1.0) <= 0:
        return 1.0
    return float(brentq(shortfall, 0.0, 1.0, xtol=1e-12))


def model_based_act(state: State, spec: SliceSpec, env_config: EnvConfig, fixed_level: float = 0.5) -> Action:
    a = _fixed_vector(fixed_level)
    f = state.f_prev * spec.max_traffic
    if spec.kind.tag is SliceTag.MAR:
        a[UL_BW] = mar_uplink_share(f, spec, state.h_prev, env_config)
    elif spec.kind.tag is SliceTag.HVS:
        a[DL_BW] = hvs_downlink_share(f, spec, state.h_prev, env_config, a)
    else:
        a[UL_MCS] = min(1.0, RDC_UL_MCS_OFFSET / env_config.max_mcs_offset)
        a[DL_MCS] = min(1.0, RDC_DL_MCS_OFFSET / env_config.max_mcs_offset)
    return Action.from_array(a, clip=True)
