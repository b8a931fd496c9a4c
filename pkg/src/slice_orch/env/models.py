"""Closed-form resource-to-performance models of the simulated network.

These formulas are the simulator's contract. They are noise-free; the
network step applies seeded noise on top.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from ..core import SliceTag

(
    UL_BW,
    UL_MCS,
    UL_SCHED,
    DL_BW,
    DL_MCS,
    DL_SCHED,
    TN_BW,
    TN_PATH,
    CPU,
    RAM,
) = range(10)

NUM_PATH_TIERS = 3


@dataclass
class MarModel:
    frame_mbits: float = 0.2
    static_latency_ms: float = 100.0
    proc_ms: float = 30.0
    service_rate: float = 12.0
    saturation_ms: float = 5000.0


@dataclass
class HvsModel:
    frame_mbits: float = 0.5
    min_streams: float = 0.25
    max_fps: float = 30.0
    service_rate: float = 40.0


@dataclass
class RdcModel:
    msg_mbits: float = 0.005
    retx_ul: float = 0.2
    retx_dl: float = 0.02
    kappa: float = 0.5
    traffic_gain: float = 0.5
    service_rate: float = 2000.0


@dataclass
class EnvConfig:
    slots_per_episode: int = 96
    capacities: tuple[float, ...] = (1.0, 1.0, 1.0, 1.0, 1.0, 1.0)
    max_mcs_offset: int = 10
    mcs_efficiency_loss: float = 0.04
    scheduler_gain: float = 1.2
    channel_rho: float = 0.9
    channel_mean: float = 0.7
    channel_noise_std: float = 0.08
    channel_floor: float = 0.3
    perf_noise_std: float = 0.05
    ul_capacity_mbps: float = 20.0
    dl_capacity_mbps: float = 60.0
    tn_capacity_mbps: float = 100.0
    path_delays_ms: tuple[float, ...] = (8.0, 4.0, 2.0)
    ram_floor: float = 0.6
    ram_knee: float = 0.2
    mar: MarModel = field(default_factory=MarModel)
    hvs: HvsModel = field(default_factory=HvsModel)
    rdc: RdcModel = field(default_factory=RdcModel)

    def __post_init__(self):
        if self.slots_per_episode < 1:
            raise ValueError(f"slots_per_episode must be >= 1, got {self.slots_per_episode}")
        if len(self.capacities) != 6 or any(c <= 0 for c in self.capacities):
            raise ValueError(f"capacities must be 6 strictly positive values, got {self.capacities}")
        if len(self.path_delays_ms) != NUM_PATH_TIERS:
            raise ValueError(f"path_delays_ms needs {NUM_PATH_TIERS} tiers")


def quantize_offset(u: float, max_offset: int) -> int:
    """Round-half-up onto the integer offset grid {0, ..., max_offset}."""
    return int(min(math.floor(u * max_offset + 0.5), max_offset))


def is_max_rate(u: float) -> bool:
    """Scheduler knob: below 0.5 round-robin, otherwise max-rate."""
    return u >= 0.5


def path_tier(u: float) -> int:
    return min(int(u * NUM_PATH_TIERS), NUM_PATH_TIERS - 1)


def efficiency(h: float, offset: int, max_rate: bool, cfg: EnvConfig) -> float:
    channel = cfg.channel_floor + (1.0 - cfg.channel_floor) * h
    mcs = max(0.0, 1.0 - cfg.mcs_efficiency_loss * offset)
    return channel * mcs * (cfg.scheduler_gain if max_rate else 1.0)


def ram_factor(u_ram: float, cfg: EnvConfig) -> float:
    return min(1.0, cfg.ram_floor + (1.0 - cfg.ram_floor) * u_ram / cfg.ram_knee)


def uplink_capacity(a: np.ndarray, h: float, cfg: EnvConfig) -> float:
    offset = quantize_offset(a[UL_MCS], cfg.max_mcs_offset)
    return a[UL_BW] * cfg.ul_capacity_mbps * efficiency(h, offset, is_max_rate(a[UL_SCHED]), cfg)


def downlink_capacity(a: np.ndarray, h: float, cfg: EnvConfig) -> float:
    offset = quantize_offset(a[DL_MCS], cfg.max_mcs_offset)
    return a[DL_BW] * cfg.dl_capacity_mbps * efficiency(h, offset, is_max_rate(a[DL_SCHED]), cfg)


def transport_capacity(a: np.ndarray, cfg: EnvConfig) -> float:
    if math.isinf(cfg.tn_capacity_mbps):
        return math.inf
    return a[TN_BW] * cfg.tn_capacity_mbps


def compute_load(f: float, a: np.ndarray, service_rate: float, cfg: EnvConfig) -> float:
    """Offered load over the CPU/RAM-scaled service rate (M/M/1 utilization)."""
    if f <= 0 or math.isinf(service_rate):
        return 0.0
    service = service_rate * a[CPU] * ram_factor(a[RAM], cfg)
    return f / service if service > 0 else math.inf


def _transfer_ms(load_mbps: float, capacity: float, saturation_ms: float) -> float:
    if math.isinf(capacity):
        return 0.0
    if capacity <= 0:
        return saturation_ms
    return 1000.0 * load_mbps / capacity


def mar_latency(f: float, a: np.ndarray, h: float, cfg: EnvConfig) -> float:
    """Round-trip frame latency in ms.

    p = f*s/cap_ul + d_tn + d_proc + l_s, with d_proc an M/M/1-style delay
    that diverges as the offered load approaches the service rate.
    """
    m = cfg.mar
    latency = cfg.path_delays_ms[path_tier(a[TN_PATH])] + m.static_latency_ms
    if f <= 0:
        return latency + m.proc_ms
    load = f * m.frame_mbits
    latency += _transfer_ms(load, uplink_capacity(a, h, cfg), m.saturation_ms)
    latency += _transfer_ms(load, transport_capacity(a, cfg), m.saturation_ms)
    rho = compute_load(f, a, m.service_rate, cfg)
    latency += m.proc_ms / (1.0 - rho) if rho < 1.0 else m.saturation_ms
    return latency


def hvs_fps(f: float, a: np.ndarray, h: float, cfg: EnvConfig) -> float:
    """Delivered frames per second per stream, saturating at max_fps."""
    m = cfg.hvs
    throughput = min(downlink_capacity(a, h, cfg), transport_capacity(a, cfg))
    fps = min(m.max_fps, throughput / (m.frame_mbits * max(f, m.min_streams)))
    rho = compute_load(f, a, m.service_rate, cfg)
    if rho > 1.0:
        fps /= rho
    return fps


def retransmission(base: float, offset: int, h: float, traffic_ratio: float, cfg: EnvConfig) -> float:
    m = cfg.rdc
    value = base * math.exp(-m.kappa * offset) * (2.0 - h) * (1.0 + m.traffic_gain * traffic_ratio)
    return min(1.0, value)


def rdc_reliability(f: float, a: np.ndarray, h: float, cfg: EnvConfig, max_traffic: float) -> float:
    """Probability a control message is delivered; no traffic means nothing can fail."""
    m = cfg.rdc
    if f <= 0:
        return 1.0
    ratio = f / max_traffic if max_traffic > 0 else 1.0
    off_ul = quantize_offset(a[UL_MCS], cfg.max_mcs_offset)
    off_dl = quantize_offset(a[DL_MCS], cfg.max_mcs_offset)
    p = (1.0 - retransmission(m.retx_ul, off_ul, h, ratio, cfg)) * (
        1.0 - retransmission(m.retx_dl, off_dl, h, ratio, cfg)
    )
    load = f * m.msg_mbits
    p *= min(1.0, uplink_capacity(a, h, cfg) / load)
    p *= min(1.0, downlink_capacity(a, h, cfg) / load)
    rho = compute_load(f, a, m.service_rate, cfg)
    if rho > 1.0:
        p /= rho
    return p


def performance(tag: SliceTag, f: float, a: np.ndarray, h: float, cfg: EnvConfig, max_traffic: float) -> float:
    if tag is SliceTag.MAR:
        return mar_latency(f, a, h, cfg)
    if tag is SliceTag.HVS:
        return hvs_fps(f, a, h, cfg)
    return rdc_reliability(f, a, h, cfg, max_traffic)


def service_rate(tag: SliceTag, cfg: EnvConfig) -> float:
    return {SliceTag.MAR: cfg.mar, SliceTag.HVS: cfg.hvs, SliceTag.RDC: cfg.rdc}[tag].service_rate


def apply_noise(tag: SliceTag, p: float, xi: float, cfg: EnvConfig) -> float:
    """Seeded within-slot stochasticity folded into the slot-level performance."""
    sigma = cfg.perf_noise_std
    scale = math.exp(sigma * xi - sigma**2 / 2)
    if tag is SliceTag.MAR:
        return p * scale
    if tag is SliceTag.HVS:
        return min(cfg.hvs.max_fps, p * scale)
    return float(np.clip(1.0 - (1.0 - p) * scale, 0.0, 1.0))
