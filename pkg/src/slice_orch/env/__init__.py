from .models import EnvConfig, HvsModel, MarModel, RdcModel
from .network import SlicingNetwork, StepResult, check_feasible
from .traffic import TrafficTrace, gen_traffic, read_traces, write_traces

__all__ = [
    "EnvConfig",
    "HvsModel",
    "MarModel",
    "RdcModel",
    "SlicingNetwork",
    "StepResult",
    "TrafficTrace",
    "check_feasible",
    "gen_traffic",
    "read_traces",
    "write_traces",
]
