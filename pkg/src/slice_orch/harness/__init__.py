from .config import ExperimentConfig, SliceSetConfig, TrainingConfig, config_from_mapping, dump_config, load_config
from .metrics import METRICS_COLUMNS, MetricsRecord, compute_metrics, epoch_records, write_metrics_csv
from .pipeline import STAGES, RunPaths, ablate, collect_baseline, evaluate, oracle, pretrain, run_pipeline, train_online
from .runner import ABLATION_MODES, Experiment, RunMode, SlicePolicy, run_joint_episode

__all__ = [
    "ABLATION_MODES",
    "METRICS_COLUMNS",
    "STAGES",
    "Experiment",
    "ExperimentConfig",
    "MetricsRecord",
    "RunMode",
    "RunPaths",
    "SlicePolicy",
    "SliceSetConfig",
    "TrainingConfig",
    "ablate",
    "collect_baseline",
    "compute_metrics",
    "config_from_mapping",
    "dump_config",
    "epoch_records",
    "evaluate",
    "load_config",
    "oracle",
    "pretrain",
    "run_joint_episode",
    "run_pipeline",
    "train_online",
    "write_metrics_csv",
]
