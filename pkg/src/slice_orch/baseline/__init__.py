from .grid import (
    KEY_DIMS,
    BaselineConfig,
    GridPolicyTable,
    baseline_act,
    build_table,
    load_tables,
    save_tables,
    table_from_doc,
    table_to_doc,
)
from .model_based import model_based_act
from .projection import project_actions

__all__ = [
    "KEY_DIMS",
    "BaselineConfig",
    "GridPolicyTable",
    "baseline_act",
    "build_table",
    "load_tables",
    "model_based_act",
    "project_actions",
    "save_tables",
    "table_from_doc",
    "table_to_doc",
]
