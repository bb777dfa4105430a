from .engine import (CSV_COLUMNS, Engine, HyperParams, NothingSelectable,
                     RunStats, TestCase, run)
from .tree import Kind, Node, Reason, iter_nodes, uct_score

__all__ = ["CSV_COLUMNS", "Engine", "HyperParams", "Kind", "Node",
           "NothingSelectable", "Reason", "RunStats", "TestCase", "iter_nodes",
           "run", "uct_score"]
