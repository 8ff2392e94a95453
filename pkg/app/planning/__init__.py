from .budget import BudgetLedger, LedgerMode
from .samplelog import SampleRecord, read_sample_log, replay_u_hat, write_sample_log
from .tree import ROOT, ActionSeq, EdgeStats, PlanningTree, TreeNode

__all__ = [
    "ROOT",
    "ActionSeq",
    "BudgetLedger",
    "EdgeStats",
    "LedgerMode",
    "PlanningTree",
    "SampleRecord",
    "TreeNode",
    "read_sample_log",
    "replay_u_hat",
    "write_sample_log",
]
