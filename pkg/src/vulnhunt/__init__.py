"""vulnhunt: agent-driven vulnerability discovery over simulated crash targets.

The package wires four layers together:

- a call-graph model with fuzzer reachability and read-only code queries,
- a suspicious-point store with dedup, verification, and PoC lifecycle,
- a direction scheduler plus pluggable LLM agents (scripted or HTTP),
- a dual-layer deterministic fuzzing engine over simulated targets.

`pipeline.run_scan` drives one worker per (fuzzer, sanitizer) pair; the
`vulnhunt` CLI exposes scan/status/report commands.
"""

__version__ = "0.1.0"

from .callgraph import CallGraph, load_call_graph, query, reachable_subgraph
from .config import Config, load_config
from .pipeline import WorkerTask, plan_workers, run_scan, status_snapshot
from .spstore import SPStore, SuspiciousPoint
from .store import FileStore, MemoryStore

__all__ = [
    "__version__",
    "CallGraph",
    "Config",
    "FileStore",
    "MemoryStore",
    "SPStore",
    "SuspiciousPoint",
    "WorkerTask",
    "load_call_graph",
    "load_config",
    "plan_workers",
    "query",
    "reachable_subgraph",
    "run_scan",
    "status_snapshot",
]
