"""Dual-layer fuzzing: simulated targets, corpora, mutation, loops, reproduction."""

from .corpus import Corpus, Seed, coverage_fingerprint
from .engine import (
    CrashFinding,
    CrashLedger,
    DEFAULT_QUORUM,
    FuzzLoop,
    ReproduceOutcome,
    VerifyOutcome,
    make_sp_background_loop,
    reproduce,
    run_global_fuzzer,
    sp_fuzzer_verify,
)
from .mutate import Mutator, OPERATORS
from .seeds import extract_literal_tokens, seed_from_direction, seed_from_fp
from .target import (
    CrashSpec,
    DEFAULT_MAX_BLOB,
    ExecLimits,
    ExecutionResult,
    SimTarget,
    SimTargetRunner,
    TargetRule,
    TargetRunner,
    eval_predicate,
    execute,
    load_target,
    load_targets_dir,
    parse_target,
    validate_predicate,
)

__all__ = [
    "Corpus",
    "CrashFinding",
    "CrashLedger",
    "CrashSpec",
    "DEFAULT_MAX_BLOB",
    "DEFAULT_QUORUM",
    "ExecLimits",
    "ExecutionResult",
    "FuzzLoop",
    "Mutator",
    "OPERATORS",
    "ReproduceOutcome",
    "Seed",
    "SimTarget",
    "SimTargetRunner",
    "TargetRule",
    "TargetRunner",
    "VerifyOutcome",
    "coverage_fingerprint",
    "eval_predicate",
    "execute",
    "extract_literal_tokens",
    "load_target",
    "load_targets_dir",
    "make_sp_background_loop",
    "parse_target",
    "reproduce",
    "run_global_fuzzer",
    "seed_from_direction",
    "seed_from_fp",
    "sp_fuzzer_verify",
    "validate_predicate",
]
