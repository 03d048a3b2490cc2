"""Scan orchestration: one worker per (fuzzer, sanitizer) pair.

A worker walks its fuzzer's reachable subgraph, asks agents for exploration
directions and suspicious points, verifies them, attempts crafted
proof-of-crash inputs for confirmed points, and keeps background fuzzing
loops fed with literal-derived and false-positive-derived seeds.  Confirmed,
reproduced crashes become vulnerability reports.

Everything is deterministic at desk scale: fuzzing runs in cooperative
slices on the worker thread (no wall-clock races), ids come from counters,
and timestamps are logical stage counters.
"""

from __future__ import annotations

import logging
import os
import random
import time
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .agents import (
    AgentOutcome,
    Budgets,
    ProviderPool,
    ScriptedProvider,
    HttpChatProvider,
    load_scenario,
    make_registry,
    make_spec,
    render_prompt,
    run_agent,
)
from .callgraph import QUERY_KINDS, CallGraph, load_call_graph, query, reachable_subgraph
from .config import Config
from .delta import DeltaSpec, load_delta
from .directions import Direction, DirectionScheduler, GlobalAnalyzedSet
from .errors import ChainExhaustedError, ConfigError, UnknownFuzzerError
from .fuzzing import (
    Corpus,
    CrashLedger,
    ExecLimits,
    FuzzLoop,
    Mutator,
    SimTargetRunner,
    load_targets_dir,
    reproduce,
    seed_from_direction,
    seed_from_fp,
    sp_fuzzer_verify,
)
from .recipes import RecipeBlobFactory, RecipeError
from .reporting import VulnReport
from .spstore import SPStore, SuspiciousPoint, is_sanitizer_compatible
from .store import FileStore, MemoryStore, StoreBackend

log = logging.getLogger("vulnhunt.pipeline")

WORKER_STATES = ("pending", "running", "done", "timeout", "failed")

CODE_TOOL_NAMES = QUERY_KINDS

FAILURE_HINT_CHARS = 2000


@dataclass
class TaskMetrics:
    """Per-worker accounting, plus the lifecycle identity counters."""

    tokens: int = 0
    tool_calls: int = 0
    agent_runs: int = 0
    executions: int = 0
    sp_total: int = 0
    sp_deduped: int = 0
    tp_v: int = 0
    fp: int = 0
    unverified: int = 0
    pov_count: int = 0
    report_count: int = 0
    wall_clock_s: float = 0.0

    def to_record(self) -> dict:
        return dict(self.__dict__)


@dataclass
class WorkerTask:
    """One (fuzzer, sanitizer) scan assignment."""

    id: str
    fuzzer: str
    sanitizer: str
    mode: str = "full"
    state: str = "pending"
    degenerate: bool = False
    budget_seconds: float = 0.0
    token_ceiling: int | None = None
    metrics: TaskMetrics = field(default_factory=TaskMetrics)
    warnings: list[str] = field(default_factory=list)

    def to_record(self) -> dict:
        return {
            "id": self.id,
            "fuzzer": self.fuzzer,
            "sanitizer": self.sanitizer,
            "mode": self.mode,
            "state": self.state,
            "degenerate": self.degenerate,
            "budget_seconds": self.budget_seconds,
            "token_ceiling": self.token_ceiling,
            "metrics": self.metrics.to_record(),
            "warnings": list(self.warnings),
        }


def plan_workers(
    graph: CallGraph,
    config: Config,
    pair_filter=None,
) -> list[WorkerTask]:
    """Build the worker task list: the fuzzer x sanitizer cross product.

    `pair_filter(fuzzer, sanitizer) -> bool` keeps a subset; an empty
    result after filtering is a configuration error.  Pairs whose
    reachable subgraph is empty are kept but flagged degenerate.
    """
    fuzzers = list(config.fuzzers) or sorted(graph.fuzzer_entries)
    for fuzzer in fuzzers:
        if fuzzer not in graph.fuzzer_entries:
            raise UnknownFuzzerError(f"unknown fuzzer: {fuzzer!r}")
    tasks = []
    for fuzzer in fuzzers:
        for sanitizer in config.sanitizers:
            if pair_filter is not None and not pair_filter(fuzzer, sanitizer):
                continue
            sub = reachable_subgraph(graph, fuzzer)
            task = WorkerTask(
                id=f"{fuzzer}--{sanitizer}",
                fuzzer=fuzzer,
                sanitizer=sanitizer,
                mode=config.mode,
                degenerate=not sub.functions,
                budget_seconds=config.budget_seconds,
                token_ceiling=config.token_ceiling,
            )
            if task.degenerate:
                task.warnings.append(f"no functions reachable from fuzzer {fuzzer!r}")
            tasks.append(task)
    if not tasks:
        raise ConfigError("no worker tasks remain after filtering the fuzzer x sanitizer product")
    return tasks


@dataclass
class _SPGenCall:
    """One sp-generator invocation, kept for audit."""

    function_id: str
    context: str
    candidates: int


class Worker:
    """Runs one task end to end against a shared store and SP pool."""

    def __init__(
        self,
        task: WorkerTask,
        graph: CallGraph,
        config: Config,
        spstore: SPStore,
        analyzed: GlobalAnalyzedSet,
        pool: ProviderPool,
        store: StoreBackend,
        target=None,
        delta: DeltaSpec | None = None,
        active_roles: set[str] | None = None,
        out_dir: str | None = None,
    ):
        self.task = task
        self.graph = graph
        self.config = config
        self.spstore = spstore
        self.pool = pool
        self.store = store
        self.delta = delta
        self.active_roles = active_roles if active_roles is not None else set()
        self.out_dir = out_dir

        self.subgraph = reachable_subgraph(graph, task.fuzzer)
        self.scheduler = DirectionScheduler(
            self.subgraph,
            task.fuzzer,
            analyzed,
            max_directions=config.max_directions,
            max_revisits=config.max_revisits,
        )
        limits = ExecLimits(max_blob=config.max_blob)
        self.runner = SimTargetRunner(target, task.sanitizer, limits) if target else None
        self.mutator = Mutator(max_len=config.max_blob)
        self.corpus = Corpus()
        self.crash_ledger = CrashLedger()
        self.global_loop: FuzzLoop | None = None

        self.sp_generator_log: list[_SPGenCall] = []
        self.owned_sp_ids: set[str] = set()
        self.importance: dict[str, int] = {}
        self.poc_queue: list[str] = []
        self.poc_done: set[str] = set()
        self.verify_retry: list[str] = []
        self.verify_retried: set[str] = set()
        self.reported_keys: dict[tuple, str] = {}
        self.crash_repeats: dict[tuple, int] = {}
        self.pov_records: list[dict] = []
        self.report_records: list[dict] = []

        self._pov_seq = 0
        self._report_seq = 0
        self._run_seq = 0
        self._started = 0.0
        self._budget_reason = ""

    # -- budgets ---------------------------------------------------------

    def _budget_tripped(self) -> str:
        if self._budget_reason:
            return self._budget_reason
        if time.monotonic() - self._started >= self.task.budget_seconds:
            self._budget_reason = f"wall clock budget ({self.task.budget_seconds:.0f}s) exhausted"
        elif (
            self.task.token_ceiling is not None
            and self.task.metrics.tokens >= self.task.token_ceiling
        ):
            self._budget_reason = f"token ceiling ({self.task.token_ceiling}) exhausted"
        return self._budget_reason

    def _remaining_tokens(self) -> int | None:
        if self.task.token_ceiling is None:
            return None
        return max(0, self.task.token_ceiling - self.task.metrics.tokens)

    # -- agent plumbing ----------------------------------------------------

    def _code_tool_factories(self) -> dict:
        factories = {}
        for kind in CODE_TOOL_NAMES:
            def make(kind=kind):
                def fn(**args):
                    return query(self.subgraph, kind, args)

                fn.__name__ = kind
                fn.__doc__ = f"Read-only code query '{kind}' over the reachable subgraph."
                return fn

            factories[kind] = make
        return factories

    def _run_role(
        self,
        role: str,
        seed_context: str,
        extra_factories: dict | None = None,
        tool_limits: dict | None = None,
        prompt_context: dict | None = None,
    ) -> AgentOutcome:
        factories = self._code_tool_factories()
        if extra_factories:
            factories.update(extra_factories)
        tool_names = tuple(factories)
        budgets = Budgets(
            max_total_tokens=self._remaining_tokens(),
            tool_call_limits=dict(tool_limits or {}),
        )
        spec = make_spec(role, self.config.model_chains, tool_names, budgets)
        registry = make_registry(tool_names, factories)
        self._run_seq += 1
        outcome = run_agent(
            spec,
            seed_context,
            registry,
            self.pool,
            system_prompt=render_prompt(role, **(prompt_context or {})),
            run_id=f"{self.task.id}:{role}:{self._run_seq}",
        )
        self.task.metrics.tokens += outcome.usage.total
        self.task.metrics.tool_calls += len(outcome.tool_log)
        self.task.metrics.agent_runs += 1
        return outcome

    # -- directions and seeding -------------------------------------------

    def _generate_directions(self) -> None:
        accepted = []

        def create_direction(
            name: str,
            entry_functions: list,
            core_functions: list,
            risk_level: str,
            risk_reason: str,
        ):
            direction = Direction(
                name=str(name),
                entry_functions=tuple(str(f) for f in entry_functions),
                core_functions=tuple(str(f) for f in core_functions),
                risk_level=str(risk_level),
                risk_reason=str(risk_reason),
            )
            result = self.scheduler.register_direction(direction)
            if result.accepted:
                accepted.append(direction.name)
            return {
                "accepted": result.accepted,
                "reason": result.reason,
                "warnings": result.warnings,
            }

        entries = sorted(self.subgraph.fuzzer_entries.get(self.task.fuzzer, ()))
        seed = "\n".join(
            [
                f"fuzzer: {self.task.fuzzer}",
                f"sanitizer: {self.task.sanitizer}",
                f"entry functions: {', '.join(entries) or '(none)'}",
                f"reachable functions: {len(self.subgraph.functions)}",
                "",
                "Propose exploration directions for this fuzzer with create_direction.",
            ]
        )
        try:
            self._run_role(
                "direction-generator",
                seed,
                extra_factories={"create_direction": lambda: create_direction},
                prompt_context={"max_directions": self.config.max_directions},
            )
        except ChainExhaustedError as exc:
            self.task.warnings.append(f"direction generation failed: {exc}")
        if not accepted:
            self.task.warnings.append(
                "no exploration directions registered; falling back to the whole subgraph"
            )

    def _agent_seed_blobs(self, direction: Direction) -> list[bytes] | None:
        if "seed-generator" not in self.active_roles:
            return None
        blobs: list[bytes] = []

        def add_seed(hex: str = "", text: str = ""):
            if hex:
                blobs.append(bytes.fromhex(hex))
            else:
                blobs.append(text.encode("utf-8", "replace"))
            return {"accepted": True, "count": len(blobs)}

        seed = "\n".join(
            [
                f"fuzzer: {self.task.fuzzer}",
                f"direction: {direction.name}",
                f"functions: {', '.join(direction.entry_functions + direction.core_functions)}",
                "Produce starting inputs with add_seed (hex= or text=).",
            ]
        )
        try:
            self._run_role("seed-generator", seed, extra_factories={"add_seed": lambda: add_seed})
        except ChainExhaustedError as exc:
            self.task.warnings.append(f"seed generation failed: {exc}")
            return None
        return blobs or None

    def _admit_seed(self, blob: bytes, origin: str) -> None:
        if self.runner is None:
            return
        result = self.runner.run(blob)
        self.task.metrics.executions += 1
        if result.outcome == "crash":
            self._handle_fuzzer_crash(blob, result, origin)
            return
        self.corpus.add(blob, result.coverage, origin)

    def _seed_from_directions(self) -> None:
        for direction in self.scheduler.directions:
            agent_blobs = self._agent_seed_blobs(direction)
            seeds, tokens = seed_from_direction(direction, self.subgraph, agent_blobs)
            for token in tokens:
                self.mutator.add_token(token)
            for blob in seeds:
                self._admit_seed(blob, f"direction:{direction.name}")

    def _seed_from_fp(self, sp: SuspiciousPoint) -> None:
        seeds, tokens = seed_from_fp(sp, self.subgraph)
        for token in tokens:
            self.mutator.add_token(token)
        for blob in seeds:
            self._admit_seed(blob, f"fp:{sp.id}")

    # -- background fuzzing -------------------------------------------------

    def _ensure_global_loop(self) -> None:
        if self.global_loop is None and self.runner is not None:
            rng = random.Random(f"{self.config.rng_seed}|{self.task.id}|global")
            self.global_loop = FuzzLoop(
                self.runner,
                self.corpus,
                self.mutator,
                rng,
                origin="global",
                iteration_budget=self.config.global_fuzz_iterations,
            )

    def _pump_global(self, iterations: int | None = None) -> None:
        self._ensure_global_loop()
        if self.global_loop is None or self.global_loop.budget_left <= 0:
            return
        before = self.global_loop.stats.executions
        crashes = self.global_loop.run(iterations or self.config.fuzz_slice)
        self.task.metrics.executions += self.global_loop.stats.executions - before
        for finding in crashes:
            self._handle_fuzzer_crash(finding.blob, finding.result, finding.origin)

    # -- suspicious point generation ----------------------------------------

    def _function_context(self, function_id: str, heading: str) -> str:
        rec = self.subgraph.functions[function_id]
        lines = [
            heading,
            f"function: {function_id}",
            f"file: {rec.file_path}",
            f"callers: {', '.join(self.subgraph.callers_of(function_id)) or '(none)'}",
            f"callees: {', '.join(rec.callees) or '(none)'}",
        ]
        if self.delta is not None:
            lines.append("")
            lines.append(f"commit message:\n{self.delta.commit_message}")
        lines.extend(["", "source:", rec.source_text])
        return "\n".join(lines)

    def _analyze_function(self, function_id: str, direction_name: str) -> list[SuspiciousPoint]:
        pending: list[SuspiciousPoint] = []

        def create_suspicious_point(
            function: str, description: str, vuln_type: str, score: float
        ):
            rec = self.subgraph.resolve(str(function))
            if rec is None or rec.id not in self.subgraph.functions:
                raise ValueError(f"function {function!r} is not in the reachable subgraph")
            candidate = self.spstore.build_candidate(
                function_id=rec.id,
                source=(self.task.fuzzer, self.task.sanitizer),
                description=str(description),
                vuln_type=str(vuln_type),
                score=float(score),
            )
            pending.append(candidate)
            return {
                "accepted": True,
                "function": rec.id,
                "vuln_type": candidate.vuln_type,
                "score": candidate.score,
            }

        seed = self._function_context(
            function_id, f"direction: {direction_name} | analyze this function for memory-safety flaws"
        )
        try:
            self._run_role(
                "sp-generator",
                seed,
                extra_factories={"create_suspicious_point": lambda: create_suspicious_point},
            )
        except ChainExhaustedError as exc:
            self.task.warnings.append(f"sp generation failed for {function_id}: {exc}")
        self.sp_generator_log.append(
            _SPGenCall(function_id=function_id, context=seed, candidates=len(pending))
        )
        return pending

    def _process_candidates(self, pending: list[SuspiciousPoint], importance: int) -> None:
        for candidate in pending:
            outcome = self.spstore.deduplicate(candidate)
            self.task.metrics.sp_total += 1
            sp = self.spstore.get(outcome.sp_id)
            if not outcome.merged:
                self.owned_sp_ids.add(sp.id)
                self.importance[sp.id] = importance
            else:
                self.importance.setdefault(sp.id, importance)
            if not sp.is_verified:
                self._verify(sp)
                sp = self.spstore.get(sp.id)
            self._route_verified(sp)

    def _route_verified(self, sp: SuspiciousPoint) -> None:
        if sp.verdict == "tp":
            if (
                self.task.fuzzer not in sp.poc_attempted_by
                and sp.id not in self.poc_done
                and sp.id not in self.poc_queue
                and (self.task.fuzzer, self.task.sanitizer) in sp.sources
            ):
                self.poc_queue.append(sp.id)
        elif sp.verdict == "fp":
            self._seed_from_fp(sp)

    # -- verification --------------------------------------------------------

    def _verify(self, sp: SuspiciousPoint) -> None:
        if not is_sanitizer_compatible(sp.vuln_type, self.task.sanitizer):
            self.spstore.apply_verification(
                sp.id,
                "fp",
                poc_guidance=(
                    f"{sp.vuln_type} is invisible to the {self.task.sanitizer} sanitizer; "
                    "no crash signal can confirm it on this worker"
                ),
            )
            return
        captured: dict = {}

        def update_suspicious_point(
            verdict: str,
            corrected_description: str = "",
            new_score: float | None = None,
            poc_guidance: str = "",
        ):
            if verdict not in ("tp", "fp"):
                raise ValueError("verdict must be 'tp' or 'fp'")
            captured.update(
                verdict=verdict,
                corrected_description=corrected_description,
                new_score=new_score,
                poc_guidance=poc_guidance,
            )
            return {"accepted": True, "verdict": verdict}

        seed = self._function_context(
            sp.function_id,
            f"verify suspicious point {sp.id}: {sp.vuln_type} (score {sp.score})\n"
            f"claim: {sp.description}",
        )
        try:
            self._run_role(
                "sp-verifier",
                seed,
                extra_factories={"update_suspicious_point": lambda: update_suspicious_point},
            )
        except ChainExhaustedError:
            if sp.id not in self.verify_retried:
                self.verify_retried.add(sp.id)
                self.verify_retry.append(sp.id)
            else:
                self.task.warnings.append(f"verification failed twice for {sp.id}; left unverified")
            return
        if captured:
            self.spstore.apply_verification(
                sp.id,
                captured["verdict"],
                corrected_description=captured["corrected_description"] or None,
                new_score=captured["new_score"],
                poc_guidance=captured["poc_guidance"] or None,
            )

    def _drain_verify_retries(self) -> None:
        retries, self.verify_retry = self.verify_retry, []
        for sp_id in retries:
            sp = self.spstore.get(sp_id)
            if sp.is_verified:
                continue
            self._verify(sp)
            self._route_verified(self.spstore.get(sp_id))

    # -- proof-of-crash generation --------------------------------------------

    def _queue_order(self, sp_id: str) -> tuple:
        sp = self.spstore.get(sp_id)
        return (-self.importance.get(sp_id, 1), -sp.score, sp.created_stage, sp.id)

    def _drain_poc_queue(self) -> None:
        while self.poc_queue and not self._budget_tripped():
            self.poc_queue.sort(key=self._queue_order)
            sp_id = self.poc_queue.pop(0)
            if sp_id in self.poc_done:
                continue
            self.poc_done.add(sp_id)
            self._generate_poc(self.spstore.get(sp_id))

    def _static_shortest_path(self, target_id: str) -> list[str]:
        entries = sorted(self.subgraph.fuzzer_entries.get(self.task.fuzzer, ()))
        parents: dict[str, str | None] = {e: None for e in entries}
        queue = deque(entries)
        while queue:
            current = queue.popleft()
            if current == target_id:
                path = [current]
                while parents[path[-1]] is not None:
                    path.append(parents[path[-1]])
                return list(reversed(path))
            rec = self.subgraph.functions.get(current)
            if rec is None:
                continue
            for callee in rec.callees:
                if callee in self.subgraph.functions and callee not in parents:
                    parents[callee] = current
                    queue.append(callee)
        return []

    def _generate_poc(self, sp: SuspiciousPoint) -> None:
        if self.runner is None:
            self.task.warnings.append(f"no simulated target; cannot attempt poc for {sp.id}")
            return
        factory = RecipeBlobFactory()
        state = {"attempts": 0, "last_blobs": [], "solved": False}
        sp_bg: dict = {"loop": None, "failed": []}

        def _pump_sp_background() -> None:
            loop = sp_bg["loop"]
            if loop is None and sp_bg["failed"]:
                fresh = Corpus()
                for blob in sp_bg["failed"]:
                    res = self.runner.run(blob)
                    self.task.metrics.executions += 1
                    if res.outcome != "crash":
                        fresh.add(blob, res.coverage, f"sp:{sp.id}")
                loop = FuzzLoop(
                    self.runner,
                    fresh,
                    self.mutator,
                    random.Random(f"{self.config.rng_seed}|{self.task.id}|sp|{sp.id}"),
                    origin=f"sp-background:{sp.id}",
                    iteration_budget=self.config.sp_fuzz_iterations,
                )
                sp_bg["loop"] = loop
            if loop is None or loop.budget_left <= 0:
                return
            before = loop.stats.executions
            for finding in loop.run(min(self.config.fuzz_slice, loop.budget_left)):
                self._handle_fuzzer_crash(finding.blob, finding.result, finding.origin)
            self.task.metrics.executions += loop.stats.executions - before

        def create_pov(recipe: dict):
            state["attempts"] += 1
            attempt = state["attempts"]
            try:
                blobs = factory.make_variants(recipe, self.config.variants_per_attempt)
            except RecipeError as exc:
                return {
                    "success": False,
                    "attempt": attempt,
                    "error": f"recipe error: {exc}",
                }
            outcome = sp_fuzzer_verify(blobs, self.runner)
            executed = [r for r in outcome.results if r is not None]
            self.task.metrics.executions += len(executed)
            for index, result in enumerate(outcome.results):
                if result is None or result.outcome == "crash":
                    continue
                self.corpus.add(blobs[index], result.coverage, f"poc:{sp.id}")
                sp_bg["failed"].append(blobs[index])
            state["last_blobs"] = blobs
            if outcome.crashed:
                index = outcome.crashed_index
                blob, result = blobs[index], outcome.results[index]
                handled = self._confirm_poc_crash(sp, blob, result, attempt)
                if handled:
                    state["solved"] = True
                    return {
                        "success": True,
                        "attempt": attempt,
                        "variant": index,
                        "crash": result.crash.location,
                        "vuln_type": result.crash.vuln_type,
                    }
                return {
                    "success": False,
                    "attempt": attempt,
                    "error": "crash did not reproduce across the quorum",
                }
            _pump_sp_background()
            tails = []
            for index, result in enumerate(outcome.results):
                if result is None:
                    tails.append(f"variant {index}: skipped ({outcome.skip_policy})")
                else:
                    tails.append(
                        f"variant {index}: {result.outcome}, "
                        f"coverage {len(result.coverage)} functions, "
                        f"deepest: {result.trace[-1] if result.trace else '(empty)'}"
                    )
            combined = "\n".join(r.output for r in executed)
            return {
                "success": False,
                "attempt": attempt,
                "summary": tails,
                "output_tail": combined[-FAILURE_HINT_CHARS:],
            }

        def trace_pov(variant: int = 0):
            current_attempt = state["attempts"] + 1
            if current_attempt < self.config.trace_unlock_attempt:
                return (
                    f"tool locked: trace_pov unlocks at attempt "
                    f"{self.config.trace_unlock_attempt} (currently at attempt {current_attempt})"
                )
            if not state["last_blobs"]:
                return "no previous attempt to trace"
            variant = max(0, min(int(variant), len(state["last_blobs"]) - 1))
            result = self.runner.run(state["last_blobs"][variant])
            self.task.metrics.executions += 1
            want = self._static_shortest_path(sp.function_id)
            executed = set(result.coverage)
            divergence = next((f for f in want if f not in executed), None)
            lines = ["executed path:"]
            lines.extend(result.trace)
            lines.append(f"static route to {sp.function_id}: {' -> '.join(want) or '(unreachable)'}")
            if divergence:
                lines.append(f"divergence: execution never reached {divergence}")
            elif want:
                lines.append("execution covers the static route; the crash condition itself is unmet")
            return "\n".join(lines)

        seed = "\n".join(
            [
                f"confirmed suspicious point {sp.id}",
                f"function: {sp.function_id}",
                f"vuln_type: {sp.vuln_type}",
                f"fuzzer: {self.task.fuzzer} | sanitizer: {self.task.sanitizer}",
                f"description: {sp.description}",
                f"guidance: {sp.poc_guidance or '(none)'}",
                "",
                "source:",
                self.subgraph.functions[sp.function_id].source_text,
            ]
        )
        try:
            self._run_role(
                "poc-generator",
                seed,
                extra_factories={
                    "create_pov": lambda: create_pov,
                    "trace_pov": lambda: trace_pov,
                },
                tool_limits={"create_pov": self.config.max_poc_attempts},
                prompt_context={
                    "variants": self.config.variants_per_attempt,
                    "max_attempts": self.config.max_poc_attempts,
                    "trace_unlock": self.config.trace_unlock_attempt,
                },
            )
        except ChainExhaustedError as exc:
            self.task.warnings.append(f"poc generation failed for {sp.id}: {exc}")
        if not state["solved"]:
            self.spstore.record_poc_result(sp.id, self.task.fuzzer, crashed=False)

    # -- crash handling ---------------------------------------------------------

    def _confirm_poc_crash(self, sp: SuspiciousPoint, blob: bytes, result, attempts: int) -> bool:
        repro = reproduce(blob, self.runner, quorum=self.config.quorum)
        self.task.metrics.executions += repro.runs
        if not repro.confirmed:
            return False
        crash = result.crash
        self.crash_ledger.record(result)
        pov_id = self._persist_pov(sp.id, blob, result, repro.reproduced_count)
        self.spstore.record_poc_result(sp.id, self.task.fuzzer, crashed=True, pov_id=pov_id)
        self._emit_report(sp, pov_id, crash, "S", attempts, repro.reproduced_count)
        return True

    def _attach_crash_sp(self, crash) -> SuspiciousPoint:
        existing = self.spstore.for_function(crash.location)
        same_type = [sp for sp in existing if sp.vuln_type == crash.vuln_type]
        pool = same_type or existing
        if pool:
            return sorted(pool, key=lambda sp: (-sp.score, sp.created_stage, sp.id))[0]
        sp_id = self.spstore.create_sp(
            function_id=crash.location,
            source=(self.task.fuzzer, self.task.sanitizer),
            description=(
                f"background fuzzing crashed inside {crash.location}(): "
                f"{crash.vuln_type} reported by the {crash.sanitizer} sanitizer"
            ),
            vuln_type=crash.vuln_type,
            score=1.0,
            bypass=True,
        )
        # A synthetic point is still a discovered point: count it on both
        # sides so SP_tot >= SP_ded holds for crash-only workers too.
        self.task.metrics.sp_total += 1
        self.owned_sp_ids.add(sp_id)
        self.importance.setdefault(sp_id, 1)
        return self.spstore.get(sp_id)

    def _handle_fuzzer_crash(self, blob: bytes, result, origin: str) -> None:
        crash = result.crash
        key = (crash.location, crash.vuln_type, crash.sanitizer, self.task.fuzzer)
        if key in self.reported_keys:
            self.crash_repeats[key] = self.crash_repeats.get(key, 0) + 1
            return
        self.crash_ledger.record(result)
        repro = reproduce(blob, self.runner, quorum=self.config.quorum)
        self.task.metrics.executions += repro.runs
        if not repro.confirmed:
            self.task.warnings.append(
                f"crash at {crash.location} from {origin} did not reproduce; discarded"
            )
            return
        sp = self._attach_crash_sp(crash)
        pov_id = self._persist_pov(sp.id, blob, result, repro.reproduced_count)
        bypass = sp.verdict != "tp"
        self.spstore.record_poc_result(
            sp.id, self.task.fuzzer, crashed=True, pov_id=pov_id, bypass=bypass
        )
        self._emit_report(sp, pov_id, crash, "G", 0, repro.reproduced_count)

    def _persist_pov(self, sp_id: str, blob: bytes, result, reproduced_count: int) -> str:
        self._pov_seq += 1
        pov_id = f"pov-{self.task.id}-{self._pov_seq:03d}"
        blob_path = ""
        if self.out_dir:
            pov_dir = os.path.join(self.out_dir, "povs")
            os.makedirs(pov_dir, exist_ok=True)
            blob_path = os.path.join(pov_dir, f"{pov_id}.bin")
            with open(blob_path, "wb") as fh:
                fh.write(blob)
        record = {
            "id": pov_id,
            "sp_id": sp_id,
            "fuzzer": self.task.fuzzer,
            "sanitizer": self.task.sanitizer,
            "location": result.crash.location,
            "vuln_type": result.crash.vuln_type,
            "blob_hex": blob.hex(),
            "blob_path": blob_path,
            "reproduced_count": reproduced_count,
            "trace": list(result.trace),
            "output": result.output,
        }
        self.store.put("povs", pov_id, record)
        self.pov_records.append(record)
        self.task.metrics.pov_count += 1
        return pov_id

    def _report_description(self, sp: SuspiciousPoint, crash, reproduced_count: int) -> str:
        fallback = (
            f"{sp.description.rstrip('.')}. Confirmed as {crash.vuln_type} in "
            f"{crash.location} by the {crash.sanitizer} sanitizer under fuzzer "
            f"{self.task.fuzzer}; the proof-of-crash input reproduced the crash in "
            f"{reproduced_count}/{self.config.quorum} runs."
        )
        if "report" not in self.active_roles:
            return fallback
        seed = "\n".join(
            [
                f"confirmed vulnerability at {crash.location} ({crash.vuln_type})",
                f"sanitizer: {crash.sanitizer} | fuzzer: {self.task.fuzzer}",
                f"analyst notes: {sp.description}",
                "Write the final report summary as plain text.",
            ]
        )
        try:
            outcome = self._run_role("report", seed)
        except ChainExhaustedError:
            return fallback
        return outcome.final_text.strip() or fallback

    def _emit_report(
        self,
        sp: SuspiciousPoint,
        pov_id: str,
        crash,
        method: str,
        attempts: int,
        reproduced_count: int,
    ) -> None:
        key = (crash.location, crash.vuln_type, crash.sanitizer, self.task.fuzzer)
        if key in self.reported_keys:
            self.crash_repeats[key] = self.crash_repeats.get(key, 0) + 1
            return
        self._report_seq += 1
        report_id = f"rpt-{self.task.id}-{self._report_seq:03d}"
        rec = self.subgraph.functions.get(crash.location)
        pov_record = next(r for r in self.pov_records if r["id"] == pov_id)
        report = VulnReport(
            report_id=report_id,
            sp_id=sp.id,
            function=crash.location,
            file=rec.file_path if rec else "",
            vuln_type=crash.vuln_type,
            sanitizer=crash.sanitizer,
            fuzzer=self.task.fuzzer,
            discovery_method=method,
            description=self._report_description(sp, crash, reproduced_count),
            poc_blob_path=pov_record["blob_path"] or f"store:povs/{pov_id}",
            reproduced_count=reproduced_count,
            attempts=attempts,
            timestamps={
                "created": sp.created_stage,
                "verified": sp.verified_stage,
                "poc": sp.poc_stage,
            },
        )
        record = report.to_record()
        record["pov_id"] = pov_id
        self.store.put("reports", report_id, record)
        self.report_records.append(record)
        self.reported_keys[key] = report_id
        self.crash_repeats.setdefault(key, 1)
        self.task.metrics.report_count += 1

    # -- top-level flows -----------------------------------------------------

    def _finalize_metrics(self) -> None:
        owned = [self.spstore.get(i) for i in sorted(self.owned_sp_ids)]
        self.task.metrics.sp_deduped = len(owned)
        self.task.metrics.tp_v = sum(1 for sp in owned if sp.verdict == "tp")
        self.task.metrics.fp = sum(1 for sp in owned if sp.verdict == "fp")
        self.task.metrics.unverified = sum(1 for sp in owned if not sp.is_verified)
        self.task.metrics.wall_clock_s = time.monotonic() - self._started

    def run(self) -> WorkerTask:
        self.task.state = "running"
        self._started = time.monotonic()
        try:
            if self.task.degenerate:
                self.task.state = "done"
                return self.task
            if self._budget_tripped():
                self.task.state = "timeout"
                return self.task
            if self.task.mode == "delta":
                self._run_delta()
            else:
                self._run_full()
            self._drain_verify_retries()
            self._drain_poc_queue()
            if not self._budget_tripped():
                self._pump_global(self.config.global_fuzz_iterations)
                self._drain_poc_queue()
            self.task.state = "timeout" if self._budget_tripped() else "done"
        except Exception as exc:  # noqa: BLE001 - worker failure is a terminal state
            log.exception("worker %s failed", self.task.id)
            self.task.state = "failed"
            self.task.warnings.append(f"worker failed: {exc}")
        finally:
            self._finalize_metrics()
            self.store.put("tasks", self.task.id, self.task.to_record())
        return self.task

    def _run_full(self) -> None:
        self._generate_directions()
        self._seed_from_directions()
        self._pump_global()
        while not self._budget_tripped():
            pick = self.scheduler.next_function()
            if pick is None:
                break
            pending = self._analyze_function(pick.function_id, pick.direction_name)
            rank = self.scheduler.risk_rank_for(pick.direction_name)
            self._process_candidates(pending, rank)
            self._drain_verify_retries()
            self._drain_poc_queue()
            self._pump_global()

    def _run_delta(self) -> None:
        if self.delta is None:
            raise ConfigError("delta mode requires a parsed diff")
        changed = [f for f in self.delta.changed_function_ids if f in self.subgraph.functions]
        if not changed:
            self.task.warnings.append("no changed functions are reachable by this fuzzer")
            return
        self._generate_directions()
        self._seed_from_directions()
        self._pump_global()
        for function_id in changed:
            if self._budget_tripped():
                break
            pending = self._analyze_function(function_id, "(delta)")
            self._process_candidates(pending, 1)
            self._drain_verify_retries()
            self._drain_poc_queue()
            self._pump_global()


@dataclass
class ScanResult:
    tasks: list[WorkerTask]
    workers: list[Worker]
    spstore: SPStore
    store: StoreBackend
    reports: list[dict]


def _build_pool(config: Config, scenario=None) -> tuple[ProviderPool, set[str]]:
    pool = ProviderPool()
    models = {m for chain in config.model_chains.values() for m in chain}
    kind = config.provider.get("kind", "scripted")
    if kind == "scripted":
        data = scenario
        if data is None:
            if not config.scenario_path:
                data = {"agents": {}}
            else:
                data = load_scenario(config.scenario_path)
        provider = ScriptedProvider(data)
        for model in models:
            pool.register(model, provider)
        active = set(provider.roles())
    elif kind == "http":
        provider = HttpChatProvider(
            base_url=config.provider.get("base_url", ""),
            api_key=config.provider.get("api_key", ""),
            timeout_s=float(config.provider.get("timeout_s", 120.0)),
        )
        for model in models:
            pool.register(model, provider)
        active = {"seed-generator", "report", "sp-deduplicator"}
    else:
        raise ConfigError(f"unknown provider kind: {kind!r}")
    return pool, active


def _make_duplicate_judge(config: Config, pool: ProviderPool, active: set[str]):
    if "sp-deduplicator" not in active:
        return None
    seq = [0]

    def judge(candidate: SuspiciousPoint, existing: SuspiciousPoint):
        seq[0] += 1
        seed = "\n".join(
            [
                f"candidate: [{candidate.vuln_type}] {candidate.description}",
                f"existing: [{existing.vuln_type}] {existing.description}",
                "Answer 'duplicate' or 'distinct'.",
            ]
        )
        budgets = Budgets()
        spec = make_spec("sp-deduplicator", config.model_chains, (), budgets)
        registry = make_registry((), {})
        try:
            outcome = run_agent(
                spec,
                seed,
                registry,
                pool,
                system_prompt=render_prompt("sp-deduplicator"),
                run_id=f"dedup:{seq[0]}",
            )
        except ChainExhaustedError:
            return None
        text = outcome.final_text.strip().lower()
        if text.startswith("duplicate"):
            return True
        if text.startswith("distinct") or text.startswith("not"):
            return False
        return None

    return judge


def run_scan(
    config: Config,
    graph: CallGraph | None = None,
    targets: dict | None = None,
    scenario=None,
    store: StoreBackend | None = None,
    pair_filter=None,
) -> ScanResult:
    """Execute a full or delta scan per the configuration; returns all state."""
    if graph is None:
        if not config.export_path:
            raise ConfigError("export_path is required when no call graph is supplied")
        graph = load_call_graph(config.export_path)
    if targets is None:
        targets = load_targets_dir(config.targets_dir) if config.targets_dir else {}
    if store is None:
        store = FileStore(config.store_dir) if config.store_dir else MemoryStore()

    delta = None
    if config.mode == "delta":
        if not config.diff_path:
            raise ConfigError("delta mode requires diff_path")
        with open(config.diff_path, encoding="utf-8") as fh:
            delta = load_delta(fh.read(), graph)

    pool, active_roles = _build_pool(config, scenario)
    judge = _make_duplicate_judge(config, pool, active_roles)
    spstore = SPStore(
        known_functions=set(graph.functions),
        similarity_threshold=config.dedup_threshold,
        duplicate_judge=judge,
    )
    analyzed = GlobalAnalyzedSet()
    tasks = plan_workers(graph, config, pair_filter)
    workers = [
        Worker(
            task,
            graph,
            config,
            spstore,
            analyzed,
            pool,
            store,
            target=targets.get(task.fuzzer),
            delta=delta,
            active_roles=active_roles,
            out_dir=config.out_dir or None,
        )
        for task in tasks
    ]
    if config.worker_parallelism > 1:
        with ThreadPoolExecutor(max_workers=config.worker_parallelism) as executor:
            list(executor.map(lambda w: w.run(), workers))
    else:
        for worker in workers:
            worker.run()

    counts = spstore.counts()
    totals = {
        "mode": config.mode,
        "tasks": len(tasks),
        "sp_total": sum(t.metrics.sp_total for t in tasks),
        "sp_deduped": counts["sp_deduped"],
        "tp_v": counts["tp_v"],
        "fp": counts["fp"],
        "unverified": counts["unverified"],
        "pov_count": sum(t.metrics.pov_count for t in tasks),
        "report_count": sum(t.metrics.report_count for t in tasks),
        "tokens": sum(t.metrics.tokens for t in tasks),
        "executions": sum(t.metrics.executions for t in tasks),
    }
    store.put("metrics", "run", totals)
    for sp in spstore.all():
        store.put("sps", sp.id, sp.to_dict())
    reports = store.list("reports")
    return ScanResult(tasks=tasks, workers=workers, spstore=spstore, store=store, reports=reports)


def status_snapshot(store: StoreBackend) -> str:
    """Render a plain-text status table from persisted task records."""
    tasks = store.list("tasks")
    lines = []
    header = (
        f"{'task':<28} {'state':<8} {'SPs':>4} {'dedup':>5} {'TPv':>4} "
        f"{'FP':>4} {'unv':>4} {'PoVs':>4} {'reports':>7} {'tokens':>8} "
        f"{'tools':>6} {'wall(s)':>8}"
    )
    lines.append(header)
    lines.append("-" * len(header))
    for task in tasks:
        m = task["metrics"]
        lines.append(
            f"{task['id']:<28} {task['state']:<8} {m['sp_total']:>4} {m['sp_deduped']:>5} "
            f"{m['tp_v']:>4} {m['fp']:>4} {m['unverified']:>4} {m['pov_count']:>4} "
            f"{m['report_count']:>7} {m['tokens']:>8} {m['tool_calls']:>6} "
            f"{m['wall_clock_s']:>8.2f}"
        )
    run = store.get("metrics", "run")
    if run is not None:
        lines.append("")
        lines.append(
            "run totals: "
            + ", ".join(f"{key}={run[key]}" for key in sorted(run) if key != "mode")
        )
    if not tasks:
        lines.append("(no tasks recorded)")
    return "\n".join(lines)
