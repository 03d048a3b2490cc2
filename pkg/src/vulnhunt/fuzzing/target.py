"""Simulated crash targets: declarative rules over input blobs.

A target definition is an ordered rule list.  Each rule has a guard (a
predicate over the blob), a list of functions "entered" when the guard
matches, and optionally a crash specification.  Executing a blob walks the
rules in order, appending entered functions to the trace; the first matching
rule that carries a crash ends the run with that crash (so at most one crash
fires per execution).  Everything is pure and deterministic, which is what
makes crash reproduction an exact check instead of a statistical one.

Predicate grammar (JSON), with byte literals given as ``hex`` or ``text``::

    {"kind": "offset-equals", "offset": N, "value": BYTE}
    {"kind": "prefix", "hex": "..."} | {"kind": "prefix", "text": "..."}
    {"kind": "contains", "hex"/"text": ...}
    {"kind": "length-cmp", "op": "lt|le|eq|ne|ge|gt", "value": N}
    {"kind": "u32-le-field-cmp", "offset": N, "op": ..., "value": N}
    {"kind": "and"/"or", "terms": [...]}
    {"kind": "not", "term": {...}}

Out-of-range reads are simply false (an offset past the end never matches).
The idiom for an unconditional rule is ``{"kind": "length-cmp", "op": "ge",
"value": 0}``.
"""

from __future__ import annotations

import json
import operator
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import OversizeBlobError, TargetSchemaError
from ..spstore import SANITIZERS, is_valid_vuln_type

TARGET_SCHEMA_VERSION = 1
DEFAULT_MAX_BLOB = 1 << 20  # 1 MiB

_OPS = {
    "lt": operator.lt,
    "le": operator.le,
    "eq": operator.eq,
    "ne": operator.ne,
    "ge": operator.ge,
    "gt": operator.gt,
}

_PREDICATE_KINDS = (
    "offset-equals",
    "prefix",
    "contains",
    "length-cmp",
    "u32-le-field-cmp",
    "and",
    "or",
    "not",
)


# ===== Predicates =====


def _literal_bytes(node: dict, where: str) -> bytes:
    has_hex = "hex" in node
    has_text = "text" in node
    if has_hex == has_text:
        raise TargetSchemaError(f"{where}: exactly one of 'hex'/'text' required")
    if has_hex:
        try:
            return bytes.fromhex(str(node["hex"]))
        except ValueError as exc:
            raise TargetSchemaError(f"{where}: bad hex literal") from exc
    return str(node["text"]).encode("utf-8")


def validate_predicate(node: dict, where: str = "guard") -> None:
    """Schema-check one predicate tree; raises TargetSchemaError with a path."""
    if not isinstance(node, dict):
        raise TargetSchemaError(f"{where}: predicate must be an object")
    kind = node.get("kind")
    if kind not in _PREDICATE_KINDS:
        raise TargetSchemaError(f"{where}: unknown predicate kind {kind!r}")
    if kind == "offset-equals":
        if not isinstance(node.get("offset"), int) or node["offset"] < 0:
            raise TargetSchemaError(f"{where}: 'offset' must be a non-negative integer")
        value = node.get("value")
        if not isinstance(value, int) or not (0 <= value <= 255):
            raise TargetSchemaError(f"{where}: 'value' must be a byte (0-255)")
    elif kind in ("prefix", "contains"):
        _literal_bytes(node, where)
    elif kind == "length-cmp":
        if node.get("op") not in _OPS:
            raise TargetSchemaError(f"{where}: 'op' must be one of {sorted(_OPS)}")
        if not isinstance(node.get("value"), int) or node["value"] < 0:
            raise TargetSchemaError(f"{where}: 'value' must be a non-negative integer")
    elif kind == "u32-le-field-cmp":
        if not isinstance(node.get("offset"), int) or node["offset"] < 0:
            raise TargetSchemaError(f"{where}: 'offset' must be a non-negative integer")
        if node.get("op") not in _OPS:
            raise TargetSchemaError(f"{where}: 'op' must be one of {sorted(_OPS)}")
        if not isinstance(node.get("value"), int) or not (0 <= node["value"] <= 0xFFFFFFFF):
            raise TargetSchemaError(f"{where}: 'value' must fit an unsigned 32-bit integer")
    elif kind in ("and", "or"):
        terms = node.get("terms")
        if not isinstance(terms, list) or not terms:
            raise TargetSchemaError(f"{where}: '{kind}' needs a non-empty 'terms' list")
        for i, term in enumerate(terms):
            validate_predicate(term, f"{where}.terms[{i}]")
    elif kind == "not":
        if "term" not in node:
            raise TargetSchemaError(f"{where}: 'not' needs a 'term'")
        validate_predicate(node["term"], f"{where}.term")


def eval_predicate(node: dict, blob: bytes) -> bool:
    """Evaluate a predicate tree against a blob; total (never raises)."""
    kind = node["kind"]
    if kind == "offset-equals":
        off = node["offset"]
        return off < len(blob) and blob[off] == node["value"]
    if kind == "prefix":
        return blob.startswith(_literal_bytes(node, "guard"))
    if kind == "contains":
        return _literal_bytes(node, "guard") in blob
    if kind == "length-cmp":
        return _OPS[node["op"]](len(blob), node["value"])
    if kind == "u32-le-field-cmp":
        off = node["offset"]
        if off + 4 > len(blob):
            return False
        value = int.from_bytes(blob[off : off + 4], "little")
        return _OPS[node["op"]](value, node["value"])
    if kind == "and":
        return all(eval_predicate(t, blob) for t in node["terms"])
    if kind == "or":
        return any(eval_predicate(t, blob) for t in node["terms"])
    if kind == "not":
        return not eval_predicate(node["term"], blob)
    raise AssertionError(f"unreachable predicate kind {kind!r}")


# ===== Target model =====


@dataclass(frozen=True)
class CrashSpec:
    location: str
    vuln_type: str
    sanitizer: str


@dataclass
class TargetRule:
    guard: dict
    enter: list[str]
    crash: CrashSpec | None = None


@dataclass
class SimTarget:
    """One simulated fuzz target bound to a fuzzer name."""

    name: str
    fuzzer: str
    rules: list[TargetRule]
    version: int = TARGET_SCHEMA_VERSION


@dataclass(frozen=True)
class ExecLimits:
    max_blob: int = DEFAULT_MAX_BLOB


@dataclass(frozen=True)
class ExecutionResult:
    """Outcome of one execution: ok | crash | timeout, plus observations.

    ``coverage`` is the set of executed functions; ``trace`` the ordered
    sequence.  A crash's location is always an element of the coverage set.
    """

    outcome: str
    coverage: frozenset[str]
    trace: tuple[str, ...]
    output: str
    crash: CrashSpec | None = None


def parse_target(obj: dict, where: str = "target") -> SimTarget:
    """Validate and build a SimTarget from a parsed definition object."""
    if not isinstance(obj, dict):
        raise TargetSchemaError(f"{where}: definition must be an object")
    version = obj.get("version")
    if version != TARGET_SCHEMA_VERSION:
        raise TargetSchemaError(f"{where}: unsupported version {version!r}")
    name = obj.get("name")
    fuzzer = obj.get("fuzzer")
    if not isinstance(name, str) or not name:
        raise TargetSchemaError(f"{where}: 'name' must be a non-empty string")
    if not isinstance(fuzzer, str) or not fuzzer:
        raise TargetSchemaError(f"{where}: 'fuzzer' must be a non-empty string")
    raw_rules = obj.get("rules")
    if not isinstance(raw_rules, list) or not raw_rules:
        raise TargetSchemaError(f"{where}: 'rules' must be a non-empty list")
    rules: list[TargetRule] = []
    for i, raw in enumerate(raw_rules):
        rwhere = f"{where}.rules[{i}]"
        if not isinstance(raw, dict):
            raise TargetSchemaError(f"{rwhere}: rule must be an object")
        unknown = set(raw) - {"guard", "enter", "crash"}
        if unknown:
            raise TargetSchemaError(f"{rwhere}: unknown keys {sorted(unknown)}")
        guard = raw.get("guard")
        validate_predicate(guard, f"{rwhere}.guard")
        enter = raw.get("enter", [])
        if not isinstance(enter, list) or not all(isinstance(e, str) and e for e in enter):
            raise TargetSchemaError(f"{rwhere}: 'enter' must be a list of function ids")
        crash = None
        if raw.get("crash") is not None:
            cwhere = f"{rwhere}.crash"
            craw = raw["crash"]
            if not isinstance(craw, dict):
                raise TargetSchemaError(f"{cwhere}: crash must be an object")
            location = craw.get("location")
            vuln_type = craw.get("vuln_type")
            sanitizer = craw.get("sanitizer")
            if not isinstance(location, str) or not location:
                raise TargetSchemaError(f"{cwhere}: 'location' must be a function id")
            if not isinstance(vuln_type, str) or not is_valid_vuln_type(vuln_type):
                raise TargetSchemaError(f"{cwhere}: invalid vuln_type {vuln_type!r}")
            if sanitizer not in SANITIZERS:
                raise TargetSchemaError(f"{cwhere}: 'sanitizer' must be one of {SANITIZERS}")
            if location not in enter:
                raise TargetSchemaError(
                    f"{cwhere}: crash location '{location}' must appear in the rule's 'enter' "
                    "list (a crash happens inside an executed function)"
                )
            crash = CrashSpec(location=location, vuln_type=vuln_type, sanitizer=sanitizer)
        rules.append(TargetRule(guard=guard, enter=list(enter), crash=crash))
    return SimTarget(name=name, fuzzer=fuzzer, rules=rules, version=version)


def load_target(path: str | Path) -> SimTarget:
    """Load one target definition file (JSON)."""
    path = Path(path)
    try:
        obj = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise TargetSchemaError(f"{path}: invalid JSON: {exc.msg}") from exc
    return parse_target(obj, where=str(path.name))


def load_targets_dir(path: str | Path) -> dict[str, SimTarget]:
    """Load every ``*.json`` target in a directory, keyed by fuzzer name."""
    targets: dict[str, SimTarget] = {}
    for item in sorted(Path(path).glob("*.json")):
        target = load_target(item)
        if target.fuzzer in targets:
            raise TargetSchemaError(f"{item}: duplicate target for fuzzer '{target.fuzzer}'")
        targets[target.fuzzer] = target
    return targets


def execute(
    target: SimTarget,
    blob: bytes,
    limits: ExecLimits = ExecLimits(),
    sanitizer: str | None = None,
) -> ExecutionResult:
    """Execute one blob against a simulated target.

    Args:
        target: the target definition.
        blob: the input; must not exceed ``limits.max_blob``.
        limits: execution limits.
        sanitizer: when given, only crash rules built for this sanitizer
            fire (an undetected bug does not stop execution), modelling a
            binary compiled with exactly one sanitizer.  None detects all.

    Raises:
        OversizeBlobError: blob larger than the limit.
    """
    if len(blob) > limits.max_blob:
        raise OversizeBlobError(f"blob of {len(blob)} bytes exceeds limit {limits.max_blob}")
    trace: list[str] = []
    lines: list[str] = [f"run {target.name} ({len(blob)} bytes)"]
    crash: CrashSpec | None = None
    for rule in target.rules:
        if not eval_predicate(rule.guard, blob):
            continue
        trace.extend(rule.enter)
        for fn in rule.enter:
            lines.append(f"enter {fn}")
        if rule.crash is not None and (sanitizer is None or rule.crash.sanitizer == sanitizer):
            crash = rule.crash
            lines.append(
                f"== ERROR: {crash.sanitizer} sanitizer: {crash.vuln_type} in {crash.location} =="
            )
            break
    if crash is None:
        lines.append("exit ok")
    return ExecutionResult(
        outcome="crash" if crash is not None else "ok",
        coverage=frozenset(trace),
        trace=tuple(trace),
        output="\n".join(lines),
        crash=crash,
    )


class TargetRunner:
    """Execution hook: anything with ``run(blob) -> ExecutionResult``.

    The in-tree implementation wraps a SimTarget bound to the worker's
    sanitizer; an external harness can substitute its own runner with the
    same contract (deterministic given the blob).
    """

    def run(self, blob: bytes) -> ExecutionResult:
        raise NotImplementedError


class SimTargetRunner(TargetRunner):
    def __init__(
        self,
        target: SimTarget,
        sanitizer: str | None = None,
        limits: ExecLimits = ExecLimits(),
    ):
        self.target = target
        self.sanitizer = sanitizer
        self.limits = limits

    def run(self, blob: bytes) -> ExecutionResult:
        return execute(self.target, blob, self.limits, self.sanitizer)
