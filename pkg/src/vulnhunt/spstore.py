"""Suspicious-point records, lifecycle, and the shared deduplicating store.

A suspicious point (SP) is a control-flow-anchored record of a potential
vulnerability at a specific function.  It moves through three stages:
creation (screening), verification (tp/fp verdict, possibly with a corrected
description), and proof-of-crash (PoC attempts recorded per fuzzer, with
crashing inputs attached by id).  The store is shared across workers, so all
mutation goes through one lock.

Crashes found by background fuzzing may attach to an SP that was never
verified true (or was judged a false positive); that path sets an explicit
``bypass`` flag on the record instead of faking a verdict.
"""

from __future__ import annotations

import re
import threading
from dataclasses import dataclass, field

from .errors import (
    LifecycleError,
    ScoreBelowThresholdError,
    UnknownFunctionError,
    ValidationError,
)

# ===== Vulnerability types and sanitizer compatibility =====

VULN_TYPES = (
    "heap-buffer-overflow",
    "stack-buffer-overflow",
    "global-buffer-overflow",
    "out-of-bounds-write",
    "out-of-bounds-read",
    "use-after-free",
    "double-free",
    "null-pointer-dereference",
    "integer-overflow",
    "format-string",
    "arbitrary-write",
    "uninitialized-read",
    # plus "other(<text>)" as a catch-all
)

SANITIZERS = ("address", "memory", "undefined")

_SANITIZER_FOR: dict[str, str] = {
    "heap-buffer-overflow": "address",
    "stack-buffer-overflow": "address",
    "global-buffer-overflow": "address",
    "out-of-bounds-write": "address",
    "out-of-bounds-read": "address",
    "use-after-free": "address",
    "double-free": "address",
    "arbitrary-write": "address",
    "uninitialized-read": "memory",
    "integer-overflow": "undefined",
    "null-pointer-dereference": "undefined",
    "format-string": "undefined",
}

_OTHER_RE = re.compile(r"^other\((?P<text>.+)\)$", re.DOTALL)

SKIP_THRESHOLD = 0.3
DEFAULT_SIMILARITY_THRESHOLD = 0.6


def is_valid_vuln_type(value: str) -> bool:
    """True for one of the fixed types or the ``other(<text>)`` form."""
    return value in VULN_TYPES or bool(_OTHER_RE.match(value))


def compatible_sanitizers(vuln_type: str) -> set[str]:
    """Sanitizers that can detect the given vulnerability type."""
    if vuln_type in _SANITIZER_FOR:
        return {_SANITIZER_FOR[vuln_type]}
    if _OTHER_RE.match(vuln_type):
        return {"undefined"}
    raise ValidationError(f"unknown vuln_type '{vuln_type}'")


def is_sanitizer_compatible(vuln_type: str, sanitizer: str) -> bool:
    return sanitizer in compatible_sanitizers(vuln_type)


# ===== Description validation =====

_LINE_REF_RE = re.compile(r"\bline\s+\d+\b", re.IGNORECASE)
_ANCHOR_RE = re.compile(
    r"\w+\s*\("                                   # a call-like token
    r"|`[^`]+`|'[A-Za-z_]\w+'|\"[A-Za-z_]\w+\""   # quoted identifier
    r"|\b(?:if|else|while|for|switch|branch|loop|case|when|after|before|"
    r"during|return|calls?|calling|called|check|checks|fails?|passes)\b",
    re.IGNORECASE,
)


def _has_bare_line_locator(description: str) -> bool:
    """A description whose only locator is a line number is too fragile.

    Line numbers drift with every edit; descriptions must anchor to control
    flow (a call, a quoted identifier, or a branch keyword).  Mentioning a
    line number alongside such an anchor is fine.
    """
    return bool(_LINE_REF_RE.search(description)) and not bool(_ANCHOR_RE.search(description))


# ===== Records =====

VERDICTS = ("unknown", "tp", "fp")


@dataclass
class SuspiciousPoint:
    """One suspicious point.  Serialized field names are part of the contract."""

    id: str
    function_id: str
    sources: set[tuple[str, str]]
    description: str
    vuln_type: str
    score: float
    is_verified: bool = False
    verdict: str = "unknown"
    poc_guidance: str | None = None
    is_real: bool = False
    poc_attempted_by: set[str] = field(default_factory=set)
    poc_ids: list[str] = field(default_factory=list)
    created_stage: int = 0
    verified_stage: int | None = None
    poc_stage: int | None = None
    bypass: bool = False

    def to_dict(self) -> dict:
        """Serialize with the external field names (``function``, not ``function_id``)."""
        return {
            "id": self.id,
            "function": self.function_id,
            "sources": [list(pair) for pair in sorted(self.sources)],
            "description": self.description,
            "vuln_type": self.vuln_type,
            "score": self.score,
            "is_verified": self.is_verified,
            "verdict": self.verdict,
            "poc_guidance": self.poc_guidance,
            "is_real": self.is_real,
            "poc_attempted_by": sorted(self.poc_attempted_by),
            "poc_ids": list(self.poc_ids),
            "created_stage": self.created_stage,
            "verified_stage": self.verified_stage,
            "poc_stage": self.poc_stage,
            "bypass": self.bypass,
        }


@dataclass(frozen=True)
class DedupOutcome:
    """Result of deduplicating one candidate: merged into an existing SP or inserted."""

    sp_id: str
    merged: bool


# ===== Similarity =====

_TOKEN_RE = re.compile(r"[a-z0-9_]+")


def _token_set(text: str) -> frozenset[str]:
    return frozenset(_TOKEN_RE.findall(text.lower()))


def description_similarity(a: str, b: str) -> float:
    """Token-set Jaccard similarity over lowercased word tokens."""
    ta, tb = _token_set(a), _token_set(b)
    if not ta and not tb:
        return 1.0
    union = ta | tb
    if not union:
        return 0.0
    return len(ta & tb) / len(union)


class SPStore:
    """Thread-safe store of suspicious points shared by all workers.

    Args:
        known_functions: the set of function ids SPs may reference.
        similarity_threshold: Jaccard threshold at or above which two
            same-function same-type descriptions are duplicates.
        duplicate_judge: optional override callable ``(candidate, existing)
            -> bool | None``; a non-None answer replaces the Jaccard
            decision (used to route the question to a tier-3 agent).
    """

    def __init__(
        self,
        known_functions: set[str],
        similarity_threshold: float = DEFAULT_SIMILARITY_THRESHOLD,
        duplicate_judge=None,
    ):
        self._known = set(known_functions)
        self._threshold = similarity_threshold
        self._judge = duplicate_judge
        self._lock = threading.RLock()
        self._sps: dict[str, SuspiciousPoint] = {}
        self._order: list[str] = []
        self._next_id = 1
        self._clock = 0
        self._candidates_seen = 0

    # ----- internals -----

    def _tick(self) -> int:
        self._clock += 1
        return self._clock

    def _new_id(self) -> str:
        sp_id = f"sp-{self._next_id:06d}"
        self._next_id += 1
        return sp_id

    # ----- creation -----

    def build_candidate(
        self,
        function_id: str,
        source: tuple[str, str],
        description: str,
        vuln_type: str,
        score: float,
    ) -> SuspiciousPoint:
        """Validate inputs and construct a candidate SP (not yet stored).

        Raises:
            UnknownFunctionError: function id not in the known set.
            ValidationError: bad vuln_type, bad source pair, empty or
                line-number-only description, score out of range.
            ScoreBelowThresholdError: score below the skip threshold (0.3);
                the message contains "below skip threshold".
        """
        with self._lock:
            if function_id not in self._known:
                raise UnknownFunctionError(f"unknown function '{function_id}'")
            if not is_valid_vuln_type(vuln_type):
                raise ValidationError(f"invalid vuln_type '{vuln_type}'")
            if not (isinstance(source, tuple) and len(source) == 2):
                raise ValidationError("source must be a (fuzzer, sanitizer) pair")
            if source[1] not in SANITIZERS:
                raise ValidationError(f"unknown sanitizer '{source[1]}'")
            if not isinstance(score, (int, float)) or not (0.0 <= float(score) <= 1.0):
                raise ValidationError(f"score {score!r} outside [0, 1]")
            if float(score) < SKIP_THRESHOLD:
                raise ScoreBelowThresholdError(
                    f"score {score:.2f} below skip threshold {SKIP_THRESHOLD}"
                )
            if not description or not description.strip():
                raise ValidationError("description must be non-empty")
            if _has_bare_line_locator(description):
                raise ValidationError(
                    "description locates the issue only by line number; "
                    "anchor it to control flow (a call, identifier, or branch)"
                )
            return SuspiciousPoint(
                id=self._new_id(),
                function_id=function_id,
                sources={(source[0], source[1])},
                description=description.strip(),
                vuln_type=vuln_type,
                score=float(score),
                created_stage=self._tick(),
            )

    def create_sp(
        self,
        function_id: str,
        source: tuple[str, str],
        description: str,
        vuln_type: str,
        score: float,
        bypass: bool = False,
    ) -> str:
        """Validate and store a new SP directly (no dedup pass). Returns its id."""
        with self._lock:
            sp = self.build_candidate(function_id, source, description, vuln_type, score)
            sp.bypass = bypass
            self._sps[sp.id] = sp
            self._order.append(sp.id)
            self._candidates_seen += 1
            return sp.id

    # ----- dedup -----

    def _is_duplicate(self, candidate: SuspiciousPoint, existing: SuspiciousPoint) -> bool:
        if existing.function_id != candidate.function_id:
            return False
        if existing.vuln_type != candidate.vuln_type:
            return False
        if self._judge is not None:
            answer = self._judge(candidate, existing)
            if answer is not None:
                return bool(answer)
        sim = description_similarity(candidate.description, existing.description)
        return sim >= self._threshold

    def deduplicate(self, candidate: SuspiciousPoint) -> DedupOutcome:
        """Insert the candidate or merge it into the first duplicate.

        On merge: sources are unioned, the score becomes the maximum, and the
        description of the higher-scored record wins (score tie: the
        lexicographically smaller description), so the final record content
        does not depend on arrival order.  The existing id is kept.
        """
        with self._lock:
            self._candidates_seen += 1
            for sp_id in self._order:
                existing = self._sps[sp_id]
                if self._is_duplicate(candidate, existing):
                    existing.sources |= candidate.sources
                    if candidate.score > existing.score or (
                        candidate.score == existing.score
                        and candidate.description < existing.description
                    ):
                        existing.description = candidate.description
                    existing.score = max(existing.score, candidate.score)
                    return DedupOutcome(sp_id=existing.id, merged=True)
            self._sps[candidate.id] = candidate
            self._order.append(candidate.id)
            return DedupOutcome(sp_id=candidate.id, merged=False)

    # ----- verification -----

    def apply_verification(
        self,
        sp_id: str,
        verdict: str,
        corrected_description: str | None = None,
        new_score: float | None = None,
        poc_guidance: str | None = None,
    ) -> None:
        """Record a verification verdict exactly once per SP.

        Raises:
            UnknownFunctionError: unknown sp id.
            ValidationError: bad verdict value or bad corrected description.
            LifecycleError: the SP is already verified.
        """
        if verdict not in ("tp", "fp"):
            raise ValidationError(f"verdict must be 'tp' or 'fp', got {verdict!r}")
        with self._lock:
            sp = self._require(sp_id)
            if sp.is_verified:
                raise LifecycleError(f"{sp_id} is already verified (verdict {sp.verdict})")
            if corrected_description is not None:
                if not corrected_description.strip():
                    raise ValidationError("corrected description must be non-empty")
                if _has_bare_line_locator(corrected_description):
                    raise ValidationError(
                        "corrected description locates the issue only by line number"
                    )
                sp.description = corrected_description.strip()
            if new_score is not None:
                if not (0.0 <= float(new_score) <= 1.0):
                    raise ValidationError(f"score {new_score!r} outside [0, 1]")
                sp.score = float(new_score)
            if poc_guidance is not None:
                sp.poc_guidance = poc_guidance
            sp.is_verified = True
            sp.verdict = verdict
            sp.verified_stage = self._tick()

    # ----- PoC results -----

    def record_poc_result(
        self,
        sp_id: str,
        fuzzer: str,
        crashed: bool,
        pov_id: str | None = None,
        bypass: bool = False,
    ) -> None:
        """Record the outcome of a PoC campaign for one fuzzer.

        The ordinary path requires a verified true positive; background
        fuzzing results pass ``bypass=True`` to attach to unverified or
        false-positive SPs without faking a verdict.

        Raises:
            LifecycleError: SP not a verified tp and bypass not set.
            ValidationError: ``crashed`` is true without a ``pov_id``.
        """
        with self._lock:
            sp = self._require(sp_id)
            if not bypass and not (sp.is_verified and sp.verdict == "tp"):
                raise LifecycleError(
                    f"{sp_id} is not a verified true positive; "
                    "pass bypass=True for fuzzer-discovered crashes"
                )
            if crashed and not pov_id:
                raise ValidationError("a crash result requires a pov id")
            sp.poc_attempted_by.add(fuzzer)
            if crashed:
                assert pov_id is not None
                if pov_id not in sp.poc_ids:
                    sp.poc_ids.append(pov_id)
                sp.is_real = True
                if bypass:
                    sp.bypass = True
            if sp.poc_stage is None:
                sp.poc_stage = self._tick()

    # ----- reads -----

    def _require(self, sp_id: str) -> SuspiciousPoint:
        sp = self._sps.get(sp_id)
        if sp is None:
            raise UnknownFunctionError(f"unknown suspicious point '{sp_id}'")
        return sp

    def get(self, sp_id: str) -> SuspiciousPoint:
        with self._lock:
            return self._require(sp_id)

    def all(self) -> list[SuspiciousPoint]:
        with self._lock:
            return [self._sps[sp_id] for sp_id in self._order]

    def for_function(self, function_id: str) -> list[SuspiciousPoint]:
        with self._lock:
            return [self._sps[i] for i in self._order if self._sps[i].function_id == function_id]

    def counts(self) -> dict[str, int]:
        """Lifecycle counters; sp_deduped always equals tp_v + fp + unverified."""
        with self._lock:
            tp_v = sum(1 for s in self._sps.values() if s.is_verified and s.verdict == "tp")
            fp = sum(1 for s in self._sps.values() if s.is_verified and s.verdict == "fp")
            unverified = sum(1 for s in self._sps.values() if not s.is_verified)
            return {
                "sp_total": self._candidates_seen,
                "sp_deduped": len(self._sps),
                "tp_v": tp_v,
                "fp": fp,
                "unverified": unverified,
            }

    def check_invariants(self) -> None:
        """Raise if any stored record violates a lifecycle invariant."""
        with self._lock:
            for sp in self._sps.values():
                if not (SKIP_THRESHOLD <= sp.score <= 1.0):
                    raise AssertionError(f"{sp.id}: score {sp.score} out of range")
                if sp.is_real:
                    if not sp.poc_ids:
                        raise AssertionError(f"{sp.id}: is_real without poc_ids")
                    if sp.verdict != "tp" and not sp.bypass:
                        raise AssertionError(f"{sp.id}: is_real without tp verdict or bypass")
                if sp.poc_ids and not sp.poc_attempted_by:
                    raise AssertionError(f"{sp.id}: poc_ids without poc_attempted_by")
                if sp.verdict != "unknown" and not sp.is_verified:
                    raise AssertionError(f"{sp.id}: verdict set but not verified")
