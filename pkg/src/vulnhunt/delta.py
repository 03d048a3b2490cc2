"""Delta-scan scoping: map a unified diff onto call-graph functions.

The export format carries no line tables, so hunks are attributed to
functions two ways, in order: the hunk header's section heading (git puts
the enclosing declaration there), then containment of the hunk's context and
removed lines in a function's source text (same file only).  Hunks that
resolve to nothing are recorded as unresolved, never silently dropped.

A diff file may start with free-form commit-message lines (the layout of
``git show``/``format-patch``); everything before the first ``diff --git``
or ``---`` header is treated as the commit message and preserved verbatim
for the analysis agents.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .callgraph import CallGraph
from .errors import DiffParseError

_HUNK_RE = re.compile(
    r"^@@ -(?P<old_start>\d+)(?:,(?P<old_count>\d+))? "
    r"\+(?P<new_start>\d+)(?:,(?P<new_count>\d+))? @@(?P<heading>.*)$"
)

_IDENT_RE = re.compile(r"[A-Za-z_]\w*")


@dataclass
class DiffHunk:
    file_path: str
    old_start: int
    old_count: int
    new_start: int
    new_count: int
    heading: str
    lines: list[str] = field(default_factory=list)

    def anchor_lines(self) -> list[str]:
        """Context and removed lines: content present in the pre-image."""
        out = []
        for line in self.lines:
            if line.startswith(("-", " ")):
                text = line[1:].strip()
                if len(text) > 3:
                    out.append(text)
        return out


@dataclass
class FileDiff:
    path: str
    hunks: list[DiffHunk] = field(default_factory=list)


@dataclass
class DeltaSpec:
    """A resolved commit scope for delta scanning."""

    diff_text: str
    commit_message: str
    changed_function_ids: list[str]
    unresolved: list[str] = field(default_factory=list)


def split_commit_message(text: str) -> tuple[str, str]:
    """Split leading commit-message lines from the diff body."""
    lines = text.splitlines()
    for i, line in enumerate(lines):
        if line.startswith("diff --git") or line.startswith("--- "):
            return "\n".join(lines[:i]).strip(), "\n".join(lines[i:])
    return "", text


def parse_unified_diff(diff_text: str) -> list[FileDiff]:
    """Parse unified-diff text into per-file hunks.

    Raises:
        DiffParseError: no hunks found, or a hunk appears before any file
            header.
    """
    files: list[FileDiff] = []
    current: FileDiff | None = None
    hunk: DiffHunk | None = None
    for line_no, line in enumerate(diff_text.splitlines(), start=1):
        if line.startswith("+++ "):
            path = line[4:].strip()
            if path.startswith("b/"):
                path = path[2:]
            if path == "/dev/null":
                current = FileDiff(path="")
            else:
                current = FileDiff(path=path)
            files.append(current)
            hunk = None
            continue
        match = _HUNK_RE.match(line)
        if match:
            if current is None:
                raise DiffParseError(f"line {line_no}: hunk before any '+++' file header")
            hunk = DiffHunk(
                file_path=current.path,
                old_start=int(match.group("old_start")),
                old_count=int(match.group("old_count") or "1"),
                new_start=int(match.group("new_start")),
                new_count=int(match.group("new_count") or "1"),
                heading=match.group("heading").strip(),
            )
            current.hunks.append(hunk)
            continue
        if hunk is not None and line[:1] in ("+", "-", " ", "\\"):
            hunk.lines.append(line)
    files = [f for f in files if f.hunks]
    if not files:
        raise DiffParseError("no hunks found; is this a unified diff?")
    return files


def _match_by_heading(hunk: DiffHunk, candidates: list) -> str | None:
    if not hunk.heading:
        return None
    idents = set(_IDENT_RE.findall(hunk.heading))
    for rec in candidates:
        if rec.name in idents:
            return rec.id
    return None


def _match_by_content(hunk: DiffHunk, candidates: list) -> str | None:
    anchors = hunk.anchor_lines()
    best: tuple[int, str] | None = None
    for rec in candidates:
        source_lines = {line.strip() for line in rec.source_text.splitlines()}
        score = sum(1 for anchor in anchors if anchor in source_lines)
        if score > 0 and (best is None or score > best[0] or (score == best[0] and rec.id < best[1])):
            best = (score, rec.id)
    return best[1] if best else None


def resolve_changed_functions(
    diff_text: str, graph: CallGraph
) -> tuple[list[str], list[str]]:
    """Attribute each hunk to its enclosing function.

    Returns:
        (changed function ids in first-seen order, unresolved hunk labels).
    """
    changed: list[str] = []
    unresolved: list[str] = []
    for file_diff in parse_unified_diff(diff_text):
        candidates = [
            rec
            for rec in graph.functions.values()
            if rec.file_path == file_diff.path and not rec.is_external
        ]
        candidates.sort(key=lambda rec: rec.id)
        for i, hunk in enumerate(file_diff.hunks):
            fid = _match_by_heading(hunk, candidates) or _match_by_content(hunk, candidates)
            if fid is None:
                unresolved.append(f"{file_diff.path}#{i}")
            elif fid not in changed:
                changed.append(fid)
    return changed, unresolved


def load_delta(diff_text: str, graph: CallGraph) -> DeltaSpec:
    """Build a DeltaSpec from raw diff-file text (commit message + diff)."""
    commit_message, body = split_commit_message(diff_text)
    changed, unresolved = resolve_changed_functions(body, graph)
    return DeltaSpec(
        diff_text=body,
        commit_message=commit_message,
        changed_function_ids=changed,
        unresolved=unresolved,
    )
