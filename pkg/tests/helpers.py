"""Independent oracles and builders shared by the test suite.

Everything here is deliberately written *without* reusing the package's own
traversal or scoring code, so the tests compare two independent
implementations of the same contract.
"""
from __future__ import annotations

import json
import random

from vulnhunt.callgraph import load_call_graph


def export_lines(records):
    """Serialize function records to JSONL lines."""
    return [json.dumps(rec, sort_keys=True) for rec in records]


def graph_from_records(records):
    """Load a CallGraph straight from in-memory records."""
    return load_call_graph(export_lines(records))


# ---------------------------------------------------------------------------
# Naive reachability / depth oracles
# ---------------------------------------------------------------------------


def naive_node_universe(records):
    """All node ids the loader will know about: declared + external callees."""
    declared = {rec["id"] for rec in records}
    externals = set()
    for rec in records:
        for callee in rec.get("callees", ()):
            if callee not in declared:
                externals.add(callee)
    return declared | externals


def naive_adjacency(records):
    adj = {node: [] for node in naive_node_universe(records)}
    for rec in records:
        adj[rec["id"]] = list(rec.get("callees", ()))
    return adj


def naive_entries(records, fuzzer):
    return [
        rec["id"]
        for rec in records
        if fuzzer in rec.get("is_entry_for", ())
    ]


def naive_closure(records, fuzzer):
    """Plain-list BFS closure from the fuzzer's entry functions."""
    adj = naive_adjacency(records)
    seen = set()
    frontier = [e for e in naive_entries(records, fuzzer)]
    seen.update(frontier)
    while frontier:
        nxt = []
        for node in frontier:
            for callee in adj.get(node, ()):
                if callee not in seen:
                    seen.add(callee)
                    nxt.append(callee)
        frontier = nxt
    return seen


def naive_reachable(records, fuzzer):
    """Closure plus explicit reached-by annotations (the loader unions both)."""
    annotated = {
        rec["id"]
        for rec in records
        if fuzzer in rec.get("reached_by_fuzzers", ())
    }
    return naive_closure(records, fuzzer) | annotated


def naive_depths(records, fuzzer):
    """Entry functions sit at depth 1; each call edge adds one level."""
    adj = naive_adjacency(records)
    depths = {}
    frontier = naive_entries(records, fuzzer)
    for node in frontier:
        depths[node] = 1
    level = 1
    while frontier:
        level += 1
        nxt = []
        for node in frontier:
            for callee in adj.get(node, ()):
                if callee not in depths:
                    depths[callee] = level
                    nxt.append(callee)
        frontier = nxt
    return depths


# ---------------------------------------------------------------------------
# Random graph generator (for the BFS-equivalence battery)
# ---------------------------------------------------------------------------


def random_graph_records(rng: random.Random, max_nodes: int = 200,
                         max_entries: int = 4):
    """Build a random but well-formed export: cycles, diamonds, unreachable
    islands, external callees, and one or two fuzzers with up to
    ``max_entries`` entry functions each."""
    n = rng.randint(1, max_nodes)
    ids = [f"fn{i:03d}" for i in range(n)]
    fuzzers = ["fz_a"] if rng.random() < 0.6 else ["fz_a", "fz_b"]

    records = []
    for i, fid in enumerate(ids):
        degree = rng.randint(0, 4)
        callees = [rng.choice(ids) for _ in range(degree)]
        if rng.random() < 0.15:  # sprinkle an undeclared (external) callee
            callees.append(f"ext{rng.randint(0, 9)}")
        records.append({
            "id": fid,
            "name": fid,
            "file": f"src/part{i % 7}.c",
            "source": f"int {fid}(void) {{ return {i}; }}",
            "callees": callees,
            "reached_by_fuzzers": [],
            "is_entry_for": [],
        })

    for fuzzer in fuzzers:
        k = rng.randint(1, min(max_entries, n))
        for idx in rng.sample(range(n), k):
            records[idx]["is_entry_for"].append(fuzzer)
            if fuzzer not in records[idx]["reached_by_fuzzers"]:
                records[idx]["reached_by_fuzzers"].append(fuzzer)
        if rng.random() < 0.3:  # annotation-only reachability on a few nodes
            for idx in rng.sample(range(n), min(n, rng.randint(1, 3))):
                if fuzzer not in records[idx]["reached_by_fuzzers"]:
                    records[idx]["reached_by_fuzzers"].append(fuzzer)
    return records, fuzzers
