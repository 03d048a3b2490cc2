"""Per-agent tool registries with factory semantics.

Each agent instance gets a freshly built registry so tool closures never
share mutable state between concurrently running agents.  A registry knows
exactly the tools named by the agent's spec; asking for anything else at
construction time is an error.  Tool failures are captured and returned as
error text results (the loop feeds them back to the model), never raised
through the agent loop.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Any, Callable

from ..errors import ValidationError

ToolFn = Callable[..., Any]
ToolFactory = Callable[[], "Tool"]


@dataclass
class Tool:
    """One callable tool plus its request schema."""

    name: str
    fn: ToolFn
    description: str = ""
    parameters: dict = field(default_factory=lambda: {"type": "object", "properties": {}})

    def schema(self) -> dict:
        return {
            "name": self.name,
            "description": self.description,
            "parameters": self.parameters,
        }


def _serialize_result(result: Any) -> str:
    if isinstance(result, str):
        return result
    try:
        return json.dumps(result, sort_keys=True, default=str)
    except (TypeError, ValueError):
        return repr(result)


def result_digest(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:12]


class ToolRegistry:
    """The tool set of one agent instance, with per-tool call counters."""

    def __init__(self, tools: list[Tool]):
        self._tools: dict[str, Tool] = {}
        for tool in tools:
            if tool.name in self._tools:
                raise ValidationError(f"duplicate tool '{tool.name}'")
            self._tools[tool.name] = tool
        self.call_counts: dict[str, int] = {name: 0 for name in self._tools}

    def names(self) -> tuple[str, ...]:
        return tuple(self._tools)

    def schemas(self) -> list[dict]:
        return [tool.schema() for tool in self._tools.values()]

    def invoke(self, name: str, arguments: dict) -> tuple[str, bool]:
        """Invoke a tool; returns (result text, ok flag).

        Unknown tools and tool exceptions produce an error-text result with
        ok=False so the model sees the failure and can route around it.
        """
        tool = self._tools.get(name)
        if tool is None:
            return f"tool error: unknown tool '{name}'", False
        self.call_counts[name] += 1
        try:
            result = tool.fn(**arguments)
        except TypeError as exc:
            return f"tool error: bad arguments for '{name}': {exc}", False
        except Exception as exc:  # noqa: BLE001 - fed back to the model as text
            return f"tool error: {name}: {exc}", False
        return _serialize_result(result), True

    def total_calls(self) -> int:
        return sum(self.call_counts.values())


def make_registry(tool_names: tuple[str, ...], factories: dict[str, ToolFactory]) -> ToolRegistry:
    """Build a fresh registry holding exactly ``tool_names``.

    Each factory is invoked anew, so returned tools carry fresh closures.  A
    factory may return a :class:`Tool` or a bare callable (wrapped using its
    ``__name__`` and the first docstring line).

    Raises:
        ValidationError: when a requested tool has no factory or the built
            tool's name does not match.
    """
    tools: list[Tool] = []
    for name in tool_names:
        factory = factories.get(name)
        if factory is None:
            raise ValidationError(f"no factory for tool '{name}'")
        tool = factory()
        if not isinstance(tool, Tool):
            fn = tool
            doc = (fn.__doc__ or "").strip().splitlines()
            tool = Tool(name=fn.__name__, fn=fn, description=doc[0] if doc else "")
        if tool.name != name:
            raise ValidationError(f"factory for '{name}' built tool named '{tool.name}'")
        tools.append(tool)
    return ToolRegistry(tools)
