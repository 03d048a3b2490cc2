"""Core agent types: specs, conversations, provider request/response shapes.

Every agent request runs at temperature 0.1.  Token counts come from the
provider when reported; otherwise the documented heuristic applies:
``tokens = max(1, ceil(len(text) / 4))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from ..errors import ValidationError

TEMPERATURE = 0.1

TIERS = ("T1", "T2", "T3")

# Role -> tier assignments are fixed; constructing a spec with a mismatched
# tier raises.
ROLE_TIERS: dict[str, str] = {
    "direction-generator": "T1",
    "sp-generator": "T2",
    "sp-deduplicator": "T3",
    "sp-verifier": "T1",
    "poc-generator": "T2",
    "report": "T2",
    "seed-generator": "T2",
    "context-compressor": "T3",
}

ROLES = tuple(ROLE_TIERS)


def estimate_tokens(text: str) -> int:
    """Length heuristic used when a provider reports no usage."""
    if not text:
        return 0
    return max(1, math.ceil(len(text) / 4))


@dataclass
class Budgets:
    """Per-agent-run resource caps; None disables a cap."""

    max_tool_calls: int | None = None
    max_total_tokens: int | None = None
    max_wall_clock_s: float | None = None
    tool_call_limits: dict[str, int] = field(default_factory=dict)
    context_token_budget: int | None = None


@dataclass
class AgentSpec:
    """An agent role bound to a model chain, tool names, and budgets."""

    role: str
    tier: str
    model_chain: list[str]
    tool_names: tuple[str, ...] = ()
    budgets: Budgets = field(default_factory=Budgets)

    def __post_init__(self) -> None:
        if self.role not in ROLE_TIERS:
            raise ValidationError(f"unknown agent role '{self.role}'")
        if self.tier != ROLE_TIERS[self.role]:
            raise ValidationError(
                f"role '{self.role}' is tier {ROLE_TIERS[self.role]}, got {self.tier!r}"
            )
        if not self.model_chain:
            raise ValidationError(f"role '{self.role}': model chain must be non-empty")


def make_spec(
    role: str,
    model_chains: dict[str, list[str]],
    tool_names: tuple[str, ...] = (),
    budgets: Budgets | None = None,
) -> AgentSpec:
    """Build a spec for a role using the configured per-tier model chains."""
    tier = ROLE_TIERS.get(role)
    if tier is None:
        raise ValidationError(f"unknown agent role '{role}'")
    chain = list(model_chains.get(tier, []))
    return AgentSpec(
        role=role,
        tier=tier,
        model_chain=chain,
        tool_names=tool_names,
        budgets=budgets or Budgets(),
    )


@dataclass(frozen=True)
class ToolCall:
    """One tool invocation requested by the model."""

    name: str
    arguments: dict
    call_id: str = ""


@dataclass
class Message:
    """One conversation message; role is system|user|assistant|tool."""

    role: str
    content: str
    tool_calls: tuple[ToolCall, ...] = ()
    tool_call_id: str = ""

    @property
    def token_estimate(self) -> int:
        extra = sum(estimate_tokens(repr(tc.arguments)) for tc in self.tool_calls)
        return estimate_tokens(self.content) + extra


class Conversation:
    """Ordered message list enforcing the tool-result placement invariant:

    a tool message must directly follow the assistant message that requested
    tools (or another tool result of the same batch).
    """

    def __init__(self, messages: list[Message] | None = None):
        self.messages: list[Message] = []
        for msg in messages or []:
            self.append(msg)

    def append(self, message: Message) -> None:
        if message.role == "tool":
            prev = self.messages[-1] if self.messages else None
            ok = prev is not None and (
                (prev.role == "assistant" and prev.tool_calls) or prev.role == "tool"
            )
            if not ok:
                raise ValidationError("tool result without a preceding assistant tool request")
        self.messages.append(message)

    def total_tokens(self) -> int:
        return sum(m.token_estimate for m in self.messages)

    def __len__(self) -> int:
        return len(self.messages)

    def __iter__(self):
        return iter(self.messages)


@dataclass(frozen=True)
class TokenUsage:
    prompt: int = 0
    completion: int = 0

    @property
    def total(self) -> int:
        return self.prompt + self.completion

    def __add__(self, other: "TokenUsage") -> "TokenUsage":
        return TokenUsage(self.prompt + other.prompt, self.completion + other.completion)


@dataclass
class ProviderRequest:
    """What a provider adapter receives for one completion."""

    model: str
    messages: list[Message]
    tools: list[dict] = field(default_factory=list)
    temperature: float = TEMPERATURE
    agent_role: str = ""
    run_id: str = ""


@dataclass
class ProviderResponse:
    """What a provider adapter returns for one completion."""

    text: str = ""
    tool_calls: tuple[ToolCall, ...] = ()
    stop: bool = False
    usage: TokenUsage = field(default_factory=TokenUsage)
    served_by: str = ""
