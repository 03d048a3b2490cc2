"""Context compression for long agent conversations.

When a conversation outgrows its token budget, everything between the system
message and the most recent assistant/tool exchange is replaced by a single
summary block.  The system message and that last exchange survive verbatim.
An agent-backed summarizer may produce the block; without one, a
deterministic truncation-with-index fallback lists each replaced message's
role and head.
"""

from __future__ import annotations

from typing import Callable

from ..errors import BudgetError
from .types import Conversation, Message, estimate_tokens

Summarizer = Callable[[list[Message]], str]

_HEAD_CHARS = 80


def _tail_start(messages: list[Message]) -> int:
    """Index where the most recent assistant/tool exchange begins."""
    last_assistant = None
    for i in range(len(messages) - 1, -1, -1):
        if messages[i].role == "assistant":
            last_assistant = i
            break
    if last_assistant is None:
        return max(1, len(messages) - 1)
    return last_assistant


def _index_summary(messages: list[Message]) -> str:
    lines = [f"[compressed {len(messages)} earlier messages]"]
    for msg in messages:
        head = msg.content.replace("\n", " ")[:_HEAD_CHARS]
        if msg.tool_calls:
            names = ",".join(tc.name for tc in msg.tool_calls)
            head = f"{head} (tool calls: {names})" if head else f"(tool calls: {names})"
        lines.append(f"- {msg.role}: {head}")
    return "\n".join(lines)


def compress_context(
    conversation: Conversation,
    token_budget: int,
    summarizer: Summarizer | None = None,
) -> Conversation:
    """Compress a conversation to fit a token budget.

    Returns the conversation unchanged when it already fits.  Otherwise the
    system message and the last exchange are preserved verbatim and the
    middle collapses into one summary message.

    Raises:
        BudgetError: when the budget cannot even hold the system message
            plus the most recent exchange.
    """
    if conversation.total_tokens() <= token_budget:
        return conversation
    messages = list(conversation.messages)
    if not messages:
        return conversation
    if messages[0].role != "system":
        raise BudgetError("conversation has no leading system message")
    tail_from = _tail_start(messages)
    tail_from = max(tail_from, 1)
    head = messages[0]
    tail = messages[tail_from:]
    middle = messages[1:tail_from]
    floor = head.token_estimate + sum(m.token_estimate for m in tail)
    if floor > token_budget:
        raise BudgetError(
            f"budget {token_budget} cannot hold system message and last exchange ({floor} tokens)"
        )
    if not middle:
        # Nothing compressible; the conversation is all head+tail.
        return conversation
    summary_text = summarizer(middle) if summarizer is not None else _index_summary(middle)
    room = token_budget - floor
    if estimate_tokens(summary_text) > room:
        keep_chars = max(0, room * 4 - len("..."))
        summary_text = summary_text[:keep_chars] + "..." if keep_chars else "[compressed]"
    rebuilt = [head, Message(role="user", content=summary_text)]
    # A tool message cannot follow the summary directly; if the tail would
    # start with tool results, fold them into the summary boundary by
    # retagging the orphaned results as user context.
    safe_tail: list[Message] = []
    for i, msg in enumerate(tail):
        if msg.role == "tool" and not any(m.role == "assistant" for m in tail[:i]):
            safe_tail.append(Message(role="user", content=f"[earlier tool result] {msg.content}"))
        else:
            safe_tail.append(msg)
    rebuilt.extend(safe_tail)
    return Conversation(rebuilt)
