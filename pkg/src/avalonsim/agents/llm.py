"""Agent backed by a chat-completion model."""

from __future__ import annotations

from dataclasses import replace
from typing import Optional

from ..gateway import CompletionRequest, DEFAULT_MODEL, GatewayError
from . import prompts
from .base import Agent, AgentFailure
from .parsing import parse_structured_response
from .view import AgentView, DecisionKind, render_game_state


def phase_prompt(view: AgentView, kind: DecisionKind) -> str:
    if kind is DecisionKind.PROPOSE:
        return prompts.proposal_prompt(view.team_size, view.roster)
    if kind is DecisionKind.DISCUSS:
        return prompts.discussion_prompt(view.role)
    if kind is DecisionKind.VOTE:
        return prompts.VOTE_PROMPT
    if kind is DecisionKind.MISSION:
        return prompts.MISSION_PROMPT
    if kind is DecisionKind.CONCLAVE:
        return prompts.CONCLAVE_PROMPT
    if kind is DecisionKind.ASSASSINATE:
        return (
            prompts.ASSASSINATION_PROMPT
            + "\nCandidates: " + ", ".join(view.assassination_candidates)
        )
    return prompts.REFLECTION_PROMPT


def build_prompt(view: AgentView, kind: DecisionKind) -> tuple[str, str]:
    """(system text, user text) for one decision."""
    kind = DecisionKind(kind)
    system = prompts.system_prompt(view.name, view.role_brief, view.memory_context)
    user = render_game_state(view) + "\n\n" + phase_prompt(view, kind)
    if view.retry_notice:
        user += f"\n\nYour previous answer could not be used: {view.retry_notice}"
    return system, user


class LLMAgent(Agent):
    """Renders the prompt, calls the gateway and parses the reply.

    Every returned payload carries a ``trace`` with the exact prompt, raw
    response, latency and effort. Failures raise :class:`AgentFailure`
    with the same trace attached so the orchestrator can log it.
    """

    kind = "llm"

    def __init__(self, gateway, model_id: str = DEFAULT_MODEL, timeout: Optional[float] = None,
                 max_attempts: int = 4):
        self.gateway = gateway
        self.model_id = model_id
        self.timeout = timeout
        self.max_attempts = max_attempts

    def decide(self, view: AgentView, kind: DecisionKind):
        kind = DecisionKind(kind)
        system, user = build_prompt(view, kind)
        request = CompletionRequest(
            system_text=system,
            user_text=user,
            reasoning_effort=view.reasoning_effort,
            model_id=self.model_id,
            max_attempts=self.max_attempts,
            timeout=self.timeout,
        )
        trace = {
            "model": self.model_id,
            "effort": view.reasoning_effort.value,
            "system": system,
            "user": user,
        }
        try:
            result = self.gateway.complete(request)
        except GatewayError as exc:
            raise AgentFailure(f"gateway: {exc}", trace) from exc
        trace.update(
            raw=result.text,
            latency=result.latency,
            attempts=result.attempt_count,
            usage=result.token_usage,
        )
        try:
            payload = parse_structured_response(
                result.text, kind, view.roster, author=view.name, game_id=view.game_id
            )
        except AgentFailure as exc:
            exc.trace = trace
            raise
        return replace(payload, trace=trace)
