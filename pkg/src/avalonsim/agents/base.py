"""Decision payloads and the agent interface."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Optional

from ..engine import MissionCard, Vote
from .view import AgentView, DecisionKind


class AgentFailure(Exception):
    """An agent produced no usable decision. ``trace`` keeps the raw exchange, if any."""

    def __init__(self, message: str, trace: Optional[dict[str, Any]] = None):
        super().__init__(message)
        self.trace = trace


class ParseFailure(AgentFailure):
    pass


class InvalidReference(AgentFailure):
    """A response named a player outside the roster."""


@dataclass(frozen=True)
class TeamProposal:
    team: tuple[str, ...]
    reasoning: str = ""
    trace: Optional[dict[str, Any]] = field(default=None, compare=False)


@dataclass(frozen=True)
class Statement:
    text: str
    trace: Optional[dict[str, Any]] = field(default=None, compare=False)


@dataclass(frozen=True)
class VoteDecision:
    vote: Vote
    comment: str = ""
    trace: Optional[dict[str, Any]] = field(default=None, compare=False)


@dataclass(frozen=True)
class MissionAction:
    action: MissionCard
    reasoning: str = ""
    trace: Optional[dict[str, Any]] = field(default=None, compare=False)


@dataclass(frozen=True)
class AssassinGuess:
    guess: str
    reasoning: str = ""
    trace: Optional[dict[str, Any]] = field(default=None, compare=False)


@dataclass(frozen=True)
class Reflection:
    author: str
    game_id: int
    self_assessment: str
    player_observations: dict[str, str]
    trace: Optional[dict[str, Any]] = field(default=None, compare=False)


class Agent:
    """Base class for players. Subclasses override the per-phase hooks.

    ``decide`` is the single entry point the orchestrator uses.
    """

    kind = "agent"

    def decide(self, view: AgentView, kind: DecisionKind):
        handler = {
            DecisionKind.PROPOSE: self.propose,
            DecisionKind.DISCUSS: self.discuss,
            DecisionKind.VOTE: self.vote,
            DecisionKind.MISSION: self.mission_action,
            DecisionKind.CONCLAVE: self.conclave,
            DecisionKind.ASSASSINATE: self.assassinate,
            DecisionKind.REFLECT: self.reflect,
        }[DecisionKind(kind)]
        return handler(view)

    def propose(self, view: AgentView) -> TeamProposal:
        raise NotImplementedError

    def discuss(self, view: AgentView) -> Statement:
        raise NotImplementedError

    def vote(self, view: AgentView) -> VoteDecision:
        raise NotImplementedError

    def mission_action(self, view: AgentView) -> MissionAction:
        raise NotImplementedError

    def conclave(self, view: AgentView) -> Statement:
        raise NotImplementedError

    def assassinate(self, view: AgentView) -> AssassinGuess:
        raise NotImplementedError

    def reflect(self, view: AgentView) -> Reflection:
        raise NotImplementedError
