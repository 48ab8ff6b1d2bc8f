"""What one agent is allowed to see when asked for a decision."""

from __future__ import annotations

from dataclasses import asdict, dataclass, replace
from enum import Enum
from typing import Optional

from ..engine import NightKnowledge, Role
from ..gateway import ReasoningEffort
from ..memory import MemoryContext


class DecisionKind(str, Enum):
    PROPOSE = "propose"
    DISCUSS = "discuss"
    VOTE = "vote"
    MISSION = "mission"
    CONCLAVE = "conclave"
    ASSASSINATE = "assassinate"
    REFLECT = "reflect"


@dataclass(frozen=True)
class DiscussionMessage:
    speaker: str
    mission: int
    attempt: int
    text: str


@dataclass(frozen=True)
class PublicProposal:
    mission: int
    attempt: int
    leader: str
    team: tuple[str, ...]
    reasoning: str = ""
    votes: Optional[dict[str, str]] = None
    approved: Optional[bool] = None
    auto_approved: bool = False


@dataclass(frozen=True)
class PublicMission:
    mission: int
    team: tuple[str, ...]
    fail_count: int
    result: str


@dataclass(frozen=True)
class AgentView:
    game_id: int
    name: str
    seat: int
    roster: tuple[str, ...]
    role: Role
    knowledge: NightKnowledge
    role_brief: str
    mission: int = 1
    attempt: int = 1
    leader: str = ""
    successes: int = 0
    fails: int = 0
    team_size: int = 0
    proposals: tuple[PublicProposal, ...] = ()
    missions: tuple[PublicMission, ...] = ()
    discussion: tuple[DiscussionMessage, ...] = ()
    conclave: tuple[DiscussionMessage, ...] = ()
    current_team: Optional[tuple[str, ...]] = None
    assassination_candidates: tuple[str, ...] = ()
    memory_context: Optional[MemoryContext] = None
    reasoning_effort: ReasoningEffort = ReasoningEffort.LOW
    revealed_roles: Optional[dict[str, Role]] = None
    result_summary: str = ""
    retry_notice: Optional[str] = None

    @property
    def player_count(self) -> int:
        return len(self.roster)

    @property
    def others(self) -> tuple[str, ...]:
        return tuple(n for n in self.roster if n != self.name)

    def with_notice(self, notice: Optional[str]) -> "AgentView":
        return replace(self, retry_notice=notice)

    def to_dict(self) -> dict:
        data = asdict(self)
        data["role"] = self.role.value
        data["reasoning_effort"] = self.reasoning_effort.value
        data["knowledge"] = {k: sorted(v) if isinstance(v, frozenset) else v for k, v in data["knowledge"].items()}
        if self.revealed_roles is not None:
            data["revealed_roles"] = {k: v.value for k, v in self.revealed_roles.items()}
        if self.memory_context is not None:
            data["memory_context"] = {
                "self_assessments": [list(x) for x in self.memory_context.self_assessments],
                "observations_by_target": {
                    t: [[g, text, r.value if r else None] for g, text, r in items]
                    for t, items in self.memory_context.observations_by_target.items()
                },
            }
        return data


def render_game_state(view: AgentView) -> str:
    """Plain-text public history: missions so far, proposals with votes, and the transcript."""
    lines = [
        f"Players: {', '.join(view.roster)}",
        f"Mission {view.mission}, proposal attempt {view.attempt}. Leader: {view.leader or '-'}.",
        f"Score: {view.successes} successful missions, {view.fails} failed missions.",
    ]
    for m in view.missions:
        lines.append(
            f"Mission {m.mission} result: {m.result.upper()} (team: {', '.join(m.team)}; fails: {m.fail_count})"
        )
    if view.proposals or view.discussion:
        lines.append("History:")
    # Interleave each proposal with the discussion held about it.
    said: dict[tuple[int, int], list[DiscussionMessage]] = {}
    for msg in view.discussion:
        said.setdefault((msg.mission, msg.attempt), []).append(msg)
    for p in view.proposals:
        lines.append(f"[M{p.mission}.{p.attempt}] {p.leader} proposed {', '.join(p.team)}: {p.reasoning}")
        for msg in said.get((p.mission, p.attempt), []):
            lines.append(f"  {msg.speaker}: {msg.text}")
        if p.votes is not None:
            tally = ", ".join(f"{n} {v}" for n, v in p.votes.items())
            verdict = "APPROVED (auto)" if p.auto_approved else ("APPROVED" if p.approved else "REJECTED")
            lines.append(f"  Votes: {tally} -> {verdict}")
    if view.current_team is not None:
        lines.append(f"Current proposal: {', '.join(view.current_team)}")
    if view.conclave:
        lines.append("Evil team discussion:")
        lines.extend(f"  {m.speaker}: {m.text}" for m in view.conclave)
    if view.revealed_roles:
        lines.append("Game over. " + view.result_summary)
        lines.append(
            "Roles: " + ", ".join(f"{n} = {r.value}" for n, r in view.revealed_roles.items())
        )
    return "\n".join(lines)
