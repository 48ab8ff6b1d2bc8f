"""Scripted players used for tests, offline tournaments and analysis fixtures.

Decisions depend only on (seed, view), so two runs with the same seeds
produce identical logs. Discussion and reflection text come from fixed
templates that embed configurable descriptor words.
"""

from __future__ import annotations

import random
from typing import Sequence

from ..engine import MissionCard, Vote
from .base import (
    Agent,
    AssassinGuess,
    MissionAction,
    Reflection,
    Statement,
    TeamProposal,
    VoteDecision,
)
from .view import AgentView, DecisionKind

DEFAULT_TALK_WORDS = ("cautious", "measured", "solid")
DEFAULT_GOOD_WORDS = ("straightforward", "reliable")
DEFAULT_EVIL_WORDS = ("subtle", "deceptive")


def _clockwise(view: AgentView, start: str) -> list[str]:
    i = view.roster.index(start)
    return [view.roster[(i + k) % view.player_count] for k in range(view.player_count)]


def failed_mission_members(view: AgentView) -> set[str]:
    out: set[str] = set()
    for m in view.missions:
        if m.result == MissionCard.FAIL.value:
            out.update(m.team)
    return out


def known_evil_names(view: AgentView) -> set[str]:
    seats = view.knowledge.known_evil | view.knowledge.evil_teammates
    return {view.roster[s] for s in seats}


class ScriptedAgent(Agent):
    """Shared template text for the scripted bots."""

    kind = "scripted"

    def __init__(
        self,
        seed: int = 0,
        talk_words: Sequence[str] = DEFAULT_TALK_WORDS,
        good_words: Sequence[str] = DEFAULT_GOOD_WORDS,
        evil_words: Sequence[str] = DEFAULT_EVIL_WORDS,
    ):
        self.seed = seed
        self.talk_words = tuple(talk_words)
        self.good_words = tuple(good_words)
        self.evil_words = tuple(evil_words)

    def rng(self, view: AgentView, kind: DecisionKind) -> random.Random:
        return random.Random(
            f"{self.seed}|{view.game_id}|{kind.value}|{view.name}|{view.mission}|{view.attempt}"
        )

    def discuss(self, view: AgentView) -> Statement:
        word = self.rng(view, DecisionKind.DISCUSS).choice(self.talk_words)
        team = ", ".join(view.current_team or ())
        return Statement(f"I think {team} looks like a {word} pick for mission {view.mission}.")

    def conclave(self, view: AgentView) -> Statement:
        pick = self._guess(view)
        return Statement(f"{pick} steered the votes a little too well; that is my read.")

    def _guess(self, view: AgentView) -> str:
        candidates = list(view.assassination_candidates) or list(view.others)
        return self.rng(view, DecisionKind.ASSASSINATE).choice(candidates)

    def assassinate(self, view: AgentView) -> AssassinGuess:
        return AssassinGuess(self._guess(view), "scripted pick")

    def reflect(self, view: AgentView) -> Reflection:
        rng = self.rng(view, DecisionKind.REFLECT)
        observations = {}
        for name in view.others:
            role = (view.revealed_roles or {}).get(name)
            words = self.evil_words if role is not None and role.is_evil else self.good_words
            observations[name] = f"Game {view.game_id}: {name} seemed {rng.choice(words)}."
        return Reflection(
            author=view.name,
            game_id=view.game_id,
            self_assessment=f"Game {view.game_id}: I played {view.role.value} and kept to my plan.",
            player_observations=observations,
        )


class RandomAgent(ScriptedAgent):
    kind = "random"

    def propose(self, view: AgentView) -> TeamProposal:
        team = self.rng(view, DecisionKind.PROPOSE).sample(list(view.roster), view.team_size)
        return TeamProposal(tuple(team), "random pick")

    def vote(self, view: AgentView) -> VoteDecision:
        return VoteDecision(self.rng(view, DecisionKind.VOTE).choice(list(Vote)), "coin flip")

    def mission_action(self, view: AgentView) -> MissionAction:
        return MissionAction(self.rng(view, DecisionKind.MISSION).choice(list(MissionCard)), "coin flip")


class HonestGoodBot(ScriptedAgent):
    """Plays to its information: avoids players it knows or suspects are evil.

    ``trusting=True`` approves every proposal and ignores suspicion.
    """

    kind = "honest"

    def __init__(self, seed: int = 0, trusting: bool = False, **words):
        super().__init__(seed, **words)
        self.trusting = trusting

    def _avoid(self, view: AgentView) -> set[str]:
        if self.trusting:
            return set()
        return (known_evil_names(view) | failed_mission_members(view)) - {view.name}

    def propose(self, view: AgentView) -> TeamProposal:
        avoid = self._avoid(view)
        order = _clockwise(view, view.name)
        team = [n for n in order if n not in avoid][: view.team_size]
        team += [n for n in order if n not in team][: view.team_size - len(team)]
        return TeamProposal(tuple(team), "players I have no reason to doubt")

    def vote(self, view: AgentView) -> VoteDecision:
        team = set(view.current_team or ())
        if self.trusting or view.attempt == 5 or not team & self._avoid(view):
            return VoteDecision(Vote.APPROVE, "looks fine")
        return VoteDecision(Vote.REJECT, "someone on this team worries me")

    def mission_action(self, view: AgentView) -> MissionAction:
        return MissionAction(MissionCard.SUCCESS, "play it straight")


class NaiveEvilBot(ScriptedAgent):
    """Fails every mission it joins and backs any team with an evil member."""

    kind = "naive_evil"

    def _allies(self, view: AgentView) -> set[str]:
        return {view.name} | {view.roster[s] for s in view.knowledge.evil_teammates}

    def propose(self, view: AgentView) -> TeamProposal:
        team = _clockwise(view, view.name)[: view.team_size]
        return TeamProposal(tuple(team), "seats next to me")

    def vote(self, view: AgentView) -> VoteDecision:
        team = set(view.current_team or ())
        if view.attempt == 5 or team & self._allies(view):
            return VoteDecision(Vote.APPROVE, "fine by me")
        return VoteDecision(Vote.REJECT, "not convinced")

    def mission_action(self, view: AgentView) -> MissionAction:
        return MissionAction(MissionCard.FAIL, "sabotage")


class SleeperEvilBot(NaiveEvilBot):
    """Passes missions numbered below ``pass_until`` to build trust, then fails."""

    kind = "sleeper_evil"

    def __init__(self, seed: int = 0, pass_until: int = 3, **words):
        super().__init__(seed, **words)
        self.pass_until = pass_until

    def mission_action(self, view: AgentView) -> MissionAction:
        if view.mission < self.pass_until:
            return MissionAction(MissionCard.SUCCESS, "build trust first")
        return MissionAction(MissionCard.FAIL, "strike now")


class RolePolicyAgent(Agent):
    """Routes each decision to ``good`` or ``evil`` depending on the role drawn this game."""

    def __init__(self, good: Agent, evil: Agent):
        self.good = good
        self.evil = evil

    @property
    def kind(self) -> str:  # type: ignore[override]
        return f"{self.good.kind}/{self.evil.kind}"

    def decide(self, view: AgentView, kind: DecisionKind):
        return (self.evil if view.role.is_evil else self.good).decide(view, kind)


def scripted_roster(names: Sequence[str], kind: str = "scripted", seed: int = 0,
                    pass_until: int = 3) -> dict[str, Agent]:
    """Build one agent per name.

    ``kind``: ``scripted`` (honest good / naive evil), ``sleeper`` (honest
    good / sleeper evil) or ``random``.
    """
    roster: dict[str, Agent] = {}
    for i, name in enumerate(names):
        s = seed * 1000 + i
        if kind == "random":
            roster[name] = RandomAgent(s)
        elif kind == "scripted":
            roster[name] = RolePolicyAgent(HonestGoodBot(s), NaiveEvilBot(s))
        elif kind == "sleeper":
            roster[name] = RolePolicyAgent(HonestGoodBot(s), SleeperEvilBot(s, pass_until=pass_until))
        else:
            raise ValueError(f"unknown scripted roster kind {kind!r}")
    return roster


__all__ = [
    "HonestGoodBot",
    "NaiveEvilBot",
    "RandomAgent",
    "RolePolicyAgent",
    "ScriptedAgent",
    "SleeperEvilBot",
    "scripted_roster",
]
