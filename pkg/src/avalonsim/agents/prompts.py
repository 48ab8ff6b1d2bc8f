"""Prompt text for every agent decision.

Role briefs and phase instructions are kept word-for-word; only the
placeholders are filled. Role briefs are single paragraphs, while the JSON
response shapes keep their line structure.
"""

from __future__ import annotations

from typing import Sequence

from ..engine import NightKnowledge, Role
from ..memory import render_memory_prompt

MERLIN_BRIEF = (
    "You are Merlin. You know these evil players: {evil_list}. "
    "Help good win WITHOUT revealing your identity, or the Assassin will kill you!"
)
PERCIVAL_BRIEF = (
    "You are Percival (good team). You see these players as Merlin: {merlin_and_morgana}. "
    "One is the real Merlin, one might be Morgana (evil). Protect Merlin!"
)
ASSASSIN_BRIEF = (
    "You are the Assassin (evil team). Your evil teammates are: {evil_teammates}. "
    "Sabotage missions. If good wins 3 missions, you guess who Merlin is!"
)
MORGANA_BRIEF = (
    "You are Morgana (evil team). Your evil teammates are: {evil_teammates}. "
    "You appear as Merlin to Percival. Deceive and sabotage!"
)
MORDRED_BRIEF = (
    "You are Mordred (evil team). Your evil teammates are: {evil_teammates}. "
    "You are invisible to Merlin. Sabotage missions!"
)
OBERON_BRIEF = (
    "You are Oberon (evil team). You don't know who your teammates are, and they don't know you. "
    "Sabotage missions and try to identify your team!"
)
GENERIC_EVIL_BRIEF = (
    "You are on the evil team. Your evil teammates are: {evil_teammates}. "
    "Sabotage missions and deceive the good players!"
)
GENERIC_GOOD_BRIEF = (
    "You are on the good team. Deduce who the evil players are and ensure missions succeed!"
)

DISCUSSION_PROMPT = (
    "It's your turn to speak. Provide a strategic comment about who to trust or who should be "
    "on the mission team. Be natural and conversational. Keep it to 1-2 sentences."
)
EVIL_DISCUSSION_SUFFIX = "Remember to deceive and create confusion while appearing trustworthy."
MERLIN_DISCUSSION_SUFFIX = "Subtly guide the team without revealing you know who the evil players are."

PROPOSAL_PROMPT = (
    "You are the mission leader. Propose a team of {size} players for this mission.\n"
    "Available players: {player_list}\n"
    "Respond ONLY with a JSON object:\n"
    '{{"team": ["Name1", "Name2", ...],\n'
    ' "reasoning": "why you chose this team"}}'
)
VOTE_PROMPT = (
    "Vote on this team proposal. Respond ONLY with JSON:\n"
    '{"vote": "approve" or "reject",\n'
    ' "comment": "brief reason"}'
)
MISSION_PROMPT = (
    "You're on the mission. As an evil player, choose 'success' or 'fail' strategically. "
    "Respond with JSON:\n"
    '{"action": "success" or "fail",\n'
    ' "reasoning": "why"}'
)
CONCLAVE_PROMPT = (
    "Discuss who you think Merlin is among the good players. Analyze their behavior and "
    "statements in first person (as yourself). Be specific and analytical. Keep it to "
    "2-3 sentences. Speak naturally as if talking to your evil teammates."
)
ASSASSINATION_PROMPT = (
    "Based on all the discussions and your teammates' analysis, choose who you think is "
    "Merlin from the good players. Respond ONLY with JSON:\n"
    '{"guess": "PlayerName",\n'
    ' "reasoning": "your analysis in 2-3 sentences"}'
)
REFLECTION_PROMPT = (
    "Reflect on your performance in this game. Respond with JSON:\n"
    "{\n"
    '  "self_assessment": "What you did well and what you could improve (2-3 sentences)",\n'
    '  "player_observations": {\n'
    '    "PlayerName1": "Brief observation about their playstyle or patterns",\n'
    '    "PlayerName2": "Brief observation...",\n'
    "    ...\n"
    "  }\n"
    "}\n"
    "Make observations about ALL other players (not yourself)."
)

EVIL_BRIEFS = {
    Role.ASSASSIN: ASSASSIN_BRIEF,
    Role.MORGANA: MORGANA_BRIEF,
    Role.MORDRED: MORDRED_BRIEF,
    Role.MINION: GENERIC_EVIL_BRIEF,
}


class PromptInvariantError(AssertionError):
    """Night knowledge handed to the renderer does not fit the role."""


def _names(seats, names: Sequence[str]) -> str:
    listed = ", ".join(names[s] for s in sorted(seats))
    return listed or "none"


def render_role_brief(role: Role, knowledge: NightKnowledge, names: Sequence[str]) -> str:
    """Fill the role's knowledge template with comma-separated player names."""
    if role is not Role.MERLIN and knowledge.known_evil:
        raise PromptInvariantError(f"{role.value} cannot know the evil roster")
    if role is not Role.PERCIVAL and knowledge.merlin_candidates:
        raise PromptInvariantError(f"{role.value} cannot see Merlin candidates")
    if not role.is_evil and knowledge.evil_teammates:
        raise PromptInvariantError(f"{role.value} is good and has no evil teammates")
    if role is Role.OBERON and knowledge.evil_teammates:
        raise PromptInvariantError("Oberon is isolated from the evil team")

    if role is Role.MERLIN:
        return MERLIN_BRIEF.format(evil_list=_names(knowledge.known_evil, names))
    if role is Role.PERCIVAL:
        return PERCIVAL_BRIEF.format(merlin_and_morgana=_names(knowledge.merlin_candidates, names))
    if role is Role.OBERON:
        return OBERON_BRIEF
    if role in EVIL_BRIEFS:
        return EVIL_BRIEFS[role].format(evil_teammates=_names(knowledge.evil_teammates, names))
    return GENERIC_GOOD_BRIEF


def discussion_prompt(role: Role) -> str:
    if role.is_evil:
        return f"{DISCUSSION_PROMPT} {EVIL_DISCUSSION_SUFFIX}"
    if role is Role.MERLIN:
        return f"{DISCUSSION_PROMPT} {MERLIN_DISCUSSION_SUFFIX}"
    return DISCUSSION_PROMPT


def proposal_prompt(size: int, players: Sequence[str]) -> str:
    return PROPOSAL_PROMPT.format(size=size, player_list=", ".join(players))


def system_prompt(name: str, role_brief: str, memory_context=None) -> str:
    parts = [
        f"You are {name}, a player in a game of The Resistance: Avalon.",
    ]
    memory = render_memory_prompt(memory_context)
    if memory:
        parts.append(memory.rstrip("\n"))
    parts.append(role_brief)
    return "\n\n".join(parts) + "\n"
