"""Pull structured decisions out of free-form model output."""

from __future__ import annotations

import json
from typing import Any, Optional, Sequence

from ..engine import MissionCard, Vote
from .base import (
    AssassinGuess,
    InvalidReference,
    MissionAction,
    ParseFailure,
    Reflection,
    Statement,
    TeamProposal,
    VoteDecision,
)
from .view import DecisionKind

# Key that identifies an object as an answer to each decision kind.
SCHEMA_KEYS = {
    DecisionKind.PROPOSE: "team",
    DecisionKind.VOTE: "vote",
    DecisionKind.MISSION: "action",
    DecisionKind.ASSASSINATE: "guess",
    DecisionKind.REFLECT: "self_assessment",
}


def _json_objects(raw: str):
    decoder = json.JSONDecoder()
    pos = raw.find("{")
    while pos != -1:
        try:
            obj, end = decoder.raw_decode(raw, pos)
        except json.JSONDecodeError:
            pos = raw.find("{", pos + 1)
            continue
        if isinstance(obj, dict):
            yield obj
        pos = raw.find("{", end)


def resolve_name(name: Any, roster: Sequence[str]) -> str:
    if not isinstance(name, str):
        raise InvalidReference(f"expected a player name, got {name!r}")
    key = name.strip().casefold()
    for candidate in roster:
        if candidate.casefold() == key:
            return candidate
    raise InvalidReference(f"{name!r} is not a player in this game")


def _text(obj: dict, key: str) -> str:
    value = obj.get(key, "")
    return value if isinstance(value, str) else json.dumps(value)


def parse_structured_response(
    raw: str,
    kind: DecisionKind,
    roster: Sequence[str],
    *,
    author: Optional[str] = None,
    game_id: int = 0,
):
    """Return the decision payload encoded in ``raw``.

    The first JSON object carrying the kind's key wins; prose and code fences
    around it are ignored. Discussion kinds take the whole text.
    """
    kind = DecisionKind(kind)
    if kind in (DecisionKind.DISCUSS, DecisionKind.CONCLAVE):
        text = raw.strip()
        if not text:
            raise ParseFailure("empty statement")
        return Statement(text)

    key = SCHEMA_KEYS[kind]
    obj = next((o for o in _json_objects(raw) if key in o), None)
    if obj is None:
        raise ParseFailure(f"no JSON object with a {key!r} field found")

    if kind is DecisionKind.PROPOSE:
        team = obj["team"]
        if not isinstance(team, list):
            raise ParseFailure("'team' must be a list of names")
        names = tuple(resolve_name(n, roster) for n in team)
        if len(set(names)) != len(names):
            raise ParseFailure(f"team lists a player twice: {list(names)}")
        return TeamProposal(names, _text(obj, "reasoning"))

    if kind is DecisionKind.VOTE:
        value = str(obj["vote"]).strip().lower()
        if value not in ("approve", "reject"):
            raise ParseFailure(f"vote must be approve or reject, got {obj['vote']!r}")
        return VoteDecision(Vote(value), _text(obj, "comment"))

    if kind is DecisionKind.MISSION:
        value = str(obj["action"]).strip().lower()
        if value not in ("success", "fail"):
            raise ParseFailure(f"action must be success or fail, got {obj['action']!r}")
        return MissionAction(MissionCard(value), _text(obj, "reasoning"))

    if kind is DecisionKind.ASSASSINATE:
        return AssassinGuess(resolve_name(obj["guess"], roster), _text(obj, "reasoning"))

    # Reflection
    observations = obj.get("player_observations")
    if not isinstance(observations, dict):
        raise ParseFailure("'player_observations' must be an object")
    resolved: dict[str, str] = {}
    for name, text in observations.items():
        resolved[resolve_name(name, roster)] = text if isinstance(text, str) else json.dumps(text)
    if author is not None:
        resolved.pop(author, None)
        missing = [n for n in roster if n != author and n not in resolved]
        if missing:
            raise ParseFailure(f"observations missing for: {', '.join(missing)}")
        resolved = {n: resolved[n] for n in roster if n != author}
    return Reflection(author or "", game_id, _text(obj, "self_assessment"), resolved)
