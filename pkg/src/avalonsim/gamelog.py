"""Game log: one JSON object per line, header first and outcome last.

Lines are serialized with sorted keys and compact separators, so a
load/save round trip reproduces the file byte for byte.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterator, Optional

from .engine import (
    Alignment,
    GameOutcome,
    GameState,
    MissionCard,
    Phase,
    Role,
    VictoryPath,
    Vote,
    begin_assassination,
    build_config,
    close_discussion,
    end_night,
    finish,
    new_game,
    propose_team,
    resolve_assassination,
    resolve_mission,
    resolve_vote,
)

LOG_SCHEMA_VERSION = 1


class LogError(Exception):
    pass


class LogParseError(LogError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


class LogMigrationError(LogError):
    """The file was written under a different log schema version."""


@dataclass
class GameLog:
    header: dict[str, Any]
    events: list[dict[str, Any]] = field(default_factory=list)
    outcome: Optional[GameOutcome] = None
    aborted: bool = False
    final_state: Optional[GameState] = field(default=None, compare=False, repr=False)

    @property
    def game_id(self) -> int:
        return self.header["game_id"]

    @property
    def roster(self) -> list[str]:
        return self.header["roster"]

    @property
    def roles(self) -> dict[str, Role]:
        return {n: Role(r) for n, r in zip(self.header["roster"], self.header["roles"])}

    @property
    def player_count(self) -> int:
        return len(self.header["roster"])

    def of_type(self, *types: str) -> Iterator[dict[str, Any]]:
        return (e for e in self.events if e["type"] in types)

    def emit(self, type_: str, **fields: Any) -> dict[str, Any]:
        event = {"type": type_, "seq": len(self.events), **fields}
        self.events.append(event)
        return event

    def outcome_record(self) -> dict[str, Any]:
        names = self.roster
        o = self.outcome
        return {
            "type": "outcome",
            "aborted": self.aborted,
            "winner": o.winner.value if o else None,
            "via": o.via.value if o else None,
            "merlin": names[o.merlin] if o else None,
            "assassin_guess": names[o.assassin_guess] if o and o.assassin_guess is not None else None,
        }

    def to_lines(self) -> list[str]:
        records = [{"type": "header", "schema": LOG_SCHEMA_VERSION, **self.header}]
        records += self.events
        records.append(self.outcome_record())
        return [_dumps(r) for r in records]

    def dumps(self) -> str:
        return "".join(line + "\n" for line in self.to_lines())


def _dumps(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, ensure_ascii=False, separators=(",", ":"))


def persist_log(log: GameLog, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(log.dumps().encode("utf-8"))
    return path


def loads_log(data: bytes | str) -> GameLog:
    if isinstance(data, str):
        data = data.encode("utf-8")
    records = []
    offset = 0
    for raw in data.splitlines(keepends=True):
        if raw.strip():
            try:
                records.append(json.loads(raw))
            except json.JSONDecodeError as exc:
                raise LogParseError(f"malformed record: {exc.msg}", offset + exc.pos) from exc
            except UnicodeDecodeError as exc:
                raise LogParseError("invalid UTF-8", offset + exc.start) from exc
        offset += len(raw)
    if not records or records[0].get("type") != "header":
        raise LogParseError("missing header record", 0)
    header = dict(records[0])
    version = header.pop("schema", None)
    if version != LOG_SCHEMA_VERSION:
        raise LogMigrationError(
            f"log schema version {version!r} cannot be read by this version "
            f"(expects {LOG_SCHEMA_VERSION}); migrate the file first"
        )
    header.pop("type")
    if records[-1].get("type") != "outcome":
        raise LogParseError("truncated log: no outcome record", len(data))
    tail = records[-1]
    names = header["roster"]
    outcome = None
    if tail.get("winner"):
        guess = tail.get("assassin_guess")
        outcome = GameOutcome(
            winner=Alignment(tail["winner"]),
            via=VictoryPath(tail["via"]),
            merlin=names.index(tail["merlin"]),
            assassin_guess=names.index(guess) if guess is not None else None,
        )
    return GameLog(header=header, events=records[1:-1], outcome=outcome, aborted=bool(tail.get("aborted")))


def load_log(path: str | Path) -> GameLog:
    return loads_log(Path(path).read_bytes())


def replay(log: GameLog) -> list[GameState]:
    """Feed the logged decisions back through the engine.

    Returns every intermediate state; the last one carries the outcome.
    """
    names = log.roster
    seat = {n: i for i, n in enumerate(names)}
    config = build_config(len(names))
    roles = [Role(r) for r in log.header["roles"]]
    state = end_night(new_game(config, roles, first_leader=log.header.get("first_leader", 0)))
    states = [state]
    votes: dict[int, Vote] = {}
    actions: dict[int, MissionCard] = {}

    def push(s: GameState) -> GameState:
        states.append(s)
        return s

    for e in log.events:
        t = e["type"]
        if t == "proposal":
            state = push(propose_team(state, [seat[n] for n in e["team"]], e.get("reasoning", "")))
        elif t == "vote":
            votes[seat[e["player"]]] = Vote(e["vote"])
        elif t == "vote_result":
            if state.phase is Phase.DISCUSSION:
                state = close_discussion(state)
            state = push(resolve_vote(state, votes))
            votes = {}
        elif t == "mission_action":
            actions[seat[e["player"]]] = MissionCard(e["action"])
        elif t == "mission_result":
            state = push(resolve_mission(state, actions))
            actions = {}
        elif t == "assassination":
            if state.phase is Phase.EVIL_CONCLAVE:
                state = begin_assassination(state)
            state = push(finish(state, resolve_assassination(state, seat[e["guess"]])))
    return states
