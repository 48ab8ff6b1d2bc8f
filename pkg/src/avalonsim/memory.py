"""Cross-game memory: post-game reflections and the per-agent context built from them.

Records persist as one JSON object per line. Every line carries
``"schema": MEMORY_SCHEMA_VERSION``; files written by another version are
refused rather than guessed at.

Line layout (version 1)::

    {"author": "Alice", "author_role": "Merlin", "game_id": 3,
     "player_observations": {"Bob": {"target_role": "Assassin", "text": "..."}, ...},
     "schema": 1, "self_assessment": "...", "tournament_id": "A-seed0"}
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

from .engine import Role

MEMORY_SCHEMA_VERSION = 1
SELF_ASSESSMENT_WINDOW = 3


class MemoryStoreError(Exception):
    pass


class DuplicateReflection(MemoryStoreError):
    """The (tournament, game, author) key already holds a reflection."""


class MemorySchemaError(MemoryStoreError):
    pass


@dataclass(frozen=True)
class Observation:
    text: str
    target_role: Optional[Role]


@dataclass(frozen=True)
class ReflectionRecord:
    tournament_id: str
    game_id: int
    author: str
    author_role: Role
    self_assessment: str
    player_observations: dict[str, Observation]

    @property
    def key(self) -> tuple[str, int, str]:
        return (self.tournament_id, self.game_id, self.author)

    def to_dict(self) -> dict:
        return {
            "schema": MEMORY_SCHEMA_VERSION,
            "tournament_id": self.tournament_id,
            "game_id": self.game_id,
            "author": self.author,
            "author_role": self.author_role.value,
            "self_assessment": self.self_assessment,
            "player_observations": {
                name: {
                    "text": obs.text,
                    "target_role": obs.target_role.value if obs.target_role else None,
                }
                for name, obs in self.player_observations.items()
            },
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ReflectionRecord":
        version = data.get("schema")
        if version != MEMORY_SCHEMA_VERSION:
            raise MemorySchemaError(
                f"reflection schema {version!r} unsupported (expected {MEMORY_SCHEMA_VERSION})"
            )
        return cls(
            tournament_id=data["tournament_id"],
            game_id=int(data["game_id"]),
            author=data["author"],
            author_role=Role(data["author_role"]),
            self_assessment=data["self_assessment"],
            player_observations={
                name: Observation(o["text"], Role(o["target_role"]) if o.get("target_role") else None)
                for name, o in data["player_observations"].items()
            },
        )


@dataclass(frozen=True)
class MemoryContext:
    self_assessments: tuple[tuple[int, str], ...] = ()
    observations_by_target: dict[str, tuple[tuple[int, str, Optional[Role]], ...]] = field(
        default_factory=dict
    )

    @property
    def is_empty(self) -> bool:
        return not self.self_assessments and not self.observations_by_target


class MemoryStore:
    """Append-only reflection store for one tournament.

    If ``path`` is given, each accepted record is appended to that file
    immediately. ``max_observations`` caps how many observations per target
    reach a context (newest kept); ``None`` keeps them all.
    """

    def __init__(self, path: str | Path | None = None, max_observations: Optional[int] = None):
        self.path = Path(path) if path is not None else None
        self.max_observations = max_observations
        self._records: list[ReflectionRecord] = []
        self._keys: set[tuple[str, int, str]] = set()
        self._lock = threading.Lock()

    def __len__(self) -> int:
        return len(self._records)

    def __iter__(self):
        return iter(list(self._records))

    @property
    def records(self) -> tuple[ReflectionRecord, ...]:
        return tuple(self._records)

    def record(self, record: ReflectionRecord) -> None:
        with self._lock:
            if record.key in self._keys:
                raise DuplicateReflection(f"reflection {record.key} already recorded")
            self._keys.add(record.key)
            self._records.append(record)
            if self.path is not None:
                self.path.parent.mkdir(parents=True, exist_ok=True)
                with self.path.open("a", encoding="utf-8") as fh:
                    fh.write(_dump_line(record))

    def save(self, path: str | Path) -> None:
        Path(path).write_text("".join(_dump_line(r) for r in self._records), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path, max_observations: Optional[int] = None) -> "MemoryStore":
        path = Path(path)
        store = cls(max_observations=max_observations)
        if path.exists():
            for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
                if not line.strip():
                    continue
                try:
                    data = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise MemorySchemaError(f"{path}:{lineno}: {exc}") from exc
                store.record(ReflectionRecord.from_dict(data))
        store.path = path
        return store


def _dump_line(record: ReflectionRecord) -> str:
    return json.dumps(record.to_dict(), sort_keys=True, ensure_ascii=False) + "\n"


def record_reflection(store: MemoryStore, record: ReflectionRecord) -> None:
    store.record(record)


def context_for(store: MemoryStore, agent: str, game_id: int, tournament_id: Optional[str] = None) -> MemoryContext:
    """The memory an agent carries into ``game_id``: only its own prior reflections."""
    own = sorted(
        (
            r for r in store.records
            if r.author == agent
            and r.game_id < game_id
            and (tournament_id is None or r.tournament_id == tournament_id)
        ),
        key=lambda r: r.game_id,
    )
    if not own:
        return MemoryContext()
    selfs = tuple((r.game_id, r.self_assessment) for r in own[-SELF_ASSESSMENT_WINDOW:])
    by_target: dict[str, list[tuple[int, str, Optional[Role]]]] = {}
    for r in own:
        for target, obs in r.player_observations.items():
            by_target.setdefault(target, []).append((r.game_id, obs.text, obs.target_role))
    cap = store.max_observations
    return MemoryContext(
        self_assessments=selfs,
        observations_by_target={
            t: tuple(items[-cap:] if cap else items) for t, items in sorted(by_target.items())
        },
    )


def _role_label(role: Optional[Role]) -> str:
    if role is None:
        return "unknown"
    return "Loyal Servant" if role is Role.LOYAL_SERVANT else role.value


def render_memory_prompt(context: Optional[MemoryContext]) -> str:
    if context is None or context.is_empty:
        return ""
    lines = ["MEMORY FROM PREVIOUS GAMES"]
    if context.self_assessments:
        lines.append("Your recent self-assessments:")
        lines.extend(f"- Game {gid}: {text}" for gid, text in context.self_assessments)
    if context.observations_by_target:
        lines.append("Your observations about other players:")
        for target, items in context.observations_by_target.items():
            lines.append(f"{target}:")
            lines.extend(
                f"- Game {gid} (was {_role_label(role)}): {text}" for gid, text, role in items
            )
    return "\n".join(lines) + "\n"


def iter_texts(context: MemoryContext) -> Iterable[str]:
    for _, text in context.self_assessments:
        yield text
    for items in context.observations_by_target.values():
        for _, text, _ in items:
            yield text
