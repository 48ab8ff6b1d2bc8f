"""Offline model stand-ins: canned, prompt-shaped replies for the LLM agent path.

:class:`CannedResponder` reads the rendered prompt, works out which decision
is being asked for, and answers in the requested JSON shape. A share of
replies is wrapped in prose or code fences to exercise the parser.
"""

from __future__ import annotations

import json
import random
import re
from pathlib import Path
from typing import Iterable, Optional

from ..gateway import CompletionRequest

_NAME_RE = re.compile(r"^You are (\w+), a player", re.M)
_PLAYERS_RE = re.compile(r"^Players: (.+)$", re.M)
_SIZE_RE = re.compile(r"Propose a team of (\d+) players")
_AVAILABLE_RE = re.compile(r"^Available players: (.+)$", re.M)
_CANDIDATES_RE = re.compile(r"^Candidates: (.+)$", re.M)
_CURRENT_RE = re.compile(r"^Current proposal: (.+)$", re.M)

_WRAPPERS = (
    "{body}",
    "Sure! ```json\n{body}\n```",
    "Here is my answer:\n{body}\nThanks.",
    "```\n{body}\n```",
)

_WORDS = ("straightforward", "subtle", "cautious", "quiet", "reliable", "strategic")


def detect_kind(user_text: str) -> str:
    markers = [
        ("Reflect on your performance", "reflect"),
        ("choose who you think is Merlin", "assassinate"),
        ("Discuss who you think Merlin is", "conclave"),
        ("You're on the mission", "mission"),
        ("Vote on this team proposal", "vote"),
        ("Propose a team of", "propose"),
        ("It's your turn to speak", "discuss"),
    ]
    for marker, kind in markers:
        if marker in user_text:
            return kind
    raise ValueError("prompt does not match any known decision")


def _split(names: str) -> list[str]:
    return [n.strip() for n in names.split(",") if n.strip()]


class CannedResponder:
    """Deterministic reply generator keyed on the prompt text.

    ``fail_rate`` is the chance an evil mission card is a Fail.
    """

    def __init__(self, seed: int = 0, fail_rate: float = 0.6, wrap: bool = True):
        self.seed = seed
        self.fail_rate = fail_rate
        self.wrap = wrap

    def __call__(self, request: CompletionRequest) -> str:
        rng = random.Random(f"{self.seed}|{request.system_text}|{request.user_text}")
        kind = detect_kind(request.user_text)
        me = _NAME_RE.search(request.system_text).group(1)
        players = _split(_PLAYERS_RE.search(request.user_text).group(1))

        if kind in ("discuss", "conclave"):
            current = _CURRENT_RE.search(request.user_text)
            team = current.group(1) if current else "this group"
            return f"{team} feels {rng.choice(_WORDS)} to me, so I'm leaning that way."
        if kind == "propose":
            size = int(_SIZE_RE.search(request.user_text).group(1))
            available = _split(_AVAILABLE_RE.search(request.user_text).group(1))
            others = [p for p in available if p != me]
            body = {"team": [me] + rng.sample(others, size - 1), "reasoning": "a balanced first look"}
        elif kind == "vote":
            body = {"vote": "approve" if rng.random() < 0.7 else "reject", "comment": "gut call"}
        elif kind == "mission":
            body = {"action": "fail" if rng.random() < self.fail_rate else "success", "reasoning": "timing"}
        elif kind == "assassinate":
            candidates = _split(_CANDIDATES_RE.search(request.user_text).group(1))
            body = {"guess": rng.choice(candidates), "reasoning": "they steered votes well"}
        else:
            body = {
                "self_assessment": "I read the table reasonably but could push harder.",
                "player_observations": {
                    p: f"{p} was {rng.choice(_WORDS)} this game." for p in players if p != me
                },
            }
        text = json.dumps(body)
        if self.wrap:
            text = rng.choice(_WRAPPERS).format(body=text)
        return text


class SequenceResponder:
    """Replays a fixed list of raw responses in order, then repeats the last one."""

    def __init__(self, responses: Iterable[str]):
        self.responses = list(responses)
        if not self.responses:
            raise ValueError("need at least one response")
        self._i = 0

    def __call__(self, request: Optional[CompletionRequest] = None) -> str:
        text = self.responses[min(self._i, len(self.responses) - 1)]
        self._i += 1
        return text


def load_fixtures(path: str | Path) -> list[str]:
    """Raw responses from a JSON list file or one-response-per-line JSONL file."""
    path = Path(path)
    content = path.read_text(encoding="utf-8")
    if path.suffix == ".jsonl":
        return [json.loads(line) for line in content.splitlines() if line.strip()]
    data = json.loads(content)
    if not isinstance(data, list) or not all(isinstance(x, str) for x in data):
        raise ValueError(f"{path}: expected a JSON list of strings")
    return data
