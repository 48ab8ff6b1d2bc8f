import functools
import json
import os
import re
import time
from contextlib import contextmanager
from pathlib import Path

import pytest

from avalonsim.agents import Agent, DecisionKind, build_prompt

GOLDEN = Path(__file__).parent / "golden"
FIXTURES = Path(__file__).parent / "fixtures"

ROLE_TOKENS = ("Merlin", "Percival", "Assassin", "Morgana", "Mordred", "Oberon", "Minion",
               "LoyalServant", "Loyal Servant", "evil", "good")
# A role or alignment word within a few words after a name counts as "attached".
_ATTACH_WINDOW = 40


class Recorder(Agent):
    """Wraps an agent and keeps every view it was shown."""

    def __init__(self, inner: Agent, sink: list):
        self.inner = inner
        self.sink = sink
        self.kind = getattr(inner, "kind", "recorder")

    def decide(self, view, kind):
        self.sink.append((view, DecisionKind(kind)))
        return self.inner.decide(view, kind)


def record_roster(roster: dict) -> tuple[dict, list]:
    sink: list = []
    return {n: Recorder(a, sink) for n, a in roster.items()}, sink


def public_view_text(view, kind) -> str:
    """Everything in a view except what the owner legitimately holds about itself."""
    data = view.to_dict()
    for own in ("role", "role_brief", "knowledge", "memory_context"):
        data.pop(own, None)
    _, user = build_prompt(view, kind)
    return json.dumps(data, ensure_ascii=False) + "\n" + user


_TOKEN_RE = re.compile(r"(?<!\w)(?:" + "|".join(map(re.escape, ROLE_TOKENS)) + r")(?!\w)", re.IGNORECASE)


@functools.lru_cache(maxsize=None)
def _name_re(names: tuple, bounded: bool = True) -> re.Pattern:
    alt = "|".join(map(re.escape, names))
    return re.compile(rf"(?<!\w)(?:{alt})(?!\w)" if bounded else alt)


def attached_role_tokens(text: str, others) -> list[str]:
    others = tuple(others)
    next_name = {n: _name_re(tuple(o for o in others if o != n), False) for n in others}
    hits = []
    for m in _name_re(others).finditer(text):
        name = m.group()
        window = text[m.end(): m.end() + _ATTACH_WINDOW]
        # stop at the next player name so we only look at this name's own attribute
        nxt = next_name[name].search(window)
        if nxt:
            window = window[: nxt.start()]
        hits.extend(f"{name}…{t.group()}" for t in _TOKEN_RE.finditer(window))
    return hits


def golden(name: str) -> str:
    return (GOLDEN / name).read_text(encoding="utf-8")


@pytest.fixture
def golden_dir() -> Path:
    return GOLDEN


# ── acceptance reporting ──────────────────────────────────────────────────────

_ACCEPTANCE = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[_ACCEPTANCE] = {}


def pytest_collection_modifyitems(config, items):
    """Live tests run only with ``-m live`` and a key in AVALON_API_KEY."""
    selected = "live" in (config.option.markexpr or "")
    if selected and os.environ.get("AVALON_API_KEY"):
        return
    why = "live gateway test: pass -m live and set AVALON_API_KEY"
    for item in items:
        if "live" in item.keywords:
            item.add_marker(pytest.mark.skip(reason=why))
            number = getattr(item.function, "criterion", None)
            if number is not None:
                config.stash[_ACCEPTANCE][number] = f"[{number:2d}] SKIP  {item.name} ({why})"


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_ACCEPTANCE, {})
    if lines:
        terminalreporter.section("acceptance criteria")
        for number in sorted(lines):
            terminalreporter.write_line(lines[number])


@pytest.fixture
def criterion(request):
    """Time a block against its limit and record one PASS/FAIL line."""
    lines = request.config.stash[_ACCEPTANCE]

    @contextmanager
    def run(number: int, limit: float):
        start = time.perf_counter()
        failure = None
        try:
            yield
        except BaseException as exc:
            failure = f"{type(exc).__name__}: {str(exc).splitlines()[0] if str(exc) else ''}"
            raise
        finally:
            elapsed = time.perf_counter() - start
            if failure is None and elapsed > limit:
                failure = f"took {elapsed:.2f}s, limit {limit:g}s"
            verdict = "FAIL" if failure else "PASS"
            line = f"[{number:2d}] {verdict}  {request.node.name} ({elapsed:.2f}s / {limit:g}s)"
            lines[number] = line + (f": {failure}" if failure else "")
            with request.config.pluginmanager.getplugin("capturemanager").global_and_fixture_disabled():
                print(f"\n{lines[number]}")
        assert elapsed <= limit, f"criterion {number} took {elapsed:.2f}s, limit {limit:g}s"

    return run
