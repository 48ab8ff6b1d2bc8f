"""Command-line entry point: play, tournament, analyze, replay.

Exit codes: 0 success, 1 runtime error, 2 usage error.
"""

from __future__ import annotations

import json
import logging
import os
import sys
from pathlib import Path
from typing import Any, Optional

import click

from . import engine as eng
from .agents import CannedResponder, LLMAgent, scripted_roster
from .analysis import AnalysisConfig, DescriptorLexicon, ReferencePatternSet, render_report
from .gamelog import LogError, load_log, persist_log
from .gateway import API_KEY_ENV, DEFAULT_MODEL, Gateway, OfflineGateway, ReasoningEffort
from .replay import render_replay
from .tournament import get_preset, run_game, run_tournament

SCRIPTED_KINDS = ("scripted", "sleeper", "random")
AGENT_KINDS = SCRIPTED_KINDS + ("mock-llm", "llm")

logger = logging.getLogger("avalonsim")


def _load_json(path: Optional[str]) -> dict[str, Any]:
    if not path:
        return {}
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise click.ClickException(f"cannot read config {path}: {exc}")
    if not isinstance(data, dict):
        raise click.ClickException(f"config {path} must hold a JSON object")
    return data


def make_factory(kind: str, seed: int, offline: bool, settings: dict[str, Any]):
    """Agent factory for a roster kind; ``llm`` needs the network and is refused offline."""
    if kind in SCRIPTED_KINDS:
        pass_until = int(settings.get("pass_until", 3))
        return lambda names, game_id, effort: scripted_roster(names, kind, seed, pass_until=pass_until)
    model = settings.get("model", DEFAULT_MODEL)
    if kind == "mock-llm":
        gateway = OfflineGateway(CannedResponder(seed))
    elif kind == "llm":
        if offline:
            raise click.UsageError("--agents llm needs the network gateway; it cannot run with --offline")
        if not os.environ.get(API_KEY_ENV):
            raise click.ClickException(f"--agents llm needs an API key in {API_KEY_ENV}")
        gateway = Gateway(
            base_url=settings.get("base_url"),
            max_in_flight=int(settings.get("max_in_flight", 8)),
            min_interval=float(settings.get("min_interval", 0.0)),
        )
    else:
        raise click.UsageError(f"unknown agent kind {kind!r}")
    agent = LLMAgent(gateway, model_id=model, timeout=settings.get("timeout"))
    return lambda names, game_id, effort: {n: agent for n in names}


@click.group()
@click.option("-v", "--verbose", count=True, help="Repeat for more log output.")
def main(verbose: int) -> None:
    """Simulate and analyze repeated games of The Resistance: Avalon."""
    level = logging.WARNING - 10 * min(verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def _common(f):
    f = click.option("--offline", is_flag=True, help="Forbid network access.")(f)
    f = click.option("--config", "config_path", type=click.Path(dir_okay=False),
                     help="JSON file with agent/model settings.")(f)
    f = click.option("--agents", type=click.Choice(AGENT_KINDS), default=None,
                     help="Agent kind for every seat.")(f)
    f = click.option("--seed", type=int, default=0, show_default=True)(f)
    return f


@main.command()
@click.option("--players", type=click.IntRange(eng.MIN_PLAYERS, eng.MAX_PLAYERS), default=5, show_default=True)
@click.option("--out", type=click.Path(file_okay=False), default="runs/play", show_default=True)
@click.option("--effort", type=click.Choice([e.value for e in ReasoningEffort]), default="low")
@_common
def play(players: int, out: str, effort: str, seed: int, agents: Optional[str], config_path: Optional[str],
         offline: bool) -> None:
    """Play one game and write its log."""
    settings = _load_json(config_path)
    kind = agents or settings.get("agents", "scripted")
    factory = make_factory(kind, seed, offline, settings)
    names = eng.player_names(players)
    roster = factory(names, 1, ReasoningEffort(effort))
    log = run_game(eng.build_config(players), {n: roster[n] for n in names}, seed=seed,
                   effort=ReasoningEffort(effort), extra_header={"agent_kind": kind})
    path = persist_log(log, Path(out) / f"game_seed{seed}.jsonl")
    if log.aborted:
        click.echo(f"game aborted; log written to {path}", err=True)
        sys.exit(1)
    o = log.outcome
    click.echo(f"{o.winner.value} wins via {o.via.value} after {len(log.final_state.missions)} missions")
    click.echo(f"log: {path}")


@main.command()
@click.option("--preset", type=click.Choice(["A", "B", "C", "D"], case_sensitive=False), required=True)
@click.option("--out", type=click.Path(file_okay=False), required=True)
@click.option("--workers", type=click.IntRange(1), default=1, show_default=True,
              help="Parallel games (no-memory presets only).")
@_common
def tournament(preset: str, out: str, workers: int, seed: int, agents: Optional[str],
               config_path: Optional[str], offline: bool) -> None:
    """Run a dataset preset's full schedule; reruns resume from the manifest."""
    settings = _load_json(config_path)
    kind = agents or settings.get("agents", "scripted")
    factory = make_factory(kind, seed, offline, settings)
    p = get_preset(preset)

    def progress(log) -> None:
        status = "aborted" if log.aborted else f"{log.outcome.winner.value} ({log.outcome.via.value})"
        click.echo(f"game {log.game_id:3d}/{p.games}: {log.player_count}p {log.header['effort']}: {status}")

    logs = run_tournament(p, factory, seed, out_dir=out, workers=workers, on_game=progress,
                          extra_header={"agent_kind": kind, "model": settings.get("model", DEFAULT_MODEL)
                                        if kind in ("llm", "mock-llm") else None})
    aborted = sum(l.aborted for l in logs)
    click.echo(f"{len(logs)} games in {out} ({aborted} aborted)")


def _lexicon(path: Optional[str]) -> Optional[DescriptorLexicon]:
    if not path:
        return None
    text = Path(path).read_text(encoding="utf-8")
    if path.endswith(".json"):
        data = json.loads(text)
        if isinstance(data, list):
            return DescriptorLexicon(tuple(data))
        return DescriptorLexicon(
            tuple(data["descriptors"]),
            tuple(data.get("positive", DescriptorLexicon().positive_subset)),
        )
    words = tuple(w.strip().lower() for w in text.splitlines() if w.strip() and not w.startswith("#"))
    return DescriptorLexicon(words)


@main.command()
@click.option("--logs", "logs_dir", type=click.Path(), required=True)
@click.option("--report", "report_path", type=click.Path(dir_okay=False), required=True)
@click.option("--lexicon", type=click.Path(dir_okay=False), help="Descriptor list (.txt or .json).")
@click.option("--config", "config_path", type=click.Path(dir_okay=False),
              help="JSON overrides: patterns, reputation_cutoff, inclusion_range, tier_size, early_missions.")
@click.option("--tsv", is_flag=True, help="Write tab-separated tables instead of CSV.")
def analyze(logs_dir: str, report_path: str, lexicon: Optional[str], config_path: Optional[str], tsv: bool) -> None:
    """Compute every metric over a directory of game logs."""
    root = Path(logs_dir)
    try:
        files = sorted(root.rglob("game_*.jsonl")) if root.is_dir() else None
        if files is None:
            raise OSError(f"{root} is not a readable directory")
        logs = [load_log(f) for f in files]
        lex = _lexicon(lexicon)
    except (OSError, LogError, ValueError, KeyError) as exc:
        raise click.ClickException(str(exc))
    if not logs:
        click.echo(f"warning: no game logs under {root}; writing an empty report", err=True)
    overrides = _load_json(config_path)
    kwargs: dict[str, Any] = {}
    if lex is not None:
        kwargs["lexicon"] = lex
    if "patterns" in overrides:
        kwargs["patterns"] = ReferencePatternSet(tuple(overrides["patterns"]))
    for key in ("reputation_cutoff", "tier_size"):
        if key in overrides:
            kwargs[key] = overrides[key]
    for key in ("inclusion_range", "early_missions"):
        if key in overrides:
            kwargs[key] = tuple(overrides[key])
    report = render_report(logs, AnalysisConfig(**kwargs))
    written = report.write(report_path, delimiter="\t" if tsv else ",")
    click.echo(f"report: {written[0]} (+{len(written) - 1} tables)")


@main.command()
@click.option("--log", "log_path", type=click.Path(dir_okay=False), required=True)
@click.option("--mission", type=int, default=None, help="Show only this mission (1-5).")
def replay(log_path: str, mission: Optional[int]) -> None:
    """Print a phase-by-phase text rendering of a game log."""
    try:
        log = load_log(log_path)
    except (OSError, LogError) as exc:
        raise click.ClickException(str(exc))
    if mission is not None:
        played = {e["mission"] for e in log.of_type("mission_result", "proposal")}
        if not 1 <= mission <= 5 or mission not in played:
            raise click.UsageError(f"mission {mission} was not played in this game (played: {sorted(played)})")
    click.echo(render_replay(log, mission), nl=False)


if __name__ == "__main__":  # pragma: no cover
    main()
