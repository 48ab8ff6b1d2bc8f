"""Single games and multi-game tournaments with complete logs."""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, is_dataclass
from pathlib import Path
from typing import Any, Callable, Mapping, Optional, Sequence

from . import engine as eng
from .agents import (
    Agent,
    AgentFailure,
    AgentView,
    AssassinGuess,
    DecisionKind,
    DiscussionMessage,
    MissionAction,
    PublicMission,
    PublicProposal,
    Reflection,
    Statement,
    TeamProposal,
    VoteDecision,
    render_role_brief,
)
from .engine import GameConfig, MissionCard, Phase, Role, Vote
from .gamelog import GameLog, load_log, persist_log
from .gateway import ReasoningEffort
from .memory import MemoryStore, Observation, ReflectionRecord, context_for

logger = logging.getLogger(__name__)

MAX_REPROMPTS = 2
MANIFEST_NAME = "manifest.json"
MEMORY_FILE = "memory.jsonl"


class GameAborted(Exception):
    pass


@dataclass(frozen=True)
class DatasetPreset:
    id: str
    games: int
    player_counts: tuple[int, ...]
    memory: bool
    efforts: tuple[ReasoningEffort, ...]

    def schedule(self) -> list[tuple[int, int, ReasoningEffort]]:
        """(game_id, player_count, effort) for every game, in play order.

        Player counts and effort levels are played in equal consecutive blocks.
        """
        blocks = [(n, e) for n in self.player_counts for e in self.efforts]
        per_block, extra = divmod(self.games, len(blocks))
        if extra:
            raise ValueError(f"preset {self.id}: {self.games} games do not split into {len(blocks)} blocks")
        out = []
        for n, effort in blocks:
            for _ in range(per_block):
                out.append((len(out) + 1, n, effort))
        return out


_L, _M, _H = ReasoningEffort.LOW, ReasoningEffort.MEDIUM, ReasoningEffort.HIGH
PRESETS: dict[str, DatasetPreset] = {
    "A": DatasetPreset("A", 50, (5,), True, (_L,)),
    "B": DatasetPreset("B", 60, (5, 6, 7, 8, 9, 10), True, (_L,)),
    "C": DatasetPreset("C", 60, (5, 6, 7, 8, 9, 10), False, (_L,)),
    "D": DatasetPreset("D", 18, (5,), True, (_L, _M, _H)),
}


def get_preset(preset_id: str) -> DatasetPreset:
    try:
        return PRESETS[preset_id.upper()]
    except KeyError:
        raise ValueError(f"unknown preset {preset_id!r}; choose from {', '.join(PRESETS)}") from None


def _plain(payload) -> dict[str, Any]:
    data = asdict(payload) if is_dataclass(payload) else dict(payload)
    data.pop("trace", None)
    for k, v in list(data.items()):
        if isinstance(v, (Vote, MissionCard)):
            data[k] = v.value
        elif isinstance(v, tuple):
            data[k] = list(v)
    return data


class GameRunner:
    """Plays one game to completion and records every event."""

    def __init__(
        self,
        config: GameConfig,
        agents: Mapping[str, Agent],
        seed: int,
        *,
        game_id: int = 1,
        tournament_id: str = "single",
        memory: Optional[MemoryStore] = None,
        effort: ReasoningEffort = ReasoningEffort.LOW,
        roles: Optional[Sequence[Role]] = None,
        first_leader: int = 0,
        preset: Optional[str] = None,
        extra_header: Optional[Mapping[str, Any]] = None,
    ):
        self.names = tuple(agents)
        if len(self.names) != config.player_count:
            raise ValueError(f"{len(self.names)} agents for a {config.player_count}-player game")
        self.config = config
        self.agents = dict(agents)
        self.seed = seed
        self.game_id = game_id
        self.tournament_id = tournament_id
        self.memory = memory
        self.effort = ReasoningEffort(effort)
        roles = tuple(roles) if roles is not None else eng.assign_roles(config, seed)
        self.state = eng.new_game(config, roles, first_leader)
        self.knowledge = eng.night_knowledge(roles)
        self.briefs = tuple(
            render_role_brief(r, k, self.names) for r, k in zip(roles, self.knowledge)
        )
        self.contexts = {
            n: context_for(memory, n, game_id, tournament_id) if memory is not None else None
            for n in self.names
        }
        self.discussion: list[DiscussionMessage] = []
        self.conclave_log: list[DiscussionMessage] = []
        self.log = GameLog(
            header={
                "tournament_id": tournament_id,
                "game_id": game_id,
                "seed": seed,
                "preset": preset,
                "player_count": config.player_count,
                "roster": list(self.names),
                "roles": [r.value for r in roles],
                "first_leader": first_leader,
                "memory": memory is not None,
                "effort": self.effort.value,
                "agents": {n: a.kind for n, a in self.agents.items()},
                **dict(extra_header or {}),
            }
        )

    # -- views ---------------------------------------------------------

    def view(self, seat: int, **extra: Any) -> AgentView:
        s = self.state
        names = self.names
        proposals = [
            PublicProposal(
                mission=p.mission,
                attempt=p.attempt,
                leader=names[p.leader],
                team=tuple(names[i] for i in p.team),
                reasoning=p.reasoning,
                votes={names[i]: v.value for i, v in enumerate(p.votes)},
                approved=p.approved,
                auto_approved=p.auto_approved,
            )
            for p in s.proposals
        ]
        current = None
        if s.pending is not None and s.phase in (Phase.DISCUSSION, Phase.VOTE):
            current = tuple(names[i] for i in s.pending.team)
            proposals.append(
                PublicProposal(s.pending.mission, s.pending.attempt, names[s.pending.leader], current,
                               s.pending.reasoning)
            )
        missions = tuple(
            PublicMission(m.mission, tuple(names[i] for i in m.team), m.fail_count, m.result.value)
            for m in s.missions
        )
        role = s.roles[seat]
        return AgentView(
            game_id=self.game_id,
            name=names[seat],
            seat=seat,
            roster=names,
            role=role,
            knowledge=self.knowledge[seat],
            role_brief=self.briefs[seat],
            mission=min(s.mission, len(self.config.mission_sizes)),
            attempt=s.attempt,
            leader=names[s.leader],
            successes=s.successes,
            fails=s.fails,
            team_size=self.config.team_size(min(s.mission, 5)),
            proposals=tuple(proposals),
            missions=missions,
            discussion=tuple(self.discussion),
            conclave=tuple(self.conclave_log) if role.is_evil else (),
            current_team=current,
            memory_context=self.contexts[names[seat]],
            reasoning_effort=self.effort,
            **extra,
        )

    # -- decisions -----------------------------------------------------

    def ask(self, seat: int, kind: DecisionKind, view: AgentView,
            validate: Optional[Callable[[Any], None]] = None,
            fallback: Optional[Callable[[], Any]] = None):
        """Ask an agent, re-prompting on bad output, then fall back to a legal default."""
        name = self.names[seat]
        agent = self.agents[name]
        notice = None
        for attempt in range(1 + MAX_REPROMPTS):
            try:
                payload = agent.decide(view.with_notice(notice), kind)
                if validate is not None:
                    validate(payload)
                return payload
            except AgentFailure as exc:
                notice = str(exc)
                self.log.emit("anomaly", kind="decision_failure", decision=kind.value, player=name,
                              attempt=attempt + 1, reason=notice, trace=exc.trace)
            except Exception as exc:
                self.log.emit("anomaly", kind="agent_crash", decision=kind.value, player=name,
                              reason=f"{type(exc).__name__}: {exc}")
                raise GameAborted(f"{name} crashed during {kind.value}") from exc
        if fallback is None:
            raise GameAborted(f"{name} gave no usable {kind.value} decision")
        payload = fallback()
        self.log.emit("anomaly", kind="fallback", decision=kind.value, player=name, payload=_plain(payload))
        return payload

    def _trace(self, payload) -> dict[str, Any]:
        trace = getattr(payload, "trace", None)
        return {"trace": trace} if trace else {}

    # -- phases --------------------------------------------------------

    def _proposal(self) -> None:
        s = self.state
        leader = s.leader
        size = self.config.team_size(s.mission)

        def validate(p: TeamProposal) -> None:
            if len(p.team) != size or len(set(p.team)) != size:
                raise AgentFailure(f"team must name exactly {size} different players")

        def fallback() -> TeamProposal:
            n = self.config.player_count
            return TeamProposal(tuple(self.names[(leader + k) % n] for k in range(size)), "fallback")

        p = self.ask(leader, DecisionKind.PROPOSE, self.view(leader), validate, fallback)
        seats = [self.names.index(n) for n in p.team]
        self.state = eng.propose_team(s, seats, p.reasoning)
        self.log.emit("proposal", mission=s.mission, attempt=s.attempt, leader=self.names[leader],
                      team=[self.names[i] for i in self.state.pending.team], reasoning=p.reasoning,
                      **self._trace(p))

    def _discussion(self) -> None:
        s = self.state
        n = self.config.player_count
        for k in range(n):
            seat = (s.leader + k) % n
            stmt = self.ask(seat, DecisionKind.DISCUSS, self.view(seat),
                            fallback=lambda: Statement("(no comment)"))
            msg = DiscussionMessage(self.names[seat], s.mission, s.attempt, stmt.text)
            self.discussion.append(msg)
            self.log.emit("discussion", mission=s.mission, attempt=s.attempt, player=msg.speaker,
                          text=msg.text, **self._trace(stmt))
        self.state = eng.close_discussion(self.state)

    def _vote(self) -> None:
        s = self.state
        views = [self.view(seat) for seat in range(self.config.player_count)]
        ballot: dict[int, Vote] = {}
        for seat, view in enumerate(views):
            d = self.ask(seat, DecisionKind.VOTE, view,
                         fallback=lambda: VoteDecision(Vote.APPROVE, "fallback"))
            ballot[seat] = d.vote
            self.log.emit("vote", mission=s.mission, attempt=s.attempt, player=self.names[seat],
                          vote=d.vote.value, comment=d.comment, **self._trace(d))
        self.state = eng.resolve_vote(s, ballot)
        record = self.state.proposals[-1]
        self.log.emit("vote_result", mission=s.mission, attempt=s.attempt, approvals=record.approve_count,
                      approved=record.approved, auto_approved=record.auto_approved)

    def _mission(self) -> None:
        s = self.state
        actions: dict[int, MissionCard] = {}
        for seat in s.pending.team:
            name = self.names[seat]
            if not s.roles[seat].is_evil:
                actions[seat] = MissionCard.SUCCESS
                self.log.emit("mission_action", mission=s.mission, player=name, action="success",
                              auto=True)
                continue
            a = self.ask(seat, DecisionKind.MISSION, self.view(seat),
                         fallback=lambda: MissionAction(MissionCard.SUCCESS, "fallback"))
            actions[seat] = a.action
            self.log.emit("mission_action", mission=s.mission, player=name, action=a.action.value,
                          reasoning=a.reasoning, auto=False, **self._trace(a))
        self.state = eng.resolve_mission(s, actions)
        m = self.state.missions[-1]
        self.log.emit("mission_result", mission=m.mission, team=[self.names[i] for i in m.team],
                      fail_count=m.fail_count, result=m.result.value)

    def _conclave_and_assassination(self) -> None:
        s = self.state
        for seat in s.evil_seats():
            view = self.view(seat, assassination_candidates=self._candidates(seat))
            stmt = self.ask(seat, DecisionKind.CONCLAVE, view, fallback=lambda: Statement("(no comment)"))
            msg = DiscussionMessage(self.names[seat], s.mission, 0, stmt.text)
            self.conclave_log.append(msg)
            self.log.emit("conclave", player=msg.speaker, text=msg.text, **self._trace(stmt))
        self.state = eng.begin_assassination(self.state)
        assassin = self.state.assassin

        def validate(g: AssassinGuess) -> None:
            try:
                eng.resolve_assassination(self.state, self.names.index(g.guess))
            except eng.IllegalGuess as exc:
                raise AgentFailure(str(exc)) from exc

        def fallback() -> AssassinGuess:
            return AssassinGuess(self.names[self.state.good_seats()[0]], "fallback")

        view = self.view(assassin, assassination_candidates=self._candidates(assassin))
        g = self.ask(assassin, DecisionKind.ASSASSINATE, view, validate, fallback)
        outcome = eng.resolve_assassination(self.state, self.names.index(g.guess))
        self.log.emit("assassination", player=self.names[assassin], guess=g.guess, reasoning=g.reasoning,
                      correct=outcome.via is eng.VictoryPath.ASSASSINATION, **self._trace(g))
        self.state = eng.finish(self.state, outcome)

    def _candidates(self, seat: int) -> tuple[str, ...]:
        known = self.knowledge[seat].evil_teammates
        return tuple(n for i, n in enumerate(self.names) if i != seat and i not in known)

    def _reflections(self) -> None:
        s = self.state
        revealed = {n: r for n, r in zip(self.names, s.roles)}
        o = s.outcome
        summary = f"{o.winner.value} won via {o.via.value}."
        for seat, name in enumerate(self.names):
            view = self.view(seat, revealed_roles=revealed, result_summary=summary)

            def fallback(name=name) -> Reflection:
                return Reflection(name, self.game_id, "", {t: "" for t in self.names if t != name})

            def validate(r: Reflection, name=name) -> None:
                missing = [t for t in self.names if t != name and t not in r.player_observations]
                if missing or name in r.player_observations:
                    raise AgentFailure(f"observations must cover exactly: {', '.join(t for t in self.names if t != name)}")

            r = self.ask(seat, DecisionKind.REFLECT, view, validate, fallback)
            record = ReflectionRecord(
                tournament_id=self.tournament_id,
                game_id=self.game_id,
                author=name,
                author_role=s.roles[seat],
                self_assessment=r.self_assessment,
                player_observations={
                    t: Observation(r.player_observations[t], revealed[t]) for t in self.names if t != name
                },
            )
            self.log.emit("reflection", record=record.to_dict(), **self._trace(r))
            self.memory.record(record)

    def run(self) -> GameLog:
        try:
            self.state = eng.end_night(self.state)
            while self.state.phase is not Phase.ENDED:
                phase = self.state.phase
                if phase is Phase.PROPOSAL:
                    self._proposal()
                    self._discussion()
                    self._vote()
                elif phase is Phase.MISSION:
                    self._mission()
                elif phase is Phase.EVIL_CONCLAVE:
                    self._conclave_and_assassination()
                else:  # pragma: no cover - every phase is handled above
                    raise RuntimeError(f"unexpected phase {phase}")
            self.log.outcome = self.state.outcome
            if self.memory is not None:
                self._reflections()
        except GameAborted as exc:
            logger.error("game %s aborted: %s", self.game_id, exc)
            self.log.aborted = True
            self.log.outcome = None
        self.log.final_state = self.state
        return self.log


def run_game(
    config: GameConfig,
    agents: Mapping[str, Agent],
    memory: Optional[MemoryStore] = None,
    seed: int = 0,
    **kwargs: Any,
) -> GameLog:
    """Play one game. ``agents`` maps player names (in seat order) to agents."""
    return GameRunner(config, agents, seed, memory=memory, **kwargs).run()


AgentFactory = Callable[[Sequence[str], int, ReasoningEffort], Mapping[str, Agent]]


def _game_path(out_dir: Path, game_id: int) -> Path:
    return out_dir / f"game_{game_id:03d}.jsonl"


def _read_manifest(out_dir: Path) -> dict[str, Any]:
    path = out_dir / MANIFEST_NAME
    if path.exists():
        return json.loads(path.read_text(encoding="utf-8"))
    return {}


def _write_manifest(out_dir: Path, manifest: dict[str, Any]) -> None:
    tmp = out_dir / (MANIFEST_NAME + ".tmp")
    tmp.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    tmp.replace(out_dir / MANIFEST_NAME)


def run_tournament(
    preset: DatasetPreset | str,
    agent_factory: AgentFactory,
    base_seed: int = 0,
    *,
    out_dir: str | Path | None = None,
    tournament_id: Optional[str] = None,
    workers: int = 1,
    on_game: Optional[Callable[[GameLog], None]] = None,
    max_observations: Optional[int] = None,
    extra_header: Optional[Mapping[str, Any]] = None,
) -> list[GameLog]:
    """Play a preset's full schedule.

    Game ``i`` (0-based) uses seed ``base_seed + i``. Memory presets share one
    store and run strictly in order; the no-memory preset may run games on
    ``workers`` threads. With ``out_dir``, each finished game is written out
    and recorded in the manifest, and a rerun skips games already listed.
    """
    if isinstance(preset, str):
        preset = get_preset(preset)
    tournament_id = tournament_id or f"{preset.id}-seed{base_seed}"
    out = Path(out_dir) if out_dir is not None else None
    manifest: dict[str, Any] = {}
    done: dict[int, str] = {}
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        manifest = _read_manifest(out)
        if manifest and (manifest.get("preset") != preset.id or manifest.get("base_seed") != base_seed):
            raise ValueError(f"{out} holds a different tournament ({manifest.get('preset')}, seed {manifest.get('base_seed')})")
        done = {int(k): v for k, v in manifest.get("games", {}).items()}
        manifest.update(
            preset=preset.id,
            base_seed=base_seed,
            tournament_id=tournament_id,
            total_games=preset.games,
            games={str(k): v for k, v in sorted(done.items())},
        )
        _write_manifest(out, manifest)

    store: Optional[MemoryStore] = None
    if preset.memory:
        if out is not None:
            store = MemoryStore(max_observations=max_observations)
            mem_path = out / MEMORY_FILE
            if mem_path.exists():
                # Drop reflections from a game that was interrupted before its log was written.
                for rec in MemoryStore.load(mem_path).records:
                    if rec.game_id in done:
                        store.record(rec)
            store.save(mem_path)
            store.path = mem_path
        else:
            store = MemoryStore(max_observations=max_observations)

    schedule = preset.schedule()

    def play(item: tuple[int, int, ReasoningEffort]) -> GameLog:
        game_id, n, effort = item
        names = eng.player_names(n)
        agents = agent_factory(names, game_id, effort)
        return run_game(
            eng.build_config(n),
            {name: agents[name] for name in names},
            memory=store if preset.memory else None,
            seed=base_seed + game_id - 1,
            game_id=game_id,
            tournament_id=tournament_id,
            effort=effort,
            preset=preset.id,
            extra_header=extra_header,
        )

    ran: dict[int, GameLog] = {}

    def finished(log: GameLog) -> None:
        ran[log.game_id] = log
        if out is not None:
            persist_log(log, _game_path(out, log.game_id))
            manifest["games"][str(log.game_id)] = "aborted" if log.aborted else "complete"
            _write_manifest(out, manifest)
        if on_game is not None:
            on_game(log)

    pending = [item for item in schedule if item[0] not in done]
    if preset.memory or workers <= 1:
        for item in pending:
            finished(play(item))
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for log in pool.map(play, pending):
                finished(log)

    return [
        ran[gid] if gid in ran else load_log(_game_path(out, gid))
        for gid, _, _ in schedule
    ]
