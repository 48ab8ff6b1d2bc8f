"""Avalon rules engine: role tables, night knowledge and the mission state machine.

Every transition function takes a :class:`GameState` and returns a new one;
states are frozen and never mutated in place.
"""

from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass, replace
from enum import Enum
from typing import Mapping, Optional, Sequence

MIN_PLAYERS = 5
MAX_PLAYERS = 10
MAX_REJECTIONS = 4
MISSIONS_TO_WIN = 3

ROSTER_NAMES: tuple[str, ...] = (
    "Alice", "Bob", "Charlie", "Diana", "Eve",
    "Frank", "Grace", "Heidi", "Ivan", "Judy",
)


class EngineError(Exception):
    """Base class for rule violations."""


class UnsupportedPlayerCount(EngineError, ValueError):
    pass


class PhaseError(EngineError):
    pass


class InvalidTeam(EngineError):
    pass


class IncompleteBallot(EngineError):
    pass


class IllegalAction(EngineError):
    pass


class IllegalGuess(EngineError):
    pass


class Alignment(str, Enum):
    GOOD = "Good"
    EVIL = "Evil"


class Role(str, Enum):
    MERLIN = "Merlin"
    PERCIVAL = "Percival"
    LOYAL_SERVANT = "LoyalServant"
    ASSASSIN = "Assassin"
    MORGANA = "Morgana"
    MORDRED = "Mordred"
    OBERON = "Oberon"
    MINION = "Minion"

    @property
    def alignment(self) -> Alignment:
        if self in (Role.MERLIN, Role.PERCIVAL, Role.LOYAL_SERVANT):
            return Alignment.GOOD
        return Alignment.EVIL

    @property
    def is_evil(self) -> bool:
        return self.alignment is Alignment.EVIL


class Phase(str, Enum):
    NIGHT = "Night"
    PROPOSAL = "Proposal"
    DISCUSSION = "Discussion"
    VOTE = "Vote"
    MISSION = "Mission"
    EVIL_CONCLAVE = "EvilConclave"
    ASSASSINATION = "Assassination"
    ENDED = "Ended"


class Vote(str, Enum):
    APPROVE = "approve"
    REJECT = "reject"


class MissionCard(str, Enum):
    SUCCESS = "success"
    FAIL = "fail"


class VictoryPath(str, Enum):
    THREE_SUCCESSES = "ThreeSuccesses"
    THREE_FAILS = "ThreeFails"
    ASSASSINATION = "Assassination"


_S, _M = Role.LOYAL_SERVANT, Role.MERLIN

# (roles, mission sizes, assassin designate) per player count.
_RULES: dict[int, tuple[tuple[Role, ...], tuple[int, ...], Role]] = {
    5: ((_M, _S, _S, Role.ASSASSIN, Role.MINION), (2, 3, 2, 3, 3), Role.ASSASSIN),
    6: ((_M, Role.PERCIVAL, _S, _S, Role.MORGANA, Role.MORDRED), (2, 3, 4, 3, 4), Role.MORDRED),
    7: (
        (_M, Role.PERCIVAL, _S, _S, Role.MORGANA, Role.MORDRED, Role.OBERON),
        (2, 3, 3, 4, 4),
        Role.MORGANA,
    ),
    8: (
        (_M, Role.PERCIVAL, _S, _S, _S, Role.MORGANA, Role.MORDRED, Role.ASSASSIN),
        (3, 4, 4, 5, 5),
        Role.ASSASSIN,
    ),
    9: (
        (_M, Role.PERCIVAL, _S, _S, _S, _S, Role.MORGANA, Role.MORDRED, Role.ASSASSIN),
        (3, 4, 4, 5, 5),
        Role.ASSASSIN,
    ),
    10: (
        (_M, Role.PERCIVAL, _S, _S, _S, _S, Role.MORGANA, Role.MORDRED, Role.OBERON, Role.ASSASSIN),
        (3, 4, 4, 5, 5),
        Role.ASSASSIN,
    ),
}


@dataclass(frozen=True)
class GameConfig:
    player_count: int
    roles: tuple[Role, ...]
    mission_sizes: tuple[int, ...]
    double_fail_missions: frozenset[int]
    assassin_designate: Role
    max_rejections: int = MAX_REJECTIONS

    def team_size(self, mission: int) -> int:
        return self.mission_sizes[mission - 1]

    @property
    def evil_count(self) -> int:
        return sum(r.is_evil for r in self.roles)


def build_config(player_count: int) -> GameConfig:
    """Rule table for ``player_count`` seats (5 to 10)."""
    if player_count not in _RULES:
        raise UnsupportedPlayerCount(
            f"player count {player_count} unsupported; expected {MIN_PLAYERS}..{MAX_PLAYERS}"
        )
    roles, sizes, designate = _RULES[player_count]
    return GameConfig(
        player_count=player_count,
        roles=roles,
        mission_sizes=sizes,
        double_fail_missions=frozenset({4}) if player_count >= 7 else frozenset(),
        assassin_designate=designate,
    )


def player_names(player_count: int) -> tuple[str, ...]:
    if not MIN_PLAYERS <= player_count <= MAX_PLAYERS:
        raise UnsupportedPlayerCount(f"player count {player_count} unsupported")
    return ROSTER_NAMES[:player_count]


def assign_roles(config: GameConfig, rng: random.Random | int) -> tuple[Role, ...]:
    """Uniformly shuffle the config's role multiset over seats.

    ``rng`` may be a seeded generator or an integer seed. The result is
    indexed by seat.
    """
    if not isinstance(rng, random.Random):
        rng = random.Random(rng)
    roles = list(config.roles)
    rng.shuffle(roles)
    return tuple(roles)


def fail_threshold(config: GameConfig, mission: int) -> int:
    if not 1 <= mission <= len(config.mission_sizes):
        raise ValueError(f"mission {mission} out of range")
    return 2 if mission in config.double_fail_missions else 1


@dataclass(frozen=True)
class NightKnowledge:
    owner: int
    known_evil: frozenset[int] = frozenset()
    evil_teammates: frozenset[int] = frozenset()
    merlin_candidates: frozenset[int] = frozenset()


def night_knowledge(roles: Sequence[Role]) -> tuple[NightKnowledge, ...]:
    evil = {i for i, r in enumerate(roles) if r.is_evil}
    connected_evil = {i for i in evil if roles[i] is not Role.OBERON}
    merlin_view = frozenset(i for i in evil if roles[i] is not Role.MORDRED)
    candidates = frozenset(i for i, r in enumerate(roles) if r in (Role.MERLIN, Role.MORGANA))

    out = []
    for seat, role in enumerate(roles):
        if role is Role.MERLIN:
            out.append(NightKnowledge(seat, known_evil=merlin_view))
        elif role is Role.PERCIVAL:
            out.append(NightKnowledge(seat, merlin_candidates=candidates))
        elif seat in connected_evil:
            out.append(NightKnowledge(seat, evil_teammates=frozenset(connected_evil - {seat})))
        else:
            out.append(NightKnowledge(seat))
    return tuple(out)


@dataclass(frozen=True)
class ProposalRecord:
    mission: int
    attempt: int
    leader: int
    team: tuple[int, ...]
    reasoning: str = ""
    votes: tuple[Vote, ...] = ()
    approved: bool = False
    auto_approved: bool = False

    @property
    def approve_count(self) -> int:
        return sum(v is Vote.APPROVE for v in self.votes)


@dataclass(frozen=True)
class MissionRecord:
    mission: int
    team: tuple[int, ...]
    actions: tuple[MissionCard, ...]
    fail_count: int
    succeeded: bool

    @property
    def result(self) -> MissionCard:
        return MissionCard.SUCCESS if self.succeeded else MissionCard.FAIL


@dataclass(frozen=True)
class GameOutcome:
    winner: Alignment
    via: VictoryPath
    merlin: int
    assassin_guess: Optional[int] = None


@dataclass(frozen=True)
class GameState:
    config: GameConfig
    roles: tuple[Role, ...]
    leader: int = 0
    rejection_streak: int = 0
    proposals: tuple[ProposalRecord, ...] = ()
    missions: tuple[MissionRecord, ...] = ()
    phase: Phase = Phase.NIGHT
    pending: Optional[ProposalRecord] = None
    outcome: Optional[GameOutcome] = None

    @property
    def mission(self) -> int:
        """1-based index of the mission currently being played."""
        return len(self.missions) + 1

    @property
    def attempt(self) -> int:
        return self.rejection_streak + 1

    @property
    def successes(self) -> int:
        return sum(m.succeeded for m in self.missions)

    @property
    def fails(self) -> int:
        return sum(not m.succeeded for m in self.missions)

    @property
    def merlin(self) -> int:
        return self.roles.index(Role.MERLIN)

    @property
    def assassin(self) -> int:
        return self.roles.index(self.config.assassin_designate)

    def alignment(self, seat: int) -> Alignment:
        return self.roles[seat].alignment

    def evil_seats(self) -> tuple[int, ...]:
        return tuple(i for i, r in enumerate(self.roles) if r.is_evil)

    def good_seats(self) -> tuple[int, ...]:
        return tuple(i for i, r in enumerate(self.roles) if not r.is_evil)


def _require(state: GameState, phase: Phase) -> None:
    if state.phase is not phase:
        raise PhaseError(f"expected phase {phase.value}, game is in {state.phase.value}")


def new_game(config: GameConfig, roles: Sequence[Role], first_leader: int = 0) -> GameState:
    roles = tuple(roles)
    if Counter(roles) != Counter(config.roles):
        raise ValueError("role assignment does not match the config's role set")
    if not 0 <= first_leader < config.player_count:
        raise ValueError("first leader out of range")
    return GameState(config=config, roles=roles, leader=first_leader, phase=Phase.NIGHT)


def end_night(state: GameState) -> GameState:
    _require(state, Phase.NIGHT)
    return replace(state, phase=Phase.PROPOSAL)


def propose_team(state: GameState, team: Sequence[int], reasoning: str = "") -> GameState:
    _require(state, Phase.PROPOSAL)
    raw = list(team)
    team = tuple(sorted(set(raw)))
    size = state.config.team_size(state.mission)
    if len(team) != size or len(team) != len(raw):
        raise InvalidTeam(f"mission {state.mission} needs {size} distinct players, got {raw}")
    if any(not 0 <= s < state.config.player_count for s in team):
        raise InvalidTeam(f"team {team} references unknown seats")
    pending = ProposalRecord(
        mission=state.mission,
        attempt=state.attempt,
        leader=state.leader,
        team=team,
        reasoning=reasoning,
    )
    return replace(state, phase=Phase.DISCUSSION, pending=pending)


def close_discussion(state: GameState) -> GameState:
    _require(state, Phase.DISCUSSION)
    return replace(state, phase=Phase.VOTE)


def _next_seat(state: GameState) -> int:
    return (state.leader + 1) % state.config.player_count


def resolve_vote(state: GameState, votes: Mapping[int, Vote] | Sequence[Vote]) -> GameState:
    """Apply a complete ballot, one vote per seat.

    A strict majority approves. The fifth attempt of a mission proceeds
    regardless of the ballot; those votes are still recorded.
    """
    _require(state, Phase.VOTE)
    n = state.config.player_count
    if isinstance(votes, Mapping):
        if set(votes) != set(range(n)):
            raise IncompleteBallot(f"ballot must hold exactly one vote per seat 0..{n - 1}")
        ballot = tuple(Vote(votes[i]) for i in range(n))
    else:
        ballot = tuple(Vote(v) for v in votes)
        if len(ballot) != n:
            raise IncompleteBallot(f"expected {n} votes, got {len(ballot)}")

    approvals = sum(v is Vote.APPROVE for v in ballot)
    majority = approvals * 2 > n
    auto = not majority and state.attempt > state.config.max_rejections
    record = replace(state.pending, votes=ballot, approved=majority or auto, auto_approved=auto)
    proposals = state.proposals + (record,)
    if record.approved:
        return replace(state, proposals=proposals, phase=Phase.MISSION, pending=record, rejection_streak=0)
    return replace(
        state,
        proposals=proposals,
        phase=Phase.PROPOSAL,
        pending=None,
        rejection_streak=state.rejection_streak + 1,
        leader=_next_seat(state),
    )


def resolve_mission(state: GameState, actions: Mapping[int, MissionCard]) -> GameState:
    _require(state, Phase.MISSION)
    team = state.pending.team
    if set(actions) != set(team):
        raise IllegalAction(f"mission actions must cover exactly the team {team}")
    cards = tuple(MissionCard(actions[s]) for s in team)
    for seat, card in zip(team, cards):
        if card is MissionCard.FAIL and not state.roles[seat].is_evil:
            raise IllegalAction(f"seat {seat} is Good and must play Success")
    fails = sum(c is MissionCard.FAIL for c in cards)
    record = MissionRecord(
        mission=state.mission,
        team=team,
        actions=cards,
        fail_count=fails,
        succeeded=fails < fail_threshold(state.config, state.mission),
    )
    state = replace(
        state,
        missions=state.missions + (record,),
        pending=None,
        leader=_next_seat(state),
        phase=Phase.PROPOSAL,
    )
    return check_victory(state)


def check_victory(state: GameState) -> GameState:
    """Move to Ended on three fails or to EvilConclave on three successes."""
    if state.fails >= MISSIONS_TO_WIN:
        outcome = GameOutcome(Alignment.EVIL, VictoryPath.THREE_FAILS, merlin=state.merlin)
        return replace(state, phase=Phase.ENDED, outcome=outcome)
    if state.successes >= MISSIONS_TO_WIN:
        return replace(state, phase=Phase.EVIL_CONCLAVE)
    return state


def begin_assassination(state: GameState) -> GameState:
    _require(state, Phase.EVIL_CONCLAVE)
    return replace(state, phase=Phase.ASSASSINATION)


def resolve_assassination(state: GameState, guess: int) -> GameOutcome:
    _require(state, Phase.ASSASSINATION)
    if not 0 <= guess < state.config.player_count:
        raise IllegalGuess(f"seat {guess} does not exist")
    if state.roles[guess].is_evil:
        raise IllegalGuess(f"seat {guess} is on the evil team; pick among good players")
    if guess == state.merlin:
        return GameOutcome(Alignment.EVIL, VictoryPath.ASSASSINATION, merlin=state.merlin, assassin_guess=guess)
    return GameOutcome(Alignment.GOOD, VictoryPath.THREE_SUCCESSES, merlin=state.merlin, assassin_guess=guess)


def finish(state: GameState, outcome: GameOutcome) -> GameState:
    return replace(state, phase=Phase.ENDED, outcome=outcome)
