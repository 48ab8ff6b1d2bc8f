"""Game runner, tournament presets, and game log persistence."""

import json
from collections import Counter

import pytest

from avalonsim import engine as eng
from avalonsim.agents import (
    Agent,
    AssassinGuess,
    DecisionKind,
    HonestGoodBot,
    NaiveEvilBot,
    ParseFailure,
    RolePolicyAgent,
    scripted_roster,
)
from avalonsim.engine import Alignment, Phase, Role, VictoryPath
from avalonsim.gamelog import (
    LogMigrationError,
    LogParseError,
    load_log,
    loads_log,
    persist_log,
    replay,
)
from avalonsim.gateway import ReasoningEffort
from avalonsim.tournament import MAX_REPROMPTS, PRESETS, DatasetPreset, get_preset, run_game, run_tournament

from conftest import FIXTURES, record_roster


def play(n=5, seed=0, kind="scripted", **kw):
    names = eng.player_names(n)
    return run_game(eng.build_config(n), scripted_roster(names, kind, seed), seed=seed, **kw)


# ── single games ──────────────────────────────────────────────────────────────


@pytest.mark.parametrize("n", range(5, 11))
@pytest.mark.parametrize("kind", ["scripted", "sleeper", "random"])
def test_games_finish_for_every_size(n, kind):
    log = play(n, seed=n, kind=kind)
    assert not log.aborted and log.outcome is not None
    assert log.final_state.phase is Phase.ENDED
    assert Counter(log.header["roles"]) == Counter(r.value for r in eng.build_config(n).roles)


def test_forced_three_fails():
    names = eng.player_names(5)
    roles = (Role.MERLIN, Role.ASSASSIN, Role.LOYAL_SERVANT, Role.MINION, Role.LOYAL_SERVANT)
    agents = {n: RolePolicyAgent(HonestGoodBot(i, trusting=True), NaiveEvilBot(i)) for i, n in enumerate(names)}
    log = run_game(eng.build_config(5), agents, seed=1, roles=roles)
    assert log.outcome.winner is Alignment.EVIL and log.outcome.via is VictoryPath.THREE_FAILS
    assert [e["result"] for e in log.of_type("mission_result")] == ["fail"] * 3
    assert not list(log.of_type("assassination"))


def test_discussion_one_message_per_player_from_leader():
    log = play(7, seed=11)
    by_round = {}
    for e in log.of_type("discussion"):
        by_round.setdefault((e["mission"], e["attempt"]), []).append(e["player"])
    proposals = {(e["mission"], e["attempt"]): e["leader"] for e in log.of_type("proposal")}
    assert set(by_round) == set(proposals)
    names = log.roster
    for key, speakers in by_round.items():
        start = names.index(proposals[key])
        assert speakers == [names[(start + k) % 7] for k in range(7)]


def test_good_mission_cards_are_automatic():
    log = play(5, seed=4)
    roles = log.roles
    for e in log.of_type("mission_action"):
        if not roles[e["player"]].is_evil:
            assert e["action"] == "success" and e["auto"] is True


def test_fifth_attempt_in_log_is_auto_approved():
    for seed in range(60):
        log = play(5, seed=seed, kind="random")
        for e in log.of_type("vote_result"):
            if e["attempt"] == 5:
                assert e["approved"] and (e["auto_approved"] or e["approvals"] >= 3)
                return
    pytest.skip("no game reached a fifth attempt")


# ── determinism and persistence ───────────────────────────────────────────────


def test_same_seed_same_bytes():
    assert play(5, seed=9).dumps() == play(5, seed=9).dumps()
    assert play(5, seed=9).dumps() != play(5, seed=10).dumps()


def test_byte_round_trip(tmp_path):
    log = play(8, seed=2)
    path = persist_log(log, tmp_path / "g.jsonl")
    loaded = load_log(path)
    assert loaded.dumps().encode() == path.read_bytes()
    assert loaded == log


@pytest.mark.parametrize("n", range(5, 11))
def test_replay_reproduces_outcome(n):
    for seed in range(5):
        log = play(n, seed=seed, kind="sleeper")
        final = replay(loads_log(log.dumps()))[-1]
        assert final == log.final_state
        assert final.outcome == log.outcome


def test_truncated_log_reports_offset(tmp_path):
    data = play(5, seed=1).dumps().encode()
    cut = data[: len(data) // 2]
    with pytest.raises(LogParseError) as info:
        loads_log(cut)
    # a half-written final line is malformed JSON; its offset lies inside the file
    assert 0 < info.value.offset <= len(cut)
    whole_lines = data[: data.rfind(b"\n", 0, len(data) // 2) + 1]
    with pytest.raises(LogParseError, match="truncated") as info:
        loads_log(whole_lines)
    assert info.value.offset == len(whole_lines)


def test_malformed_line_offset():
    lines = play(5, seed=1).dumps().encode().splitlines(keepends=True)
    broken = lines[0] + lines[1] + b'{"type": oops}\n' + b"".join(lines[2:])
    with pytest.raises(LogParseError) as info:
        loads_log(broken)
    assert info.value.offset == len(lines[0]) + len(lines[1]) + len('{"type": ')


def test_old_schema_raises_migration_error():
    with pytest.raises(LogMigrationError):
        load_log(FIXTURES / "game_v0.jsonl")


# ── retry and fallback ────────────────────────────────────────────────────────


class BadVoter(Agent):
    """Fails every vote; everything else delegates."""

    kind = "bad_voter"

    def __init__(self, inner):
        self.inner = inner
        self.notices = []

    def decide(self, view, kind):
        if DecisionKind(kind) is DecisionKind.VOTE:
            self.notices.append(view.retry_notice)
            raise ParseFailure("no JSON object with a 'vote' field found", trace={"raw": "hmm"})
        return self.inner.decide(view, kind)


class Crasher(Agent):
    kind = "crasher"

    def decide(self, view, kind):
        raise RuntimeError("boom")


def test_reprompt_then_fallback():
    names = eng.player_names(5)
    agents = scripted_roster(names, "scripted", 0)
    bad = BadVoter(agents["Charlie"])
    agents["Charlie"] = bad
    log = run_game(eng.build_config(5), agents, seed=0)
    assert not log.aborted
    votes = [e for e in log.of_type("vote") if e["player"] == "Charlie"]
    assert votes and all(v["vote"] == "approve" for v in votes)
    anomalies = [e for e in log.of_type("anomaly") if e["player"] == "Charlie"]
    per_vote = 1 + MAX_REPROMPTS
    assert len([a for a in anomalies if a["kind"] == "decision_failure"]) == per_vote * len(votes)
    assert len([a for a in anomalies if a["kind"] == "fallback"]) == len(votes)
    assert anomalies[0]["trace"] == {"raw": "hmm"}
    reason = "no JSON object with a 'vote' field found"
    assert bad.notices[:3] == [None, reason, reason]


def test_crash_aborts_game_with_log(tmp_path):
    names = eng.player_names(5)
    agents = scripted_roster(names, "scripted", 0)
    agents["Bob"] = Crasher()
    log = run_game(eng.build_config(5), agents, seed=0)
    assert log.aborted and log.outcome is None
    assert any(e["kind"] == "agent_crash" for e in log.of_type("anomaly"))
    loaded = load_log(persist_log(log, tmp_path / "a.jsonl"))
    assert loaded.aborted


def test_illegal_assassination_guess_falls_back():
    class EvilGuesser(Agent):
        kind = "evil_guesser"

        def __init__(self, inner):
            self.inner = inner

        def decide(self, view, kind):
            if DecisionKind(kind) is DecisionKind.ASSASSINATE:
                return AssassinGuess(view.name, "myself")
            return self.inner.decide(view, kind)

    for seed in range(40):
        names = eng.player_names(5)
        agents = {n: EvilGuesser(RolePolicyAgent(HonestGoodBot(i, trusting=True), HonestGoodBot(i)))
                  for i, n in enumerate(names)}
        log = run_game(eng.build_config(5), agents, seed=seed)
        shot = list(log.of_type("assassination"))
        if shot:
            state = log.final_state
            assert shot[0]["guess"] == names[state.good_seats()[0]]
            assert any(e["kind"] == "fallback" and e["decision"] == "assassinate" for e in log.of_type("anomaly"))
            return
    pytest.fail("no game reached the assassination")


# ── presets and tournaments ───────────────────────────────────────────────────


def test_preset_cardinalities():
    a, b, c, d = (PRESETS[k] for k in "ABCD")
    assert len(a.schedule()) == 50 and {n for _, n, _ in a.schedule()} == {5} and a.memory
    assert [n for _, n, _ in b.schedule()] == [n for n in range(5, 11) for _ in range(10)] and b.memory
    assert c.schedule() == b.schedule() and not c.memory
    assert [e for _, _, e in d.schedule()] == [e for e in ReasoningEffort for _ in range(6)] and d.memory
    assert [gid for gid, _, _ in d.schedule()] == list(range(1, 19))
    with pytest.raises(ValueError):
        get_preset("Z")


def test_per_game_seed_and_effort_recorded():
    logs = run_tournament("D", lambda names, gid, e: scripted_roster(names, "scripted", gid), 100)
    assert [l.header["seed"] for l in logs] == list(range(100, 118))
    assert [l.header["effort"] for l in logs] == ["low"] * 6 + ["medium"] * 6 + ["high"] * 6


def test_memory_contexts_follow_window():
    preset = DatasetPreset("m10", 10, (5,), True, (ReasoningEffort.LOW,))
    seen = {}

    def factory(names, game_id, effort):
        wrapped, views = record_roster(scripted_roster(names, "scripted", game_id))
        seen[game_id] = views
        return wrapped

    run_tournament(preset, factory, 0)
    for k, views in seen.items():
        for view, _ in views:
            ctx = view.memory_context
            assert len(ctx.self_assessments) == min(k - 1, 3)
            for target, items in ctx.observations_by_target.items():
                assert [g for g, _, _ in items] == list(range(1, k))


def test_no_memory_preset_gives_empty_contexts():
    preset = DatasetPreset("C-small", 12, (5, 6, 7, 8, 9, 10), False, (ReasoningEffort.LOW,))
    seen = []

    def factory(names, game_id, effort):
        wrapped, views = record_roster(scripted_roster(names, "scripted", game_id))
        seen.append(views)
        return wrapped

    logs = run_tournament(preset, factory, 0, workers=3)
    assert [l.game_id for l in logs] == list(range(1, 13))
    assert all(not list(l.of_type("reflection")) for l in logs)
    for views in seen:
        for view, _ in views:
            assert view.memory_context is None


def test_parallel_no_memory_run_matches_serial():
    preset = DatasetPreset("C-small", 6, (5, 6, 7), False, (ReasoningEffort.LOW,))

    def factory(names, gid, e):
        return scripted_roster(names, "sleeper", gid)

    serial = [l.dumps() for l in run_tournament(preset, factory, 5)]
    parallel = [l.dumps() for l in run_tournament(preset, factory, 5, workers=4)]
    assert serial == parallel


class Stop(Exception):
    pass


def test_resume_after_kill(tmp_path):
    def factory(names, gid, e):
        return scripted_roster(names, "scripted", gid)

    def kill_after_30(log):
        if log.game_id == 30:
            raise Stop

    with pytest.raises(Stop):
        run_tournament("A", factory, 0, out_dir=tmp_path, on_game=kill_after_30)
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert sorted(int(k) for k in manifest["games"]) == list(range(1, 31))

    played = []

    def counting(names, gid, e):
        played.append(gid)
        return factory(names, gid, e)

    logs = run_tournament("A", counting, 0, out_dir=tmp_path)
    assert played == list(range(31, 51))
    assert len(logs) == 50

    fresh = run_tournament("A", factory, 0, out_dir=tmp_path / "fresh")
    assert [l.dumps() for l in logs] == [l.dumps() for l in fresh]


def test_resume_drops_reflections_of_unfinished_game(tmp_path):
    from avalonsim.memory import MemoryStore

    def factory(names, gid, e):
        return scripted_roster(names, "scripted", gid)

    def kill_after_3(log):
        if log.game_id == 3:
            raise Stop

    with pytest.raises(Stop):
        run_tournament("A", factory, 0, out_dir=tmp_path, on_game=kill_after_3)
    # game 3's reflections reached memory.jsonl but its log was never marked complete
    assert {r.game_id for r in MemoryStore.load(tmp_path / "memory.jsonl").records} == {1, 2, 3}
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    manifest["games"].pop("3")
    (tmp_path / "manifest.json").write_text(json.dumps(manifest))
    logs = run_tournament("A", factory, 0, out_dir=tmp_path)
    store = MemoryStore.load(tmp_path / "memory.jsonl")
    assert len(store) == 250 and len(logs) == 50


def test_resume_refuses_other_tournament(tmp_path):
    preset = DatasetPreset("A", 2, (5,), True, (ReasoningEffort.LOW,))
    run_tournament(preset, lambda n, g, e: scripted_roster(n, "scripted", g), 0, out_dir=tmp_path)
    with pytest.raises(ValueError):
        run_tournament(preset, lambda n, g, e: scripted_roster(n, "scripted", g), 1, out_dir=tmp_path)
