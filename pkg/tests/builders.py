"""Hand-built logs and reflections plus brute-force oracles for the analysis tests.

The oracles deliberately avoid the package's own matching code: they
tokenize, slide windows, or re-derive teams from raw events.
"""

from __future__ import annotations

import random
import re

from avalonsim.engine import Role
from avalonsim.gamelog import GameLog
from avalonsim.memory import Observation, ReflectionRecord

FIVE = ("Alice", "Bob", "Charlie", "Diana", "Eve")
GOOD5 = (Role.MERLIN, Role.LOYAL_SERVANT, Role.LOYAL_SERVANT)


def reflection(game_id, author, observations, roles=None, self_text="", tournament="fx"):
    """``observations``: target -> text. ``roles``: target -> Role (default Loyal Servant)."""
    roles = roles or {}
    return ReflectionRecord(
        tournament_id=tournament,
        game_id=game_id,
        author=author,
        author_role=Role.LOYAL_SERVANT,
        self_assessment=self_text,
        player_observations={t: Observation(x, roles.get(t, Role.LOYAL_SERVANT)) for t, x in observations.items()},
    )


def bare_log(game_id, roles, *, effort="low", memory=True, names=FIVE, tournament="fx"):
    return GameLog(header={
        "tournament_id": tournament,
        "game_id": game_id,
        "seed": game_id,
        "preset": None,
        "player_count": len(names),
        "roster": list(names),
        "roles": [r.value for r in roles],
        "first_leader": 0,
        "memory": memory,
        "effort": effort,
        "agents": {},
    })


def add_round(log, mission, attempt, leader, team, approved, actions=None):
    """Append a proposal + vote result, and the mission if approved."""
    log.emit("proposal", mission=mission, attempt=attempt, leader=leader, team=list(team), reasoning="")
    log.emit("vote_result", mission=mission, attempt=attempt, approvals=3 if approved else 1,
             approved=approved, auto_approved=False)
    if approved and actions is not None:
        for p in team:
            log.emit("mission_action", mission=mission, player=p, action=actions.get(p, "success"),
                     auto=p not in actions)
        fails = sum(a == "fail" for a in actions.values())
        log.emit("mission_result", mission=mission, team=list(team), fail_count=fails,
                 result="fail" if fails else "success")


# ── oracles ───────────────────────────────────────────────────────────────────


def tokens(text):
    return [t.lower() for t in re.split(r"\W+", text) if t]


def oracle_descriptor_counts(reflections, words):
    out = {}
    for r in reflections:
        for target, obs in r.player_observations.items():
            toks = tokens(obs.text)
            for w in words:
                c = sum(1 for t in toks if t == w)
                if c:
                    out[(target, w)] = out.get((target, w), 0) + c
    return out


def oracle_role_table(reflections, words):
    out = {}
    for r in reflections:
        for target, obs in r.player_observations.items():
            if obs.target_role is None:
                continue
            toks = tokens(obs.text)
            for w in words:
                c = sum(1 for t in toks if t == w)
                if c:
                    key = (target, obs.target_role.alignment, w)
                    out[key] = out.get(key, 0) + c
    return out


def oracle_references(logs, patterns):
    hits = []
    for log in logs:
        for e in log.events:
            if e["type"] != "discussion":
                continue
            low = e["text"].lower()
            for p in patterns:
                found = any(low[i:i + len(p)] == p for i in range(len(low) - len(p) + 1))
                if found:
                    hits.append((log.game_id, e["player"], p))
    return hits


def oracle_sleeper(log, early=(1, 2)):
    """Exhaustive scan: re-derive approved teams from proposals and votes, then test every pass/fail pair."""
    roles = {n: Role(r) for n, r in zip(log.header["roster"], log.header["roles"])}
    proposals, approved = {}, {}
    for e in log.events:
        if e["type"] == "proposal":
            proposals[(e["mission"], e["attempt"])] = e["team"]
        elif e["type"] == "vote_result" and e["approved"]:
            approved[e["mission"]] = set(proposals[(e["mission"], e["attempt"])])
    evil_acts = [(e["player"], e["mission"], e["action"]) for e in log.events
                 if e["type"] == "mission_action" and roles[e["player"]].is_evil
                 and e["player"] in approved.get(e["mission"], ())]
    for _, m1, a1 in evil_acts:
        for _, m2, a2 in evil_acts:
            if a1 == "success" and m1 in early and a2 == "fail" and m2 > m1:
                return True
    return False


def oracle_inclusions(logs, game_range, high, low):
    """Recount tier members on approved teams from scratch."""
    lo, hi = game_range
    h = l = 0
    for log in logs:
        if not lo <= log.game_id <= hi:
            continue
        teams = {}
        for e in log.events:
            if e["type"] == "proposal":
                teams[(e["mission"], e["attempt"])] = e["team"]
            if e["type"] == "vote_result" and e["approved"]:
                for p in teams[(e["mission"], e["attempt"])]:
                    h += p in high
                    l += p in low
    return h, l


# ── random planted corpora ────────────────────────────────────────────────────

FILLER = ("played", "the", "mission", "well", "and", "voted", "late", "Bob's", "team", "often")
TRAPS = ("straightforwardly", "subtlety", "unsubtle", "quietly", "reliably", "cautiousness", "non-deceptive",
         "SUBTLE", "Quiet,", "(reliable)", "trust-worthy", "strategic.", "measured!")


def planted_corpus(seed, descriptors, n_reflections=30):
    rng = random.Random(seed)
    roles_pool = list(Role)
    out = []
    for i in range(n_reflections):
        author = rng.choice(FIVE)
        observations, roles = {}, {}
        for target in FIVE:
            if target == author:
                continue
            vocab = FILLER + TRAPS + tuple(descriptors) + tuple(w.upper() for w in descriptors)
            observations[target] = " ".join(rng.choice(vocab) for _ in range(rng.randint(0, 14)))
            roles[target] = rng.choice(roles_pool) if rng.random() > 0.05 else None
        # roughly 1 in 20 targets has no revealed role, which the role table must skip
        out.append(reflection(1 + i // 5, author, observations, roles))
    return out


def planted_discussion_logs(seed, patterns, games=4):
    rng = random.Random(seed)
    pieces = list(patterns) + ["tend to", "previously", "last", "game", "Last Game", "HISTORICALLY", "usual",
                               "tends", "to", "past", "games", "in", "track", "record", "I", "trust", "Alice"]
    logs = []
    for g in range(1, games + 1):
        log = bare_log(g, GOOD5 + (Role.ASSASSIN, Role.MINION))
        for k in range(rng.randint(1, 8)):
            text = " ".join(rng.choice(pieces) for _ in range(rng.randint(1, 12)))
            log.emit("discussion", mission=1, attempt=1, player=rng.choice(FIVE), text=text)
        logs.append(log)
    return logs


# ── fixtures planted with published counts ────────────────────────────────────


def spread(total, slots, rng):
    """Split ``total`` into ``slots`` non-negative parts."""
    cuts = sorted(rng.randint(0, total) for _ in range(slots - 1))
    return [b - a for a, b in zip([0] + cuts, cuts + [total])]


def descriptor_fixture(seed=0):
    """50 games of reflections where Charlie is called "subtle" 38 times in all."""
    rng = random.Random(seed)
    per_game = spread(38, 50, rng)
    authors = ("Alice", "Bob", "Diana", "Eve")
    out = []
    for g in range(1, 51):
        author = authors[g % 4]
        obs = {t: "steady and quiet" for t in FIVE if t != author}
        obs["Charlie"] = " ".join(["Subtle"] * per_game[g - 1]) + " though subtlety aside, straightforwardly odd"
        out.append(reflection(g, author, obs))
    return out


def alignment_fixture(seed=0):
    """Bob is "straightforward" 27 times in games where he was Good and never when Evil."""
    rng = random.Random(seed)
    good_games = [g for g in range(1, 51) if g % 3]
    evil_games = [g for g in range(1, 51) if not g % 3]
    out = []
    for g, k in zip(good_games, spread(27, len(good_games), rng)):
        text = "Straightforward. " * k + "Played it subtle once."
        out.append(reflection(g, "Alice", {"Bob": text, "Eve": "straightforward"}, {"Bob": Role.LOYAL_SERVANT}))
    for g in evil_games:
        out.append(reflection(g, "Alice", {"Bob": "subtle and deceptive, straightforwardly so"},
                              {"Bob": Role.ASSASSIN}))
    return out


REPUTATION_COUNTS = {"Alice": 76, "Diana": 63, "Charlie": 49, "Bob": 42, "Eve": 29}
POSITIVE = ("trustworthy", "straightforward", "solid", "safe", "reliable")


def reputation_fixture(seed=0):
    """Positive-word totals through game 20 equal the published counts; games 21-30 add more."""
    rng = random.Random(seed)
    parts = {n: spread(c, 20, rng) for n, c in REPUTATION_COUNTS.items()}
    records = []
    for g in range(1, 21):
        for author in FIVE:
            obs = {}
            for t in FIVE:
                if t == author:
                    continue
                # the first other player in seat order carries this target's whole share for the game
                if author == next(a for a in FIVE if a != t):
                    obs[t] = " ".join(rng.choice(POSITIVE) for _ in range(parts[t][g - 1])) + " and somewhat quiet"
                else:
                    obs[t] = "hard to read, reliably late"
            records.append(reflection(g, author, obs))
    for g in range(21, 31):
        for a in FIVE:
            records.append(reflection(g, a, {t: "reliable reliable safe" for t in FIVE if t != a}))
    return records


def _split_slots(sizes, h, l):
    """Per-mission (high, low) counts: at most 2 of each tier and at most one filler per team."""
    if not sizes:
        return [] if h == l == 0 else None
    size = sizes[0]
    for th in range(min(2, size, h), -1, -1):
        for tl in range(min(2, size - th, l), -1, -1):
            if size - th - tl > 1:
                continue
            rest = _split_slots(sizes[1:], h - th, l - tl)
            if rest is not None:
                return [(th, tl)] + rest
    return None


def inclusion_fixture(seed=0, high=("Alice", "Diana"), low=("Bob", "Eve")):
    """Games 21-50 whose approved teams hold 150 high-tier and 103 low-tier slots.

    Charlie (middle tier) is the only filler, so each game needs 8 or more
    tier slots. A rejected proposal full of high-tier players precedes
    every mission and must not count.
    """
    rng = random.Random(seed)
    h = [5] * 30
    for _ in range(10):  # move load between games, keeping the total at 150
        i, j = rng.randrange(30), rng.randrange(30)
        if i != j and h[i] < 6 and h[j] > 4:
            h[i] += 1
            h[j] -= 1
    fours = sorted(range(30), key=lambda k: (h[k] != 4, rng.random()))[:13]
    l = [4 if k in fours else 3 for k in range(30)]
    sizes = (2, 3, 2, 3, 3)
    logs = []
    for k, g in enumerate(range(21, 51)):
        log = bare_log(g, GOOD5 + (Role.ASSASSIN, Role.MINION))
        for m, (size, (th, tl)) in enumerate(zip(sizes, _split_slots(sizes, h[k], l[k])), 1):
            add_round(log, m, 1, "Charlie", list(high) + ["Charlie"][: size - 2], approved=False)
            team = list(high[:th]) + list(low[:tl]) + ["Charlie"][: size - th - tl]
            add_round(log, m, 2, team[0] if m % 2 else "Charlie", team, approved=True)
        logs.append(log)
    return logs


def sleeper_fixture():
    """18 five-player games: 6 per effort label, with 0, 5 and 4 sleeper games respectively."""
    roles = (Role.MERLIN, Role.LOYAL_SERVANT, Role.ASSASSIN, Role.LOYAL_SERVANT, Role.MINION)
    evil = ("Charlie", "Eve")
    logs = []

    def sleeper_game(g, effort):
        log = bare_log(g, roles, effort=effort)
        add_round(log, 1, 1, "Alice", ["Alice", "Charlie"], True, {"Charlie": "success"})
        add_round(log, 2, 1, "Bob", ["Bob", "Diana", "Eve"], True, {"Eve": "success"})
        add_round(log, 3, 1, "Charlie", ["Charlie", "Alice"], True, {"Charlie": "fail"})
        return log

    def honest_fail_game(g, effort):
        log = bare_log(g, roles, effort=effort)
        add_round(log, 1, 1, "Alice", ["Alice", "Charlie"], True, {"Charlie": "fail"})
        add_round(log, 2, 1, "Bob", ["Bob", "Eve", "Diana"], True, {"Eve": "fail"})
        add_round(log, 3, 1, "Charlie", ["Charlie", "Eve"], True, {"Charlie": "fail", "Eve": "fail"})
        return log

    def pass_but_never_fail(g, effort):
        log = bare_log(g, roles, effort=effort)
        add_round(log, 1, 1, "Alice", ["Alice", "Charlie"], True, {"Charlie": "success"})
        add_round(log, 2, 1, "Bob", ["Bob", "Diana", "Alice"], True, {})
        add_round(log, 3, 1, "Charlie", ["Alice", "Bob"], True, {})
        return log

    g = 0
    plan = {"low": [honest_fail_game] * 3 + [pass_but_never_fail] * 3,
            "medium": [sleeper_game] * 5 + [honest_fail_game],
            "high": [sleeper_game] * 4 + [pass_but_never_fail, honest_fail_game]}
    for effort, makers in plan.items():
        for make in makers:
            g += 1
            logs.append(make(g, effort))
    assert all(p in FIVE for p in evil)
    return logs
