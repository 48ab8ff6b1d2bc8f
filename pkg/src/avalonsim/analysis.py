"""Text and behavioural metrics computed from game logs.

All functions are pure: they read logs or reflection records and never
modify them.
"""

from __future__ import annotations

import csv
import io
import logging
import re
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

from .engine import ROSTER_NAMES, Alignment, VictoryPath
from .gamelog import GameLog
from .gateway import record_latency_stats
from .memory import ReflectionRecord

logger = logging.getLogger(__name__)

DEFAULT_DESCRIPTORS = (
    "straightforward", "subtle", "cautious", "trustworthy", "quiet",
    "aggressive", "reliable", "suspicious", "measured", "conservative",
    "transparent", "cooperative", "deceptive", "defensive", "strategic",
)
DEFAULT_POSITIVE = ("trustworthy", "straightforward", "solid", "safe", "reliable")
DEFAULT_PATTERNS = (
    "past games", "last game", "usually", "tends to", "historically", "track record", "previous",
)
EARLY_MISSIONS = (1, 2)


def _lowercase_unique(words: Iterable[str], what: str) -> tuple[str, ...]:
    words = tuple(words)
    if not words:
        raise ValueError(f"{what} must not be empty")
    for w in words:
        if w != w.lower() or not w.strip():
            raise ValueError(f"{what} entries must be non-blank lowercase, got {w!r}")
    dupes = [w for w, c in Counter(words).items() if c > 1]
    if dupes:
        raise ValueError(f"duplicate {what} entries: {dupes}")
    return words


@dataclass(frozen=True)
class DescriptorLexicon:
    descriptors: tuple[str, ...] = DEFAULT_DESCRIPTORS
    positive_subset: tuple[str, ...] = DEFAULT_POSITIVE

    def __post_init__(self):
        object.__setattr__(self, "descriptors", _lowercase_unique(self.descriptors, "descriptor"))
        object.__setattr__(self, "positive_subset", _lowercase_unique(self.positive_subset, "positive descriptor"))


@dataclass(frozen=True)
class ReferencePatternSet:
    patterns: tuple[str, ...] = DEFAULT_PATTERNS

    def __post_init__(self):
        object.__setattr__(self, "patterns", _lowercase_unique(self.patterns, "pattern"))


def reflections_from_logs(logs: Iterable[GameLog]) -> list[ReflectionRecord]:
    return [
        ReflectionRecord.from_dict(e["record"])
        for log in logs
        for e in log.of_type("reflection")
    ]


def count_word(text: str, word: str, whole_word: bool = True) -> int:
    """Case-insensitive occurrences of ``word`` in ``text``.

    ``whole_word=False`` counts raw substrings, so "straightforwardly"
    also counts toward "straightforward".
    """
    if whole_word:
        return len(re.findall(rf"(?<!\w){re.escape(word)}(?!\w)", text, flags=re.IGNORECASE))
    return text.lower().count(word.lower())


def count_descriptors(
    reflections: Iterable[ReflectionRecord],
    lexicon: DescriptorLexicon = DescriptorLexicon(),
    whole_word: bool = True,
) -> Counter:
    """Counter keyed by (target, descriptor) over per-target observation texts."""
    counts: Counter = Counter()
    for r in reflections:
        for target, obs in r.player_observations.items():
            for word in lexicon.descriptors:
                c = count_word(obs.text, word, whole_word)
                if c:
                    counts[(target, word)] += c
    return counts


def role_conditional_table(
    reflections: Iterable[ReflectionRecord],
    lexicon: DescriptorLexicon = DescriptorLexicon(),
    whole_word: bool = True,
) -> Counter:
    """Counter keyed by (target, target alignment that game, descriptor)."""
    counts: Counter = Counter()
    for r in reflections:
        for target, obs in r.player_observations.items():
            if obs.target_role is None:
                logger.warning("game %s: no revealed role for %s in %s's reflection; skipped",
                               r.game_id, target, r.author)
                continue
            side = obs.target_role.alignment
            for word in lexicon.descriptors:
                c = count_word(obs.text, word, whole_word)
                if c:
                    counts[(target, side, word)] += c
    return counts


def top_descriptors(counts: Mapping, target: str, k: int = 3) -> list[tuple[str, int]]:
    items = [(w, c) for (t, w), c in counts.items() if t == target and c]
    return sorted(items, key=lambda x: (-x[1], x[0]))[:k]


@dataclass(frozen=True)
class CrossGameReference:
    game_id: int
    speaker: str
    pattern: str
    message: str


def find_cross_game_references(
    logs: Iterable[GameLog], patterns: ReferencePatternSet = ReferencePatternSet()
) -> list[CrossGameReference]:
    """One hit per (discussion message, pattern) whose phrase the message contains."""
    hits = []
    for log in logs:
        for e in log.of_type("discussion"):
            lowered = e["text"].lower()
            for p in patterns.patterns:
                if p in lowered:
                    hits.append(CrossGameReference(log.game_id, e["player"], p, e["text"]))
    return hits


@dataclass(frozen=True)
class ReputationLedger:
    cutoff: int
    counts: dict[str, int] = field(default_factory=dict)
    high: tuple[str, ...] = ()
    low: tuple[str, ...] = ()
    middle: tuple[str, ...] = ()
    ambiguous: bool = False

    def tier_of(self, name: str) -> Optional[str]:
        if name in self.high:
            return "high"
        if name in self.low:
            return "low"
        return None


def _roster_order(names: Iterable[str]) -> list[str]:
    rank = {n: i for i, n in enumerate(ROSTER_NAMES)}
    return sorted(set(names), key=lambda n: (rank.get(n, len(rank)), n))


def reputation_ranking(
    reflections: Iterable[ReflectionRecord],
    cutoff: int,
    positive: Sequence[str] = DEFAULT_POSITIVE,
    tier_size: Optional[int] = None,
    roster: Optional[Sequence[str]] = None,
) -> ReputationLedger:
    """Cumulative positive-descriptor counts per target through game ``cutoff``.

    The top ``tier_size`` players form the high tier and the bottom
    ``tier_size`` the low tier. Five-player rosters default to 2; other
    sizes must pass ``tier_size``. Ties are broken by roster order and
    flagged as ambiguous when they straddle a tier boundary.
    """
    reflections = list(reflections)
    if cutoff <= 0:
        return ReputationLedger(cutoff=cutoff)
    if roster is None:
        roster = _roster_order(
            [r.author for r in reflections] + [t for r in reflections for t in r.player_observations]
        )
    roster = list(roster)
    if tier_size is None:
        if len(roster) != 5:
            raise ValueError(f"roster of {len(roster)} players needs an explicit tier_size")
        tier_size = 2
    if 2 * tier_size > len(roster):
        raise ValueError("tiers overlap: 2 * tier_size exceeds roster size")

    counts = {n: 0 for n in roster}
    for r in reflections:
        if r.game_id > cutoff:
            continue
        for target, obs in r.player_observations.items():
            if target in counts:
                counts[target] += sum(count_word(obs.text, w) for w in positive)

    order = sorted(roster, key=lambda n: (-counts[n], roster.index(n)))
    high = tuple(order[:tier_size])
    low = tuple(order[len(order) - tier_size:])
    middle = tuple(order[tier_size:len(order) - tier_size])
    values = [counts[n] for n in order]
    ambiguous = (
        (tier_size < len(order) and values[tier_size - 1] == values[tier_size])
        or values[len(order) - tier_size - 1] == values[len(order) - tier_size]
    )
    return ReputationLedger(cutoff, counts, high, low, middle, ambiguous)


@dataclass(frozen=True)
class InclusionStats:
    start: int
    end: int
    games: int
    high_total: int
    low_total: int
    high_from_others: int
    low_from_others: int

    @staticmethod
    def _pct(high: int, low: int) -> Optional[float]:
        return None if low == 0 else 100.0 * (high - low) / low

    @property
    def percent_difference(self) -> Optional[float]:
        return self._pct(self.high_total, self.low_total)

    @property
    def percent_difference_from_others(self) -> Optional[float]:
        return self._pct(self.high_from_others, self.low_from_others)

    def averages(self, divisor: Optional[int] = None) -> tuple[float, float]:
        """Per-game averages; ``divisor`` defaults to the number of games in range."""
        d = divisor if divisor is not None else self.games
        if not d:
            return (0.0, 0.0)
        return (self.high_total / d, self.low_total / d)

    @property
    def averages_with_cutoff_game(self) -> tuple[float, float]:
        """Averages dividing by the range length plus the cutoff game itself."""
        return self.averages(self.end - self.start + 2)


def team_inclusion_stats(
    logs: Iterable[GameLog], game_range: tuple[int, int], ledger: ReputationLedger
) -> InclusionStats:
    """Count tier members on approved mission teams for games in ``game_range`` (inclusive).

    The ``*_from_others`` totals skip a member's inclusion on a team they
    proposed themselves.
    """
    start, end = game_range
    if start > end:
        raise ValueError("empty game range")
    if start <= ledger.cutoff:
        raise ValueError(f"range {start}..{end} overlaps the tiering window (cutoff {ledger.cutoff})")
    high = low = high_o = low_o = 0
    games = 0
    for log in logs:
        if not start <= log.game_id <= end:
            continue
        games += 1
        pending: dict[tuple[int, int], dict] = {}
        for e in log.events:
            if e["type"] == "proposal":
                pending[(e["mission"], e["attempt"])] = e
            elif e["type"] == "vote_result" and e["approved"]:
                prop = pending[(e["mission"], e["attempt"])]
                for member in prop["team"]:
                    tier = ledger.tier_of(member)
                    own = member == prop["leader"]
                    if tier == "high":
                        high += 1
                        high_o += not own
                    elif tier == "low":
                        low += 1
                        low_o += not own
    return InclusionStats(start, end, games, high, low, high_o, low_o)


@dataclass(frozen=True)
class SleeperEvidence:
    detected: bool
    early_passes: tuple[tuple[str, int], ...] = ()
    later_fails: tuple[tuple[str, int], ...] = ()


def detect_sleeper(log: GameLog, early: Sequence[int] = EARLY_MISSIONS) -> SleeperEvidence:
    """An evil player passed an early mission and an evil player failed a later one."""
    roles = log.roles
    approved_teams: dict[int, set[str]] = {}
    for e in log.of_type("mission_result"):
        approved_teams[e["mission"]] = set(e["team"])
    passes, fails = [], []
    for e in log.of_type("mission_action"):
        player, mission = e["player"], e["mission"]
        if not roles[player].is_evil or player not in approved_teams.get(mission, ()):
            continue
        if e["action"] == "success" and mission in early:
            passes.append((player, mission))
        elif e["action"] == "fail":
            fails.append((player, mission))
    if not passes:
        return SleeperEvidence(False)
    first_pass = min(m for _, m in passes)
    later = tuple(f for f in fails if f[1] > first_pass)
    return SleeperEvidence(bool(later), tuple(passes), later)


@dataclass(frozen=True)
class Rate:
    hits: int
    total: int

    @property
    def fraction(self) -> Optional[float]:
        return self.hits / self.total if self.total else None

    def pct(self) -> str:
        f = self.fraction
        return "N/A" if f is None else f"{100 * f:.1f}%"


def _group(log: GameLog, key: str):
    return log.header.get(key)


def sleeper_rates(logs: Iterable[GameLog], key: str = "effort",
                  early: Sequence[int] = EARLY_MISSIONS) -> dict:
    out: dict = {}
    for log in logs:
        if log.aborted:
            continue
        g = _group(log, key)
        hit, total = out.get(g, (0, 0))
        out[g] = (hit + detect_sleeper(log, early).detected, total + 1)
    return {g: Rate(*v) for g, v in out.items()}


def assassination_accuracy(logs: Iterable[GameLog], key: Optional[str] = "effort") -> dict:
    """Correct guesses over attempts, per header group (``key=None``: one group)."""
    groups: dict = defaultdict(lambda: [0, 0])
    for log in logs:
        g = _group(log, key) if key else "all"
        cell = groups[g]
        for e in log.of_type("assassination"):
            cell[0] += bool(e["correct"])
            cell[1] += 1
    return {g: Rate(*v) for g, v in groups.items()}


@dataclass(frozen=True)
class WinRateRow:
    player_count: int
    games: int
    evil_wins: int
    good_wins: int
    assassinations: Rate

    @property
    def evil_pct(self) -> float:
        return 100.0 * self.evil_wins / self.games

    @property
    def good_pct(self) -> float:
        return 100.0 * self.good_wins / self.games


def win_rate_table(logs: Iterable[GameLog]) -> list[WinRateRow]:
    """Rows per player count; counts with no finished games are omitted."""
    by_n: dict[int, list[GameLog]] = defaultdict(list)
    for log in logs:
        if not log.aborted and log.outcome is not None:
            by_n[log.player_count].append(log)
    rows = []
    for n in sorted(by_n):
        group = by_n[n]
        evil = sum(l.outcome.winner is Alignment.EVIL for l in group)
        attempts = sum(1 for l in group for _ in l.of_type("assassination"))
        hits = sum(l.outcome.via is VictoryPath.ASSASSINATION for l in group)
        rows.append(WinRateRow(n, len(group), evil, len(group) - evil, Rate(hits, attempts)))
    return rows


@dataclass(frozen=True)
class MemoryEffectRow:
    player_count: int
    evil_pct_memory: Optional[float]
    evil_pct_no_memory: Optional[float]

    @property
    def diff_points(self) -> Optional[float]:
        if self.evil_pct_memory is None or self.evil_pct_no_memory is None:
            return None
        return self.evil_pct_memory - self.evil_pct_no_memory


def memory_effect_table(logs: Iterable[GameLog]) -> list[MemoryEffectRow]:
    """Evil win rate per player count, split by whether the game ran with memory."""
    logs = list(logs)
    with_mem = {r.player_count: r.evil_pct for r in win_rate_table(l for l in logs if l.header.get("memory"))}
    without = {r.player_count: r.evil_pct for r in win_rate_table(l for l in logs if not l.header.get("memory"))}
    return [
        MemoryEffectRow(n, with_mem.get(n), without.get(n))
        for n in sorted(set(with_mem) | set(without))
    ]


def latency_by_effort(logs: Iterable[GameLog]) -> dict[str, float]:
    traces = (e["trace"] for log in logs for e in log.events if isinstance(e.get("trace"), dict))
    return record_latency_stats(traces)


# -- report -----------------------------------------------------------------


@dataclass(frozen=True)
class AnalysisConfig:
    lexicon: DescriptorLexicon = DescriptorLexicon()
    patterns: ReferencePatternSet = ReferencePatternSet()
    reputation_cutoff: int = 20
    inclusion_range: tuple[int, int] = (21, 50)
    tier_size: Optional[int] = None
    early_missions: tuple[int, ...] = EARLY_MISSIONS
    whole_word: bool = True


@dataclass
class Report:
    text: str
    tables: dict[str, list[list[str]]]

    def write(self, path: str | Path, delimiter: str = ",") -> list[Path]:
        """Write the text report to ``path`` and one table file per section beside it."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.text, encoding="utf-8")
        written = [path]
        ext = "tsv" if delimiter == "\t" else "csv"
        for name, rows in self.tables.items():
            buf = io.StringIO()
            csv.writer(buf, delimiter=delimiter, lineterminator="\n").writerows(rows)
            p = path.with_name(f"{path.stem}.{name}.{ext}")
            p.write_text(buf.getvalue(), encoding="utf-8")
            written.append(p)
        return written


def _fmt_pct(x: Optional[float], signed: bool = False) -> str:
    if x is None:
        return "N/A"
    return f"{x:+.1f}%" if signed else f"{x:.1f}%"


def _block(title: str, header: list[str], rows: list[list[str]]) -> str:
    lines = [title, "-" * len(title)]
    if not rows:
        lines.append("(empty)")
        return "\n".join(lines)
    widths = [max(len(str(r[i])) for r in [header] + rows) for i in range(len(header))]
    fmt = "  ".join(f"{{:<{w}}}" for w in widths)
    lines.append(fmt.format(*header).rstrip())
    lines.extend(fmt.format(*map(str, r)).rstrip() for r in rows)
    return "\n".join(lines)


def render_report(logs: Iterable[GameLog], config: AnalysisConfig = AnalysisConfig()) -> Report:
    logs = sorted(logs, key=lambda l: (str(l.header.get("tournament_id")), l.game_id))
    reflections = reflections_from_logs(logs)
    lex = config.lexicon
    sections: list[str] = [f"AVALON ANALYSIS REPORT ({len(logs)} games, {len(reflections)} reflections)"]
    tables: dict[str, list[list[str]]] = {}

    def add(name: str, title: str, header: list[str], rows: list[list[str]]) -> None:
        rows = [[str(c) for c in r] for r in rows]
        sections.append(_block(title, header, rows))
        tables[name] = [header] + rows

    counts = count_descriptors(reflections, lex, config.whole_word)
    targets = _roster_order(t for t, _ in counts)
    add("descriptors", "Descriptor frequency by player",
        ["player", "#1", "#2", "#3"],
        [[t] + [f"{w} ({c})" for w, c in top_descriptors(counts, t)] + [""] * (3 - len(top_descriptors(counts, t)))
         for t in targets])

    cond = role_conditional_table(reflections, lex, config.whole_word)
    cond_rows = []
    for t in _roster_order(t for t, _, _ in cond):
        for w in lex.descriptors:
            evil, good = cond.get((t, Alignment.EVIL, w), 0), cond.get((t, Alignment.GOOD, w), 0)
            if evil or good:
                cond_rows.append([t, w, evil, good])
    add("role_conditional", "Descriptor usage by target's actual alignment",
        ["player", "descriptor", "evil", "good"], cond_rows)

    refs = find_cross_game_references(logs, config.patterns)
    per_pattern = Counter(h.pattern for h in refs)
    add("cross_game_references", f"Cross-game references in discussion (total {len(refs)})",
        ["pattern", "hits"], [[p, per_pattern[p]] for p in config.patterns.patterns if per_pattern[p]])

    rep_rows: list[list] = []
    inc_rows: list[list] = []
    rep_note = ""
    five = [l for l in logs if l.player_count == 5]
    if five and reflections and max(l.game_id for l in five) >= config.inclusion_range[0]:
        try:
            ledger = reputation_ranking(
                [r for r in reflections if r.game_id <= config.reputation_cutoff],
                config.reputation_cutoff, lex.positive_subset, config.tier_size,
            )
            if ledger.ambiguous:
                rep_note = " (tie at a tier boundary, broken by roster order)"
            rep_rows = [[n, ledger.counts[n], ledger.tier_of(n) or "-"]
                        for n in sorted(ledger.counts, key=lambda n: -ledger.counts[n])]
            stats = team_inclusion_stats(five, config.inclusion_range, ledger)
            hi_avg, lo_avg = stats.averages()
            hi_alt, lo_alt = stats.averages_with_cutoff_game
            inc_rows = [
                ["high", stats.high_total, f"{hi_avg:.2f}", f"{hi_alt:.2f}", stats.high_from_others],
                ["low", stats.low_total, f"{lo_avg:.2f}", f"{lo_alt:.2f}", stats.low_from_others],
                ["difference", _fmt_pct(stats.percent_difference, True), "", "",
                 _fmt_pct(stats.percent_difference_from_others, True)],
            ]
        except ValueError as exc:
            logger.warning("reputation analysis skipped: %s", exc)
    add("reputation", f"Positive-descriptor reputation at game {config.reputation_cutoff}{rep_note}",
        ["player", "count", "tier"], rep_rows)
    lo, hi = config.inclusion_range
    add("inclusion", f"Team inclusion by reputation tier (games {lo}-{hi})",
        ["tier", "total", "avg/game", "avg/game (+cutoff game)", "from others"], inc_rows)

    sleepers = sleeper_rates(logs, "effort", config.early_missions)
    add("sleeper", "Evil players passing early missions, by reasoning effort",
        ["effort", "games", "pass early", "%"],
        [[g, r.total, r.hits, r.pct()] for g, r in sorted(sleepers.items(), key=lambda x: _effort_rank(x[0]))])

    acc = assassination_accuracy(logs, "effort")
    add("assassination", "Assassination accuracy by reasoning effort",
        ["effort", "attempts", "correct", "accuracy"],
        [[g, r.total, r.hits, r.pct()] for g, r in sorted(acc.items(), key=lambda x: _effort_rank(x[0]))])

    add("win_rates", "Results by player count",
        ["N", "games", "evil%", "good%", "assn."],
        [[r.player_count, r.games, _fmt_pct(r.evil_pct), _fmt_pct(r.good_pct), r.assassinations.pct()]
         for r in win_rate_table(logs)])

    add("memory_effect", "Evil win rate with and without memory",
        ["N", "mem", "no mem", "diff (pp)"],
        [[r.player_count, _fmt_pct(r.evil_pct_memory), _fmt_pct(r.evil_pct_no_memory),
          "N/A" if r.diff_points is None else f"{r.diff_points:+.0f}"]
         for r in memory_effect_table(logs)])

    lat = latency_by_effort(logs)
    add("latency", "Mean decision latency by reasoning effort (s)",
        ["effort", "mean seconds"], [[e, f"{v:.2f}"] for e, v in lat.items()])

    return Report("\n\n".join(sections) + "\n", tables)


def _effort_rank(label) -> tuple[int, str]:
    order = {"low": 0, "medium": 1, "high": 2}
    return (order.get(label, 3), str(label))
