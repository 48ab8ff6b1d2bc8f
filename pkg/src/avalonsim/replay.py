"""Text rendering of a saved game log."""

from __future__ import annotations

from typing import Optional

from .gamelog import GameLog


def _role_label(value: str) -> str:
    return "Loyal Servant" if value == "LoyalServant" else value


def render_replay(log: GameLog, mission: Optional[int] = None) -> str:
    h = log.header
    lines = [
        f"Game {h['game_id']} ({h.get('tournament_id')}) - {h['player_count']} players, "
        f"seed {h['seed']}, effort {h.get('effort')}, memory {'on' if h.get('memory') else 'off'}",
        "Roles: " + ", ".join(f"{n} ({_role_label(r)})" for n, r in zip(h["roster"], h["roles"])),
    ]
    current = None
    ballot: list[str] = []
    for e in log.events:
        t = e["type"]
        m = e.get("mission")
        if mission is not None and m != mission:
            continue
        if m is not None and m != current and t in ("proposal", "mission_result"):
            current = m
            lines.append("")
            lines.append(f"=== Mission {m} ===")
        if t == "proposal":
            lines.append(f"[Proposal {e['attempt']}] {e['leader']} proposes {', '.join(e['team'])}"
                         + (f" - {e['reasoning']}" if e.get("reasoning") else ""))
        elif t == "discussion":
            lines.append(f"  {e['player']}: {e['text']}")
        elif t == "vote":
            ballot.append(f"{e['player']}={e['vote']}")
        elif t == "vote_result":
            verdict = "auto-approved" if e["auto_approved"] else ("approved" if e["approved"] else "rejected")
            lines.append(f"  Votes: {', '.join(ballot)} -> {verdict} ({e['approvals']} approve)")
            ballot = []
        elif t == "mission_action":
            lines.append(f"  {e['player']} plays {e['action']}" + (" (auto)" if e.get("auto") else ""))
        elif t == "mission_result":
            lines.append(f"  Mission {m} {e['result'].upper()} with {e['fail_count']} fail card(s)")

    if mission is None:
        conclave = list(log.of_type("conclave"))
        if conclave:
            lines += ["", "=== Evil conclave ==="]
            lines += [f"  {e['player']}: {e['text']}" for e in conclave]
        for e in log.of_type("assassination"):
            lines += ["", "=== Assassination ===",
                      f"  {e['player']} names {e['guess']}: {'correct' if e['correct'] else 'wrong'}"]
        anomalies = list(log.of_type("anomaly"))
        if anomalies:
            lines += ["", f"=== Anomalies ({len(anomalies)}) ==="]
            lines += [f"  {e['kind']}: {e['player']} {e['decision']} - {e.get('reason', '')}" for e in anomalies]
        lines.append("")
        if log.aborted:
            lines.append("Result: game aborted")
        elif log.outcome is not None:
            lines.append(f"Result: {log.outcome.winner.value} wins via {log.outcome.via.value}")
    return "\n".join(lines) + "\n"
