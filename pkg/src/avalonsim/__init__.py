"""Repeated-game Avalon simulator with cross-game memory and transcript analytics."""

from .engine import (
    Alignment,
    GameConfig,
    GameOutcome,
    GameState,
    MissionCard,
    Phase,
    Role,
    VictoryPath,
    Vote,
    assign_roles,
    build_config,
    fail_threshold,
    night_knowledge,
    player_names,
)
from .gamelog import GameLog, load_log, persist_log, replay
from .memory import MemoryContext, MemoryStore, ReflectionRecord, context_for, render_memory_prompt
from .tournament import PRESETS, DatasetPreset, run_game, run_tournament

__version__ = "0.1.0"
