from .base import (
    Agent,
    AgentFailure,
    AssassinGuess,
    InvalidReference,
    MissionAction,
    ParseFailure,
    Reflection,
    Statement,
    TeamProposal,
    VoteDecision,
)
from .baselines import (
    HonestGoodBot,
    NaiveEvilBot,
    RandomAgent,
    RolePolicyAgent,
    ScriptedAgent,
    SleeperEvilBot,
    scripted_roster,
)
from .canned import CannedResponder, SequenceResponder, load_fixtures
from .llm import LLMAgent, build_prompt
from .parsing import parse_structured_response
from .prompts import render_role_brief
from .view import AgentView, DecisionKind, DiscussionMessage, PublicMission, PublicProposal
