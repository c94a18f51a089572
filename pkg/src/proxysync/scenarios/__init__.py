"""Scripted, seeded runs of the four demo applications."""

from .builtin import BUILDERS, builtin_script
from .engine import Trace, run_scenario, run_scenario_checked
from .game import Mark, Outcome, TicTacToeBoard, replay, ttt_apply, ttt_winner
from .script import ScenarioScript, parse_script, script_text

__all__ = [
    "BUILDERS", "Mark", "Outcome", "ScenarioScript", "TicTacToeBoard", "Trace", "builtin_script",
    "parse_script", "replay", "run_scenario", "run_scenario_checked", "script_text", "ttt_apply",
    "ttt_winner",
]
