"""Generalised quantum state-update rules and randomized property certification."""

from .checks import CheckConfig, replay_witness, run_all, run_check
from .results import CheckResult, Witness
from .rules import RULE_NAMES, UpdateRule, get_rule
from .states import CompositeSpace, Gemenge, Outcome, QuantumState

__all__ = [
    "CheckConfig",
    "CheckResult",
    "CompositeSpace",
    "Gemenge",
    "Outcome",
    "QuantumState",
    "RULE_NAMES",
    "UpdateRule",
    "Witness",
    "get_rule",
    "replay_witness",
    "run_all",
    "run_check",
]
