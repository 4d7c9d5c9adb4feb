"""Deterministic grid-war simulator: engine, strategies, datasets."""

from .dataset import Dataset, DatasetHeader, read_dataset, split_dataset, write_dataset
from .encode import StateTensor, decode_planes, decode_state, encode_state, raw_planes
from .engine import Action, MatchRecord, run_match, sample_timeline, step
from .rules import DEFAULT_RULES, Rules, UnitKind
from .state import GameState, Unit, standard_start
from .strategies import DEFAULT_ROSTER, REGISTRY, Strategy, make_strategy
from .tournament import ScheduledMatch, TournamentSettings, run_tournament, schedule_round_robin

__all__ = [
    "Action",
    "Dataset",
    "DatasetHeader",
    "DEFAULT_ROSTER",
    "DEFAULT_RULES",
    "GameState",
    "MatchRecord",
    "REGISTRY",
    "Rules",
    "ScheduledMatch",
    "StateTensor",
    "Strategy",
    "TournamentSettings",
    "Unit",
    "UnitKind",
    "decode_planes",
    "decode_state",
    "encode_state",
    "make_strategy",
    "raw_planes",
    "read_dataset",
    "run_match",
    "run_tournament",
    "sample_timeline",
    "schedule_round_robin",
    "split_dataset",
    "standard_start",
    "step",
    "write_dataset",
]
