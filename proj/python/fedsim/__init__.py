"""Deterministic desk-scale simulator for federated training protocols."""

import json as _json

from ._fedsim import (
    MomentsAccountant,
    Rng,
    accuracy,
    clip_update,
    f1_macro,
    gen_classification,
    round_log_moment,
    rounds_until_budget,
    run_experiment_json,
    segment_sessions,
)

__all__ = [
    "MomentsAccountant",
    "Rng",
    "accuracy",
    "clip_update",
    "f1_macro",
    "gen_classification",
    "round_log_moment",
    "rounds_until_budget",
    "run_experiment",
    "run_experiment_json",
    "segment_sessions",
]


def run_experiment(config):
    """Run one experiment from a config dict; returns the result as a dict.

    Unknown config keys and cross-field inconsistencies raise ValueError.
    An unbounded privacy loss is reported as epsilon = None.
    """
    return _json.loads(run_experiment_json(_json.dumps(config)))
