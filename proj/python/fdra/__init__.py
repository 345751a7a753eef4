"""Full-duplex OFDMA sub-channel and power allocation."""

from ._core import (
    ConfigError,
    PairInstance,
    PairSolution,
    pair_objective,
    parse_beta,
    replay_drop,
    run_config,
    schemes,
    solve_pair,
    templates,
    waterfill,
)

__all__ = [
    "ConfigError",
    "PairInstance",
    "PairSolution",
    "pair_objective",
    "parse_beta",
    "replay_drop",
    "run_config",
    "schemes",
    "solve_pair",
    "templates",
    "waterfill",
]
