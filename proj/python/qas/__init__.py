"""Quantum architecture search: circuit-building environment and RL agents."""

from ._core import (
    ConfigError,
    Env,
    action_set,
    bell_state,
    brute_force_search,
    discounted_returns,
    fidelity,
    ghz_state,
    replay_circuit,
    train,
)

__all__ = [
    "ConfigError",
    "Env",
    "action_set",
    "bell_state",
    "brute_force_search",
    "discounted_returns",
    "fidelity",
    "ghz_state",
    "replay_circuit",
    "train",
]
