"""Shared fixtures and builders for the test suite."""
from __future__ import annotations

import random

import pytest

from manetsim import (
    Scenario,
    scenario_from_dict,
)


def random_geometric_scenario(rng: random.Random, n: int, k: int, *,
                              protocol: str = "CLUSTERING",
                              name: str = "random",
                              seed: int = 0,
                              radio_range: float = 25.0,
                              world=(100.0, 100.0),
                              boot_mode: str = "SEQUENTIAL",
                              delay_ticks: int = 8,
                              max_ticks: int = 4000,
                              resources=None) -> Scenario:
    """Random node placement, connectivity not guaranteed."""
    agents = []
    for uid in range(n):
        spec = {
            "uid": uid,
            "pos": [round(rng.uniform(0, world[0]), 3),
                    round(rng.uniform(0, world[1]), 3)],
        }
        if resources is not None:
            spec["resources"] = resources(rng)
        agents.append(spec)
    data = {
        "schema": 1,
        "name": name,
        "protocol": protocol,
        "params": {
            "k": k,
            "radio_range": radio_range,
            "world": list(world),
            "seed": seed,
            "tick_ms": 100,
        },
        "agents": agents,
        "boot": {"mode": boot_mode, "delay_ticks": delay_ticks},
        "transport": {"backend": "SIM", "loss_rate": 0.0},
        "run": {"max_ticks": max_ticks, "quiescence_window": 8},
    }
    if protocol != "CLUSTERING":
        del data["params"]["k"]
    return scenario_from_dict(data)


@pytest.fixture
def make_scenario():
    return random_geometric_scenario
