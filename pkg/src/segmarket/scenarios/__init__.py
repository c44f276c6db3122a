"""Shipped scenario configurations for the experiment suite and the CLI."""

from __future__ import annotations

import json
from importlib import resources

from ..config import MarketConfig, config_from_dict

_FILES = {
    "duopoly": "duopoly.json",
    "chain3": "chain3.json",
    "platforms4": "platforms4.json",
}


def scenario_names() -> list[str]:
    return sorted(_FILES)


def load_scenario(name: str) -> MarketConfig:
    if name not in _FILES:
        raise KeyError(f"unknown scenario '{name}'; pick one of {scenario_names()}")
    text = resources.files(__package__).joinpath(_FILES[name]).read_text()
    return config_from_dict(json.loads(text))
