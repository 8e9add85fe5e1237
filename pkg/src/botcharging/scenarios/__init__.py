"""Bundled scenario files."""

from __future__ import annotations

from importlib import resources
from typing import Iterable

from botcharging.config import build_config, parse_override, parse_text
from botcharging.engine import SimConfig

NAMES = ("paper", "adversarial")


def scenario_text(name: str) -> str:
    if name not in NAMES:
        raise KeyError(f"unknown scenario {name!r}; choose from {', '.join(NAMES)}")
    return resources.files(__name__).joinpath(f"{name}.cfg").read_text()


def scenario_config(name: str, overrides: Iterable[str] = ()) -> SimConfig:
    values = parse_text(scenario_text(name))
    for item in overrides:
        key, value = parse_override(item)
        values[key] = value
    return build_config(values)


# Expected grant order of the reference scenario under the immune policy.
PAPER_GRANT_ORDER = (3, 1, 4, 2)
PAPER_CRITICAL_BOT = 4
