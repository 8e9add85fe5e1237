"""Flat ``key = value`` experiment files.

One assignment per line, ``#`` starts a comment, blank lines are ignored.
List values are comma separated. ``initial`` pins every agent's start as
``position:heading:charge`` entries, heading being ``red`` or ``green``::

    n_agents = 4
    thresholds = 0.8, 0.6, 0.4, 0.2
    policy = immune
    initial = 20:green:415, 30:green:150, 5:green:402, 50:green:110
"""

from __future__ import annotations

import dataclasses
from fractions import Fraction
from pathlib import Path
from typing import Callable, Iterable

from botcharging.energy import BandThresholds
from botcharging.engine import ConfigError, InitialAgent, SimConfig
from botcharging.scheduler import Policy
from botcharging.world import Heading

_HEADINGS = {
    "red": Heading.TOWARD_RED,
    "towardred": Heading.TOWARD_RED,
    "green": Heading.TOWARD_GREEN,
    "towardgreen": Heading.TOWARD_GREEN,
}


def _int(text: str) -> int:
    return int(text, 0)


def _fractions(text: str) -> tuple[Fraction, ...]:
    return tuple(Fraction(part.strip()) for part in text.split(",") if part.strip())


def _policy(text: str) -> Policy:
    return Policy(text.strip().lower())


def _initial(text: str) -> tuple[InitialAgent, ...]:
    agents = []
    for item in text.split(","):
        pos, heading, charge = (p.strip() for p in item.split(":"))
        agents.append(InitialAgent(_int(pos), _HEADINGS[heading.lower()], _int(charge)))
    return tuple(agents)


PARSERS: dict[str, Callable[[str], object]] = {
    "n_agents": _int,
    "strip_length": _int,
    "dock_position": _int,
    "capacity": _int,
    "thresholds": _fractions,
    "move_drain": _int,
    "idle_drain": _int,
    "charge_rate": _int,
    "charge_to": Fraction,
    "dock_to_charger_ticks": _int,
    "weights": _fractions,
    "policy": _policy,
    "ticks": _int,
    "seed": _int,
    "initial": _initial,
}


def parse_value(key: str, raw: str, line: int | None = None) -> object:
    if key not in PARSERS:
        raise ConfigError(key, "unknown key", line)
    try:
        return PARSERS[key](raw.strip())
    except (ValueError, KeyError, ZeroDivisionError) as exc:
        raise ConfigError(key, f"cannot parse {raw.strip()!r} ({exc})", line) from None


def parse_text(text: str) -> dict[str, object]:
    values: dict[str, object] = {}
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, raw = line.partition("=")
        key = key.strip()
        if not sep or not key:
            raise ConfigError(key or "?", "expected 'key = value'", lineno)
        if key in values:
            raise ConfigError(key, "duplicate key", lineno)
        values[key] = parse_value(key, raw, lineno)
    return values


def parse_override(item: str) -> tuple[str, object]:
    key, sep, raw = item.partition("=")
    key = key.strip()
    if not sep or not key:
        raise ConfigError(item, "override must look like key=value")
    return key, parse_value(key, raw)


def build_config(values: dict[str, object]) -> SimConfig:
    kwargs = dict(values)
    if "thresholds" in kwargs:
        try:
            kwargs["thresholds"] = BandThresholds.of(kwargs["thresholds"])  # type: ignore[arg-type]
        except ValueError as exc:
            raise ConfigError("thresholds", str(exc)) from None
    if "initial" in kwargs:
        kwargs["initial_override"] = kwargs.pop("initial")
    try:
        return SimConfig(**kwargs)  # type: ignore[arg-type]
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError("config", str(exc)) from None


def load_config(path: str | Path | None = None, overrides: Iterable[str] = ()) -> SimConfig:
    """Read a config file (defaults when ``path`` is None) and apply ``key=value`` overrides."""
    values: dict[str, object] = {}
    if path is not None:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError("config", f"cannot read {path}: {exc.strerror}") from None
        values = parse_text(text)
    for item in overrides:
        key, value = parse_override(item)
        values[key] = value
    return build_config(values)


def _fmt_fraction(value: Fraction) -> str:
    return str(value.numerator) if value.denominator == 1 else f"{value.numerator}/{value.denominator}"


def format_config(cfg: SimConfig) -> str:
    """Serialise ``cfg`` so that ``parse_text`` reads back an equal config."""
    lines = []
    for f in dataclasses.fields(cfg):
        value = getattr(cfg, f.name)
        if value is None:
            continue
        key = "initial" if f.name == "initial_override" else f.name
        if f.name == "thresholds":
            text = ", ".join(_fmt_fraction(t) for t in value.as_tuple())
        elif f.name == "weights":
            text = ", ".join(_fmt_fraction(w) for w in value)
        elif f.name == "initial_override":
            text = ", ".join(f"{a.position}:{a.heading.value}:{a.charge}" for a in value)
        elif isinstance(value, Fraction):
            text = _fmt_fraction(value)
        elif isinstance(value, Policy):
            text = value.value
        else:
            text = str(value)
        lines.append(f"{key} = {text}")
    return "\n".join(lines) + "\n"
