"""Patrol strips, unit-speed kinematics and weighted work aggregation."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence


class Heading(enum.Enum):
    TOWARD_RED = "red"
    TOWARD_GREEN = "green"

    def flipped(self) -> Heading:
        return Heading.TOWARD_GREEN if self is Heading.TOWARD_RED else Heading.TOWARD_RED


@dataclass(frozen=True)
class SubEnvironment:
    """A 1-D strip running from the green post at 0 to the red post at ``red_post``."""

    index: int
    red_post: int = 100
    dock_position: int = 0
    weight: Fraction = Fraction(1)
    green_post: int = 0

    def __post_init__(self) -> None:
        if self.green_post != 0:
            raise ValueError("green post is fixed at 0")
        if self.red_post <= self.green_post:
            raise ValueError(f"red post must be > 0, got {self.red_post}")
        if not self.green_post <= self.dock_position <= self.red_post:
            raise ValueError(f"dock {self.dock_position} outside [0, {self.red_post}]")
        object.__setattr__(self, "weight", Fraction(self.weight))
        if self.weight < 0:
            raise ValueError("weight must be non-negative")

    @property
    def length(self) -> int:
        return self.red_post - self.green_post


def advance(position: int, heading: Heading, env: SubEnvironment) -> tuple[int, Heading]:
    """Move one centimetre along the patrol, turning around at either post."""
    if heading is Heading.TOWARD_RED:
        if position >= env.red_post:
            heading, position = Heading.TOWARD_GREEN, position - 1
        else:
            position += 1
    else:
        if position <= env.green_post:
            heading, position = Heading.TOWARD_RED, position + 1
        else:
            position -= 1
    if position >= env.red_post:
        return env.red_post, Heading.TOWARD_GREEN
    if position <= env.green_post:
        return env.green_post, Heading.TOWARD_RED
    return position, heading


def step_toward(position: int, target: int) -> int:
    if position < target:
        return position + 1
    if position > target:
        return position - 1
    return position


def total_work(odometers: Sequence[int], envs: Sequence[SubEnvironment]) -> Fraction | int:
    """Weighted work over all strips: sum of odometer times strip weight."""
    if len(odometers) != len(envs):
        raise ValueError(f"{len(odometers)} odometers for {len(envs)} environments")
    total = sum((Fraction(w) * env.weight for w, env in zip(odometers, envs)), Fraction(0))
    return int(total) if total.denominator == 1 else total
