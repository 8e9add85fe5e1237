"""Battery gauge arithmetic and the five-band strength classification.

Charge is an integer count of micro-charge units. Band boundaries are
fractions of capacity, turned into integer limits once with ``ceil`` so no
float comparison ever happens in the tick loop.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction


class Band(enum.IntEnum):
    """Battery strength bands, ordered so that a higher value is a fuller battery."""

    VERY_LOW = 0
    LOW = 1
    MEDIUM = 2
    AVERAGE = 3
    HIGH = 4

    @property
    def label(self) -> str:
        return _LABELS[self._value_]

    @property
    def colour(self) -> str:
        return _COLOURS[self]


_LABELS = ("VeryLow", "Low", "Medium", "Average", "High")
_COLOURS = {
    Band.HIGH: "Green",
    Band.AVERAGE: "Yellow",
    Band.MEDIUM: "Orange",
    Band.LOW: "Red",
    Band.VERY_LOW: "Pink",
}


@dataclass(frozen=True, slots=True)
class BatteryGauge:
    charge: int
    capacity: int

    def __post_init__(self) -> None:
        if self.capacity <= 0:
            raise ValueError(f"capacity must be positive, got {self.capacity}")
        if not 0 <= self.charge <= self.capacity:
            raise ValueError(f"charge {self.charge} outside [0, {self.capacity}]")

    @classmethod
    def full(cls, capacity: int) -> BatteryGauge:
        return cls(capacity, capacity)

    def discharge(self, amount: int) -> BatteryGauge:
        """Remove up to ``amount`` units; an empty battery stays at zero."""
        if amount < 0:
            raise ValueError("discharge amount must be >= 0")
        return BatteryGauge(max(0, self.charge - amount), self.capacity)

    def recharge(self, amount: int) -> BatteryGauge:
        """Add up to ``amount`` units, saturating at capacity."""
        if amount < 0:
            raise ValueError("recharge amount must be >= 0")
        return BatteryGauge(min(self.capacity, self.charge + amount), self.capacity)

    @property
    def fraction(self) -> float:
        return self.charge / self.capacity


def _as_fraction(value: Fraction | float | int | str) -> Fraction:
    # str() first so 0.7 becomes 7/10 rather than its binary expansion
    if isinstance(value, float):
        value = str(value)
    return Fraction(value)


@dataclass(frozen=True)
class BandThresholds:
    """Lower edges of High, Average, Medium and Low as fractions of capacity.

    ``low`` may be zero, which makes VeryLow unreachable (no agent ever
    counts as critical).
    """

    high: Fraction = Fraction(4, 5)
    average: Fraction = Fraction(3, 5)
    medium: Fraction = Fraction(2, 5)
    low: Fraction = Fraction(1, 5)

    def __post_init__(self) -> None:
        for name in ("high", "average", "medium", "low"):
            object.__setattr__(self, name, _as_fraction(getattr(self, name)))
        if not 0 < self.high < 1:
            raise ValueError(f"high threshold {self.high} not in (0, 1)")
        if not (self.high > self.average > self.medium > self.low):
            raise ValueError("thresholds must be strictly decreasing")
        if self.medium <= 0:
            raise ValueError("medium threshold must be positive")
        if self.low < 0:
            raise ValueError("low threshold must be >= 0")

    @classmethod
    def of(cls, values) -> BandThresholds:
        values = tuple(values)
        if len(values) != 4:
            raise ValueError(f"expected 4 thresholds, got {len(values)}")
        return cls(*values)

    def as_tuple(self) -> tuple[Fraction, Fraction, Fraction, Fraction]:
        return (self.high, self.average, self.medium, self.low)

    def limits(self, capacity: int) -> tuple[int, int, int, int]:
        """Integer lower edges ``ceil(t * capacity)`` of High, Average, Medium, Low."""
        return tuple(math.ceil(t * capacity) for t in self.as_tuple())  # type: ignore[return-value]


DEFAULT_THRESHOLDS = BandThresholds()


def band_of(charge: int, limits: tuple[int, int, int, int]) -> Band:
    """Classify a raw charge against precomputed integer limits."""
    high, average, medium, low = limits
    if charge >= medium:
        if charge >= high:
            return Band.HIGH
        return Band.AVERAGE if charge >= average else Band.MEDIUM
    return Band.LOW if charge >= low else Band.VERY_LOW


def band(gauge: BatteryGauge, thresholds: BandThresholds = DEFAULT_THRESHOLDS) -> Band:
    return band_of(gauge.charge, thresholds.limits(gauge.capacity))


def needs_charge(gauge: BatteryGauge, thresholds: BandThresholds = DEFAULT_THRESHOLDS) -> bool:
    """True once the gauge has dropped into Low or VeryLow."""
    return band(gauge, thresholds) <= Band.LOW


def is_critical(gauge: BatteryGauge, thresholds: BandThresholds = DEFAULT_THRESHOLDS) -> bool:
    return band(gauge, thresholds) is Band.VERY_LOW
