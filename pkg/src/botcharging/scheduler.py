"""The single shared charger and its waiting queue.

Two disciplines are supported. ``PLAIN`` is first-come-first-serve by dock
arrival tick. ``IMMUNE`` is the same queue, except that an agent whose
battery has fallen into the last band moves ahead of every non-critical
waiter. The agent on the charger is never displaced.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import NamedTuple


class Policy(enum.Enum):
    PLAIN = "plain"
    IMMUNE = "immune"


class SchedulerError(RuntimeError):
    pass


@dataclass(slots=True)
class QueueEntry:
    agent_id: int
    arrival_tick: int
    critical: bool = False
    critical_tick: int | None = None

    def __post_init__(self) -> None:
        if self.critical != (self.critical_tick is not None):
            raise ValueError("critical_tick must be set exactly when critical")

    def fcfs_key(self) -> tuple[int, int]:
        return (self.arrival_tick, self.agent_id)

    def immune_key(self) -> tuple[int, int, int]:
        if self.critical:
            return (0, self.critical_tick, self.agent_id)  # type: ignore[return-value]
        return (1, self.arrival_tick, self.agent_id)


class RequestOutcome(NamedTuple):
    granted: bool
    overtaken: int = 0


@dataclass
class ChargerStation:
    policy: Policy = Policy.IMMUNE
    charge_rate: int = 20
    dock_to_charger_ticks: int = 2
    occupant: int | None = None
    queue: list[QueueEntry] = field(default_factory=list)

    def __contains__(self, agent_id: int) -> bool:
        return any(e.agent_id == agent_id for e in self.queue)

    @property
    def order(self) -> list[int]:
        return [e.agent_id for e in self.queue]

    def _sort(self) -> None:
        key = QueueEntry.immune_key if self.policy is Policy.IMMUNE else QueueEntry.fcfs_key
        self.queue.sort(key=key)

    def _index(self, agent_id: int) -> int:
        for i, entry in enumerate(self.queue):
            if entry.agent_id == agent_id:
                return i
        raise SchedulerError(f"agent {agent_id} is not queued")

    def request(self, agent_id: int, tick: int, critical: bool = False) -> RequestOutcome:
        """An agent asks for the charger on arriving at its dock."""
        if agent_id == self.occupant or agent_id in self:
            raise SchedulerError(f"duplicate request from agent {agent_id}")
        if self.occupant is None and not self.queue:
            self.occupant = agent_id
            return RequestOutcome(True)
        entry = QueueEntry(agent_id, tick, critical, tick if critical else None)
        self.queue.append(entry)
        self._sort()
        idx = self.queue.index(entry)
        mine = entry.fcfs_key()
        overtaken = sum(1 for e in self.queue[idx + 1:] if e.fcfs_key() < mine)
        return RequestOutcome(False, overtaken)

    def escalate(self, agent_id: int, tick: int) -> int:
        """Mark a queued agent critical; returns how many waiters it jumped."""
        old = self._index(agent_id)
        entry = self.queue[old]
        if self.policy is not Policy.IMMUNE or entry.critical:
            return 0
        entry.critical, entry.critical_tick = True, tick
        self._sort()
        return old - self._index(agent_id)

    def release(self) -> int | None:
        """Free the charger and hand it to the head of the queue, if any."""
        if self.occupant is None:
            raise SchedulerError("release with no occupant")
        self.occupant = self.queue.pop(0).agent_id if self.queue else None
        return self.occupant

    def withdraw(self, agent_id: int) -> None:
        """Drop a waiter that can no longer use the charger."""
        del self.queue[self._index(agent_id)]

    def ordering_ok(self) -> bool:
        key = QueueEntry.immune_key if self.policy is Policy.IMMUNE else QueueEntry.fcfs_key
        keys = [key(e) for e in self.queue]
        return keys == sorted(keys) and len(set(self.order)) == len(self.queue) and self.occupant not in self
