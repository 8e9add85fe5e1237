"""Tick loop tying agents, strips and the charger together.

Every tick processes agents in ascending id order. Each agent steps once,
then its events are resolved against the charger before the next agent
steps: a dock arrival requests the charger, a waiter turning critical is
escalated, a finished charge releases the charger to the next waiter.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, NamedTuple

from botcharging.agent import Agent, AgentEvent, AgentState, StepParams, grant_charger, step_agent
from botcharging.energy import BandThresholds, BatteryGauge
from botcharging.rng import SplitMix64
from botcharging.scheduler import ChargerStation, Policy
from botcharging.world import Heading, SubEnvironment, total_work

TRACE_HEADER = ("tick", "agent_id", "state", "position", "charge", "band", "queue_len", "event")
EVENT_TAGS = (
    "none",
    "trip_started",
    "dock_arrival",
    "enqueued",
    "escalated",
    "granted",
    "charge_done",
    "resumed",
    "failed",
)


class ConfigError(ValueError):
    """A configuration value is missing, malformed or violates a constraint."""

    def __init__(self, key: str, message: str, line: int | None = None) -> None:
        self.key = key
        self.line = line
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}{key}: {message}")


class InitialAgent(NamedTuple):
    position: int
    heading: Heading
    charge: int


@dataclass(frozen=True)
class SimConfig:
    n_agents: int = 4
    strip_length: int = 100
    dock_position: int = 0
    capacity: int = 1000
    thresholds: BandThresholds = field(default_factory=BandThresholds)
    move_drain: int = 1
    idle_drain: int = 1
    charge_rate: int = 20
    charge_to: Fraction = Fraction(1)
    dock_to_charger_ticks: int = 2
    weights: tuple[Fraction, ...] | None = None
    policy: Policy = Policy.IMMUNE
    ticks: int = 1000
    seed: int = 0
    initial_override: tuple[InitialAgent, ...] | None = None

    def __post_init__(self) -> None:
        if self.weights is not None:
            object.__setattr__(self, "weights", tuple(Fraction(w) for w in self.weights))
        if self.initial_override is not None:
            object.__setattr__(
                self, "initial_override", tuple(InitialAgent(*a) for a in self.initial_override)
            )
        object.__setattr__(self, "charge_to", Fraction(self.charge_to))
        self.validate()

    def validate(self) -> None:
        def need(ok: bool, key: str, message: str) -> None:
            if not ok:
                raise ConfigError(key, message)

        for key in ("n_agents", "strip_length", "capacity"):
            need(getattr(self, key) >= 1, key, "must be >= 1")
        for key in ("move_drain", "idle_drain", "dock_to_charger_ticks", "ticks"):
            need(getattr(self, key) >= 0, key, "must be >= 0")
        need(0 <= self.seed < 1 << 64, "seed", "must be in [0, 2**64)")
        need(
            self.charge_rate > self.move_drain,
            "charge_rate",
            f"must exceed move_drain ({self.charge_rate} <= {self.move_drain})",
        )
        need(0 <= self.dock_position <= self.strip_length, "dock_position", "must lie in [0, strip_length]")
        need(
            self.thresholds.medium < self.charge_to <= 1,
            "charge_to",
            "must be above the medium threshold and at most 1",
        )
        if self.weights is not None:
            need(len(self.weights) == self.n_agents, "weights", f"need {self.n_agents} values")
            need(all(w >= 0 for w in self.weights), "weights", "must be non-negative")
        if self.initial_override is not None:
            need(len(self.initial_override) == self.n_agents, "initial", f"need {self.n_agents} agents")
            for a in self.initial_override:
                need(0 <= a.position <= self.strip_length, "initial", f"position {a.position} off strip")
                need(0 <= a.charge <= self.capacity, "initial", f"charge {a.charge} outside [0, capacity]")

    @property
    def limits(self) -> tuple[int, int, int, int]:
        return self.thresholds.limits(self.capacity)

    @property
    def charge_target(self) -> int:
        return math.ceil(self.charge_to * self.capacity)

    def environments(self) -> list[SubEnvironment]:
        weights = self.weights or (Fraction(1),) * self.n_agents
        return [
            SubEnvironment(i + 1, self.strip_length, self.dock_position, weights[i])
            for i in range(self.n_agents)
        ]

    def step_params(self) -> StepParams:
        return StepParams(
            self.limits,
            self.move_drain,
            self.idle_drain,
            self.charge_rate,
            self.charge_target,
            self.capacity,
        )


def feasibility_margin(cfg: SimConfig) -> Fraction | float:
    """Worst-case ticks of slack left to an agent that triggers at the Low boundary.

    It has the whole Low band to spend at ``idle_drain``; it may have to walk
    the full strip and then wait for every other agent to take a full charge.
    """
    trigger = cfg.limits[2]
    if cfg.idle_drain == 0:
        return math.inf
    session = Fraction(cfg.capacity, cfg.charge_rate) + cfg.dock_to_charger_ticks
    return Fraction(trigger, cfg.idle_drain) - ((cfg.n_agents - 1) * session + cfg.strip_length)


class TraceRow(NamedTuple):
    tick: int
    agent_id: int
    state: str
    position: int
    charge: int
    band: str
    queue_len: int
    event: str


# skips the generated NamedTuple __new__; the trace loop builds millions of rows
_new_row = tuple.__new__


@dataclass
class MetricsReport:
    total_work: Fraction | int
    work: tuple[int, ...]
    failures: int
    queue_jumps: int
    max_wait_ticks: int
    mean_wait_ticks: Fraction
    charger_busy_fraction: Fraction
    ticks_run: int
    grants: tuple[int, ...]
    charger_output: int
    total_drain: int
    initial_charge: int
    final_charge: int

    def as_lines(self) -> list[str]:
        out = [
            f"ticks_run = {self.ticks_run}",
            f"total_work = {_fmt(self.total_work)}",
        ]
        out += [f"work.{i} = {w}" for i, w in enumerate(self.work, start=1)]
        out += [
            f"failures = {self.failures}",
            f"queue_jumps = {self.queue_jumps}",
            f"grants = {len(self.grants)}",
            f"grant_order = {','.join(map(str, self.grants)) or '-'}",
            f"max_wait_ticks = {self.max_wait_ticks}",
            f"mean_wait_ticks = {_fmt(self.mean_wait_ticks)}",
            f"charger_busy_fraction = {_fmt(self.charger_busy_fraction)}",
            f"charger_output = {self.charger_output}",
            f"total_drain = {self.total_drain}",
            f"initial_charge = {self.initial_charge}",
            f"final_charge = {self.final_charge}",
        ]
        return out

    def to_text(self) -> str:
        return "\n".join(self.as_lines()) + "\n"


def _fmt(value: Fraction | int) -> str:
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{float(value):.6f}"


def initial_agents(cfg: SimConfig) -> list[Agent]:
    """Starting agents, either from the override or drawn from SplitMix64.

    Draw order is agent 1 position, heading, charge, then agent 2 and so on.
    Positions are uniform on [0, L], a heading draw of 0 means TowardRed, and
    charge is uniform between the Low trigger boundary and capacity.
    """
    envs = cfg.environments()
    if cfg.initial_override is not None:
        specs = list(cfg.initial_override)
    else:
        rng = SplitMix64(cfg.seed)
        floor = min(cfg.limits[2], cfg.capacity)
        specs = []
        for _ in range(cfg.n_agents):
            position = rng.randint(0, cfg.strip_length)
            heading = Heading.TOWARD_RED if rng.randint(0, 1) == 0 else Heading.TOWARD_GREEN
            charge = rng.randint(floor, cfg.capacity)
            specs.append(InitialAgent(position, heading, charge))
    return [
        Agent.with_gauge(i + 1, envs[i].index, s.position, s.heading, BatteryGauge(s.charge, cfg.capacity))
        for i, s in enumerate(specs)
    ]


class SimState:
    """Mutable state of one run. Build with :meth:`from_config`, drive with :meth:`tick`."""

    def __init__(self, cfg: SimConfig, agents: list[Agent], record: bool = True) -> None:
        self.cfg = cfg
        self.agents = agents
        self.envs = cfg.environments()
        self.params = cfg.step_params()
        self.station = ChargerStation(cfg.policy, cfg.charge_rate, cfg.dock_to_charger_ticks)
        self.tick_count = 0
        self.record = record
        self.trace: list[TraceRow] = []
        self.initial_charge = sum(a.charge for a in agents)
        self.arrivals: list[tuple[int, int]] = []
        self.grants: list[tuple[int, int]] = []
        self.criticals: list[tuple[int, int]] = []
        self.waits: list[int] = []
        self.queue_jumps = 0
        self.busy_ticks = 0
        self._arrived_at: dict[int, int] = {}
        self.alive = sum(a.state is not AgentState.FAILED for a in agents)
        self._pairs = list(zip(agents, self.envs))

    @classmethod
    def from_config(cls, cfg: SimConfig, record: bool = True) -> SimState:
        return cls(cfg, initial_agents(cfg), record)

    @property
    def finished(self) -> bool:
        return self.tick_count >= self.cfg.ticks or self.alive == 0

    def _grant(self, agent: Agent, tick: int, tags: list[str]) -> None:
        grant_charger(agent, tick, self.cfg.dock_to_charger_ticks)
        self.grants.append((tick, agent.id))
        self.waits.append(tick - self._arrived_at.pop(agent.id))
        tags.append("granted")

    def tick(self) -> None:
        if self.finished:
            raise RuntimeError("simulation is finished")
        t = self.tick_count + 1
        station = self.station
        agents = self.agents
        params = self.params
        tags: dict[int, list[str]] = {}
        for agent, env in self._pairs:
            if agent.state is AgentState.FAILED:
                continue
            events = step_agent(agent, env, params, t)
            if events:
                self._resolve(agent, events, t, tags)
        self.tick_count = t
        if station.occupant is not None:
            self.busy_ticks += 1
        if self.record:
            qlen = len(station.queue)
            labels = params.band_labels
            append = self.trace.append
            for agent in agents:
                charge = agent.charge
                ev = tags.get(agent.id)
                append(
                    _new_row(
                        TraceRow,
                        (
                            t,
                            agent.id,
                            agent.state._value_,
                            agent.position,
                            charge,
                            labels[charge],
                            qlen,
                            "|".join(ev) if ev else "none",
                        ),
                    )
                )

    def _resolve(self, agent: Agent, events: list[AgentEvent], t: int, tags: dict[int, list[str]]) -> None:
        station = self.station
        mine = tags.setdefault(agent.id, [])
        for event in events:
            if event is AgentEvent.TRIP_STARTED:
                mine.append("trip_started")
            elif event is AgentEvent.BECAME_CRITICAL:
                if agent.state is AgentState.QUEUED and not agent.holds_grant:
                    jumped = station.escalate(agent.id, t)
                    self.criticals.append((t, agent.id))
                    if jumped:
                        self.queue_jumps += 1
                        mine.append("escalated")
            elif event is AgentEvent.DOCK_ARRIVAL:
                mine.append("dock_arrival")
                self.arrivals.append((t, agent.id))
                self._arrived_at[agent.id] = t
                if agent.critical:
                    self.criticals.append((t, agent.id))
                critical = agent.critical and self.cfg.policy is Policy.IMMUNE
                outcome = station.request(agent.id, t, critical)
                if outcome.granted:
                    self._grant(agent, t, mine)
                else:
                    agent.state = AgentState.QUEUED
                    mine.append("enqueued")
                    if outcome.overtaken:
                        self.queue_jumps += 1
                        mine.append("escalated")
            elif event is AgentEvent.CHARGE_DONE:
                mine.append("charge_done")
                nxt = station.release()
                if nxt is not None:
                    self._grant(self.agents[nxt - 1], t, tags.setdefault(nxt, []))
            elif event is AgentEvent.RESUMED:
                mine.append("resumed")
            elif event is AgentEvent.FAILED:
                mine.append("failed")
                self.alive -= 1
                if agent.id in station:
                    station.withdraw(agent.id)
                    self._arrived_at.pop(agent.id, None)

    def run(self) -> SimState:
        while not self.finished:
            self.tick()
        return self

    def metrics(self) -> MetricsReport:
        ticks = self.tick_count
        waits = self.waits
        return MetricsReport(
            total_work=total_work([a.odometer for a in self.agents], self.envs),
            work=tuple(a.odometer for a in self.agents),
            failures=sum(a.state is AgentState.FAILED for a in self.agents),
            queue_jumps=self.queue_jumps,
            max_wait_ticks=max(waits, default=0),
            mean_wait_ticks=Fraction(sum(waits), len(waits)) if waits else Fraction(0),
            charger_busy_fraction=Fraction(self.busy_ticks, ticks) if ticks else Fraction(0),
            ticks_run=ticks,
            grants=tuple(agent_id for _, agent_id in self.grants),
            charger_output=sum(a.received for a in self.agents),
            total_drain=sum(a.drained for a in self.agents),
            initial_charge=self.initial_charge,
            final_charge=sum(a.charge for a in self.agents),
        )


def simulate(cfg: SimConfig, record: bool = True) -> SimState:
    return SimState.from_config(cfg, record).run()


def run(cfg: SimConfig, record: bool = True) -> tuple[list[TraceRow], MetricsReport]:
    """Run ``cfg`` to completion; a pure function of the config."""
    state = simulate(cfg, record)
    return state.trace, state.metrics()


def write_trace(rows: Iterable[TraceRow], out) -> None:
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(TRACE_HEADER)
    writer.writerows(rows)


def trace_csv(rows: Iterable[TraceRow]) -> str:
    buf = io.StringIO()
    write_trace(rows, buf)
    return buf.getvalue()


def read_trace(text: str) -> list[TraceRow]:
    reader = csv.reader(io.StringIO(text))
    header = tuple(next(reader))
    if header != TRACE_HEADER:
        raise ValueError(f"unexpected trace header {header}")
    return [
        TraceRow(int(t), int(a), s, int(p), int(c), b, int(q), e)
        for t, a, s, p, c, b, q, e in reader
    ]
