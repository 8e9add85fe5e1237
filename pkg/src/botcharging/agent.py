"""Per-agent lifecycle: patrol, charge trip, queue, charge, return, resume."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from botcharging.energy import Band, BatteryGauge, band_of
from botcharging.world import Heading, SubEnvironment, advance, step_toward


class AgentState(enum.Enum):
    WORKING = "Working"
    TRAVELING_TO_DOCK = "TravelingToDock"
    QUEUED = "Queued"
    CHARGING = "Charging"
    RETURNING = "Returning"
    FAILED = "Failed"


LEGAL_TRANSITIONS = frozenset(
    {
        (AgentState.WORKING, AgentState.TRAVELING_TO_DOCK),
        (AgentState.TRAVELING_TO_DOCK, AgentState.QUEUED),
        (AgentState.TRAVELING_TO_DOCK, AgentState.CHARGING),
        (AgentState.QUEUED, AgentState.CHARGING),
        (AgentState.CHARGING, AgentState.RETURNING),
        (AgentState.RETURNING, AgentState.WORKING),
        (AgentState.WORKING, AgentState.FAILED),
        (AgentState.TRAVELING_TO_DOCK, AgentState.FAILED),
        (AgentState.QUEUED, AgentState.FAILED),
        (AgentState.RETURNING, AgentState.FAILED),
    }
)

_ON_TRIP = frozenset(
    {AgentState.TRAVELING_TO_DOCK, AgentState.QUEUED, AgentState.CHARGING, AgentState.RETURNING}
)


class AgentEvent(enum.Enum):
    TRIP_STARTED = "trip_started"
    BECAME_CRITICAL = "became_critical"
    DOCK_ARRIVAL = "dock_arrival"
    CHARGE_DONE = "charge_done"
    RESUMED = "resumed"
    FAILED = "failed"


class AgentStateError(RuntimeError):
    pass


@dataclass(frozen=True)
class StepParams:
    """Per-run constants an agent needs to take one step."""

    limits: tuple[int, int, int, int]
    move_drain: int = 1
    idle_drain: int = 1
    charge_rate: int = 20
    charge_target: int = 1000
    capacity: int = 1000
    bands: tuple[Band, ...] = field(init=False, repr=False)
    band_labels: tuple[str, ...] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        # lookup by charge; classification is the hottest call in a run
        bands = tuple(band_of(c, self.limits) for c in range(self.capacity + 1))
        object.__setattr__(self, "bands", bands)
        object.__setattr__(self, "band_labels", tuple(b.label for b in bands))


@dataclass(slots=True)
class Agent:
    id: int
    env_index: int
    position: int
    heading: Heading
    charge: int
    capacity: int
    state: AgentState = AgentState.WORKING
    saved_position: int | None = None
    odometer: int = 0
    # tick at which a granted agent reaches the charger; set only between grant and Charging
    charger_eta: int | None = None
    critical: bool = False
    drained: int = 0
    received: int = 0

    @classmethod
    def with_gauge(cls, id: int, env_index: int, position: int, heading: Heading, gauge: BatteryGauge, **kw) -> Agent:
        return cls(id, env_index, position, heading, gauge.charge, gauge.capacity, **kw)

    @property
    def gauge(self) -> BatteryGauge:
        return BatteryGauge(self.charge, self.capacity)

    @gauge.setter
    def gauge(self, value: BatteryGauge) -> None:
        self.charge, self.capacity = value.charge, value.capacity

    @property
    def holds_grant(self) -> bool:
        return self.charger_eta is not None

    def check_invariants(self, env: SubEnvironment) -> None:
        if (self.saved_position is not None) != (self.state in _ON_TRIP):
            raise AssertionError(f"agent {self.id}: saved_position {self.saved_position} in {self.state}")
        if self.state is AgentState.FAILED and self.charge != 0:
            raise AssertionError(f"agent {self.id}: failed with charge {self.charge}")
        if not 0 <= self.position <= env.red_post:
            raise AssertionError(f"agent {self.id}: position {self.position} off strip")


def begin_charge_trip(agent: Agent, limits: tuple[int, int, int, int]) -> Agent:
    if agent.state is not AgentState.WORKING:
        raise AgentStateError(f"agent {agent.id} cannot start a trip from {agent.state.value}")
    if band_of(agent.charge, limits) > Band.LOW:
        raise AgentStateError(f"agent {agent.id} does not need charge ({agent.charge})")
    agent.saved_position = agent.position
    agent.state = AgentState.TRAVELING_TO_DOCK
    agent.critical = band_of(agent.charge, limits) is Band.VERY_LOW
    return agent


def resume_work(agent: Agent) -> Agent:
    if agent.state is not AgentState.RETURNING:
        raise AgentStateError(f"agent {agent.id} cannot resume from {agent.state.value}")
    if agent.position != agent.saved_position:
        raise AgentStateError(
            f"agent {agent.id} at {agent.position}, saved position is {agent.saved_position}"
        )
    agent.state = AgentState.WORKING
    agent.saved_position = None
    agent.critical = False
    return agent


def grant_charger(agent: Agent, tick: int, transit_ticks: int) -> Agent:
    """Hand the charger to a docked agent; it starts charging ``transit_ticks`` later."""
    if agent.state not in (AgentState.TRAVELING_TO_DOCK, AgentState.QUEUED):
        raise AgentStateError(f"agent {agent.id} cannot be granted in {agent.state.value}")
    if transit_ticks == 0:
        agent.state = AgentState.CHARGING
        agent.charger_eta = None
    else:
        agent.state = AgentState.QUEUED
        agent.charger_eta = tick + transit_ticks
    return agent


def _drain(agent: Agent, amount: int) -> None:
    before = agent.charge
    after = before - amount if before > amount else 0
    agent.charge = after
    agent.drained += before - after


def step_agent(agent: Agent, env: SubEnvironment, params: StepParams, tick: int) -> list[AgentEvent]:
    """Advance one agent by exactly one tick and report what happened.

    Movement in every travelling state is 1 cm/tick. Only patrol movement
    earns work. A grant holder in transit to the charger cannot fail; any
    other non-charging agent fails the moment its charge reaches zero.
    """
    state = agent.state
    if state is AgentState.FAILED:
        raise AgentStateError(f"agent {agent.id} has failed")
    events: list[AgentEvent] = []
    bands = params.bands
    band_before = bands[agent.charge]

    if state is AgentState.WORKING:
        agent.position, agent.heading = advance(agent.position, agent.heading, env)
        agent.odometer += 1
        _drain(agent, params.move_drain)
        if bands[agent.charge] > Band.LOW:
            return events
        if agent.charge > 0:
            begin_charge_trip(agent, params.limits)
            events.append(AgentEvent.TRIP_STARTED)
    elif state is AgentState.TRAVELING_TO_DOCK:
        if agent.position != env.dock_position:
            agent.position = step_toward(agent.position, env.dock_position)
            _drain(agent, params.move_drain)
        else:
            _drain(agent, params.idle_drain)
    elif state is AgentState.QUEUED:
        _drain(agent, params.idle_drain)
        if agent.charger_eta is not None and tick >= agent.charger_eta:
            agent.charger_eta = None
            agent.state = AgentState.CHARGING
    elif state is AgentState.CHARGING:
        before = agent.charge
        agent.charge = min(agent.capacity, before + params.charge_rate)
        agent.received += agent.charge - before
        if agent.charge >= params.charge_target:
            agent.state = AgentState.RETURNING
            events.append(AgentEvent.CHARGE_DONE)
    elif state is AgentState.RETURNING:
        if agent.position != agent.saved_position:
            agent.position = step_toward(agent.position, agent.saved_position)
            _drain(agent, params.move_drain)
        else:
            _drain(agent, params.idle_drain)

    charge = agent.charge
    if charge == 0 and agent.state is not AgentState.CHARGING and agent.charger_eta is None:
        agent.state = AgentState.FAILED
        agent.saved_position = None
        events.append(AgentEvent.FAILED)
        return events

    if band_before is not Band.VERY_LOW and agent.state is not AgentState.CHARGING:
        if bands[charge] is Band.VERY_LOW:
            agent.critical = True
            events.append(AgentEvent.BECAME_CRITICAL)

    # arrivals only count for ticks that began in the same state, so a trip
    # started at the dock moves on one tick later
    if agent.state is state is AgentState.TRAVELING_TO_DOCK:
        if agent.position == env.dock_position:
            events.append(AgentEvent.DOCK_ARRIVAL)
    elif agent.state is state is AgentState.RETURNING:
        if agent.position == agent.saved_position:
            resume_work(agent)
            events.append(AgentEvent.RESUMED)
    return events
