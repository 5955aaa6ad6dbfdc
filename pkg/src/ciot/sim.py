"""Discrete-event simulation of sensing scenarios against a model.

The simulator owns the clock. It ticks at a fixed sample period from 0 to
the horizon inclusive, applies pending environment stimuli at each tick,
probes every bound distance sensor, and lets the engine run to quiescence
after each probe. The engine never sees time; it only stamps records with
the clock the simulator sets.

Scenario files are plain text: ``#`` comments, ``key=value`` headers
(``mode``, ``horizon_ms``, ``sample_period_ms``), then stimuli, one per line:

    at <ms> slot <path> occupy <distance_m>
    at <ms> slot <path> vacate
    at <ms> slot <path> echo <duration_ms>

``duration`` mode feeds echo durations straight to the sensor; ``physical``
mode tracks object distance per slot and converts it with ``echo_duration``.
A vacant slot in physical mode reads the floor at ``floor_distance_m``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .diagnostics import CiotError, error
from .engine import RuntimeState, instantiate, run_to_quiescence, trigger_internal
from .guards import PrimType
from .metamodel import ComponentDef, EventDef, EventDirection, Model
from .trace import TraceRecord

DEFAULT_SAMPLE_PERIOD_MS = 100
DEFAULT_FLOOR_DISTANCE_M = 2.5
DEFAULT_SPEED_M_PER_S = 343.0

MODES = ("duration", "physical")
_VERBS = {"duration": ("echo",), "physical": ("occupy", "vacate")}


@dataclass(frozen=True)
class Stimulus:
    time_ms: int
    slot: str
    verb: str  # occupy | vacate | echo
    value: float | None


@dataclass
class Scenario:
    mode: str
    horizon_ms: int
    sample_period_ms: int = DEFAULT_SAMPLE_PERIOD_MS
    stimuli: list[Stimulus] = field(default_factory=list)
    source: str | None = None


@dataclass
class SimResult:
    runtime: RuntimeState
    scenario: Scenario

    @property
    def trace(self) -> list[TraceRecord]:
        return self.runtime.trace


def echo_duration(distance_m: float, speed_m_per_s: float = DEFAULT_SPEED_M_PER_S) -> float:
    """Round-trip ultrasonic echo time in milliseconds."""
    if distance_m <= 0:
        _scenario_error("E_DOMAIN", f"distance must be positive, got {distance_m}")
    if speed_m_per_s <= 0:
        _scenario_error("E_DOMAIN", f"speed must be positive, got {speed_m_per_s}")
    return 2.0 * distance_m / speed_m_per_s * 1000.0


def load_scenario(text: str, source: str | None = None) -> Scenario:
    mode: str | None = None
    horizon: int | None = None
    period: int | None = None
    stimuli: list[Stimulus] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        where = f"line {lineno}"
        if line.startswith("at ") or line == "at":
            stimuli.append(_parse_stimulus(line, where))
            continue
        if "=" in line:
            key, _, value = line.partition("=")
            key, value = key.strip(), value.strip()
            if key == "mode":
                if value not in MODES:
                    _scenario_error("E_SCENARIO", f"{where}: mode must be one of {MODES}, got {value!r}")
                mode = value
            elif key == "horizon_ms":
                horizon = _parse_int(value, key, where)
            elif key == "sample_period_ms":
                period = _parse_int(value, key, where)
            else:
                _scenario_error("E_SCENARIO", f"{where}: unknown header {key!r}")
            continue
        _scenario_error("E_SCENARIO", f"{where}: cannot parse {line!r}")

    if mode is None:
        _scenario_error("E_SCENARIO", "scenario does not set mode=")
    if horizon is None:
        _scenario_error("E_SCENARIO", "scenario does not set horizon_ms=")
    if horizon < 0:
        _scenario_error("E_SCENARIO", f"horizon_ms must be non-negative, got {horizon}")
    if period is None:
        period = DEFAULT_SAMPLE_PERIOD_MS
    if period <= 0:
        _scenario_error("E_SCENARIO", f"sample_period_ms must be positive, got {period}")
    for prev, st in zip(stimuli, stimuli[1:]):
        if st.time_ms < prev.time_ms:
            _scenario_error("E_SCENARIO", f"stimuli out of order: {st.time_ms} ms after {prev.time_ms} ms")
    for st in stimuli:
        if st.verb not in _VERBS[mode]:
            _scenario_error("E_SCENARIO", f"stimulus {st.verb!r} is not valid in {mode} mode")
        if st.time_ms > horizon:
            _scenario_error("E_SCENARIO", f"stimulus at {st.time_ms} ms lies beyond horizon_ms={horizon}")
    return Scenario(mode, horizon, period, stimuli, source)


def load_scenario_file(path: str) -> Scenario:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        _scenario_error("E_IO", f"cannot read scenario {path!r}: {exc}")
    return load_scenario(text, path)


def _parse_stimulus(line: str, where: str) -> Stimulus:
    tokens = line.split()
    if len(tokens) < 5 or tokens[0] != "at" or tokens[2] != "slot":
        _scenario_error("E_SCENARIO", f"{where}: expected 'at <ms> slot <path> <verb> [value]'")
    time_ms = _parse_int(tokens[1], "time", where)
    if time_ms < 0:
        _scenario_error("E_SCENARIO", f"{where}: stimulus time must be non-negative")
    slot, verb = tokens[3], tokens[4]
    if verb == "vacate":
        if len(tokens) != 5:
            _scenario_error("E_SCENARIO", f"{where}: vacate takes no value")
        return Stimulus(time_ms, slot, verb, None)
    if verb in ("occupy", "echo"):
        if len(tokens) != 6:
            _scenario_error("E_SCENARIO", f"{where}: {verb} needs exactly one value")
        try:
            value = float(tokens[5])
        except ValueError:
            _scenario_error("E_SCENARIO", f"{where}: {verb} value {tokens[5]!r} is not a number")
        if verb == "occupy" and value <= 0:
            _scenario_error("E_SCENARIO", f"{where}: occupy distance must be positive")
        if verb == "echo" and value < 0:
            _scenario_error("E_SCENARIO", f"{where}: echo duration must be non-negative")
        return Stimulus(time_ms, slot, verb, value)
    _scenario_error("E_SCENARIO", f"{where}: unknown stimulus verb {verb!r}")


def _parse_int(text: str, what: str, where: str) -> int:
    try:
        return int(text)
    except ValueError:
        _scenario_error("E_SCENARIO", f"{where}: {what} {text!r} is not an integer")


def _scenario_error(code: str, message: str) -> None:
    raise CiotError(code, [error(code, message, None, None)])


def _sensing_event(comp: ComponentDef) -> EventDef | None:
    """A component senses iff exactly one generic event carries a payload
    that is exactly one float field named ``duration``."""
    found = []
    for ev in comp.events:
        if ev.direction is not EventDirection.GENERIC or ev.payload is None:
            continue
        fields = ev.payload.fields
        if len(fields) == 1 and fields[0].name == "duration" and fields[0].type is PrimType.FLOAT:
            found.append(ev)
    return found[0] if len(found) == 1 else None


def bind_environment(rt: RuntimeState, slots: list[str]) -> dict[str, list[tuple[str, str]]]:
    """Map each scenario slot to the sensing instances at or beneath it."""
    sensors: list[tuple[str, str]] = []
    for path in rt.order:
        ev = _sensing_event(rt.instances[path].component)
        if ev is not None:
            sensors.append((path, ev.name))
    bound: dict[str, list[tuple[str, str]]] = {}
    for slot in slots:
        matches = [(p, e) for p, e in sensors if p == slot or p.startswith(slot + ".")]
        if not matches:
            _scenario_error("E_UNBOUND_SENSOR", f"slot {slot!r} matches no sensing instance")
        bound[slot] = matches
    return bound


def simulate(
    model: Model,
    scenario: Scenario,
    *,
    speed_m_per_s: float = DEFAULT_SPEED_M_PER_S,
    sample_period_ms: int | None = None,
    floor_distance_m: float = DEFAULT_FLOOR_DISTANCE_M,
    max_steps: int = 10000,
) -> SimResult:
    period = scenario.sample_period_ms if sample_period_ms is None else sample_period_ms
    if period <= 0:
        _scenario_error("E_SCENARIO", f"sample period must be positive, got {period}")
    rt = instantiate(model)
    _quiesce(rt, max_steps)

    slots = sorted({st.slot for st in scenario.stimuli}) or _implicit_slots(rt)
    bound = bind_environment(rt, slots)
    # Environment state per slot: distance to the nearest object (physical
    # mode) or the last echo reading (duration mode, None until set).
    distance: dict[str, float | None] = {s: None for s in slots}
    echo: dict[str, float | None] = {s: None for s in slots}

    pending = list(scenario.stimuli)
    for t_ms in range(0, scenario.horizon_ms + 1, period):
        rt.clock_us = t_ms * 1000
        while pending and pending[0].time_ms <= t_ms:
            st = pending.pop(0)
            if st.verb == "occupy":
                distance[st.slot] = st.value
            elif st.verb == "vacate":
                distance[st.slot] = None
            else:
                echo[st.slot] = st.value
        for slot in slots:
            if scenario.mode == "duration":
                reading = echo[slot]
                if reading is None:
                    continue
            else:
                d = distance[slot] if distance[slot] is not None else floor_distance_m
                reading = echo_duration(d, speed_m_per_s)
            for path, event_name in bound[slot]:
                trigger_internal(rt, path, event_name, {"duration": reading})
                _quiesce(rt, max_steps)
    return SimResult(rt, scenario)


def _implicit_slots(rt: RuntimeState) -> list[str]:
    roots = [p for p in rt.order if "." not in p]
    return roots


def _quiesce(rt: RuntimeState, max_steps: int) -> None:
    result = run_to_quiescence(rt, max_steps)
    if result.step_limit_hit:
        raise CiotError(
            "E_STEP_LIMIT",
            [error("E_STEP_LIMIT", f"model did not quiesce within {max_steps} steps", None, None)],
        )


def led_paths(rt: RuntimeState) -> tuple[str, str]:
    """Locate the red and green indicator instances by component name."""
    reds = [p for p in rt.order if rt.instances[p].component.name == "RedLED"]
    greens = [p for p in rt.order if rt.instances[p].component.name == "GreenLED"]
    if len(reds) != 1 or len(greens) != 1:
        _scenario_error(
            "E_TRACE",
            f"occupancy needs exactly one RedLED and one GreenLED instance, found {len(reds)} and {len(greens)}",
        )
    return reds[0], greens[0]


def occupancy_timeline(result: SimResult) -> list[tuple[int, str]]:
    """Slot status over time, read off the LED states in the trace.

    The trace is replayed in order; at the end of each clock instant the two
    indicator states decide the sample: red ON means occupied, green ON means
    vacant, neither means no sample yet, both is a contradiction. Consecutive
    equal samples collapse.
    """
    rt = result.runtime
    red_path, green_path = led_paths(rt)
    state = {red_path: None, green_path: None}
    timeline: list[tuple[int, str]] = []

    def close_group(t_us: int) -> None:
        red_on = state[red_path] == "ON"
        green_on = state[green_path] == "ON"
        if red_on and green_on:
            _scenario_error("E_TRACE", f"both indicators ON at t={t_us}us")
        if not red_on and not green_on:
            return
        status = "occupied" if red_on else "vacant"
        if not timeline or timeline[-1][1] != status:
            timeline.append((t_us // 1000, status))

    current_t: int | None = None
    for rec in rt.trace:
        if current_t is not None and rec.time_us != current_t:
            close_group(current_t)
        current_t = rec.time_us
        if rec.kind == "state_entered" and rec.instance in state:
            state[rec.instance] = rec.detail["state"]
    if current_t is not None:
        close_group(current_t)
    return timeline
