"""Deterministic run-to-completion execution of component instance trees.

The engine owns no clock; callers (the simulator, the CLI) set ``clock_us``
and every trace record is stamped with it. Determinism comes from fixed
orders everywhere: instances in depth-first declaration order, inboxes FIFO,
transitions in declaration order.

One ``step`` consumes exactly one queued event on the first instance (in
depth-first order) whose inbox is non-empty, then runs it to completion:

    event_delivered, action, guard_eval*, transition, exit-position
    executions, state_exited, state_entered, entry-position executions,
    continuous-position executions

Events referenced from state positions execute by direction: an outgoing
event sends its payload inline through the port's connector; a generic event
at entry/exit enqueues itself to the owning instance (payload snapshotted
from same-named properties); at continuous position its action runs inline
without enqueueing, so a quiescent state stays quiescent.

A send that finds no connector, or a peer with no matching incoming event,
is recorded with ``error=E_NO_ROUTE`` and dropped; it is not a runtime fault.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .diagnostics import CiotError, error
from .guards import PrimType, eval_guard, expr_to_text
from .metamodel import (
    ActionDef,
    ActionKind,
    ComponentDef,
    EventDef,
    EventDirection,
    Model,
    PayloadDef,
    instance_paths,
)
from .trace import TraceRecord, fmt_payload


@dataclass
class EventInstance:
    event: EventDef
    payload: dict | None
    source: str  # "env", sender path, or sender "path.port"
    eseq: int


@dataclass
class InstanceState:
    path: str
    component: ComponentDef
    properties: dict
    state: str | None
    inbox: deque[EventInstance] = field(default_factory=deque)


@dataclass
class RuntimeState:
    model: Model
    instances: dict[str, InstanceState]
    order: list[str]  # depth-first instance paths
    routing: dict[tuple[str, str], tuple[str, str]]
    trace: list[TraceRecord] = field(default_factory=list)
    clock_us: int = 0
    seq: int = 0
    eseq: int = 0
    step_count: int = 0
    rng_seed: int = 0  # reserved; core semantics never draw from it

    def record(self, instance: str, kind: str, detail: dict) -> None:
        self.trace.append(TraceRecord(self.seq, self.clock_us, instance, kind, detail))
        self.seq += 1


@dataclass(frozen=True)
class RunResult:
    steps: int
    quiescent: bool
    step_limit_hit: bool


def instantiate(model: Model) -> RuntimeState:
    """Build the instance tree, wire connectors, enter initial states."""
    paths = instance_paths(model)
    instances: dict[str, InstanceState] = {}
    for path, comp in paths:
        machine = comp.state_machine
        initial = machine.initial.name if machine is not None and machine.initial is not None else None
        instances[path] = InstanceState(
            path=path,
            component=comp,
            properties={p.name: _initial_value(comp, p, path) for p in comp.properties},
            state=initial,
        )

    routing: dict[tuple[str, str], tuple[str, str]] = {}
    for path, comp in paths:
        for conn in comp.connectors:
            a = _endpoint_key(path, conn.a)
            b = _endpoint_key(path, conn.b)
            routing.setdefault(a, b)
            routing.setdefault(b, a)

    rt = RuntimeState(model=model, instances=instances, order=[p for p, _ in paths], routing=routing)
    for path, comp in paths:
        inst = instances[path]
        if inst.state is None:
            continue
        rt.record(path, "state_entered", {"state": inst.state})
        state = comp.state_machine.state_named(inst.state)
        for ev in state.entry:
            _execute_positioned(rt, inst, ev, enqueue_generic=True)
    return rt


def _initial_value(comp: ComponentDef, prop, path: str):
    v = prop.initial
    if prop.type is PrimType.FLOAT and isinstance(v, int) and not isinstance(v, bool):
        return float(v)
    ok = (
        (prop.type is PrimType.BOOL and isinstance(v, bool))
        or (prop.type is PrimType.INT and isinstance(v, int) and not isinstance(v, bool))
        or (prop.type is PrimType.FLOAT and isinstance(v, float))
        or (prop.type is PrimType.STRING and isinstance(v, str))
    )
    if not ok:
        raise CiotError(
            "E_INSTANTIATE",
            [
                error(
                    "E_INSTANTIATE",
                    f"property {prop.name!r} of {path} ({comp.name}) is {prop.type.value} "
                    f"but its initial value is {v!r}",
                    prop.span,
                    None,
                )
            ],
        )
    return v


def _endpoint_key(owner_path: str, endpoint) -> tuple[str, str]:
    if endpoint.instance is None:
        return owner_path, endpoint.port.name
    return f"{owner_path}.{endpoint.instance.name}", endpoint.port.name


def inject(rt: RuntimeState, path: str, port: str, event_name: str, payload: dict | None = None) -> None:
    """Queue an incoming event from the environment onto one instance."""
    inst = rt.instances.get(path)
    if inst is None:
        _bad_target(f"no instance at path {path!r}")
    event = inst.component.event_named(event_name)
    if event is None or event.direction is not EventDirection.INCOMING:
        _bad_target(f"component {inst.component.name!r} has no incoming event {event_name!r}")
    if event.port is None or event.port.name != port:
        _bad_target(f"event {event_name!r} is not bound to port {port!r}")
    values = _conform_payload(event.payload, payload, f"event {event_name!r}")
    _enqueue(rt, inst, event, values, "env")


def trigger_internal(rt: RuntimeState, path: str, event_name: str, payload: dict | None = None) -> None:
    """Queue a generic event onto one instance, as sensing hardware would."""
    inst = rt.instances.get(path)
    if inst is None:
        _bad_target(f"no instance at path {path!r}")
    event = inst.component.event_named(event_name)
    if event is None or event.direction is not EventDirection.GENERIC:
        _bad_target(f"component {inst.component.name!r} has no generic event {event_name!r}")
    values = _conform_payload(event.payload, payload, f"event {event_name!r}")
    _enqueue(rt, inst, event, values, "env")


def _bad_target(message: str) -> None:
    raise CiotError("E_BAD_TARGET", [error("E_BAD_TARGET", message, None, None)])


def _conform_payload(payload_def: PayloadDef | None, values: dict | None, what: str) -> dict | None:
    """Check field names and types, widen ints, return field-ordered dict."""
    if payload_def is None:
        if values:
            _type_error(f"{what} carries no payload but values were given")
        return None
    if values is None:
        _type_error(f"{what} requires payload {payload_def.name!r}")
    extra = set(values) - {f.name for f in payload_def.fields}
    if extra:
        _type_error(f"{what}: unknown payload field(s) {sorted(extra)!r}")
    out = {}
    for fld in payload_def.fields:
        if fld.name not in values:
            _type_error(f"{what}: missing payload field {fld.name!r}")
        v = values[fld.name]
        if isinstance(fld.type, PayloadDef):
            if not isinstance(v, dict):
                _type_error(f"{what}: field {fld.name!r} expects a record")
            out[fld.name] = _conform_payload(fld.type, v, what)
            continue
        out[fld.name] = _conform_primitive(fld.type, v, fld.name, what)
    return out


def _conform_primitive(t: PrimType, v, name: str, what: str):
    if t is PrimType.BOOL and isinstance(v, bool):
        return v
    if t is PrimType.INT and isinstance(v, int) and not isinstance(v, bool):
        return v
    if t is PrimType.FLOAT and isinstance(v, (int, float)) and not isinstance(v, bool):
        return float(v)
    if t is PrimType.STRING and isinstance(v, str):
        return v
    _type_error(f"{what}: payload field {name!r} expects {t.value}, got {type(v).__name__}")


def _type_error(message: str) -> None:
    raise CiotError("E_TYPE", [error("E_TYPE", message, None, None)])


def _enqueue(rt: RuntimeState, inst: InstanceState, event: EventDef, values: dict | None, source: str) -> None:
    inst.inbox.append(EventInstance(event, values, source, rt.eseq))
    rt.eseq += 1


def step(rt: RuntimeState) -> bool:
    """Process one queued event to completion; False when nothing is queued."""
    rt.step_count += 1
    inst = next((rt.instances[p] for p in rt.order if rt.instances[p].inbox), None)
    if inst is None:
        return False
    ei = inst.inbox.popleft()
    rt.record(
        inst.path,
        "event_delivered",
        {"event": ei.event.name, "eseq": ei.eseq, "from": ei.source, "payload": fmt_payload(ei.payload)},
    )
    _run_action(rt, inst, ei.event.action, ei.payload)
    if inst.state is None:
        return True
    machine = inst.component.state_machine
    current = machine.state_named(inst.state)
    fired = None
    for t in machine.transitions:
        if t.source is not current:
            continue
        if t.trigger is not None and t.trigger is not ei.event:
            continue
        if t.guard is None:
            fired = t
            break
        payload_scope = ei.payload if t.trigger is not None else None
        result = eval_guard(t.guard, inst.properties, payload_scope)
        rt.record(
            inst.path,
            "guard_eval",
            {
                "transition": f"{t.source.name}->{t.target.name}",
                "guard": _quote(expr_to_text(t.guard)),
                "result": "true" if result else "false",
            },
        )
        if result:
            fired = t
            break
    if fired is not None:
        trigger = fired.trigger.name if fired.trigger is not None else "-"
        rt.record(inst.path, "transition", {"from": fired.source.name, "to": fired.target.name, "trigger": trigger})
        for ev in current.exit:
            _execute_positioned(rt, inst, ev, enqueue_generic=True)
        rt.record(inst.path, "state_exited", {"state": current.name})
        inst.state = fired.target.name
        rt.record(inst.path, "state_entered", {"state": fired.target.name})
        for ev in fired.target.entry:
            _execute_positioned(rt, inst, ev, enqueue_generic=True)
    for ev in machine.state_named(inst.state).continuous:
        _execute_positioned(rt, inst, ev, enqueue_generic=False)
    return True


def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def run_to_quiescence(rt: RuntimeState, max_steps: int = 10000) -> RunResult:
    steps = 0
    while steps < max_steps:
        if not step(rt):
            return RunResult(steps, True, False)
        steps += 1
    quiescent = all(not rt.instances[p].inbox for p in rt.order)
    return RunResult(steps, quiescent, not quiescent)


def _execute_positioned(rt: RuntimeState, inst: InstanceState, ev: EventDef, *, enqueue_generic: bool) -> None:
    if ev.direction is EventDirection.OUTGOING:
        _run_action(rt, inst, ev.action, None, send_event=ev)
    elif enqueue_generic:
        values = _snapshot_payload(inst, ev.payload)
        _enqueue(rt, inst, ev, values, inst.path)
    else:
        _run_action(rt, inst, ev.action, _snapshot_payload(inst, ev.payload))


def _snapshot_payload(inst: InstanceState, payload_def: PayloadDef | None) -> dict | None:
    if payload_def is None:
        return None
    values = {}
    for fld in payload_def.fields:
        v = inst.properties[fld.name]
        values[fld.name] = float(v) if fld.type is PrimType.FLOAT and isinstance(v, int) else v
    return values


def _run_action(
    rt: RuntimeState,
    inst: InstanceState,
    action: ActionDef,
    payload: dict | None,
    send_event: EventDef | None = None,
) -> None:
    effect_scope = None if action.kind is ActionKind.SEND_PAYLOAD else payload
    assigned = {}
    for eff in action.effects:
        value = eval_guard(eff.expr, inst.properties, effect_scope)
        prop = inst.component.property_named(eff.target)
        if prop is not None and prop.type is PrimType.FLOAT and isinstance(value, int):
            value = float(value)
        inst.properties[eff.target] = value
        assigned[eff.target] = value
    rt.record(
        inst.path,
        "action",
        {"action": action.name, "type": action.kind.value, "set": fmt_payload(assigned) if assigned else "-"},
    )
    if action.kind is ActionKind.SEND_PAYLOAD and send_event is not None:
        _send(rt, inst, send_event)


def _send(rt: RuntimeState, inst: InstanceState, event: EventDef) -> None:
    values = _snapshot_payload(inst, event.action.payload)
    port_name = event.port.name if event.port is not None else "-"
    detail = {"port": port_name, "event": event.name}
    route = rt.routing.get((inst.path, port_name))
    delivered = False
    if route is None:
        detail["to"] = "-"
    else:
        peer_path, peer_port = route
        detail["to"] = f"{peer_path}.{peer_port}"
        peer = rt.instances.get(peer_path)
        target_event = _matching_incoming(peer, peer_port, event.action.payload) if peer else None
        if target_event is not None:
            _enqueue(rt, peer, target_event, values, f"{inst.path}.{port_name}")
            delivered = True
    detail["payload"] = fmt_payload(values)
    if not delivered:
        detail["error"] = "E_NO_ROUTE"
    rt.record(inst.path, "payload_sent", detail)


def _matching_incoming(peer: InstanceState, port_name: str, payload_def: PayloadDef | None) -> EventDef | None:
    for ev in peer.component.events:
        if ev.direction is not EventDirection.INCOMING:
            continue
        if ev.port is None or ev.port.name != port_name:
            continue
        mine = ev.payload.name if ev.payload is not None else None
        theirs = payload_def.name if payload_def is not None else None
        if mine == theirs:
            return ev
    return None
