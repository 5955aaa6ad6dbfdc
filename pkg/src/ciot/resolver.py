"""Name resolution: raw syntax tree -> bound Model.

Collects every resolution problem (unknown references, duplicate names,
payload/composition cycles) before failing, so one run reports them all.
Guard and effect expressions are left as unresolved name trees; the validator
types them (rule R4).
"""

from __future__ import annotations

from .diagnostics import (
    E_CYCLE,
    E_DUPLICATE,
    E_UNKNOWN_REF,
    CiotError,
    Diagnostic,
    error,
)
from .metamodel import (
    ActionDef,
    ActionKind,
    Assignment,
    ComponentDef,
    ComponentKind,
    Connector,
    Endpoint,
    EventDef,
    EventDirection,
    InstanceDecl,
    InterfaceDef,
    Model,
    Operation,
    PayloadDef,
    PayloadField,
    PortDef,
    PropertyDef,
    StateDef,
    StateMachine,
    TransitionDef,
)
from .parser import (
    AstComponent,
    AstInstance,
    AstModel,
    Ref,
)

_ACTION_KINDS = {
    "send": ActionKind.SEND_PAYLOAD,
    "receive": ActionKind.RECEIVE_PAYLOAD,
    "generic": ActionKind.GENERIC,
}
_EVENT_DIRECTIONS = {
    "incoming": EventDirection.INCOMING,
    "outgoing": EventDirection.OUTGOING,
    "generic": EventDirection.GENERIC,
}
_COMPONENT_KINDS = {
    "IoTElement": ComponentKind.IOT_ELEMENT,
    "Board": ComponentKind.BOARD,
    "VirtualEntity": ComponentKind.VIRTUAL_ENTITY,
}


def resolve(ast: AstModel) -> Model:
    """Bind all names; raises CiotError carrying every resolution diagnostic."""
    r = _Resolver(ast)
    model = r.run()
    if r.diagnostics:
        raise CiotError(r.diagnostics[0].rule, r.diagnostics)
    assert model is not None
    return model


class _Resolver:
    def __init__(self, ast: AstModel) -> None:
        self.ast = ast
        self.file = ast.file
        self.diagnostics: list[Diagnostic] = []
        self.payloads: dict[str, PayloadDef] = {}
        self.interfaces: dict[str, InterfaceDef] = {}
        self.components: dict[str, ComponentDef] = {}

    def err(self, rule: str, message: str, span) -> None:
        self.diagnostics.append(error(rule, message, span, self.file))

    def run(self) -> Model | None:
        # Pass 1: register every top-level definition (shells only) so that
        # forward references work.
        for p in self.ast.payloads:
            if p.name.name in self.payloads:
                self.err(E_DUPLICATE, f"duplicate payload {p.name.name!r}", p.name.span)
                continue
            self.payloads[p.name.name] = PayloadDef(p.name.name, [], p.span)
        for i in self.ast.interfaces:
            if i.name.name in self.interfaces:
                self.err(E_DUPLICATE, f"duplicate interface {i.name.name!r}", i.name.span)
                continue
            self.interfaces[i.name.name] = InterfaceDef(i.name.name, [], i.span)
        for c in self.ast.components:
            if c.name.name in self.components:
                self.err(E_DUPLICATE, f"duplicate component {c.name.name!r}", c.name.span)
                continue
            self.components[c.name.name] = ComponentDef(
                name=c.name.name,
                kind=_COMPONENT_KINDS[c.kind],
                properties=[],
                ports=[],
                subcomponents=[],
                connectors=[],
                events=[],
                actions=[],
                state_machine=None,
                span=c.span,
            )

        # Pass 2: fill payload fields, then interfaces, then components.
        for p in self.ast.payloads:
            target = self.payloads.get(p.name.name)
            if target is None or target.fields:
                continue  # duplicate; only the first declaration is filled
            seen: set[str] = set()
            for f in p.fields:
                if f.name in seen:
                    self.err(E_DUPLICATE, f"duplicate field {f.name!r} in payload {p.name.name!r}", f.name_span)
                    continue
                seen.add(f.name)
                if f.type.prim is not None:
                    target.fields.append(PayloadField(f.name, f.type.prim, f.name_span))
                else:
                    ref = f.type.payload
                    assert ref is not None
                    bound = self.payloads.get(ref.name)
                    if bound is None:
                        self.err(E_UNKNOWN_REF, f"unknown payload type {ref.name!r}", ref.span)
                        continue
                    target.fields.append(PayloadField(f.name, bound, f.name_span))
        self._check_payload_cycles()

        for i in self.ast.interfaces:
            target = self.interfaces.get(i.name.name)
            if target is None or target.operations:
                continue
            seen = set()
            for op in i.operations:
                if op.name.name in seen:
                    self.err(
                        E_DUPLICATE,
                        f"duplicate operation {op.name.name!r} in interface {i.name.name!r}",
                        op.name.span,
                    )
                    continue
                seen.add(op.name.name)
                payload = self._payload(op.payload)
                if payload is not None:
                    target.operations.append(Operation(op.name.name, payload, op.name.span))

        for c in self.ast.components:
            target = self.components.get(c.name.name)
            if target is not None and target.span is c.span:
                self._fill_component(c, target)
        # Connectors wait until every component's ports exist; a composite
        # may be declared before the children it wires.
        for c in self.ast.components:
            target = self.components.get(c.name.name)
            if target is not None and target.span is c.span:
                self._fill_connectors(c, target)
        self._check_composition_cycles()

        roots = self._instances(self.ast.instances, context="model")

        if self.diagnostics:
            return None
        return Model(
            payloads=[self.payloads[p.name.name] for p in self.ast.payloads if p.name.name in self.payloads],
            interfaces=[self.interfaces[i.name.name] for i in self.ast.interfaces if i.name.name in self.interfaces],
            components=[self.components[c.name.name] for c in self.ast.components if c.name.name in self.components],
            root_instances=roots,
            source=self.file,
        )

    # -- lookups ---------------------------------------------------------

    def _payload(self, ref: Ref) -> PayloadDef | None:
        found = self.payloads.get(ref.name)
        if found is None:
            self.err(E_UNKNOWN_REF, f"unknown payload {ref.name!r}", ref.span)
        return found

    def _interface(self, ref: Ref) -> InterfaceDef | None:
        found = self.interfaces.get(ref.name)
        if found is None:
            self.err(E_UNKNOWN_REF, f"unknown interface {ref.name!r}", ref.span)
        return found

    def _component(self, ref: Ref) -> ComponentDef | None:
        found = self.components.get(ref.name)
        if found is None:
            self.err(E_UNKNOWN_REF, f"unknown component {ref.name!r}", ref.span)
        return found

    # -- component internals ----------------------------------------------

    def _instances(self, decls: list[AstInstance], context: str) -> list[InstanceDecl]:
        out: list[InstanceDecl] = []
        seen: set[str] = set()
        for d in decls:
            if d.name.name in seen:
                self.err(E_DUPLICATE, f"duplicate instance {d.name.name!r} in {context}", d.name.span)
                continue
            seen.add(d.name.name)
            comp = self._component(d.component)
            if comp is not None:
                out.append(InstanceDecl(d.name.name, comp, d.span))
        return out

    def _fill_component(self, ast: AstComponent, comp: ComponentDef) -> None:
        cname = ast.name.name

        seen: set[str] = set()
        for prop in ast.properties:
            if prop.name in seen:
                self.err(E_DUPLICATE, f"duplicate property {prop.name!r} in component {cname!r}", prop.name_span)
                continue
            seen.add(prop.name)
            comp.properties.append(PropertyDef(prop.name, prop.type, prop.initial.value, prop.name_span))

        seen = set()
        for port in ast.ports:
            if port.name.name in seen:
                self.err(E_DUPLICATE, f"duplicate port {port.name.name!r} in component {cname!r}", port.name.span)
                continue
            seen.add(port.name.name)
            provided = [i for i in (self._interface(r) for r in port.provides) if i is not None]
            required = [i for i in (self._interface(r) for r in port.requires) if i is not None]
            comp.ports.append(PortDef(port.name.name, provided, required, port.span))

        comp.subcomponents.extend(self._instances(ast.instances, context=f"component {cname!r}"))

        # Actions first: events reference them.
        seen = set()
        for act in ast.actions:
            if act.name.name in seen:
                self.err(E_DUPLICATE, f"duplicate action {act.name.name!r} in component {cname!r}", act.name.span)
                continue
            seen.add(act.name.name)
            payload = self._payload(act.payload) if act.payload is not None else None
            port = self._component_port(act.port, comp) if act.port is not None else None
            effects = [Assignment(e.target, e.expr, e.target_span) for e in act.effects]
            comp.actions.append(ActionDef(act.name.name, _ACTION_KINDS[act.kind], payload, port, effects, act.span))

        actions = {a.name: a for a in comp.actions}
        seen = set()
        for ev in ast.events:
            if ev.name.name in seen:
                self.err(E_DUPLICATE, f"duplicate event {ev.name.name!r} in component {cname!r}", ev.name.span)
                continue
            seen.add(ev.name.name)
            payload = self._payload(ev.payload) if ev.payload is not None else None
            port = self._component_port(ev.port, comp) if ev.port is not None else None
            action = actions.get(ev.action.name)
            if action is None:
                self.err(E_UNKNOWN_REF, f"unknown action {ev.action.name!r} in component {cname!r}", ev.action.span)
                continue
            comp.events.append(EventDef(ev.name.name, _EVENT_DIRECTIONS[ev.direction], port, payload, action, ev.span))

        if ast.machine is not None:
            comp.state_machine = self._machine(ast, comp)

    def _fill_connectors(self, ast: AstComponent, comp: ComponentDef) -> None:
        for conn in ast.connectors:
            a = self._endpoint(conn.a, comp)
            b = self._endpoint(conn.b, comp)
            if a is not None and b is not None:
                comp.connectors.append(Connector(a, b, conn.span))

    def _component_port(self, ref: Ref, comp: ComponentDef) -> PortDef | None:
        port = comp.port_named(ref.name)
        if port is None:
            self.err(E_UNKNOWN_REF, f"unknown port {ref.name!r} in component {comp.name!r}", ref.span)
        return port

    def _endpoint(self, ast_ep, comp: ComponentDef) -> Endpoint | None:
        if ast_ep.instance is None:
            port = comp.port_named(ast_ep.port.name)
            if port is None:
                self.err(E_UNKNOWN_REF, f"unknown port {ast_ep.port.name!r} on 'self'", ast_ep.port.span)
                return None
            return Endpoint(None, port, ast_ep.span)
        inst = next((d for d in comp.subcomponents if d.name == ast_ep.instance.name), None)
        if inst is None:
            self.err(
                E_UNKNOWN_REF,
                f"unknown subcomponent instance {ast_ep.instance.name!r} in component {comp.name!r}",
                ast_ep.instance.span,
            )
            return None
        port = inst.component.port_named(ast_ep.port.name)
        if port is None:
            self.err(
                E_UNKNOWN_REF,
                f"component {inst.component.name!r} has no port {ast_ep.port.name!r}",
                ast_ep.port.span,
            )
            return None
        return Endpoint(inst, port, ast_ep.span)

    def _machine(self, ast: AstComponent, comp: ComponentDef) -> StateMachine:
        assert ast.machine is not None
        events = {e.name: e for e in comp.events}
        states: list[StateDef] = []
        seen: set[str] = set()

        def event_refs(refs: list[Ref]) -> list[EventDef]:
            out = []
            for r in refs:
                ev = events.get(r.name)
                if ev is None:
                    self.err(E_UNKNOWN_REF, f"unknown event {r.name!r} in component {comp.name!r}", r.span)
                else:
                    out.append(ev)
            return out

        for s in ast.machine.states:
            if s.name.name in seen:
                self.err(E_DUPLICATE, f"duplicate state {s.name.name!r} in component {comp.name!r}", s.name.span)
                continue
            seen.add(s.name.name)
            states.append(
                StateDef(
                    name=s.name.name,
                    is_initial=s.initial,
                    entry=event_refs(s.entry),
                    exit=event_refs(s.exit),
                    continuous=event_refs(s.continuous),
                    span=s.span,
                )
            )

        by_name = {s.name: s for s in states}
        transitions: list[TransitionDef] = []
        for t in ast.machine.transitions:
            source = by_name.get(t.source.name)
            if source is None:
                self.err(E_UNKNOWN_REF, f"unknown state {t.source.name!r}", t.source.span)
            target = by_name.get(t.target.name)
            if target is None:
                self.err(E_UNKNOWN_REF, f"unknown state {t.target.name!r}", t.target.span)
            trigger = None
            if t.trigger is not None:
                trigger = events.get(t.trigger.name)
                if trigger is None:
                    self.err(E_UNKNOWN_REF, f"unknown event {t.trigger.name!r}", t.trigger.span)
                    continue
            if source is None or target is None:
                continue
            transitions.append(TransitionDef(source, target, trigger, t.guard, t.span))

        return StateMachine(states, transitions, ast.machine.span)

    # -- cycle checks ------------------------------------------------------

    def _check_payload_cycles(self) -> None:
        visiting: set[str] = set()
        done: set[str] = set()

        def visit(p: PayloadDef) -> None:
            if p.name in done:
                return
            if p.name in visiting:
                self.err(E_CYCLE, f"payload {p.name!r} is part of a recursive payload cycle", p.span)
                done.add(p.name)
                return
            visiting.add(p.name)
            for f in p.fields:
                if isinstance(f.type, PayloadDef):
                    visit(f.type)
            visiting.discard(p.name)
            done.add(p.name)

        for p in self.payloads.values():
            visit(p)

    def _check_composition_cycles(self) -> None:
        visiting: set[str] = set()
        done: set[str] = set()

        def visit(c: ComponentDef) -> None:
            if c.name in done:
                return
            if c.name in visiting:
                self.err(E_CYCLE, f"component {c.name!r} is part of a composition cycle", c.span)
                done.add(c.name)
                return
            visiting.add(c.name)
            for d in c.subcomponents:
                visit(d.component)
            visiting.discard(c.name)
            done.add(c.name)

        for c in self.components.values():
            visit(c)
