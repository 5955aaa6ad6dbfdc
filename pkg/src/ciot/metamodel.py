"""Resolved model types.

A :class:`Model` is pure data: every name reference has been bound to the
defining object by the resolver, and nothing here mutates after resolution.
Source spans ride along for diagnostics but are excluded from equality, so
two structurally identical models compare equal regardless of where their
text came from.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Union

from .diagnostics import SourceSpan
from .guards import Expr, PrimType

__all__ = [
    "PrimType",
    "ComponentKind",
    "EventDirection",
    "ActionKind",
    "PayloadField",
    "PayloadDef",
    "Operation",
    "InterfaceDef",
    "PropertyDef",
    "PortDef",
    "InstanceDecl",
    "Endpoint",
    "Connector",
    "Assignment",
    "ActionDef",
    "EventDef",
    "StateDef",
    "TransitionDef",
    "StateMachine",
    "ComponentDef",
    "Model",
    "structurally_equal",
    "instance_paths",
    "with_property_initial",
]


class ComponentKind(Enum):
    IOT_ELEMENT = "IoTElement"
    BOARD = "Board"
    VIRTUAL_ENTITY = "VirtualEntity"


class EventDirection(Enum):
    INCOMING = "incoming"
    OUTGOING = "outgoing"
    GENERIC = "generic"


class ActionKind(Enum):
    SEND_PAYLOAD = "SendPayload"
    RECEIVE_PAYLOAD = "ReceivePayload"
    GENERIC = "Generic"


# A payload field is either primitive or another payload record.
FieldType = Union[PrimType, "PayloadDef"]


@dataclass
class PayloadField:
    name: str
    type: FieldType
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


@dataclass
class PayloadDef:
    name: str
    fields: list[PayloadField]
    span: SourceSpan | None = field(default=None, compare=False, repr=False)

    def field_named(self, name: str) -> PayloadField | None:
        for f in self.fields:
            if f.name == name:
                return f
        return None


@dataclass
class Operation:
    name: str
    payload: PayloadDef
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


@dataclass
class InterfaceDef:
    name: str
    operations: list[Operation]
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


@dataclass
class PropertyDef:
    name: str
    type: PrimType
    initial: int | float | bool | str
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


@dataclass
class PortDef:
    name: str
    provided: list[InterfaceDef]
    required: list[InterfaceDef]
    span: SourceSpan | None = field(default=None, compare=False, repr=False)

    def interfaces(self) -> list[InterfaceDef]:
        return [*self.provided, *self.required]


@dataclass
class InstanceDecl:
    name: str
    component: "ComponentDef"
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


@dataclass
class Endpoint:
    """Connector end: a subcomponent's port, or (instance=None) the owner's own port."""

    instance: InstanceDecl | None
    port: PortDef
    span: SourceSpan | None = field(default=None, compare=False, repr=False)

    def describe(self) -> str:
        owner = "self" if self.instance is None else self.instance.name
        return f"{owner}.{self.port.name}"


@dataclass
class Connector:
    a: Endpoint
    b: Endpoint
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


@dataclass
class Assignment:
    """Effect item ``target := expr``; the target names an owner property."""

    target: str
    expr: Expr
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


@dataclass
class ActionDef:
    name: str
    kind: ActionKind
    payload: PayloadDef | None
    port: PortDef | None
    effects: list[Assignment]
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


@dataclass
class EventDef:
    name: str
    direction: EventDirection
    port: PortDef | None
    payload: PayloadDef | None
    action: ActionDef
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


@dataclass
class StateDef:
    name: str
    is_initial: bool
    entry: list[EventDef]
    exit: list[EventDef]
    continuous: list[EventDef]
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


@dataclass
class TransitionDef:
    source: StateDef
    target: StateDef
    trigger: EventDef | None
    guard: Expr | None
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


@dataclass
class StateMachine:
    states: list[StateDef]
    transitions: list[TransitionDef]
    span: SourceSpan | None = field(default=None, compare=False, repr=False)

    @property
    def initial(self) -> StateDef | None:
        for s in self.states:
            if s.is_initial:
                return s
        return None

    def state_named(self, name: str) -> StateDef | None:
        for s in self.states:
            if s.name == name:
                return s
        return None


@dataclass
class ComponentDef:
    name: str
    kind: ComponentKind
    properties: list[PropertyDef]
    ports: list[PortDef]
    subcomponents: list[InstanceDecl]
    connectors: list[Connector]
    events: list[EventDef]
    actions: list[ActionDef]
    state_machine: StateMachine | None
    span: SourceSpan | None = field(default=None, compare=False, repr=False)

    def property_named(self, name: str) -> PropertyDef | None:
        for p in self.properties:
            if p.name == name:
                return p
        return None

    def port_named(self, name: str) -> PortDef | None:
        for p in self.ports:
            if p.name == name:
                return p
        return None

    def event_named(self, name: str) -> EventDef | None:
        for e in self.events:
            if e.name == name:
                return e
        return None


@dataclass
class Model:
    payloads: list[PayloadDef]
    interfaces: list[InterfaceDef]
    components: list[ComponentDef]
    root_instances: list[InstanceDecl]
    source: str | None = field(default=None, compare=False, repr=False)

    def payload_named(self, name: str) -> PayloadDef | None:
        for p in self.payloads:
            if p.name == name:
                return p
        return None

    def interface_named(self, name: str) -> InterfaceDef | None:
        for i in self.interfaces:
            if i.name == name:
                return i
        return None

    def component_named(self, name: str) -> ComponentDef | None:
        for c in self.components:
            if c.name == name:
                return c
        return None


def structurally_equal(a: Model, b: Model) -> bool:
    """Equality up to top-level declaration order.

    Payload, interface, and component declaration order carries no meaning, so
    both models are compared with those lists sorted by name. Order inside a
    component (transitions, entry events, subcomponents, ...) is semantic and
    compared as-is. Source spans never participate in equality.
    """
    return _normalized(a) == _normalized(b)


def _normalized(m: Model) -> Model:
    return replace(
        m,
        payloads=sorted(m.payloads, key=lambda p: p.name),
        interfaces=sorted(m.interfaces, key=lambda i: i.name),
        components=sorted(m.components, key=lambda c: c.name),
    )


def instance_paths(model: Model) -> list[tuple[str, ComponentDef]]:
    """Depth-first (declaration order) list of (dotted path, component)."""
    out: list[tuple[str, ComponentDef]] = []

    def walk(decl: InstanceDecl, prefix: str) -> None:
        path = f"{prefix}.{decl.name}" if prefix else decl.name
        out.append((path, decl.component))
        for child in decl.component.subcomponents:
            walk(child, path)

    for root in model.root_instances:
        walk(root, "")
    return out


def with_property_initial(model: Model, prop_name: str, value: int | float | bool | str) -> Model:
    """Copy of ``model`` with every matching property's initial value replaced.

    Matching means: a component declares a property with this name whose type
    accepts the value (int is widened for float properties). The input model is
    left untouched; raises ValueError when nothing matched.
    """
    m = copy.deepcopy(model)
    matched = False
    for comp in m.components:
        for prop in comp.properties:
            if prop.name != prop_name:
                continue
            if prop.type is PrimType.FLOAT and isinstance(value, (int, float)) and not isinstance(value, bool):
                prop.initial = float(value)
            elif prop.type is PrimType.INT and isinstance(value, int) and not isinstance(value, bool):
                prop.initial = value
            elif prop.type is PrimType.BOOL and isinstance(value, bool):
                prop.initial = value
            elif prop.type is PrimType.STRING and isinstance(value, str):
                prop.initial = value
            else:
                continue
            matched = True
    if not matched:
        raise ValueError(f"no component declares a property named {prop_name!r} accepting {value!r}")
    return m
