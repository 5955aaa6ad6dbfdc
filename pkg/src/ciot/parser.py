"""Recursive-descent parser for the component-model DSL.

Produces a raw syntax tree whose name references are unresolved strings with
source spans; the resolver binds them into a :class:`~ciot.metamodel.Model`.
The normative grammar lives in ``docs/grammar.md``.

Naming rule: entity names (payloads, interfaces, components, ports, events,
actions, states, instances) must be plain identifiers. Member positions
(payload fields, property names, assignment targets, names after ``payload.``)
also accept keywords, except the expression-reserved words
``true false and or not payload``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .diagnostics import E_PARSE, CiotError, SourceSpan, error
from .guards import Binary, Expr, Literal, NameRef, PayloadFieldRef, PrimType, Unary
from .lexer import EXPR_RESERVED, Token, TokenKind, decode_string, tokenize

COMPONENT_KINDS = ("IoTElement", "Board", "VirtualEntity")
_PRIM_NAMES = {"int": PrimType.INT, "float": PrimType.FLOAT, "bool": PrimType.BOOL, "string": PrimType.STRING}


@dataclass(frozen=True)
class Ref:
    """Unresolved name occurrence."""

    name: str
    span: SourceSpan


@dataclass
class AstTypeRef:
    prim: PrimType | None
    payload: Ref | None
    span: SourceSpan


@dataclass
class AstPayloadField:
    name: str
    name_span: SourceSpan
    type: AstTypeRef


@dataclass
class AstPayload:
    name: Ref
    fields: list[AstPayloadField]
    span: SourceSpan


@dataclass
class AstOperation:
    name: Ref
    payload: Ref


@dataclass
class AstInterface:
    name: Ref
    operations: list[AstOperation]
    span: SourceSpan


@dataclass
class AstProperty:
    name: str
    name_span: SourceSpan
    type: PrimType
    type_span: SourceSpan
    initial: Literal


@dataclass
class AstPort:
    name: Ref
    provides: list[Ref]
    requires: list[Ref]
    span: SourceSpan


@dataclass
class AstInstance:
    name: Ref
    component: Ref
    span: SourceSpan


@dataclass
class AstEndpoint:
    instance: Ref | None  # None means "self"
    port: Ref
    span: SourceSpan


@dataclass
class AstConnector:
    a: AstEndpoint
    b: AstEndpoint
    span: SourceSpan


@dataclass
class AstAssign:
    target: str
    target_span: SourceSpan
    expr: Expr


@dataclass
class AstAction:
    name: Ref
    kind: str  # "send" | "receive" | "generic"
    port: Ref | None
    payload: Ref | None
    effects: list[AstAssign]
    span: SourceSpan


@dataclass
class AstEvent:
    name: Ref
    direction: str  # "incoming" | "outgoing" | "generic"
    port: Ref | None
    payload: Ref | None
    action: Ref
    span: SourceSpan


@dataclass
class AstState:
    name: Ref
    initial: bool
    entry: list[Ref]
    exit: list[Ref]
    continuous: list[Ref]
    span: SourceSpan


@dataclass
class AstTransition:
    source: Ref
    target: Ref
    trigger: Ref | None
    guard: Expr | None
    span: SourceSpan


@dataclass
class AstMachine:
    states: list[AstState]
    transitions: list[AstTransition]
    span: SourceSpan


@dataclass
class AstComponent:
    name: Ref
    kind: str
    kind_span: SourceSpan
    properties: list[AstProperty] = field(default_factory=list)
    ports: list[AstPort] = field(default_factory=list)
    instances: list[AstInstance] = field(default_factory=list)
    connectors: list[AstConnector] = field(default_factory=list)
    events: list[AstEvent] = field(default_factory=list)
    actions: list[AstAction] = field(default_factory=list)
    machine: AstMachine | None = None
    span: SourceSpan | None = None


@dataclass
class AstModel:
    payloads: list[AstPayload]
    interfaces: list[AstInterface]
    components: list[AstComponent]
    instances: list[AstInstance]
    file: str | None = None


class _Stream:
    def __init__(self, tokens: list[Token], file: str | None) -> None:
        self.tokens = tokens
        self.pos = 0
        self.file = file

    @property
    def current(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind is not TokenKind.EOI:
            self.pos += 1
        return tok

    def check(self, kind: TokenKind, text: str | None = None) -> bool:
        tok = self.current
        return tok.kind is kind and (text is None or tok.text == text)

    def accept(self, kind: TokenKind, text: str | None = None) -> Token | None:
        if self.check(kind, text):
            return self.advance()
        return None

    def expect(self, kind: TokenKind, text: str | None = None, what: str | None = None) -> Token:
        if self.check(kind, text):
            return self.advance()
        wanted = what or (f"{kind.value} {text!r}" if text else kind.value)
        return self.fail(f"expected {wanted}, got {self.current.describe()}")

    def fail(self, message: str, span: SourceSpan | None = None):
        at = span or self.current.span
        diag = error(E_PARSE, message, at, self.file)
        raise CiotError(E_PARSE, [diag])


def parse(source: str, file: str | None = None) -> AstModel:
    """Parse DSL text into a raw syntax tree (raises CiotError E_LEX/E_PARSE)."""
    ts = _Stream(tokenize(source, file), file)
    payloads: list[AstPayload] = []
    interfaces: list[AstInterface] = []
    components: list[AstComponent] = []
    instances: list[AstInstance] = []
    while not ts.check(TokenKind.EOI):
        if ts.check(TokenKind.KEYWORD, "payload"):
            payloads.append(_parse_payload(ts))
        elif ts.check(TokenKind.KEYWORD, "interface"):
            interfaces.append(_parse_interface(ts))
        elif ts.check(TokenKind.KEYWORD, "component"):
            components.append(_parse_component(ts))
        elif ts.check(TokenKind.KEYWORD, "instance"):
            instances.append(_parse_instance(ts))
        else:
            ts.fail(
                "expected a top-level declaration "
                f"(payload, interface, component, or instance), got {ts.current.describe()}"
            )
    return AstModel(payloads, interfaces, components, instances, file)


def parse_expression(source: str, file: str | None = None) -> Expr:
    """Parse a standalone guard/effect expression (used by tests and tools)."""
    ts = _Stream(tokenize(source, file), file)
    expr = _parse_expr(ts)
    ts.expect(TokenKind.EOI)
    return expr


def _entity_name(ts: _Stream, what: str) -> Ref:
    tok = ts.current
    if tok.kind is TokenKind.IDENT:
        ts.advance()
        return Ref(tok.text, tok.span)
    if tok.kind is TokenKind.KEYWORD:
        ts.fail(f"expected {what} (identifier), got keyword {tok.text!r}")
    ts.fail(f"expected {what} (identifier), got {tok.describe()}")
    raise AssertionError  # unreachable


def _member_name(ts: _Stream, what: str) -> tuple[str, SourceSpan]:
    tok = ts.current
    if tok.kind is TokenKind.IDENT or (tok.kind is TokenKind.KEYWORD and tok.text not in EXPR_RESERVED):
        ts.advance()
        return tok.text, tok.span
    if tok.kind is TokenKind.KEYWORD:
        ts.fail(f"expected {what}, got {tok.text!r} (reserved in expressions)")
    ts.fail(f"expected {what}, got {tok.describe()}")
    raise AssertionError  # unreachable


def _parse_payload(ts: _Stream) -> AstPayload:
    start = ts.expect(TokenKind.KEYWORD, "payload").span
    name = _entity_name(ts, "payload name")
    ts.expect(TokenKind.PUNCT, "{")
    fields: list[AstPayloadField] = []
    while not ts.check(TokenKind.PUNCT, "}"):
        fname, fspan = _member_name(ts, "field name")
        ts.expect(TokenKind.PUNCT, ":")
        ftype = _parse_type_ref(ts)
        ts.expect(TokenKind.PUNCT, ";")
        fields.append(AstPayloadField(fname, fspan, ftype))
    end = ts.expect(TokenKind.PUNCT, "}").span
    return AstPayload(name, fields, start.merge(end))


def _parse_type_ref(ts: _Stream) -> AstTypeRef:
    tok = ts.current
    if tok.kind is TokenKind.KEYWORD and tok.text in _PRIM_NAMES:
        ts.advance()
        return AstTypeRef(_PRIM_NAMES[tok.text], None, tok.span)
    if tok.kind is TokenKind.IDENT:
        ts.advance()
        return AstTypeRef(None, Ref(tok.text, tok.span), tok.span)
    ts.fail(f"expected a type (int, float, bool, string, or payload name), got {tok.describe()}")
    raise AssertionError  # unreachable


def _parse_interface(ts: _Stream) -> AstInterface:
    start = ts.expect(TokenKind.KEYWORD, "interface").span
    name = _entity_name(ts, "interface name")
    ts.expect(TokenKind.PUNCT, "{")
    ops: list[AstOperation] = []
    while not ts.check(TokenKind.PUNCT, "}"):
        ts.expect(TokenKind.KEYWORD, "op")
        op_name = _entity_name(ts, "operation name")
        ts.expect(TokenKind.PUNCT, "(")
        payload = _entity_name(ts, "payload name")
        ts.expect(TokenKind.PUNCT, ")")
        ts.expect(TokenKind.PUNCT, ";")
        ops.append(AstOperation(op_name, payload))
    end = ts.expect(TokenKind.PUNCT, "}").span
    return AstInterface(name, ops, start.merge(end))


def _parse_instance(ts: _Stream) -> AstInstance:
    start = ts.expect(TokenKind.KEYWORD, "instance").span
    name = _entity_name(ts, "instance name")
    ts.expect(TokenKind.PUNCT, ":")
    comp = _entity_name(ts, "component name")
    end = ts.expect(TokenKind.PUNCT, ";").span
    return AstInstance(name, comp, start.merge(end))


def _parse_component(ts: _Stream) -> AstComponent:
    start = ts.expect(TokenKind.KEYWORD, "component").span
    name = _entity_name(ts, "component name")
    ts.expect(TokenKind.PUNCT, ":")
    kind_tok = ts.current
    if kind_tok.kind is not TokenKind.IDENT or kind_tok.text not in COMPONENT_KINDS:
        ts.fail(
            "expected a component kind (IoTElement, Board, or VirtualEntity), "
            f"got {kind_tok.describe()}"
        )
    ts.advance()
    comp = AstComponent(name=name, kind=kind_tok.text, kind_span=kind_tok.span)
    ts.expect(TokenKind.PUNCT, "{")
    while not ts.check(TokenKind.PUNCT, "}"):
        if ts.check(TokenKind.KEYWORD, "property"):
            comp.properties.append(_parse_property(ts))
        elif ts.check(TokenKind.KEYWORD, "port"):
            comp.ports.append(_parse_port(ts))
        elif ts.check(TokenKind.KEYWORD, "instance"):
            comp.instances.append(_parse_instance(ts))
        elif ts.check(TokenKind.KEYWORD, "connect"):
            comp.connectors.append(_parse_connector(ts))
        elif ts.check(TokenKind.KEYWORD, "event"):
            comp.events.append(_parse_event(ts))
        elif ts.check(TokenKind.KEYWORD, "action"):
            comp.actions.append(_parse_action(ts))
        elif ts.check(TokenKind.KEYWORD, "statemachine"):
            if comp.machine is not None:
                ts.fail("component already has a statemachine block")
            comp.machine = _parse_machine(ts)
        else:
            ts.fail(
                "expected a component member (property, port, instance, connect, "
                f"event, action, or statemachine), got {ts.current.describe()}"
            )
    end = ts.expect(TokenKind.PUNCT, "}").span
    comp.span = start.merge(end)
    return comp


def _parse_property(ts: _Stream) -> AstProperty:
    ts.expect(TokenKind.KEYWORD, "property")
    name, name_span = _member_name(ts, "property name")
    ts.expect(TokenKind.PUNCT, ":")
    type_tok = ts.current
    if type_tok.kind is not TokenKind.KEYWORD or type_tok.text not in _PRIM_NAMES:
        ts.fail(f"expected a primitive type (int, float, bool, string), got {type_tok.describe()}")
    ts.advance()
    ts.expect(TokenKind.PUNCT, "=")
    initial = _parse_literal(ts)
    ts.expect(TokenKind.PUNCT, ";")
    return AstProperty(name, name_span, _PRIM_NAMES[type_tok.text], type_tok.span, initial)


def _parse_literal(ts: _Stream) -> Literal:
    tok = ts.current
    if tok.kind is TokenKind.INT:
        ts.advance()
        return Literal(int(tok.text), PrimType.INT, tok.span)
    if tok.kind is TokenKind.FLOAT:
        ts.advance()
        return Literal(float(tok.text), PrimType.FLOAT, tok.span)
    if tok.kind is TokenKind.STRING:
        ts.advance()
        return Literal(decode_string(tok), PrimType.STRING, tok.span)
    if tok.kind is TokenKind.KEYWORD and tok.text in ("true", "false"):
        ts.advance()
        return Literal(tok.text == "true", PrimType.BOOL, tok.span)
    ts.fail(f"expected a literal, got {tok.describe()}")
    raise AssertionError  # unreachable


def _parse_port(ts: _Stream) -> AstPort:
    start = ts.expect(TokenKind.KEYWORD, "port").span
    name = _entity_name(ts, "port name")
    provides: list[Ref] = []
    requires: list[Ref] = []
    seen_provides = False
    seen_requires = False
    while True:
        if ts.check(TokenKind.KEYWORD, "provides"):
            if seen_provides:
                ts.fail("duplicate provides clause on port")
            ts.advance()
            seen_provides = True
            provides.extend(_ref_list(ts, "interface name"))
        elif ts.check(TokenKind.KEYWORD, "requires"):
            if seen_requires:
                ts.fail("duplicate requires clause on port")
            ts.advance()
            seen_requires = True
            requires.extend(_ref_list(ts, "interface name"))
        else:
            break
    if not provides and not requires:
        ts.fail("port must provide or require at least one interface")
    end = ts.expect(TokenKind.PUNCT, ";").span
    return AstPort(name, provides, requires, start.merge(end))


def _ref_list(ts: _Stream, what: str) -> list[Ref]:
    refs = [_entity_name(ts, what)]
    while ts.accept(TokenKind.PUNCT, ","):
        refs.append(_entity_name(ts, what))
    return refs


def _parse_connector(ts: _Stream) -> AstConnector:
    start = ts.expect(TokenKind.KEYWORD, "connect").span
    a = _parse_endpoint(ts)
    ts.expect(TokenKind.PUNCT, "--")
    b = _parse_endpoint(ts)
    end = ts.expect(TokenKind.PUNCT, ";").span
    return AstConnector(a, b, start.merge(end))


def _parse_endpoint(ts: _Stream) -> AstEndpoint:
    tok = ts.current
    if tok.kind is TokenKind.KEYWORD and tok.text == "self":
        ts.advance()
        inst: Ref | None = None
        inst_span = tok.span
    else:
        ref = _entity_name(ts, "instance name or 'self'")
        inst = ref
        inst_span = ref.span
    ts.expect(TokenKind.PUNCT, ".")
    port = _entity_name(ts, "port name")
    return AstEndpoint(inst, port, inst_span.merge(port.span))


def _parse_event(ts: _Stream) -> AstEvent:
    start = ts.expect(TokenKind.KEYWORD, "event").span
    name = _entity_name(ts, "event name")
    dir_tok = ts.current
    if dir_tok.kind is not TokenKind.KEYWORD or dir_tok.text not in ("incoming", "outgoing", "generic"):
        ts.fail(f"expected an event direction (incoming, outgoing, generic), got {dir_tok.describe()}")
    ts.advance()
    port = None
    if ts.accept(TokenKind.KEYWORD, "port"):
        port = _entity_name(ts, "port name")
    payload = None
    if ts.accept(TokenKind.KEYWORD, "payload"):
        payload = _entity_name(ts, "payload name")
    ts.expect(TokenKind.KEYWORD, "action")
    action = _entity_name(ts, "action name")
    end = ts.expect(TokenKind.PUNCT, ";").span
    return AstEvent(name, dir_tok.text, port, payload, action, start.merge(end))


def _parse_action(ts: _Stream) -> AstAction:
    start = ts.expect(TokenKind.KEYWORD, "action").span
    name = _entity_name(ts, "action name")
    kind_tok = ts.current
    if kind_tok.kind is not TokenKind.KEYWORD or kind_tok.text not in ("send", "receive", "generic"):
        ts.fail(f"expected an action kind (send, receive, generic), got {kind_tok.describe()}")
    ts.advance()
    port = None
    if ts.accept(TokenKind.KEYWORD, "port"):
        port = _entity_name(ts, "port name")
    payload = None
    if ts.accept(TokenKind.KEYWORD, "payload"):
        payload = _entity_name(ts, "payload name")
    effects: list[AstAssign] = []
    if ts.accept(TokenKind.PUNCT, "{"):
        while not ts.check(TokenKind.PUNCT, "}"):
            target, target_span = _member_name(ts, "property name")
            ts.expect(TokenKind.PUNCT, ":=")
            expr = _parse_expr(ts)
            ts.expect(TokenKind.PUNCT, ";")
            effects.append(AstAssign(target, target_span, expr))
        end = ts.expect(TokenKind.PUNCT, "}").span
    else:
        end = ts.expect(TokenKind.PUNCT, ";").span
    return AstAction(name, kind_tok.text, port, payload, effects, start.merge(end))


def _parse_machine(ts: _Stream) -> AstMachine:
    start = ts.expect(TokenKind.KEYWORD, "statemachine").span
    ts.expect(TokenKind.PUNCT, "{")
    states: list[AstState] = []
    transitions: list[AstTransition] = []
    while not ts.check(TokenKind.PUNCT, "}"):
        if ts.check(TokenKind.KEYWORD, "initial") or ts.check(TokenKind.KEYWORD, "state"):
            states.append(_parse_state(ts))
        elif ts.check(TokenKind.KEYWORD, "transition"):
            transitions.append(_parse_transition(ts))
        else:
            ts.fail(f"expected a state or transition declaration, got {ts.current.describe()}")
    end = ts.expect(TokenKind.PUNCT, "}").span
    return AstMachine(states, transitions, start.merge(end))


def _parse_state(ts: _Stream) -> AstState:
    initial = ts.accept(TokenKind.KEYWORD, "initial") is not None
    start = ts.expect(TokenKind.KEYWORD, "state").span
    name = _entity_name(ts, "state name")
    ts.expect(TokenKind.PUNCT, "{")
    entry: list[Ref] = []
    exit_: list[Ref] = []
    continuous: list[Ref] = []
    while not ts.check(TokenKind.PUNCT, "}"):
        tok = ts.current
        if tok.kind is TokenKind.KEYWORD and tok.text in ("entry", "exit", "continuous"):
            ts.advance()
            refs = _ref_list(ts, "event name")
            ts.expect(TokenKind.PUNCT, ";")
            {"entry": entry, "exit": exit_, "continuous": continuous}[tok.text].extend(refs)
        else:
            ts.fail(f"expected entry, exit, or continuous, got {tok.describe()}")
    end = ts.expect(TokenKind.PUNCT, "}").span
    return AstState(name, initial, entry, exit_, continuous, start.merge(end))


def _parse_transition(ts: _Stream) -> AstTransition:
    start = ts.expect(TokenKind.KEYWORD, "transition").span
    source = _entity_name(ts, "source state name")
    ts.expect(TokenKind.PUNCT, "->")
    target = _entity_name(ts, "target state name")
    trigger = None
    if ts.accept(TokenKind.KEYWORD, "when"):
        trigger = _entity_name(ts, "event name")
    guard = None
    if ts.accept(TokenKind.PUNCT, "["):
        guard = _parse_expr(ts)
        ts.expect(TokenKind.PUNCT, "]")
    end = ts.expect(TokenKind.PUNCT, ";").span
    return AstTransition(source, target, trigger, guard, start.merge(end))


# Expression parsing: or < and < not < comparison < atom.


def _parse_expr(ts: _Stream) -> Expr:
    expr = _parse_and(ts)
    while ts.check(TokenKind.KEYWORD, "or"):
        op_tok = ts.advance()
        right = _parse_and(ts)
        expr = Binary("or", expr, right, _expr_span(expr).merge(_expr_span(right) or op_tok.span))
    return expr


def _parse_and(ts: _Stream) -> Expr:
    expr = _parse_unary(ts)
    while ts.check(TokenKind.KEYWORD, "and"):
        op_tok = ts.advance()
        right = _parse_unary(ts)
        expr = Binary("and", expr, right, _expr_span(expr).merge(_expr_span(right) or op_tok.span))
    return expr


def _parse_unary(ts: _Stream) -> Expr:
    if ts.check(TokenKind.KEYWORD, "not"):
        tok = ts.advance()
        operand = _parse_unary(ts)
        return Unary("not", operand, tok.span.merge(_expr_span(operand) or tok.span))
    return _parse_comparison(ts)


def _parse_comparison(ts: _Stream) -> Expr:
    left = _parse_atom(ts)
    tok = ts.current
    if tok.kind is TokenKind.PUNCT and tok.text in ("==", "!=", "<", "<=", ">", ">="):
        ts.advance()
        right = _parse_atom(ts)
        return Binary(tok.text, left, right, _expr_span(left).merge(_expr_span(right) or tok.span))
    return left


def _parse_atom(ts: _Stream) -> Expr:
    tok = ts.current
    if tok.kind in (TokenKind.INT, TokenKind.FLOAT, TokenKind.STRING):
        return _parse_literal(ts)
    if tok.kind is TokenKind.KEYWORD and tok.text in ("true", "false"):
        return _parse_literal(ts)
    if tok.kind is TokenKind.KEYWORD and tok.text == "payload":
        ts.advance()
        ts.expect(TokenKind.PUNCT, ".", what="'.' after 'payload'")
        member = ts.current
        if member.kind not in (TokenKind.IDENT, TokenKind.KEYWORD):
            ts.fail(f"expected payload field name, got {member.describe()}")
        ts.advance()
        return PayloadFieldRef(member.text, tok.span.merge(member.span))
    if tok.kind is TokenKind.IDENT or (tok.kind is TokenKind.KEYWORD and tok.text not in EXPR_RESERVED):
        ts.advance()
        return NameRef(tok.text, tok.span)
    if ts.accept(TokenKind.PUNCT, "("):
        expr = _parse_expr(ts)
        ts.expect(TokenKind.PUNCT, ")")
        return expr
    ts.fail(f"expected an expression, got {tok.describe()}")
    raise AssertionError  # unreachable


def _expr_span(expr: Expr) -> SourceSpan:
    span = getattr(expr, "span", None)
    return span if span is not None else SourceSpan.point(1, 1)
