from __future__ import annotations

import pytest

from ciot import load_text, structurally_equal
from ciot.diagnostics import CiotError, Severity
from ciot.guards import expr_to_text
from ciot.loader import collect_diagnostics
from ciot.metamodel import ComponentKind, instance_paths
from ciot.parser import parse
from ciot.resolver import resolve


def rules(text: str) -> list[str]:
    _, diags = collect_diagnostics(text)
    return [d.rule for d in diags if d.severity is Severity.ERROR]


def test_corpus_resolves_fully(parking_model):
    m = parking_model
    assert [c.name for c in m.components] == ["RedLED", "GreenLED", "UltrasonicSensor", "Node"]
    assert len(m.interfaces) == 6
    assert len(m.payloads) == 2
    assert [p for p, _ in instance_paths(m)] == ["node", "node.red", "node.green", "node.sensor"]


def test_corpus_has_three_distinct_machine_shapes(parking_model):
    def shape(comp):
        sm = comp.state_machine
        states = tuple((s.name, s.is_initial) for s in sm.states)
        transitions = tuple(
            (
                t.source.name,
                t.target.name,
                t.trigger.name if t.trigger else None,
                expr_to_text(t.guard) if t.guard else None,
            )
            for t in sm.transitions
        )
        return states, transitions

    shapes = {shape(c) for c in parking_model.components}
    assert len(shapes) == 3  # the two indicator machines coincide


def test_all_references_bound_by_identity(parking_model):
    node = parking_model.component_named("Node")
    sensor = parking_model.component_named("UltrasonicSensor")
    # the node's subcomponent declaration points at the same object
    assert node.subcomponents[2].component is sensor
    # connector endpoints reference the owner's and the child's port objects
    conn = node.connectors[0]
    assert conn.a.port is node.ports[0]
    assert conn.b.port is parking_model.component_named("RedLED").ports[0]
    # a transition trigger is the component's own event object
    evt = node.event_named("evtReading")
    assert any(t.trigger is evt for t in node.state_machine.transitions)


def test_connectors_resolve_when_composite_precedes_child():
    # The composite appears first, so its children's ports exist only after
    # every component shell is filled; wiring must still bind.
    text = (
        "interface I { op f(P); }\n"
        "payload P { v: int; }\n"
        "component Outer : Board {\n"
        "    port pa requires I;\n"
        "    instance kid: Inner;\n"
        "    connect self.pa -- kid.pb;\n"
        "}\n"
        "component Inner : IoTElement { port pb provides I; }\n"
        "instance outer: Outer;\n"
    )
    m = load_text(text)
    outer = m.component_named("Outer")
    inner = m.component_named("Inner")
    assert len(outer.connectors) == 1
    assert outer.connectors[0].b.port is inner.ports[0]


def test_component_kinds():
    m = load_text(
        "component A : IoTElement {}\ncomponent B : Board {}\ncomponent V : VirtualEntity {}\n"
    )
    assert m.component_named("A").kind is ComponentKind.IOT_ELEMENT
    assert m.component_named("B").kind is ComponentKind.BOARD
    assert m.component_named("V").kind is ComponentKind.VIRTUAL_ENTITY


def test_duplicate_names_flagged():
    assert "E_DUPLICATE" in rules("payload P { a: int; }\npayload P { b: int; }\n")
    assert "E_DUPLICATE" in rules("component C : Board {}\ncomponent C : Board {}\n")
    assert "E_DUPLICATE" in rules("component C : Board { property x: int = 0; property x: int = 1; }")
    assert "E_DUPLICATE" in rules(
        "interface I { op f(P); }\npayload P { v: int; }\n"
        "component C : Board { port p1 provides I; port p1 provides I; }"
    )


def test_unknown_references_flagged():
    assert "E_UNKNOWN_REF" in rules("component C : Board { port p1 provides Ghost; }")
    assert "E_UNKNOWN_REF" in rules("component C : Board { instance kid: Ghost; }")
    assert "E_UNKNOWN_REF" in rules("instance top: Ghost;")
    assert "E_UNKNOWN_REF" in rules(
        "component C : Board { event e generic action ghost; }"
    )
    assert "E_UNKNOWN_REF" in rules(
        "component C : Board { statemachine { initial state A {}\n transition A -> Ghost; } }"
    )
    assert "E_UNKNOWN_REF" in rules(
        "component C : Board { statemachine { initial state A { entry ghost; } } }"
    )


def test_unknown_payload_in_field():
    assert "E_UNKNOWN_REF" in rules("payload P { v: Ghost; }")


def test_composition_cycle_detected():
    text = (
        "component A : Board { instance b: B; }\n"
        "component B : Board { instance a: A; }\n"
    )
    assert "E_CYCLE" in rules(text)


def test_self_composition_cycle():
    assert "E_CYCLE" in rules("component A : Board { instance a: A; }")


def test_recursive_payload_cycle():
    text = "payload P { q: Q; }\npayload Q { p: P; }\n"
    assert "E_CYCLE" in rules(text)


def test_resolution_is_deterministic(parking_path):
    with open(parking_path, encoding="utf-8") as fh:
        source = fh.read()
    a = resolve(parse(source))
    b = resolve(parse(source))
    assert structurally_equal(a, b)


def test_resolver_error_raises_through_loader():
    with pytest.raises(CiotError) as exc:
        load_text("instance top: Ghost;")
    assert exc.value.code == "E_UNKNOWN_REF"
