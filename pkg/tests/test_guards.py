from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ciot.diagnostics import CiotError
from ciot.guards import (
    Binary,
    GuardScope,
    Literal,
    NameRef,
    PayloadFieldRef,
    PrimType,
    Unary,
    eval_guard,
    expr_to_text,
    format_value,
    typecheck_guard,
)
from ciot.parser import parse_expression

NUMERIC_SCOPE = GuardScope(
    properties={"x": PrimType.INT, "rate": PrimType.FLOAT, "on": PrimType.BOOL, "tag": PrimType.STRING},
    payload_fields={"duration": PrimType.FLOAT, "state": PrimType.STRING},
)


def tc(src: str, scope: GuardScope = NUMERIC_SCOPE) -> PrimType:
    return typecheck_guard(parse_expression(src), scope)


def ev(src: str, properties=None, payload=None):
    return eval_guard(parse_expression(src), properties or {}, payload)


# -- typechecking -------------------------------------------------------------


def test_comparisons_produce_bool():
    assert tc("x < 5") is PrimType.BOOL
    assert tc("payload.duration >= 300") is PrimType.BOOL
    assert tc("x == 5 and on") is PrimType.BOOL


def test_int_float_mix_widens():
    assert tc("x < rate") is PrimType.BOOL
    assert tc("rate == 2") is PrimType.BOOL


def test_ordering_rejects_non_numeric():
    with pytest.raises(CiotError) as exc:
        tc("tag < tag")
    assert exc.value.code == "E_TYPE_MISMATCH"
    with pytest.raises(CiotError):
        tc("on >= on")


def test_equality_requires_same_type():
    assert tc('tag == "high"') is PrimType.BOOL
    with pytest.raises(CiotError):
        tc("tag == 1")
    with pytest.raises(CiotError):
        tc("on == 1")


def test_boolean_ops_need_bool_operands():
    with pytest.raises(CiotError) as exc:
        tc("x and on")
    assert exc.value.code == "E_TYPE_MISMATCH"
    with pytest.raises(CiotError):
        tc("not x")


def test_unknown_property_name():
    with pytest.raises(CiotError) as exc:
        tc("missing == 1")
    assert exc.value.code == "E_UNKNOWN_NAME"


def test_payload_outside_scope():
    scope = GuardScope(properties={"x": PrimType.INT}, payload_fields=None)
    with pytest.raises(CiotError) as exc:
        tc("payload.duration >= 1", scope)
    assert exc.value.code == "E_UNKNOWN_NAME"


def test_unknown_payload_field():
    with pytest.raises(CiotError) as exc:
        tc("payload.missing == 1")
    assert exc.value.code == "E_UNKNOWN_NAME"


def test_guard_expression_may_be_non_bool_subterm():
    # The checker infers types; demanding BOOL at the top is the caller's job.
    assert tc("x") is PrimType.INT


# -- evaluation ---------------------------------------------------------------


def test_threshold_examples():
    assert ev("payload.duration >= 300", payload={"duration": 300.0}) is True
    assert ev("payload.duration >= 300", payload={"duration": 299.9}) is False


def test_boolean_algebra_example():
    assert ev("not (x > 0) or x == 5", {"x": 5}) is True
    assert ev("not (x > 0) or x == 5", {"x": 3}) is False


def test_string_equality():
    assert ev('payload.state == "high"', payload={"state": "high"}) is True
    assert ev('payload.state != "high"', payload={"state": "low"}) is True


def test_bool_never_equals_int():
    # Python would say True == 1; the expression language must not.
    expr = Binary("==", Literal(True, PrimType.BOOL), Literal(1, PrimType.INT))
    assert eval_guard(expr, {}) is False
    expr = Binary("!=", Literal(False, PrimType.BOOL), Literal(0, PrimType.INT))
    assert eval_guard(expr, {}) is True


def test_int_float_equality_widens():
    assert ev("x == 300", {"x": 300}) is True
    assert ev("payload.duration == 300", payload={"duration": 300.0}) is True


def test_missing_name_at_eval_is_e_eval():
    with pytest.raises(CiotError) as exc:
        ev("ghost == 1")
    assert exc.value.code == "E_EVAL"
    with pytest.raises(CiotError) as exc:
        ev("payload.ghost == 1", payload={})
    assert exc.value.code == "E_EVAL"


def test_evaluation_is_pure():
    props = {"x": 1}
    payload = {"duration": 2.0}
    ev("x == 1 and payload.duration < 3", props, payload)
    assert props == {"x": 1} and payload == {"duration": 2.0}


# -- canonical text -----------------------------------------------------------


def test_format_value_forms():
    assert format_value(True) == "true"
    assert format_value(False) == "false"
    assert format_value(300) == "300"
    assert format_value(2.5) == "2.5"
    assert format_value('say "hi"\n') == '"say \\"hi\\"\\n"'


def test_expr_to_text_examples():
    assert expr_to_text(parse_expression("payload.duration >= 300")) == "payload.duration >= 300"
    assert expr_to_text(parse_expression("not (x > 0) or x == 5")) == "not (x > 0) or x == 5"


_names = st.from_regex(r"[a-z][a-z0-9_]{0,6}", fullmatch=True).filter(
    lambda n: n not in ("and", "or", "not", "true", "false", "payload")
    and n not in ("int", "float", "bool", "string", "state", "exit", "entry", "op", "when", "self")
)
_plain_floats = st.floats(min_value=0.001, max_value=99999.0, allow_nan=False).filter(
    lambda v: "e" not in repr(v)
)
_atoms = st.one_of(
    st.integers(min_value=0, max_value=9999).map(lambda v: Literal(v, PrimType.INT)),
    _plain_floats.map(lambda v: Literal(v, PrimType.FLOAT)),
    st.booleans().map(lambda v: Literal(v, PrimType.BOOL)),
    st.text(alphabet="abc xyz_", max_size=6).map(lambda v: Literal(v, PrimType.STRING)),
    _names.map(NameRef),
    _names.map(PayloadFieldRef),
)


def _exprs():
    return st.recursive(
        _atoms,
        lambda sub: st.one_of(
            st.tuples(st.sampled_from(["and", "or"]), sub, sub).map(lambda t: Binary(t[0], t[1], t[2])),
            st.tuples(st.sampled_from(["==", "!=", "<", "<=", ">", ">="]), sub, sub).map(
                lambda t: Binary(t[0], t[1], t[2])
            ),
            sub.map(lambda e: Unary("not", e)),
        ),
        max_leaves=12,
    )


@given(_exprs())
def test_rendered_expression_reparses_equal(expr):
    text = expr_to_text(expr)
    assert parse_expression(text) == expr
