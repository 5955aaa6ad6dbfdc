"""Guard and effect expressions.

The expression language is deliberately small: literals, property references,
``payload.<field>`` references, the six comparison operators, and and/or/not.
There is no arithmetic. Comparisons require same-typed operands except that
int and float mix by widening to float; ordering comparisons additionally
require numeric operands.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Union

from .diagnostics import (
    E_EVAL,
    E_TYPE_MISMATCH,
    E_UNKNOWN_NAME,
    CiotError,
    SourceSpan,
    error,
)


class PrimType(Enum):
    # Mirror of metamodel.PrimType; defined here so this module stays
    # dependency-free for both the metamodel and the engine.
    INT = "int"
    FLOAT = "float"
    BOOL = "bool"
    STRING = "string"


@dataclass
class Literal:
    value: int | float | bool | str
    type: PrimType
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


@dataclass
class NameRef:
    """Bare name; refers to a property of the owning component."""

    name: str
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


@dataclass
class PayloadFieldRef:
    """``payload.<field>`` reference into the in-scope payload record."""

    field: str
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


@dataclass
class Unary:
    op: str  # "not"
    operand: "Expr"
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


@dataclass
class Binary:
    op: str  # "and" "or" "==" "!=" "<" "<=" ">" ">="
    left: "Expr"
    right: "Expr"
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


Expr = Union[Literal, NameRef, PayloadFieldRef, Unary, Binary]

COMPARISON_OPS = ("==", "!=", "<", "<=", ">", ">=")
ORDERING_OPS = ("<", "<=", ">", ">=")
BOOLEAN_OPS = ("and", "or")


@dataclass(frozen=True)
class GuardScope:
    """Static typing context: property types plus optional payload field types."""

    properties: Mapping[str, PrimType]
    payload_fields: Mapping[str, PrimType] | None = None


def typecheck_guard(expr: Expr, scope: GuardScope) -> PrimType:
    """Infer the expression's type; a guard must come out BOOL.

    Raises CiotError (code E_TYPE_MISMATCH or E_UNKNOWN_NAME) with a diagnostic
    pinned to the offending subexpression.
    """
    return _infer(expr, scope)


def _fail(code: str, message: str, span: SourceSpan | None) -> CiotError:
    return CiotError(code, [error(code, message, span)])


def _infer(expr: Expr, scope: GuardScope) -> PrimType:
    if isinstance(expr, Literal):
        return expr.type
    if isinstance(expr, NameRef):
        t = scope.properties.get(expr.name)
        if t is None:
            raise _fail(E_UNKNOWN_NAME, f"unknown property {expr.name!r}", expr.span)
        return t
    if isinstance(expr, PayloadFieldRef):
        if scope.payload_fields is None:
            raise _fail(
                E_UNKNOWN_NAME,
                f"payload.{expr.field} used where no payload is in scope",
                expr.span,
            )
        t = scope.payload_fields.get(expr.field)
        if t is None:
            raise _fail(E_UNKNOWN_NAME, f"payload has no field {expr.field!r}", expr.span)
        return t
    if isinstance(expr, Unary):
        t = _infer(expr.operand, scope)
        if t is not PrimType.BOOL:
            raise _fail(E_TYPE_MISMATCH, f"'not' needs a bool operand, got {t.value}", expr.span)
        return PrimType.BOOL
    if isinstance(expr, Binary):
        if expr.op in BOOLEAN_OPS:
            for side in (expr.left, expr.right):
                t = _infer(side, scope)
                if t is not PrimType.BOOL:
                    raise _fail(
                        E_TYPE_MISMATCH,
                        f"{expr.op!r} needs bool operands, got {t.value}",
                        _span_of(side) or expr.span,
                    )
            return PrimType.BOOL
        lt = _infer(expr.left, scope)
        rt = _infer(expr.right, scope)
        numeric = {PrimType.INT, PrimType.FLOAT}
        if expr.op in ORDERING_OPS:
            if lt not in numeric or rt not in numeric:
                raise _fail(
                    E_TYPE_MISMATCH,
                    f"{expr.op!r} needs numeric operands, got {lt.value} and {rt.value}",
                    expr.span,
                )
            return PrimType.BOOL
        # Equality: same type, or int/float widened.
        if lt is rt or (lt in numeric and rt in numeric):
            return PrimType.BOOL
        raise _fail(
            E_TYPE_MISMATCH,
            f"cannot compare {lt.value} with {rt.value}",
            expr.span,
        )
    raise TypeError(f"not an expression node: {expr!r}")


def _span_of(expr: Expr) -> SourceSpan | None:
    return getattr(expr, "span", None)


def eval_guard(
    expr: Expr,
    properties: Mapping[str, int | float | bool | str],
    payload: Mapping[str, object] | None = None,
):
    """Evaluate a typechecked expression; guards yield a Python bool.

    Runtime failures (unknown names on an expression that skipped the
    typechecker) surface as CiotError with code E_EVAL.
    """
    if isinstance(expr, Literal):
        return expr.value
    if isinstance(expr, NameRef):
        if expr.name not in properties:
            raise _fail(E_EVAL, f"unknown property {expr.name!r} at evaluation", expr.span)
        return properties[expr.name]
    if isinstance(expr, PayloadFieldRef):
        if payload is None or expr.field not in payload:
            raise _fail(E_EVAL, f"payload field {expr.field!r} absent at evaluation", expr.span)
        return payload[expr.field]
    if isinstance(expr, Unary):
        return not eval_guard(expr.operand, properties, payload)
    if isinstance(expr, Binary):
        if expr.op == "and":
            return bool(eval_guard(expr.left, properties, payload)) and bool(
                eval_guard(expr.right, properties, payload)
            )
        if expr.op == "or":
            return bool(eval_guard(expr.left, properties, payload)) or bool(
                eval_guard(expr.right, properties, payload)
            )
        lv = eval_guard(expr.left, properties, payload)
        rv = eval_guard(expr.right, properties, payload)
        if expr.op == "==":
            return _eq(lv, rv)
        if expr.op == "!=":
            return not _eq(lv, rv)
        if expr.op == "<":
            return lv < rv
        if expr.op == "<=":
            return lv <= rv
        if expr.op == ">":
            return lv > rv
        if expr.op == ">=":
            return lv >= rv
    raise TypeError(f"not an expression node: {expr!r}")


def _eq(a, b) -> bool:
    # bool is an int subtype in Python; keep bool distinct from int here.
    if isinstance(a, bool) != isinstance(b, bool):
        return False
    return a == b


_PRECEDENCE = {"or": 1, "and": 2, "not": 3, "cmp": 4}


def expr_to_text(expr: Expr) -> str:
    """Canonical text form; reparsing it yields a structurally equal tree."""
    return _render(expr, 0)


def _render(expr: Expr, parent_prec: int) -> str:
    if isinstance(expr, Literal):
        return format_value(expr.value)
    if isinstance(expr, NameRef):
        return expr.name
    if isinstance(expr, PayloadFieldRef):
        return f"payload.{expr.field}"
    if isinstance(expr, Unary):
        inner = _render(expr.operand, _PRECEDENCE["not"])
        if isinstance(expr.operand, Binary):
            inner = f"({inner})"
        text = f"not {inner}"
        return f"({text})" if parent_prec > _PRECEDENCE["not"] else text
    if isinstance(expr, Binary):
        if expr.op in BOOLEAN_OPS:
            prec = _PRECEDENCE[expr.op]
            left = _render(expr.left, prec)
            # Same-operator left chains stay flat; anything else at or below
            # this precedence gets parentheses so tree shape survives reparse.
            if _binds_looser(expr.left, prec) or (
                isinstance(expr.left, Binary)
                and expr.left.op in BOOLEAN_OPS
                and expr.left.op != expr.op
                and _PRECEDENCE[expr.left.op] == prec
            ):
                left = f"({left})"
            right = _render(expr.right, prec)
            if _binds_looser(expr.right, prec) or _same_level(expr.right, prec):
                right = f"({right})"
            text = f"{left} {expr.op} {right}"
            return f"({text})" if parent_prec > prec else text
        prec = _PRECEDENCE["cmp"]
        left = _render(expr.left, prec)
        if isinstance(expr.left, (Binary, Unary)):
            left = f"({left})"
        right = _render(expr.right, prec)
        if isinstance(expr.right, (Binary, Unary)):
            right = f"({right})"
        text = f"{left} {expr.op} {right}"
        return f"({text})" if parent_prec > prec else text
    raise TypeError(f"not an expression node: {expr!r}")


def _prec_of(expr: Expr) -> int:
    if isinstance(expr, Binary):
        return _PRECEDENCE.get(expr.op, _PRECEDENCE["cmp"])
    if isinstance(expr, Unary):
        return _PRECEDENCE["not"]
    return 99


def _binds_looser(expr: Expr, prec: int) -> bool:
    return _prec_of(expr) < prec


def _same_level(expr: Expr, prec: int) -> bool:
    return isinstance(expr, (Binary, Unary)) and _prec_of(expr) == prec


def format_value(value: int | float | bool | str) -> str:
    """Canonical literal rendering shared by the printer and trace output."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, int):
        return str(value)
    if isinstance(value, str):
        escaped = (
            value.replace("\\", "\\\\")
            .replace('"', '\\"')
            .replace("\n", "\\n")
            .replace("\t", "\\t")
        )
        return f'"{escaped}"'
    raise TypeError(f"unsupported literal value: {value!r}")
