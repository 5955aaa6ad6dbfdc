"""Front door: text to resolved (and optionally validated) models."""

from __future__ import annotations

from .diagnostics import CiotError, Diagnostic, Severity, error
from .metamodel import Model
from .parser import parse
from .resolver import resolve
from .validate import validate


def load_text(text: str, source: str | None = None, *, check: bool = True) -> Model:
    """Parse and resolve; with ``check`` also validate, raising on errors."""
    model = resolve(parse(text, source))
    if check:
        diags = validate(model)
        errors = [d for d in diags if d.severity is Severity.ERROR]
        if errors:
            raise CiotError(errors[0].rule, errors)
    return model


def load_file(path: str, *, check: bool = True) -> Model:
    return load_text(_read(path), path, check=check)


# The full pipeline under its pipeline name.
parse_file = load_file


def collect_diagnostics(text: str, source: str | None = None) -> tuple[Model | None, list[Diagnostic]]:
    """Gather every diagnostic instead of raising; model is None when the
    text does not even resolve."""
    try:
        model = resolve(parse(text, source))
    except CiotError as exc:
        return None, list(exc.diagnostics)
    return model, validate(model)


def collect_diagnostics_file(path: str) -> tuple[Model | None, list[Diagnostic]]:
    return collect_diagnostics(_read(path), path)


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise CiotError("E_IO", [error("E_IO", f"cannot read {path!r}: {exc}", None, path)]) from exc
