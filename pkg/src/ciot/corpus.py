"""Checks that keep the bundled parking corpus honest.

The corpus directory holds the parking node model, two scenarios, golden
traces and timelines, a set of single-defect mutants with an expected
diagnostic manifest, and a few files that must not even parse. This module
re-runs all of it and reports each check, so a behavior change that shifts
any golden output shows up as a corpus failure rather than a silent drift.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

from .diagnostics import CiotError
from .export import export_model, import_model, statemachine_to_dot
from .loader import collect_diagnostics_file, load_file
from .metamodel import structurally_equal, with_property_initial
from .sim import load_scenario_file, occupancy_timeline, simulate
from .trace import render_trace

MODEL_FILE = "parking_node.ciot"
SCENARIO_ARRIVE_DEPART = "scenario_arrive_depart.scn"
SCENARIO_PHYSICAL = "scenario_physical.scn"
PHYSICAL_THRESHOLD_MS = 5.0
MACHINE_STATE_COUNTS = {"RedLED": 2, "GreenLED": 2, "UltrasonicSensor": 2, "Node": 3}


@dataclass(frozen=True)
class CorpusCheck:
    name: str
    ok: bool
    message: str


@dataclass
class CorpusReport:
    checks: list[CorpusCheck]

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def render(self) -> str:
        lines = [f"{'PASS' if c.ok else 'FAIL'} {c.name}: {c.message}" for c in self.checks]
        lines.append(f"{sum(c.ok for c in self.checks)}/{len(self.checks)} corpus checks passed")
        return "\n".join(lines) + "\n"


def render_timeline(timeline: list[tuple[int, str]]) -> str:
    return "".join(f"t={t} status={status}\n" for t, status in timeline)


def corpus_check(corpus_dir: str, regen: bool = False) -> CorpusReport:
    checks: list[CorpusCheck] = []
    model_path = os.path.join(corpus_dir, MODEL_FILE)

    _check_pristine(checks, model_path)
    try:
        model = load_file(model_path)
    except CiotError:
        model = None
    if model is not None:
        golden = os.path.join(corpus_dir, "golden")
        result = simulate(model, load_scenario_file(os.path.join(corpus_dir, SCENARIO_ARRIVE_DEPART)))
        _check_golden(checks, golden, "arrive_depart.trace", render_trace(result.trace), regen)
        _check_golden(checks, golden, "arrive_depart.timeline", render_timeline(occupancy_timeline(result)), regen)

        low = with_property_initial(model, "threshold", PHYSICAL_THRESHOLD_MS)
        result = simulate(low, load_scenario_file(os.path.join(corpus_dir, SCENARIO_PHYSICAL)))
        _check_golden(checks, golden, "physical.trace", render_trace(result.trace), regen)
        _check_golden(checks, golden, "physical.timeline", render_timeline(occupancy_timeline(result)), regen)

        _check_roundtrip(checks, model)
        _check_dot_counts(checks, model)

    _check_mutations(checks, os.path.join(corpus_dir, "mutations"))
    _check_syntax_errors(checks, os.path.join(corpus_dir, "syntax_errors"))
    return CorpusReport(checks)


def _check_pristine(checks: list[CorpusCheck], model_path: str) -> None:
    model, diags = collect_diagnostics_file(model_path)
    if model is None:
        checks.append(CorpusCheck("pristine", False, f"model does not resolve: {diags[0].message}"))
    elif diags:
        checks.append(CorpusCheck("pristine", False, f"{len(diags)} diagnostic(s), expected none"))
    else:
        checks.append(CorpusCheck("pristine", True, "0 errors, 0 warnings"))


def _check_golden(checks: list[CorpusCheck], golden_dir: str, name: str, actual: str, regen: bool) -> None:
    path = os.path.join(golden_dir, name)
    if regen:
        os.makedirs(golden_dir, exist_ok=True)
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(actual)
        checks.append(CorpusCheck(f"golden:{name}", True, "regenerated"))
        return
    if not os.path.exists(path):
        checks.append(CorpusCheck(f"golden:{name}", False, "golden file missing (regen it)"))
        return
    with open(path, encoding="utf-8") as fh:
        expected = fh.read()
    if actual == expected:
        checks.append(CorpusCheck(f"golden:{name}", True, f"{len(actual.splitlines())} lines match"))
    else:
        checks.append(CorpusCheck(f"golden:{name}", False, "output differs from golden"))


def _check_roundtrip(checks: list[CorpusCheck], model) -> None:
    text = export_model(model)
    back = import_model(text, "<roundtrip>")
    ok = structurally_equal(model, back)
    checks.append(CorpusCheck("roundtrip", ok, "export/import is structure-preserving" if ok else "round-trip changed the model"))


def _check_dot_counts(checks: list[CorpusCheck], model) -> None:
    for comp, expected in MACHINE_STATE_COUNTS.items():
        dot = statemachine_to_dot(model, comp)
        nodes = _count_dot_states(dot)
        ok = nodes == expected
        checks.append(
            CorpusCheck(
                f"dot:{comp}",
                ok,
                f"{nodes} state nodes" + ("" if ok else f", expected {expected}"),
            )
        )


def _count_dot_states(dot: str) -> int:
    count = 0
    for line in dot.splitlines():
        stripped = line.strip()
        if stripped.startswith('"') and "->" not in stripped and stripped.endswith(";"):
            count += 1
    return count


def _check_mutations(checks: list[CorpusCheck], mutations_dir: str) -> None:
    manifest_path = os.path.join(mutations_dir, "expected_diagnostics.txt")
    if not os.path.exists(manifest_path):
        checks.append(CorpusCheck("mutations", False, "expected_diagnostics.txt missing"))
        return
    with open(manifest_path, encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip() and not ln.startswith("#")]
    for line in lines:
        fname, _, spec = line.partition(" ")
        expected = [tuple(item.strip().split(":")) for item in spec.split(",")]
        _, diags = collect_diagnostics_file(os.path.join(mutations_dir, fname))
        actual = [(d.rule, d.severity.value) for d in diags]
        ok = actual == [(rule, sev) for rule, sev in expected]
        detail = "diagnostics match manifest" if ok else f"expected {expected}, got {actual}"
        checks.append(CorpusCheck(f"mutation:{fname}", ok, detail))


def _check_syntax_errors(checks: list[CorpusCheck], syntax_dir: str) -> None:
    if not os.path.isdir(syntax_dir):
        checks.append(CorpusCheck("syntax_errors", False, "directory missing"))
        return
    for fname in sorted(os.listdir(syntax_dir)):
        if not fname.endswith(".ciot"):
            continue
        model, diags = collect_diagnostics_file(os.path.join(syntax_dir, fname))
        ok = model is None and bool(diags) and diags[0].rule in ("E_LEX", "E_PARSE")
        detail = diags[0].rule if diags else "no diagnostics"
        checks.append(CorpusCheck(f"syntax:{fname}", ok, detail))
