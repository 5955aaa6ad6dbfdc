from __future__ import annotations

import pytest

from ciot.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# --- validate -------------------------------------------------------------


def test_validate_clean_model(capsys, parking_path):
    code, out, err = run_cli(capsys, "validate", parking_path)
    assert code == 0
    assert out == "errors=0 warnings=0\n"
    assert err == ""


def test_validate_mutant_reports_rule(capsys, corpus_dir):
    path = str(corpus_dir / "mutations" / "r1_no_initial.ciot")
    code, out, err = run_cli(capsys, "validate", path)
    assert code == 1
    assert out == "errors=1 warnings=0\n"
    assert "error R1" in err
    assert err.startswith(path + ":")  # file:line:col prefix


def test_validate_warning_only_exits_zero(capsys, corpus_dir):
    path = str(corpus_dir / "mutations" / "r6_unreachable_state.ciot")
    code, out, err = run_cli(capsys, "validate", path)
    assert code == 0
    assert out == "errors=0 warnings=1\n"
    assert "warning R6" in err


def test_validate_syntax_error(capsys, corpus_dir):
    path = str(corpus_dir / "syntax_errors" / "missing_semicolon.ciot")
    code, out, err = run_cli(capsys, "validate", path)
    assert code == 1
    assert "E_PARSE" in err


def test_validate_missing_file(capsys, tmp_path):
    code, out, err = run_cli(capsys, "validate", str(tmp_path / "nope.ciot"))
    assert code == 2
    assert "E_IO" in err


# --- run --------------------------------------------------------------------


def test_run_without_injections_prints_init_trace(capsys, parking_path):
    code, out, err = run_cli(capsys, "run", parking_path)
    assert code == 0
    lines = out.splitlines()
    assert len(lines) == 4
    assert all("kind=state_entered" in line for line in lines)
    assert lines[0] == "seq=0 t=0 inst=node kind=state_entered state=ACQUISITION"


def test_run_with_injection_drives_indicators(capsys, parking_path):
    code, out, err = run_cli(
        capsys, "run", parking_path, "--inject", "node.pSense.evtReading{duration=450.0}"
    )
    assert code == 0
    assert "inst=node.green kind=state_entered state=ON" in out
    assert out.endswith("state=ON\n")


def test_run_trace_file_option(capsys, tmp_path, parking_path):
    target = tmp_path / "out.trace"
    code, out, err = run_cli(capsys, "run", parking_path, "--trace", str(target))
    assert code == 0
    assert out == ""
    assert target.read_text().startswith("seq=0 t=0 inst=node")


def test_run_malformed_inject_spec(capsys, parking_path):
    code, out, err = run_cli(capsys, "run", parking_path, "--inject", "nonsense")
    assert code == 2
    assert "E_USAGE" in err


def test_run_inject_unknown_target(capsys, parking_path):
    code, out, err = run_cli(
        capsys, "run", parking_path, "--inject", "node.ghost.evt{duration=1.0}"
    )
    assert code == 1
    assert "E_BAD_TARGET" in err


# --- simulate ----------------------------------------------------------------


def test_simulate_duration_scenario(capsys, parking_path, arrive_depart_path):
    code, out, err = run_cli(capsys, "simulate", parking_path, arrive_depart_path)
    assert code == 0
    assert out == "t=0 status=vacant\nt=5000 status=occupied\nt=12000 status=vacant\n"


def test_simulate_physical_scenario_with_threshold(capsys, parking_path, physical_path):
    code, out, err = run_cli(
        capsys, "simulate", parking_path, physical_path, "--threshold-ms", "5"
    )
    assert code == 0
    assert out == "t=0 status=vacant\nt=5000 status=occupied\nt=12000 status=vacant\n"


def test_simulate_horizon_zero(capsys, tmp_path, parking_path):
    scn = tmp_path / "zero.scn"
    scn.write_text("mode=duration\nhorizon_ms=0\n")
    code, out, err = run_cli(capsys, "simulate", parking_path, str(scn))
    assert code == 0
    assert out == ""


def test_simulate_writes_trace_file(capsys, tmp_path, parking_path, arrive_depart_path):
    target = tmp_path / "sim.trace"
    code, out, err = run_cli(
        capsys, "simulate", parking_path, arrive_depart_path, "--trace", str(target)
    )
    assert code == 0
    text = target.read_text()
    assert text.startswith("seq=0 t=0 ")
    assert text.endswith("\n")


def test_simulate_bad_scenario(capsys, tmp_path, parking_path):
    scn = tmp_path / "bad.scn"
    scn.write_text("mode=duration\n")
    code, out, err = run_cli(capsys, "simulate", parking_path, str(scn))
    assert code == 1
    assert "E_SCENARIO" in err


def test_simulate_repeat_runs_identical(capsys, parking_path, arrive_depart_path):
    first = run_cli(capsys, "simulate", parking_path, arrive_depart_path)
    second = run_cli(capsys, "simulate", parking_path, arrive_depart_path)
    assert first == second


# --- export -------------------------------------------------------------------


def test_export_model_is_canonical_text(capsys, parking_path):
    code, out, err = run_cli(capsys, "export", parking_path)
    assert code == 0
    assert out.startswith("payload LedCommand {")
    from ciot import load_text, structurally_equal
    from ciot.loader import load_file

    assert structurally_equal(load_text(out), load_file(parking_path))


def test_export_sm_dot(capsys, parking_path):
    code, out, err = run_cli(
        capsys, "export", parking_path, "--kind", "sm", "--component", "Node"
    )
    assert code == 0
    assert out.startswith('digraph "Node" {')
    assert out.count("->") == 6


def test_export_structure_dot(capsys, parking_path):
    code, out, err = run_cli(
        capsys, "export", parking_path, "--kind", "structure", "--component", "Node"
    )
    assert code == 0
    assert out.startswith("digraph structure {")
    assert out.count("subgraph") == 4


def test_export_sm_requires_component(capsys, parking_path):
    code, out, err = run_cli(capsys, "export", parking_path, "--kind", "sm")
    assert code == 2
    assert "E_USAGE" in err


def test_export_sm_without_machine(capsys, tmp_path):
    model = tmp_path / "bare.ciot"
    model.write_text("component Bare : Board {}\n")
    code, out, err = run_cli(
        capsys, "export", str(model), "--kind", "sm", "--component", "Bare"
    )
    assert code == 1
    assert "E_NO_MACHINE" in err


def test_export_output_file(capsys, tmp_path, parking_path):
    target = tmp_path / "model.ciot"
    code, out, err = run_cli(capsys, "export", parking_path, "-o", str(target))
    assert code == 0
    assert out == ""
    assert target.read_text().startswith("payload LedCommand {")


def test_export_skips_validation(capsys, corpus_dir):
    # structural exports work even on rule-violating models
    path = str(corpus_dir / "mutations" / "r1_no_initial.ciot")
    code, out, err = run_cli(capsys, "export", path, "--kind", "sm", "--component", "Node")
    assert code == 0
    assert out.startswith('digraph "Node" {')


# --- argument handling ----------------------------------------------------------


def test_unknown_subcommand_exits_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2


def test_no_arguments_exits_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 2
