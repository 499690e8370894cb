import csv
import json
import subprocess
import sys
from pathlib import Path

import pytest

from pwflow.cli import main
from pwflow.document import (
    dump_document,
    fixture_path,
    load_document,
    parse_document,
    schema,
    set_document_value,
    workflow_to_dict,
)
from pwflow.errors import UnknownParameter, ValidationError
from pwflow.fixtures import eval_workflow, expected_makespan
from pwflow.workflow import analyze

FIXTURE = fixture_path("eval-workflow.json")
GOLDEN = Path(__file__).parent / "golden" / "eval-workflow-report.json"


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def write_doc(tmp_path, data, name="doc.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return path


@pytest.fixture
def doc():
    return json.loads(FIXTURE.read_text())


# -- documents -------------------------------------------------------------------


def test_shipped_schema_is_published(pytestconfig):
    published = Path(pytestconfig.rootpath) / "docs" / "schema.json"
    assert json.loads(published.read_text()) == schema()


def test_round_trip_is_bit_exact(doc):
    wf = parse_document(doc)
    again = parse_document(json.loads(dump_document(wf)))
    for name, proc in wf.processes.items():
        other = again.processes[name]
        for a, b in zip(proc.data_requirements + proc.resource_requirements + proc.outputs,
                        other.data_requirements + other.resource_requirements + other.outputs):
            assert a.fn.breakpoints == b.fn.breakpoints and a.fn.pieces == b.fn.pieces
        assert proc.target_progress == other.target_progress
    assert wf.bindings == again.bindings and wf.pools == again.pools


def test_fixture_matches_builder():
    assert parse_document(workflow_to_dict(eval_workflow(0.5))) == load_document(FIXTURE).workflow


def test_unresolved_name_is_a_violation(doc):
    doc["processes"][0]["resource_requirements"][0]["fn"] = "missing_fn"
    with pytest.raises(ValidationError) as info:
        parse_document(doc)
    assert any(v.kind == "UnresolvedName" and v.subject == "missing_fn" for v in info.value.violations)


def test_document_paths(doc):
    changed = set_document_value(doc, "bindings.dl1.fraction", 0.8)
    assert changed["bindings"]["dl1"]["link"]["fraction"] == 0.8
    assert doc["bindings"]["dl1"]["link"]["fraction"] == 0.5  # the original is untouched
    changed = set_document_value(doc, "processes.t3.target_progress", 12.0)
    assert changed["processes"][4]["target_progress"] == 12.0
    with pytest.raises(UnknownParameter):
        set_document_value(doc, "functions.nothing.pieces.0.0", 1.0)


# -- validate ----------------------------------------------------------------------


def test_validate_ok(capsys):
    code, out, err = run(["validate", FIXTURE], capsys)
    assert (code, out, err) == (0, "OK\n", "")


def test_validate_quadratic_resource_requirement(tmp_path, doc, capsys):
    doc["functions"]["t1_cpu"]["pieces"][0] = [0.0, 1e-6, 1e-12]
    code, out, err = run(["validate", write_doc(tmp_path, doc)], capsys)
    assert code == 2 and out == ""
    assert "PiecewiseLinearityViolation" in err and "t1.resource.cpu" in err


def test_validate_unresolved_name(tmp_path, doc, capsys):
    doc["pools"][0]["capacity_fn"] = "no_such_fn"
    code, out, err = run(["validate", write_doc(tmp_path, doc)], capsys)
    assert code == 2 and out == "" and "no_such_fn" in err


def test_malformed_json(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{ not json")
    code, out, err = run(["analyze", bad], capsys)
    assert code == 2 and out == "" and "invalid JSON" in err


def test_schema_violation(tmp_path, doc, capsys):
    doc["version"] = 2
    code, out, err = run(["validate", write_doc(tmp_path, doc)], capsys)
    assert code == 2 and out == "" and "SchemaViolation" in err


def test_missing_file(tmp_path, capsys):
    code, out, err = run(["validate", tmp_path / "absent.json"], capsys)
    assert code == 2 and out == ""


# -- analyze -----------------------------------------------------------------------


def test_analyze_matches_golden_report(capsys):
    code, out, err = run(["analyze", FIXTURE], capsys)
    assert code == 0 and err == ""
    report = json.loads(out)
    assert report == json.loads(GOLDEN.read_text())
    assert report["makespan"] == pytest.approx(expected_makespan(0.5), rel=1e-12)
    for name in ("dl1", "dl2"):
        first = report["processes"][name]["bottlenecks"][0]
        assert first["slot"] == "link" and first["limiter"] == "resource0"


def test_analyze_writes_out_file(tmp_path, capsys):
    target = tmp_path / "report.json"
    code, out, _ = run(["analyze", FIXTURE, "--out", target], capsys)
    assert code == 0 and out == ""
    assert json.loads(target.read_text())["makespan"] == pytest.approx(271.645, abs=1e-3)


def test_analyze_oracle_check(capsys):
    code, out, _ = run(["analyze", FIXTURE, "--oracle-check", "--dt", "1e-3"], capsys)
    report = json.loads(out)
    assert code == 0
    assert report["oracle_makespan"] == pytest.approx(report["makespan"], rel=5e-3)
    assert report["max_deviation"] >= 0.0


def test_cycle_exit_code(tmp_path, doc, capsys):
    doc["edges"].append({"from": "t3", "output": "out", "to": "dl1", "slot": "file"})
    del doc["bindings"]["dl1"]["file"]
    code, out, err = run(["analyze", write_doc(tmp_path, doc)], capsys)
    assert code == 3 and out == "" and "dl1" in err


def test_solver_failure_exit_code(tmp_path, doc, capsys):
    doc["functions"]["t1_cpu_input"]["pieces"] = [[0.0]]
    code, out, err = run(["analyze", write_doc(tmp_path, doc)], capsys)
    assert code == 4 and out == "" and err


@pytest.mark.parametrize("series", ["progress", "usage", "buffered"])
def test_series_csv(tmp_path, series, capsys):
    first, second = tmp_path / "a", tmp_path / "b"
    for d in (first, second):
        code, _, _ = run(["analyze", FIXTURE, "--series", series, "--csv", d, "--samples", "64"], capsys)
        assert code == 0
    files = sorted(p.name for p in first.iterdir())
    assert files == ["dl1.csv", "dl2.csv", "t1.csv", "t2.csv", "t3.csv"]
    for name in files:
        text = (first / name).read_text()
        assert text == (second / name).read_text()
        rows = list(csv.reader(text.splitlines()))
        assert rows[0] == ["t", "value", "label"]
        assert len(rows) > 64


def test_series_includes_every_breakpoint(tmp_path, capsys):
    run(["analyze", FIXTURE, "--series", "progress", "--csv", tmp_path, "--samples", "2"], capsys)
    times = {float(r["t"]) for r in csv.DictReader((tmp_path / "t1.csv").open())}
    result = analyze(load_document(FIXTURE).workflow)
    progress = result.results["t1"].progress
    assert {x for x in progress.breakpoints if x <= result.makespan} <= times


def test_series_needs_directory(capsys):
    code, out, err = run(["analyze", FIXTURE, "--series", "progress"], capsys)
    assert code == 2 and out == "" and "--csv" in err


# -- sweep -------------------------------------------------------------------------


def test_sweep_csv(capsys):
    code, out, err = run(["sweep", FIXTURE, "--param", "bindings.dl1.fraction", "--from", "0.5", "--to", "0.95", "--steps", "4"], capsys)
    assert code == 0 and err == ""
    rows = list(csv.DictReader(out.splitlines()))
    assert list(rows[0]) == ["value", "makespan", "dl1_completion", "dl2_completion", "t1_completion", "t2_completion", "t3_completion"]
    assert len(rows) == 4
    assert float(rows[0]["makespan"]) == pytest.approx(expected_makespan(0.5), rel=1e-12)


def test_single_step_sweep_equals_analyze(capsys):
    _, out, _ = run(["sweep", FIXTURE, "--param", "bindings.dl1.fraction", "--from", "0.5", "--to", "0.5", "--steps", "1"], capsys)
    _, report, _ = run(["analyze", FIXTURE], capsys)
    (row,) = list(csv.DictReader(out.splitlines()))
    assert float(row["makespan"]) == json.loads(report)["makespan"]


def test_sweep_is_deterministic_and_parallel_safe(capsys):
    args = ["sweep", FIXTURE, "--param", "bindings.dl1.fraction", "--from", "0.05", "--to", "0.95", "--steps", "12"]
    _, serial, _ = run(args, capsys)
    _, again, _ = run(args, capsys)
    _, parallel, _ = run(args + ["--parallel"], capsys)
    assert serial == again == parallel


def test_sweep_over_a_function_coefficient(capsys):
    args = ["sweep", FIXTURE, "--param", "functions.t1_cpu.pieces.0.1", "--from", "1e-6", "--to", "2e-6", "--steps", "2"]
    code, out, _ = run(args, capsys)
    rows = list(csv.DictReader(out.splitlines()))
    assert code == 0
    # t1 needs 80 s or 160 s of CPU after its download
    assert float(rows[1]["makespan"]) - float(rows[0]["makespan"]) == pytest.approx(80.0, rel=1e-9)


def test_unknown_parameter(capsys):
    code, out, err = run(["sweep", FIXTURE, "--param", "bindings.nobody.fraction", "--from", "0", "--to", "1", "--steps", "3"], capsys)
    assert code == 5 and out == "" and "nobody" in err


def test_steps_must_be_positive(capsys):
    with pytest.raises(SystemExit) as info:
        main(["sweep", str(FIXTURE), "--param", "bindings.dl1.fraction", "--from", "0", "--to", "1", "--steps", "0"])
    assert info.value.code == 2
    assert capsys.readouterr().out == ""


def test_console_script_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "pwflow.cli", "validate", str(FIXTURE)], capture_output=True, text=True, check=False
    )
    assert proc.returncode == 0 and proc.stdout == "OK\n"
