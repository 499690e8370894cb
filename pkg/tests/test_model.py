import math

import pytest

from pwflow.errors import InvalidParameter
from pwflow.model import (
    DataRequirement,
    ExecutionContext,
    OutputSpec,
    Process,
    ResourceRequirement,
    canonical_requirements,
    data_burst,
    data_stream,
    resource_burst,
    resource_stream,
    validate,
)
from pwflow.piecewise import PiecewiseFn, constant, linear


def stream_process(resource_fn=None):
    ident = PiecewiseFn([0.0, 100.0], [[0.0, 1.0]], "hold")
    return Process(
        "stream",
        [DataRequirement("input", ident)],
        [ResourceRequirement("cpu", resource_fn or linear(1.0))],
        [OutputSpec("out", ident)],
        100.0,
    )


def kinds(violations):
    return [v.kind for v in violations]


def test_stream_process_is_valid():
    assert validate(stream_process(), ExecutionContext([linear(10.0)], [constant(5.0)])) == []


def test_quadratic_resource_requirement_is_flagged():
    proc = stream_process(PiecewiseFn([0.0], [[0.0, 0.0, 0.01]]))
    assert "PiecewiseLinearityViolation" in kinds(validate(proc))


def test_decreasing_data_input_is_flagged_with_witness():
    falling = PiecewiseFn([0.0, 5.0], [[0.0, 10.0], [20.0]])
    found = [v for v in validate(stream_process(), ExecutionContext([falling], [constant(5.0)])) if v.kind == "MonotonicityViolation"]
    assert found and found[0].witness == pytest.approx(5.0)


def test_negative_resource_input_is_flagged():
    out = validate(stream_process(), ExecutionContext([linear(10.0)], [constant(-1.0)]))
    assert "NegativeValueViolation" in kinds(out)


def test_function_must_start_at_zero():
    late = PiecewiseFn([1.0], [[0.0, 1.0]])
    proc = Process("late", [DataRequirement("input", late)], [], [], 10.0)
    assert "DomainStartViolation" in kinds(validate(proc))


def test_arity_mismatch():
    out = validate(stream_process(), ExecutionContext([], [constant(5.0)]))
    assert "ArityMismatch" in kinds(out)


def test_unreachable_target():
    proc = stream_process()
    out = validate(proc, ExecutionContext([constant(50.0)], [constant(5.0)]))
    assert "UnreachableTarget" in kinds(out)


def test_violation_renders_kind_and_subject():
    proc = stream_process(PiecewiseFn([0.0], [[0.0, 0.0, 0.01]]))
    text = str(validate(proc)[0])
    assert text.startswith("PiecewiseLinearityViolation: ")


def test_default_target_is_final_output_maximum():
    out = PiecewiseFn([0.0, 40.0], [[0.0, 2.0]], "hold")
    proc = Process("p", [DataRequirement("d", linear(1.0))], [], [OutputSpec("o", out)])
    assert proc.target_progress == 80.0


def test_default_target_falls_back_to_data_requirements():
    req = PiecewiseFn([0.0, 30.0], [[0.0, 1.0]], "hold")
    proc = Process("p", [DataRequirement("d", req)], [], [])
    assert proc.target_progress == 30.0


def test_missing_target_without_bound_is_an_error():
    with pytest.raises(ValueError):
        Process("p", [DataRequirement("d", linear(1.0))], [], [])


def test_lookups_by_name():
    proc = stream_process()
    assert proc.data_index("input") == 0
    assert proc.resource_index("cpu") == 0
    assert proc.output_index("out") == 0
    with pytest.raises(KeyError):
        proc.resource_index("gpu")


def test_canonical_shapes():
    assert data_stream(2.0)(3.0) == 6.0
    burst = data_burst(100.0, 80.0)
    assert burst.eval_left(100.0) == 0.0 and burst(100.0) == 80.0
    assert resource_stream(0.5)(10.0) == 5.0
    assert resource_burst(7.0)(0.0) == 7.0
    table = canonical_requirements()
    assert set(table) == {"data", "resource"}
    assert set(table["data"]) == {"stream", "burst"}


@pytest.mark.parametrize(
    "make",
    [
        lambda: data_stream(0.0),
        lambda: data_burst(-1.0, 5.0),
        lambda: data_burst(5.0, 0.0),
        lambda: resource_stream(-2.0),
        lambda: resource_burst(0.0),
    ],
)
def test_canonical_shapes_reject_non_positive_parameters(make):
    with pytest.raises(InvalidParameter):
        make()


def test_context_defaults_to_time_zero():
    ctx = ExecutionContext([linear(1.0)], [])
    assert ctx.start_time == 0.0 and isinstance(ctx.data_inputs, tuple)
    assert math.isfinite(ctx.start_time)
