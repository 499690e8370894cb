import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from instances import random_instance
from invariants import check_all, data_bound, label_soundness
from pwflow.errors import NoProgress, NonTermination
from pwflow.fixtures import FILE_SIZE, LINK_RATE, three_by_three_process, three_input_process
from pwflow.model import DataRequirement, ExecutionContext, OutputSpec, Process, ResourceRequirement, data_burst
from pwflow.piecewise import PiecewiseFn, constant, linear, step
from pwflow.solver import Limiter, data_progress, impose_resource_limits, solve

IDENT_100 = PiecewiseFn([0.0, 100.0], [[0.0, 1.0]], "hold")


def single(data_req, resource_req=None, target=100.0):
    rreq = [ResourceRequirement("cpu", resource_req)] if resource_req is not None else []
    return Process("p", [DataRequirement("input", data_req)], rreq, [OutputSpec("out", IDENT_100)], target)


def segments(result):
    return [(s.t_a, s.t_b, str(s.limiter)) for s in result.bottlenecks]


# -- data progress ---------------------------------------------------------------


def test_stream_data_progress():
    dp = data_progress(single(IDENT_100), ExecutionContext([linear(10.0)], []))
    assert dp.combined(5.0) == 50.0 and dp.combined(10.0) == 100.0


def test_burst_data_progress():
    dp = data_progress(single(data_burst(100.0, 80.0), target=80.0), ExecutionContext([linear(10.0)], []))
    assert dp.combined.eval_left(10.0) == 0.0 and dp.combined(10.0) == 80.0


def test_three_input_envelope_order():
    proc, ctx = three_input_process()
    result = solve(proc, ctx)
    assert result.limiter_sequence() == ["data2", "data1", "data0"]
    assert result.completion_time == pytest.approx(10.0)
    # quadratic input 2 meets the 20 % plateau of input 1 at sqrt(5)
    assert result.bottlenecks[1].t_a == pytest.approx(math.sqrt(5.0))


def test_no_data_requirements_means_target_from_start():
    proc = Process("compute", [], [], [OutputSpec("out", IDENT_100)], 100.0)
    dp = data_progress(proc, ExecutionContext([], [], start_time=3.0))
    assert dp.combined(2.0) == 0.0 and dp.combined(3.0) == 100.0


# -- resource limits ---------------------------------------------------------------


def test_stream_limited_by_resource():
    result = solve(single(IDENT_100, linear(1.0)), ExecutionContext([linear(10.0)], [constant(5.0)]))
    assert result.completion_time == pytest.approx(20.0)
    assert result.progress(8.0) == pytest.approx(40.0)
    assert segments(result)[:-1] == [(0.0, pytest.approx(20.0), "resource0")]


def test_burst_then_resource():
    proc = single(step(100.0, 0.0, 100.0), linear(1.0))
    result = solve(proc, ExecutionContext([linear(10.0)], [constant(5.0)]))
    assert result.completion_time == pytest.approx(30.0)
    assert result.progress(9.0) == 0.0
    assert result.progress(20.0) == pytest.approx(50.0)
    assert result.limiter_sequence() == ["data0", "resource0"]
    assert result.bottlenecks[0].t_b == pytest.approx(10.0)


def test_abundant_resource_follows_data():
    proc = single(IDENT_100, linear(1.0))
    ctx = ExecutionContext([linear(10.0)], [constant(1000.0)])
    result = solve(proc, ctx)
    for t in (0.0, 2.5, 5.0, 9.9, 10.0, 20.0):
        assert result.progress(t) == pytest.approx(result.data_progress(t))
    assert result.limiter_sequence() == ["data0"]


def test_download_at_half_link():
    size = float(FILE_SIZE)
    proc = single(PiecewiseFn([0.0, size], [[0.0, 1.0]], "hold"), linear(1.0), target=size)
    result = solve(proc, ExecutionContext([constant(size)], [constant(0.5 * LINK_RATE)]))
    assert result.completion_time == pytest.approx(2 * size / LINK_RATE, rel=1e-12)
    assert result.completion_time == pytest.approx(186.645, abs=1e-3)


def test_download_at_full_link():
    size = float(FILE_SIZE)
    proc = single(PiecewiseFn([0.0, size], [[0.0, 1.0]], "hold"), linear(1.0), target=size)
    result = solve(proc, ExecutionContext([constant(size)], [constant(LINK_RATE)]))
    assert result.completion_time == pytest.approx(93.32, abs=1e-2)


def test_no_requirements_completes_at_start():
    proc = Process("empty", [], [], [OutputSpec("out", IDENT_100)], 100.0)
    result = solve(proc, ExecutionContext([], [], start_time=4.0))
    assert result.completion_time == 4.0
    assert result.progress(4.0) == 100.0


def test_start_time_shifts_everything():
    proc = single(IDENT_100, linear(1.0))
    result = solve(proc, ExecutionContext([constant(100.0)], [constant(5.0)], start_time=7.0))
    assert result.completion_time == pytest.approx(27.0)
    assert result.progress(7.0) == 0.0


def test_resource_burst_stalls_before_progress():
    # the whole 50 units are due before any progress: 10 s at rate 5
    proc = single(IDENT_100, constant(50.0))
    result = solve(proc, ExecutionContext([constant(100.0)], [constant(5.0)]))
    assert result.completion_time == pytest.approx(10.0)
    assert result.progress(9.99) == 0.0
    assert result.stalls and result.stalls[0].amount == pytest.approx(50.0)
    assert result.limiter_sequence() == ["resource0"]


def test_starved_process_raises():
    proc = single(IDENT_100, linear(1.0))
    with pytest.raises(NoProgress):
        solve(proc, ExecutionContext([linear(10.0)], [constant(0.0)]))


def test_iteration_guard():
    proc, ctx = three_by_three_process()
    with pytest.raises(NonTermination):
        impose_resource_limits(proc, ctx, max_iterations=2)


def test_three_by_three_limiter_order():
    proc, ctx = three_by_three_process()
    result = solve(proc, ctx)
    assert result.limiter_sequence() == ["data2", "resource2", "data1", "resource0", "resource1", "data0"]
    bounds = [(s.t_a, s.t_b) for s in result.bottlenecks[:-1]]
    expected = [(0, 2), (2, 3), (3, 12), (12, 20), (20, 30), (30, 40)]
    assert bounds == [(pytest.approx(a), pytest.approx(b)) for a, b in expected]
    assert result.completion_time == pytest.approx(40.0)


def test_finished_segment_closes_the_timeline():
    result = solve(*three_input_process())
    last = result.bottlenecks[-1]
    assert last.limiter == Limiter.finished() and last.t_b == math.inf


def test_ties_are_reported_as_co_limiters():
    proc = Process(
        "twin",
        [DataRequirement("a", IDENT_100), DataRequirement("b", IDENT_100)],
        [],
        [OutputSpec("out", IDENT_100)],
        100.0,
    )
    result = solve(proc, ExecutionContext([linear(10.0), linear(10.0)], []))
    first = result.bottlenecks[0]
    assert str(first.limiter) == "data0" and first.co_limiters == {Limiter.data(1)}


def test_limiter_names_round_trip():
    for text in ("data0", "resource2", "finished"):
        assert str(Limiter.parse(text)) == text


# -- properties on random instances -----------------------------------------------


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_random_instances_satisfy_invariants(seed):
    inst = random_instance(seed)
    result = solve(inst.process, inst.context)
    assert check_all(result) == []


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.floats(1.0, 3.0))
def test_more_resource_never_delays_completion(seed, factor):
    inst = random_instance(seed)
    base = solve(inst.process, inst.context).completion_time
    richer = ExecutionContext(inst.context.data_inputs, [f.scale(factor) for f in inst.context.resource_inputs])
    assert solve(inst.process, richer).completion_time <= base * (1 + 1e-9)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.0, 50.0))
def test_more_data_never_delays_completion(seed, extra):
    inst = random_instance(seed)
    base = solve(inst.process, inst.context).completion_time
    more = ExecutionContext([f + constant(extra) for f in inst.context.data_inputs], inst.context.resource_inputs)
    assert solve(inst.process, more).completion_time <= base * (1 + 1e-9)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000))
def test_progress_is_continuous_where_resources_limit(seed):
    inst = random_instance(seed)
    result = solve(inst.process, inst.context)
    for seg in result.bottlenecks:
        if seg.limiter.kind == "resource" and math.isfinite(seg.t_b):
            inside = [x for x in result.progress.breakpoints if seg.t_a < x < seg.t_b]
            for x in inside:
                assert not result.progress.has_jump(x)


def test_fixtures_satisfy_invariants():
    for make in (three_input_process, three_by_three_process):
        result = solve(*make())
        assert data_bound(result) == [] and label_soundness(result) == []


def test_tiny_resource_slopes_still_limit():
    # 3 CPU-seconds spread over 1.2e11 units of progress
    size = 1.2e11
    proc = single(PiecewiseFn([0.0, size], [[0.0, 1.0]], "hold"), linear(3.0 / size), target=size)
    result = solve(proc, ExecutionContext([constant(size)], [constant(1.0)]))
    assert result.completion_time == pytest.approx(3.0, rel=1e-9)
    assert result.limiter_sequence() == ["resource0"]
