"""Reference models: the five-process video workflow and the small
constructions used to check limiter attribution.

The video workflow downloads one file twice over a shared link.  One copy
is reversed (reads everything, then encodes), the other is rotated
(streams), and a final step merges both results once they are complete.
"""
from __future__ import annotations

from .model import DataRequirement, ExecutionContext, OutputSpec, Process, ResourceRequirement, data_burst
from .piecewise import PiecewiseFn, constant, linear, step
from .workflow import DataEdge, PoolShare, Workflow

FILE_SIZE = 1_137_486_559  # bytes
LINK_RATE = 97.51e6 / 8  # bytes per second (net rate of the 100 Mbit/s link)
REVERSE_OUTPUT = 80e6  # bytes written by the reversal step
REVERSE_TOTAL_CPU = 108.0  # seconds for a local run
REVERSE_READ_CPU = 26.0  # of which reading and decoding
REVERSE_ENCODE_CPU = 82.0  # and encoding plus writing
ROTATE_CPU = 5.0
MERGE_CPU = 3.0


def _proc(name, data=(), resources=(), output_size=None, target=None):
    return Process(
        name,
        [DataRequirement(n, f) for n, f in data],
        [ResourceRequirement(n, f) for n, f in resources],
        [OutputSpec("out", _identity_upto(output_size))],
        target if target is not None else output_size,
    )


def _identity_upto(size):
    """``O(p) = p`` up to ``size``, then held."""
    return PiecewiseFn([0.0, size], [[0.0, 1.0]], "hold")


def eval_workflow(
    fraction: float = 0.5,
    reverse_cpu: float = REVERSE_ENCODE_CPU,
    file_size: float = FILE_SIZE,
    link_rate: float = LINK_RATE,
    reverse_output: float = REVERSE_OUTPUT,
    cpu_rate: float = 1.0,
) -> Workflow:
    """The five-process evaluation workflow with ``fraction`` of the link for ``dl1``.

    ``cpu_rate`` scales every CPU supply; together with ``file_size``,
    ``link_rate`` and ``reverse_output`` it allows scaling the whole model.
    """
    merged = reverse_output + file_size
    procs = [
        _proc("dl1", [("file", linear(1.0))], [("link", linear(1.0))], file_size),
        _proc("dl2", [("file", linear(1.0))], [("link", linear(1.0))], file_size),
        _proc("t1", [("video", data_burst(file_size, reverse_output))], [("cpu", linear(reverse_cpu / reverse_output))], reverse_output),
        _proc("t2", [("video", linear(1.0))], [("cpu", linear(ROTATE_CPU / file_size))], file_size),
        _proc(
            "t3",
            [("reversed", linear(merged / reverse_output)), ("rotated", linear(merged / file_size))],
            [("cpu", linear(MERGE_CPU / merged))],
            merged,
        ),
    ]
    cpu = constant(cpu_rate)
    bindings = {
        "dl1": {"file": constant(file_size), "link": PoolShare("link", fraction, ("dl2",))},
        "dl2": {"file": constant(file_size), "link": PoolShare("link", "rest", ("dl1",))},
        "t1": {"cpu": cpu},
        "t2": {"cpu": cpu},
        "t3": {"cpu": cpu},
    }
    edges = [
        DataEdge("dl1", "out", "t1", "video"),
        DataEdge("dl2", "out", "t2", "video"),
        DataEdge("t1", "out", "t3", "reversed"),
        DataEdge("t2", "out", "t3", "rotated"),
    ]
    return Workflow(
        {p.name: p for p in procs},
        edges,
        {"link": constant(link_rate)},
        bindings,
        {"t3": ("t1", "t2")},
    )


def expected_makespan(fraction: float, reverse_cpu: float = REVERSE_ENCODE_CPU) -> float:
    """Closed form for the evaluation workflow (merge CPU-bound after both tasks)."""
    both = 2 * FILE_SIZE / LINK_RATE  # the link is always fully used until both downloads end
    first = FILE_SIZE / (max(fraction, 1 - fraction) * LINK_RATE)
    dl1_done = first if fraction >= 0.5 else both
    dl2_done = both if fraction >= 0.5 else first
    t1_done = dl1_done + reverse_cpu
    t2_done = max(dl2_done, ROTATE_CPU)
    return max(t1_done, t2_done) + MERGE_CPU


# -- attribution constructions ------------------------------------------------


def three_input_process():
    """Three data inputs that take turns being the scarcest.

    Input 0 grows linearly, input 1 offers 20 % at once and the rest at
    t = 6, input 2 grows quadratically.  All requirements are the identity
    and the target is 100, so the scarcest input limits in the order
    2, 1, 0.
    """
    ident = PiecewiseFn([0.0, 100.0], [[0.0, 1.0]], "hold")
    proc = _proc("three_inputs", [("data0", ident), ("data1", ident), ("data2", ident)], [], 100.0)
    inputs = [
        linear(10.0),
        step(6.0, 20.0, 100.0),
        PiecewiseFn([0.0, 5.0], [[0.0, 0.0, 4.0]], "hold"),
    ]
    return proc, ExecutionContext(inputs, [])


def three_by_three_process():
    """Three data inputs and three resources whose limits alternate.

    The limiter order is data2, resource2, data1, resource0, resource1,
    data0.  Resource inputs are piecewise-constant.
    """
    ident = PiecewiseFn([0.0, 100.0], [[0.0, 1.0]], "hold")
    proc = _proc(
        "three_by_three",
        [("data0", ident), ("data1", ident), ("data2", ident)],
        [("resource0", linear(1.0)), ("resource1", linear(1.0)), ("resource2", linear(1.0))],
        100.0,
    )
    inputs = [
        # data0: half the target early, the rest only from t = 35
        PiecewiseFn([0.0, 5.0, 35.0], [[0.0, 10.0], [50.0], [50.0, 10.0]]),
        # data1: trickles, then arrives all at once at t = 12
        PiecewiseFn([0.0, 12.0], [[0.0, 2.0], [200.0]]),
        # data2: scarce at first, plentiful from t = 2
        PiecewiseFn([0.0, 2.0], [[0.0, 1.0], [200.0]]),
    ]
    resources = [
        PiecewiseFn([0.0, 12.0, 20.0], [[100.0], [2.0], [100.0]]),
        PiecewiseFn([0.0, 20.0, 32.0], [[100.0], [1.0], [100.0]]),
        PiecewiseFn([0.0, 8.0], [[4.0], [100.0]]),
    ]
    return proc, ExecutionContext(inputs, resources)
