"""Checks every solved process must pass; each returns a list of failure messages."""
from __future__ import annotations

import math
import warnings

from pwflow.metrics import buffered_data, relative_usage, resource_demand
from pwflow.errors import NotPiecewiseConstant

EPS = 1e-6


def sample_times(result, count=200):
    """Breakpoints of the interesting functions plus a uniform grid."""
    end = result.completion_time if result.completion_time is not None else result.progress.breakpoints[-1]
    start = result.start_time
    end = max(end, start + 1.0)
    ts = {start, end}
    for fn in [result.progress, result.data_progress] + list(result.per_input_progress):
        ts.update(x for x in fn.breakpoints if start <= x <= end)
    ts.update(start + (end - start) * i / count for i in range(count + 1))
    return sorted(ts)


def _mid_points(a, b, n=5):
    if not math.isfinite(b):
        b = a + 1.0
    return [a + (b - a) * (i + 0.5) / n for i in range(n)]


def data_bound(result):
    """P(t) <= P_D(t) everywhere."""
    out = []
    for t in sample_times(result):
        p, pd = result.progress(t), result.data_progress(t)
        if p > pd + EPS * max(1.0, abs(pd)):
            out.append(f"P({t:g})={p:g} above P_D={pd:g}")
    return out


def usage_range(result):
    """Relative usage stays within [0, 1] up to tolerance."""
    out = []
    for ell in range(len(result.process.resource_requirements)):
        try:
            rel = relative_usage(result, ell)
        except NotPiecewiseConstant:
            continue
        for s, e, p in rel.spans():
            for t in [s] + _mid_points(s, e):
                v = rel(t)
                if not (-EPS <= v <= 1.0 + EPS):
                    out.append(f"relative usage of resource{ell} is {v:g} at t={t:g}")
    return out


def conservation(result):
    """Resource used over the run equals the requirement at the target."""
    out = []
    if result.completion_time is None:
        return out
    for ell, req in enumerate(result.process.resource_requirements):
        used = resource_demand(result, ell).integral(result.start_time, result.completion_time)
        need = req.fn(result.process.target_progress)
        if abs(used - need) > EPS * max(1.0, abs(need)):
            out.append(f"resource{ell}: used {used!r} but requirement is {need!r}")
    return out


def buffered_nonnegative(result):
    out = []
    for k in range(len(result.process.data_requirements)):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            buf = buffered_data(result, k)
        scale = max(1.0, abs(result.context.data_inputs[k](sample_times(result)[-1])))
        for t in sample_times(result):
            if buf(t) < -EPS * scale:
                out.append(f"buffered data{k} is {buf(t):g} at t={t:g}")
    return out


def label_soundness(result):
    """Data segments follow their input's bound; resource segments use the whole supply."""
    out = []
    rels = {}
    for seg in result.bottlenecks:
        lim = seg.limiter
        if lim.kind == "finished":
            continue
        for t in _mid_points(seg.t_a, seg.t_b):
            if lim.kind == "data":
                p = result.progress(t)
                pk = result.per_input_progress[lim.index](t)
                if abs(p - pk) > EPS * max(1.0, abs(pk)):
                    out.append(f"{lim} segment at t={t:g}: P={p:g} but bound is {pk:g}")
            else:
                if lim.index not in rels:
                    try:
                        rels[lim.index] = relative_usage(result, lim.index)
                    except NotPiecewiseConstant:
                        rels[lim.index] = None
                rel = rels[lim.index]
                if rel is not None and abs(rel(t) - 1.0) > EPS:
                    out.append(f"{lim} segment at t={t:g}: relative usage {rel(t):g}")
    return out


ALL_CHECKS = (data_bound, usage_range, conservation, buffered_nonnegative, label_soundness)


def check_all(result):
    out = []
    for check in ALL_CHECKS:
        out.extend(f"{check.__name__}: {msg}" for msg in check(result))
    return out
