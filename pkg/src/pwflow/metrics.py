"""Quantities derived from a solved progress function.

Resource demand and relative usage tell where a resource is the bottleneck
and how much of it goes unused.  Consumed and buffered data tell how much
input a process has read and how much is waiting.  After completion every
demand is 0 and buffered data keep their value at completion.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

from . import _poly as P
from .errors import NotPiecewiseConstant
from .piecewise import (
    PiecewiseFn,
    _refine,
    _width,
    atol,
    compose,
    constant,
    first_reach,
    generalized_inverse,
    indicator,
    min_value,
)
from .solver import ProgressResult, data_progress

# relative usage within this of 1 marks a bottleneck witness
WITNESS_REL = 1e-6


def _resource_index(result: ProgressResult, req) -> int:
    if isinstance(req, int):
        return req
    for ell, r in enumerate(result.process.resource_requirements):
        if r is req or r.name == getattr(req, "name", req):
            return ell
    raise KeyError(f"unknown resource requirement {req!r}")


def _data_index(result: ProgressResult, req) -> int:
    if isinstance(req, int):
        return req
    for k, r in enumerate(result.process.data_requirements):
        if r is req or r.name == getattr(req, "name", req):
            return k
    raise KeyError(f"unknown data requirement {req!r}")


def _hold_after(fn: PiecewiseFn, t) -> PiecewiseFn:
    """``fn`` up to ``t``, then its left-limit value at ``t`` forever."""
    if t is None or not math.isfinite(t) or t <= fn.x0:
        return fn
    i = fn.index(t)
    bps = fn.breakpoints[: i + 1]
    pcs = fn.pieces[: i + 1]
    if bps[-1] == t:
        return PiecewiseFn(bps, pcs[:-1] + ((fn.eval_left(t),),)) if i > 0 else constant(fn.eval_left(t), fn.x0)
    return PiecewiseFn(bps + (t,), pcs + ((fn.eval_left(t),),))


def resource_demand(result: ProgressResult, req) -> PiecewiseFn:
    """Rate at which resource ``req`` is used: progress rate times the requirement slope at the current progress.

    Stalls at jumps of the requirement use the full input while they last.
    """
    ell = _resource_index(result, req)
    requirement = result.process.resource_requirements[ell].fn
    prog = result.progress
    demand = prog.derivative() * compose(requirement.derivative(), prog)
    supply = result.context.resource_inputs[ell]
    for st in result.stalls:
        if st.resource == ell and st.t_b > st.t_a:
            demand = demand + supply * indicator(st.t_a, st.t_b, x0=prog.x0)
    return demand.simplify()


def _ratio(a, b, w):
    """``a / b`` on one piece, or ``None`` if not a polynomial."""
    scale = w if math.isfinite(w) else 1.0
    b = P.trim(b, scale)
    a = P.trim(a, scale)
    if len(b) == 1:
        d = b[0]
        if abs(d) <= atol(0.0) * 1e-3:
            return (0.0,) if P.is_zero(a, atol(0.0)) else None
        return P.pscale(a, 1.0 / d)
    if P.is_zero(a, atol(0.0)):
        return (0.0,)
    # a is a constant multiple of b
    if len(a) == len(b):
        k = a[-1] / b[-1]
        if all(abs(ai - k * bi) <= atol(ai, k * bi) * 1e3 for ai, bi in zip(a, b)):
            return (k,)
    return None


def relative_usage(result: ProgressResult, req, supply: PiecewiseFn | None = None) -> PiecewiseFn:
    """Demand over supply, with ``0 / 0 = 0``.

    Exact when the supply is piecewise-constant or the demand is a constant
    multiple of it on each piece; otherwise :class:`NotPiecewiseConstant`.
    """
    ell = _resource_index(result, req)
    if supply is None:
        supply = result.context.resource_inputs[ell]
    demand = resource_demand(result, ell)
    grid, (pa, pb) = _refine([demand, supply])
    out = []
    for j, (a, b) in enumerate(zip(pa, pb)):
        q = _ratio(a, b, _width(grid, j))
        if q is None:
            raise NotPiecewiseConstant(f"demand/supply is not polynomial on the piece starting at {grid[j]}")
        out.append(q)
    return PiecewiseFn(grid, out).simplify()


@dataclass(frozen=True)
class BottleneckWitness:
    t_a: float
    t_b: float
    resource: int
    reason: str  # "saturated" or "starved"


def bottleneck_witnesses(result: ProgressResult, req) -> list:
    """Intervals where resource ``req`` is used to the full or is missing while needed."""
    ell = _resource_index(result, req)
    rel = relative_usage(result, ell)
    supply = result.context.resource_inputs[ell]
    slope_at = compose(result.process.resource_requirements[ell].fn.derivative(), result.progress)
    end = result.completion_time if result.completion_time is not None else math.inf
    out = []
    for s, e, p in rel.spans():
        if s >= end:
            break
        e = min(e, end)
        m = 0.5 * (s + e)
        v = P.peval(p, m - s)
        if abs(v - 1.0) <= WITNESS_REL:
            out.append(BottleneckWitness(s, e, ell, "saturated"))
        elif supply(m) <= atol(0.0) and slope_at(m) > 0.0:
            out.append(BottleneckWitness(s, e, ell, "starved"))
    merged = []
    for w in out:
        if merged and merged[-1].reason == w.reason and abs(merged[-1].t_b - w.t_a) <= atol(w.t_a):
            merged[-1] = BottleneckWitness(merged[-1].t_a, w.t_b, ell, w.reason)
        else:
            merged.append(w)
    return merged


def data_consumed(result: ProgressResult, req) -> PiecewiseFn:
    """Input read so far: the generalized inverse of the requirement applied to ``P``."""
    k = _data_index(result, req)
    requirement = result.process.data_requirements[k].fn
    inv = generalized_inverse(requirement)
    if inv.fn is None:
        return constant(inv.x0, result.progress.x0)
    return compose(inv.fn, result.progress, at_flats=inv)


def buffered_data(result: ProgressResult, req, supply: PiecewiseFn | None = None) -> PiecewiseFn:
    """Input delivered but not yet read, held at its completion value afterwards."""
    k = _data_index(result, req)
    if supply is None:
        supply = result.context.data_inputs[k]
    buf = supply - data_consumed(result, k)
    lo, where = min_value(_hold_after(buf, result.completion_time))
    scale = max(1.0, abs(supply(where)))
    if lo < -atol(scale) * 1e3:
        warnings.warn(f"buffered data negative ({lo:g}) at t={where:g}", RuntimeWarning, stacklevel=2)
    return _hold_after(buf, result.completion_time).simplify()


@dataclass(frozen=True)
class Impulse:
    """Unbounded instantaneous demand of ``amount`` resource at time ``t``."""

    t: float
    amount: float


@dataclass
class DataOnlyDemand:
    rate: PiecewiseFn
    impulses: list = field(default_factory=list)


def data_only_demand(process, ctx) -> list:
    """Per resource, the supply under which only data inputs would limit progress.

    Wherever the data bound jumps, or passes a jump of the requirement, the
    need is an impulse rather than a rate; those are listed separately.
    """
    data_bound = data_progress(process, ctx).combined
    data_rate = data_bound.derivative()
    out = []
    for req in process.resource_requirements:
        requirement = req.fn
        rate = (data_rate * compose(requirement.derivative(), data_bound)).simplify()
        impulses = []
        marks = {x: (left, right) for x, left, right in data_bound.jumps()}
        start = ctx.start_time
        target = process.target_progress
        # the requirement counts from 0 just left of progress 0
        amount = requirement(min(data_bound(start), target))
        if amount > atol(0.0):
            impulses.append(Impulse(start, amount))
        for x, (left, right) in sorted(marks.items()):
            if x <= start:
                continue
            hi, lo = min(right, target), min(left, target)
            amount = requirement(hi) - requirement(lo) if hi > lo else 0.0
            if amount > atol(0.0):
                impulses.append(Impulse(x, amount))
        # requirement jumps crossed while the bound rises continuously
        for x, left, right in requirement.jumps():
            if x > target:
                break
            t = first_reach(data_bound, x, start)
            if t is not None and t > start and t not in marks:
                impulses.append(Impulse(t, right - left))
        impulses.sort(key=lambda i: i.t)
        out.append(DataOnlyDemand(rate, impulses))
    return out


@dataclass
class UsageReport:
    demand: list
    relative: list
    unused: list
    consumed: list
    buffered: list


def usage_report(result: ProgressResult) -> UsageReport:
    """All metrics for one result.  Relative usage is ``None`` where it is not representable."""
    proc, ctx = result.process, result.context
    demand, relative, unused = [], [], []
    for ell, supply in enumerate(ctx.resource_inputs):
        d = resource_demand(result, ell)
        demand.append(d)
        try:
            relative.append(relative_usage(result, ell, supply))
        except NotPiecewiseConstant:
            relative.append(None)
        unused.append((supply - d).simplify())
    consumed, buffered = [], []
    for k in range(len(proc.data_requirements)):
        consumed.append(data_consumed(result, k))
        buffered.append(buffered_data(result, k))
    return UsageReport(demand, relative, unused, consumed, buffered)
