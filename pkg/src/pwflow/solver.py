"""Progress functions for a single process.

Two stages.  First the data inputs give an upper bound on progress:
each input is pushed through its data requirement and the lower envelope of
the results is taken.  Then resource inputs are imposed on that bound with a
cursor that walks forward in time and alternates between following that bound
and climbing at the speed the scarcest resource allows.

Resource requirement functions must be piecewise-linear, so within one
progress interval between their breakpoints every resource has a constant
cost per unit of progress and the allowed speed is a plain quotient of the
resource input.  Jumps in a resource requirement are paid for by stalling at
that progress level until the input has delivered the jump.  A requirement
is taken to be 0 just left of progress 0, so a positive value at 0 is such a
jump.
"""
from __future__ import annotations

import math
from bisect import bisect_left, bisect_right
from dataclasses import dataclass, field
from typing import NamedTuple

from .errors import NoProgress, NonTermination
from .model import ExecutionContext, Process
from .piecewise import (
    INF,
    Envelope,
    PiecewiseFn,
    atol,
    compose,
    constant,
    first_crossing,
    first_reach,
    minimum,
)

MAX_ITERATIONS = 10**6
# segments shorter than this fraction of the horizon are merged away
COALESCE_REL = 1e-9
# relative closeness at which a second limiter counts as tied
TIE_REL = 1e-6


@dataclass(frozen=True, order=True)
class Limiter:
    """What holds progress back: a data input, a resource, or nothing (finished)."""

    rank: int  # 0 data, 1 resource, 2 finished; gives the tie-break order
    index: int = -1

    @classmethod
    def data(cls, k):
        return cls(0, k)

    @classmethod
    def resource(cls, ell):
        return cls(1, ell)

    @classmethod
    def finished(cls):
        return cls(2, -1)

    @property
    def kind(self) -> str:
        return ("data", "resource", "finished")[self.rank]

    def __str__(self):
        return "finished" if self.rank == 2 else f"{self.kind}{self.index}"

    @classmethod
    def parse(cls, text: str) -> "Limiter":
        if text == "finished":
            return cls.finished()
        for rank, kind in enumerate(("data", "resource")):
            if text.startswith(kind):
                return cls(rank, int(text[len(kind):]))
        raise ValueError(f"not a limiter: {text!r}")


@dataclass(frozen=True)
class BottleneckSegment:
    t_a: float
    t_b: float
    limiter: Limiter
    co_limiters: frozenset = frozenset()

    @property
    def interval(self):
        return (self.t_a, self.t_b)

    @property
    def duration(self) -> float:
        return self.t_b - self.t_a


@dataclass(frozen=True)
class Stall:
    """Progress held at ``level`` while resource ``resource`` pays a jump."""

    resource: int
    t_a: float
    t_b: float
    level: float
    amount: float


class DataProgress(NamedTuple):
    combined: PiecewiseFn
    per_input: list
    envelope: Envelope | None


@dataclass
class ProgressResult:
    progress: PiecewiseFn
    data_progress: PiecewiseFn
    per_input_progress: list
    completion_time: float | None
    bottlenecks: list
    max_speed_trace: PiecewiseFn
    stalls: list = field(default_factory=list)
    process: Process | None = None
    context: ExecutionContext | None = None
    iterations: int = 0

    @property
    def start_time(self) -> float:
        return self.context.start_time if self.context is not None else 0.0

    def limiter_sequence(self, include_finished=False):
        """Primary limiter names in time order, e.g. ``["data0", "resource0"]``."""
        return [str(s.limiter) for s in self.bottlenecks if include_finished or s.limiter.rank != 2]


# -- data progress -----------------------------------------------------------


def _gate(fn: PiecewiseFn, start: float) -> PiecewiseFn:
    """``fn`` from ``start`` on, 0 before (absolute time)."""
    if start <= fn.x0:
        return fn
    tail = fn.restrict(start)
    return PiecewiseFn((min(0.0, fn.x0),) + tail.breakpoints, ((0.0,),) + tail.pieces)


def data_progress(process: Process, ctx: ExecutionContext) -> DataProgress:
    """Per-input progress bounds and their lower envelope.

    Times are absolute: before ``ctx.start_time`` every bound is 0.  With no
    data requirements the bound is the target itself from the start time.
    """
    start = ctx.start_time
    if not process.data_requirements:
        fn = _gate(constant(process.target_progress), start)
        return DataProgress(fn, [], None)
    per_input = []
    for req, inp in zip(process.data_requirements, ctx.data_inputs):
        per_input.append(_gate(compose(req.fn, inp), start))
    env = minimum(per_input)
    return DataProgress(env.fn, per_input, env)


# -- resource limitation -----------------------------------------------------


class _Builder:
    """Accumulates pieces of a function left to right."""

    def __init__(self, x0):
        self.bps = [x0]
        self.pcs = [(0.0,)]

    def _put(self, x, poly):
        if x < self.bps[-1]:
            return
        if x == self.bps[-1]:
            self.pcs[-1] = poly
        else:
            self.bps.append(x)
            self.pcs.append(poly)

    def add(self, fn, a, b):
        """Copy ``fn`` over ``[a, b)``."""
        if b <= a:
            return
        for s, e, p in fn.restrict(a).spans():
            if s >= b:
                break
            self._put(s, p)

    def add_const(self, a, value):
        self._put(a, (float(value),))

    def build(self):
        return PiecewiseFn(self.bps, self.pcs).simplify()


class _Levels:
    """Progress levels where resource costs change, and the jumps paid there."""

    def __init__(self, reqs, target):
        self.target = target
        marks = {target}
        self.jumps = {}
        for ell, r in enumerate(reqs):
            for x in r.breakpoints:
                if x < target:
                    marks.add(x)
            v0 = r(r.x0)
            if v0 > atol(0.0):
                self.jumps.setdefault(r.x0, []).append((ell, v0))
            for x, left, right in r.jumps():
                if x <= target + atol(target):
                    self.jumps.setdefault(x, []).append((ell, right - left))
        self.marks = sorted(m for m in marks if m >= 0.0)
        self.jump_levels = sorted(self.jumps)
        self.all = sorted(set(self.marks) | set(self.jump_levels))

    def snap(self, p):
        i = bisect_left(self.all, p)
        for j in (i - 1, i):
            if 0 <= j < len(self.all) and abs(self.all[j] - p) <= atol(p):
                return self.all[j]
        return p

    def next_mark(self, p):
        i = bisect_right(self.all, p + atol(p))
        return self.all[i] if i < len(self.all) else INF

    def next_jump_level(self, p):
        i = bisect_right(self.jump_levels, p + atol(p))
        return self.jump_levels[i] if i < len(self.jump_levels) else INF


def _zero_after(fn: PiecewiseFn, t: float) -> PiecewiseFn:
    if t is None or not math.isfinite(t):
        return fn
    if t <= fn.x0:
        return constant(0.0, fn.x0)
    b = _Builder(fn.x0)
    b.add(fn, fn.x0, t)
    b.add_const(t, 0.0)
    return PiecewiseFn(b.bps, b.pcs)


def _next_after(sorted_xs, t):
    i = bisect_right(sorted_xs, t)
    return sorted_xs[i] if i < len(sorted_xs) else INF


def _first(*ts):
    vals = [t for t in ts if t is not None and math.isfinite(t)]
    return min(vals) if vals else INF


def impose_resource_limits(process: Process, ctx: ExecutionContext, data=None, *, max_iterations=MAX_ITERATIONS):
    """Limit the data bound by what the resource inputs can sustain.

    ``data`` is the result of :func:`data_progress` (or just the combined
    data bound); it is computed when omitted.
    """
    if data is None:
        data = data_progress(process, ctx)
    elif isinstance(data, PiecewiseFn):
        found = data_progress(process, ctx)
        data = DataProgress(data, found.per_input, found.envelope)
    data_bound = data.combined
    env = data.envelope
    env_bps = list(env.fn.breakpoints) if env is not None else []
    target = process.target_progress
    start = ctx.start_time
    reqs = [r.fn for r in process.resource_requirements]
    supplies = list(ctx.resource_inputs)
    slopes = [r.derivative() for r in reqs]
    levels = _Levels(reqs, target)
    # demand each resource would see if progress simply followed data_bound
    data_rate = data_bound.derivative()
    follow_demand = [data_rate * compose(s, data_bound) for s in slopes]
    pd_jumps = [x for x, _, _ in data_bound.jumps()]

    x0 = min(0.0, data_bound.x0)
    prog = _Builder(x0)
    trace = _Builder(x0)
    raw = []  # (t_a, t_b, primary, co)
    stalls = []
    cur = start
    p = 0.0
    paid = -INF
    completion = None
    it = 0

    def data_labels(t):
        if env is None:
            return frozenset()
        return env.labels[bisect_right(env_bps, t) - 1]

    while True:
        it += 1
        if it > max_iterations:
            raise NonTermination(f"{process.name}: no completion after {max_iterations} iterations (t={cur:g}, p={p:g})")
        p = levels.snap(p)
        # a jump in some resource requirement at this level is paid first
        if p in levels.jumps and p > paid:
            t_b = cur
            done = []
            for ell, amount in levels.jumps[p]:
                acc = supplies[ell].restrict(cur).antiderivative()
                t_ell = first_reach(acc, amount, cur)
                if t_ell is None:
                    raise NoProgress(f"{process.name}: resource {ell} never delivers {amount:g} to pass progress {p:g}")
                stalls.append(Stall(ell, cur, t_ell, p, amount))
                done.append((t_ell, ell))
                t_b = max(t_b, t_ell)
            if t_b > cur:
                _attribute_stall(raw, cur, t_b, p, done, data_bound, data_labels)
                prog.add_const(cur, p)
                trace.add_const(cur, 0.0)
            cur = t_b
            paid = p
            continue
        if p >= target - atol(target):
            completion = cur
            break
        pd = data_bound(cur)
        following = pd <= p + atol(p, pd)
        if following:
            t_v = _first(*(first_crossing(d, s, cur, "up") for d, s in zip(follow_demand, supplies)))
            if t_v > cur:
                nxt = _first(
                    t_v,
                    _next_after(pd_jumps, cur),
                    first_reach(data_bound, levels.next_jump_level(p), cur) if levels.next_jump_level(p) <= target else None,
                    first_reach(data_bound, target, cur),
                )
                if not math.isfinite(nxt):
                    raise NoProgress(f"{process.name}: data never allow reaching the target")
                prog.add(data_bound, cur, nxt)
                trace.add(data_rate, cur, nxt)
                _attribute_following(raw, cur, nxt, env_bps, data_labels, follow_demand, supplies)
                p = min(data_bound.eval_left(nxt), target)
                cur = nxt
                continue
        # resource-limited (or free) climb from level p
        q = min(levels.next_mark(p), target)
        active = [ell for ell, s in enumerate(slopes) if s(p) > 0.0]
        if not active:
            # nothing is consumed between p and q: move there instantly
            p = min(pd, q)
            prog.add_const(cur, p)
            continue
        speeds = [supplies[ell].restrict(cur).scale(1.0 / slopes[ell](p)) for ell in active]
        speed_env = minimum(speeds)
        climb = speed_env.fn.antiderivative(p)
        t_level = first_reach(climb, q, cur)
        t_catch = first_crossing(climb, data_bound, cur, "up")
        nxt = _first(t_level, t_catch)
        if not math.isfinite(nxt):
            raise NoProgress(f"{process.name}: resources stop delivering at progress {p:g} (t={cur:g})")
        prog.add(climb, cur, nxt)
        trace.add(speed_env.fn, cur, nxt)
        _attribute_climb(raw, cur, nxt, speed_env, active)
        if t_level is not None and t_level <= nxt:
            p = q
        else:
            p = min(data_bound(nxt), climb(nxt))
        cur = nxt

    prog.add_const(completion, target)
    trace.add_const(completion, 0.0)
    progress = prog.build()
    segments = _finalize(raw, start, completion)
    return ProgressResult(
        progress=progress,
        data_progress=data_bound,
        per_input_progress=list(data.per_input),
        completion_time=completion,
        bottlenecks=segments,
        max_speed_trace=trace.build(),
        stalls=stalls,
        process=process,
        context=ctx,
        iterations=it,
    )


def solve(process: Process, ctx: ExecutionContext, **kw) -> ProgressResult:
    """Data bound followed by resource limitation."""
    return impose_resource_limits(process, ctx, data_progress(process, ctx), **kw)


# -- attribution -------------------------------------------------------------


def _pick(limiters):
    primary = min(limiters)
    return primary, frozenset(limiters) - {primary}


def _close(a, b):
    return abs(a - b) <= TIE_REL * max(abs(a), abs(b), 1e-300) or abs(a - b) <= atol(a, b)


def _attribute_following(raw, a, b, env_bps, data_labels, follow_demand, supplies):
    cuts = [x for x in env_bps if a < x < b]
    for u, v in zip([a] + cuts, cuts + [b]):
        m = 0.5 * (u + v)
        lim = {Limiter.data(k) for k in data_labels(m)}
        for ell, (d, s) in enumerate(zip(follow_demand, supplies)):
            dm = d(m)
            if dm > 0.0 and _close(dm, s(m)):
                lim.add(Limiter.resource(ell))
        if not lim:
            lim = {Limiter.data(0)}
        raw.append((u, v) + _pick(lim))


def _attribute_climb(raw, a, b, speed_env, active):
    bps = speed_env.fn.breakpoints
    cuts = [x for x in bps if a < x < b]
    for u, v in zip([a] + cuts, cuts + [b]):
        labels = speed_env.label_at(0.5 * (u + v))
        raw.append((u, v) + _pick({Limiter.resource(active[i]) for i in labels}))


def _attribute_stall(raw, a, b, level, done, data_bound, data_labels):
    # data still limit where their bound sits at the stall level
    t_rise = first_crossing(data_bound, constant(level, data_bound.x0), a, "up")
    marks = sorted({a, b} | {t for t, _ in done if a < t < b} | ({t_rise} if t_rise is not None and a < t_rise < b else set()))
    for u, v in zip(marks, marks[1:]):
        m = 0.5 * (u + v)
        lim = {Limiter.resource(ell) for t, ell in done if t > m}
        if data_bound(m) <= level + atol(level):
            lim |= {Limiter.data(k) for k in data_labels(m)}
        if not lim:
            lim = {Limiter.resource(max(done)[1])}
        raw.append((u, v) + _pick(lim))


def _finalize(raw, start, completion):
    horizon = max(completion - start, 1.0) if completion is not None else 1.0
    tiny = COALESCE_REL * horizon
    merged = []
    for a, b, prim, co in raw:
        if b <= a:
            continue
        if merged and merged[-1][2] == prim:
            pa, _, _, pco = merged[-1]
            merged[-1] = (pa, b, prim, pco | co)
        else:
            merged.append((a, b, prim, co))
    out = []
    for seg in merged:
        a, b, prim, co = seg
        if b - a < tiny and out:
            pa, _, pprim, pco = out[-1]
            out[-1] = (pa, b, pprim, pco)
            continue
        if out and out[-1][2] == prim:
            pa, _, _, pco = out[-1]
            out[-1] = (pa, b, prim, pco | co)
            continue
        out.append(seg)
    # a tiny leading segment goes to its right neighbour
    if len(out) > 1 and out[0][1] - out[0][0] < tiny:
        a = out[0][0]
        _, b, prim, co = out[1]
        out[:2] = [(a, b, prim, co)]
    segs = [BottleneckSegment(a, b, prim, co) for a, b, prim, co in out]
    if completion is not None:
        segs.append(BottleneckSegment(completion, INF, Limiter.finished()))
    return segs
