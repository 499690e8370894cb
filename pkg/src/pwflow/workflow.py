"""Workflows: processes chained by their outputs, sharing resource pools.

Processes are solved one at a time in dependency order.  A consumer's data
input is the producer's output function applied to the producer's progress,
so pipelining falls out of the algebra.  Start gates hold a process back
until named predecessors have completed.  Times are absolute throughout.

Pools split a capacity function among processes by fixed fractions.  A share
may name beneficiaries that inherit its allocation once the holder
completes; this is resolved in rounds, earliest completion first, re-solving
only the processes the release can affect.
"""
from __future__ import annotations

import heapq
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

from .errors import CyclicDependency, PwflowError, SolverError, UnknownParameter
from .metrics import resource_demand, usage_report
from .model import ExecutionContext, Process, Violation, validate
from .piecewise import PiecewiseFn, atol, compose, indicator
from .solver import ProgressResult, solve

REST = "rest"


@dataclass(frozen=True)
class DataEdge:
    producer: str
    output: str
    consumer: str
    slot: str


@dataclass(frozen=True)
class PoolShare:
    """``fraction`` of a pool's capacity; ``"rest"`` takes what other shares leave."""

    pool: str
    fraction: float | str
    release_to: tuple = ()

    def __post_init__(self):
        if isinstance(self.release_to, str):
            object.__setattr__(self, "release_to", (self.release_to,))
        else:
            object.__setattr__(self, "release_to", tuple(self.release_to or ()))

    @property
    def release_policy(self) -> str:
        return "residual-on-completion" if self.release_to else "none"


@dataclass(frozen=True)
class Workflow:
    processes: dict
    edges: tuple = ()
    pools: dict = field(default_factory=dict)
    # process -> slot -> PiecewiseFn or PoolShare (resource slots) / PiecewiseFn (data slots)
    bindings: dict = field(default_factory=dict)
    gates: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple(self.edges))

    def predecessors(self, name):
        preds = {e.producer for e in self.edges if e.consumer == name}
        preds.update(self.gates.get(name, ()))
        return preds

    def descendants(self, names):
        out = set(names)
        frontier = list(names)
        succ = {}
        for e in self.edges:
            succ.setdefault(e.producer, set()).add(e.consumer)
        for proc, after in self.gates.items():
            for a in after:
                succ.setdefault(a, set()).add(proc)
        while frontier:
            n = frontier.pop()
            for m in succ.get(n, ()):
                if m not in out:
                    out.add(m)
                    frontier.append(m)
        return out

    def share_fractions(self) -> dict:
        """Numeric fraction of every pool share, with ``"rest"`` filled in."""
        by_pool = {}
        for proc, slots in self.bindings.items():
            for slot, b in slots.items():
                if isinstance(b, PoolShare):
                    by_pool.setdefault(b.pool, []).append((proc, slot, b))
        out = {}
        for pool, shares in by_pool.items():
            fixed = sum(b.fraction for _, _, b in shares if b.fraction != REST)
            rest = [s for s in shares if s[2].fraction == REST]
            for proc, slot, b in shares:
                if b.fraction == REST:
                    out[(proc, slot)] = max(0.0, 1.0 - fixed) / len(rest)
                else:
                    out[(proc, slot)] = float(b.fraction)
        return out


@dataclass
class WorkflowResult:
    results: dict
    usage: dict
    allocations: dict  # process -> effective resource inputs used when solving
    reported_allocations: dict  # same, with share holders' retrospective demand
    makespan: float
    order: list

    def completion(self, name):
        return self.results[name].completion_time


# -- ordering ----------------------------------------------------------------


def topo_order(workflow: Workflow) -> list:
    """Dependency order over data edges and start gates, ties broken by name."""
    names = list(workflow.processes)
    preds = {n: workflow.predecessors(n) for n in names}
    for n, ps in preds.items():
        for p in ps:
            if p not in workflow.processes:
                raise KeyError(f"process {n!r} depends on unknown process {p!r}")
    indeg = {n: len(preds[n]) for n in names}
    succ = {n: [] for n in names}
    for n, ps in preds.items():
        for p in ps:
            succ[p].append(n)
    ready = [n for n in names if indeg[n] == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        n = heapq.heappop(ready)
        order.append(n)
        for m in succ[n]:
            indeg[m] -= 1
            if indeg[m] == 0:
                heapq.heappush(ready, m)
    if len(order) < len(names):
        raise CyclicDependency(_find_cycle({n: preds[n] for n in names if indeg[n] > 0}))
    return order


def _find_cycle(preds):
    start = min(preds)
    seen = []
    n = start
    while n not in seen:
        seen.append(n)
        n = min(p for p in preds[n] if p in preds)
    cyc = seen[seen.index(n):]
    cyc.reverse()
    return cyc + [cyc[0]]


# -- validation --------------------------------------------------------------


def validate_workflow(workflow: Workflow) -> list:
    """Structural checks: names resolve, slots bound once, pool shares fit."""
    out = []
    procs = workflow.processes
    for name, proc in procs.items():
        out.extend(validate(proc))
    data_bound = {}
    for e in workflow.edges:
        for who in (e.producer, e.consumer):
            if who not in procs:
                out.append(Violation("UnresolvedName", who, "edge names an unknown process"))
        if e.producer in procs and e.output not in [o.name for o in procs[e.producer].outputs]:
            out.append(Violation("UnresolvedName", f"{e.producer}.{e.output}", "unknown output"))
        if e.consumer in procs and e.slot not in [r.name for r in procs[e.consumer].data_requirements]:
            out.append(Violation("UnresolvedName", f"{e.consumer}.{e.slot}", "unknown data slot"))
        data_bound.setdefault((e.consumer, e.slot), []).append("edge")
    for proc, slots in workflow.bindings.items():
        if proc not in procs:
            out.append(Violation("UnresolvedName", proc, "bindings name an unknown process"))
            continue
        data_slots = {r.name for r in procs[proc].data_requirements}
        res_slots = {r.name for r in procs[proc].resource_requirements}
        for slot, b in slots.items():
            if slot in data_slots:
                if isinstance(b, PoolShare):
                    out.append(Violation("BindingViolation", f"{proc}.{slot}", "data slots cannot take a pool share"))
                data_bound.setdefault((proc, slot), []).append("fn")
            elif slot not in res_slots:
                out.append(Violation("UnresolvedName", f"{proc}.{slot}", "unknown slot"))
            elif isinstance(b, PoolShare):
                if b.pool not in workflow.pools:
                    out.append(Violation("UnresolvedName", b.pool, f"pool used by {proc}.{slot} is not defined"))
                if b.fraction != REST and not (0.0 <= b.fraction <= 1.0):
                    out.append(Violation("BindingViolation", f"{proc}.{slot}", f"fraction {b.fraction} outside [0, 1]"))
                for ben in b.release_to:
                    if ben not in procs:
                        out.append(Violation("UnresolvedName", ben, f"release target of {proc}.{slot} is not a process"))
                    elif _pool_slot(workflow, ben, b.pool) is None:
                        out.append(Violation("BindingViolation", ben, f"release target holds no share of pool {b.pool!r}"))
    for name, proc in procs.items():
        for r in proc.data_requirements:
            n = len(data_bound.get((name, r.name), []))
            if n != 1:
                out.append(Violation("BindingViolation", f"{name}.{r.name}", f"data slot bound {n} times, needs exactly 1"))
        for r in proc.resource_requirements:
            if r.name not in workflow.bindings.get(name, {}):
                out.append(Violation("BindingViolation", f"{name}.{r.name}", "resource slot is not bound"))
    totals = {}
    for proc, slots in workflow.bindings.items():
        for slot, b in slots.items():
            if isinstance(b, PoolShare) and b.fraction != REST:
                totals[b.pool] = totals.get(b.pool, 0.0) + b.fraction
    for pool, tot in totals.items():
        if tot > 1.0 + atol(1.0):
            out.append(Violation("PoolViolation", pool, f"shares sum to {tot:g} > 1"))
    for name, after in workflow.gates.items():
        for a in list(after) + [name]:
            if a not in procs:
                out.append(Violation("UnresolvedName", a, "gate names an unknown process"))
    return out


def _pool_slot(workflow, proc, pool):
    for slot, b in workflow.bindings.get(proc, {}).items():
        if isinstance(b, PoolShare) and b.pool == pool:
            return slot
    return None


# -- analysis ----------------------------------------------------------------


class _Analysis:
    def __init__(self, workflow: Workflow):
        self.wf = workflow
        self.order = topo_order(workflow)
        self.fractions = workflow.share_fractions()
        self.alloc = {}
        for name in self.order:
            proc = workflow.processes[name]
            fns = []
            for r in proc.resource_requirements:
                b = workflow.bindings.get(name, {}).get(r.name)
                if b is None:
                    raise PwflowError(f"resource slot {name}.{r.name} is not bound")
                if isinstance(b, PoolShare):
                    fns.append(workflow.pools[b.pool].scale(self.fractions[(name, r.name)]))
                else:
                    fns.append(b)
            self.alloc[name] = fns
        self.results = {}

    def context(self, name) -> ExecutionContext:
        wf = self.wf
        proc = wf.processes[name]
        inputs = []
        explicit = wf.bindings.get(name, {})
        feeds = {e.slot: e for e in wf.edges if e.consumer == name}
        for r in proc.data_requirements:
            if r.name in feeds:
                e = feeds[r.name]
                src = self.results[e.producer]
                out_fn = wf.processes[e.producer].outputs[wf.processes[e.producer].output_index(e.output)].fn
                inputs.append(compose(out_fn, src.progress))
            else:
                inputs.append(explicit[r.name])
        start = 0.0
        for g in wf.gates.get(name, ()):
            done = self.results[g].completion_time
            if done is None:
                raise SolverError(f"gate predecessor {g!r} of {name!r} never completes")
            start = max(start, done)
        return ExecutionContext(inputs, self.alloc[name], start)

    def solve(self, names):
        for name in self.order:
            if name in names:
                try:
                    self.results[name] = solve(self.wf.processes[name], self.context(name))
                except SolverError as exc:
                    raise type(exc)(f"process {name!r}: {exc}") from exc

    def release_rounds(self):
        wf = self.wf
        holders = []
        for proc, slots in wf.bindings.items():
            for slot, b in slots.items():
                if isinstance(b, PoolShare) and b.release_to:
                    holders.append((proc, slot, b))
        released = set()
        while True:
            pending = [
                (self.results[p].completion_time, p, s, b)
                for p, s, b in holders
                if (p, s) not in released and self.results[p].completion_time is not None
            ]
            if not pending:
                return
            t_c, proc, slot, share = min(pending, key=lambda x: (x[0], x[1], x[2]))
            released.add((proc, slot))
            bens = [
                n for n in share.release_to
                if self.results[n].completion_time is None or self.results[n].completion_time > t_c + atol(t_c)
            ]
            if not bens:
                continue
            holder_alloc = self.alloc[proc][wf.processes[proc].resource_index(slot)]
            freed = holder_alloc * indicator(t_c, x0=holder_alloc.x0)
            self.alloc[proc][wf.processes[proc].resource_index(slot)] = (holder_alloc - freed).simplify()
            for n in bens:
                ell = wf.processes[n].resource_index(_pool_slot(wf, n, share.pool))
                self.alloc[n][ell] = (self.alloc[n][ell] + freed.scale(1.0 / len(bens))).simplify()
            self.solve(wf.descendants(bens))


def analyze(workflow: Workflow, *, debug: bool = False, with_usage: bool = True) -> WorkflowResult:
    """Solve every process of ``workflow`` and resolve its pools."""
    an = _Analysis(workflow)
    an.solve(set(an.order))
    an.release_rounds()
    reported = {n: list(fns) for n, fns in an.alloc.items()}
    for proc, slots in workflow.bindings.items():
        for slot, b in slots.items():
            if isinstance(b, PoolShare) and b.release_to:
                ell = workflow.processes[proc].resource_index(slot)
                actual = resource_demand(an.results[proc], ell)
                reported[proc][ell] = actual
                if debug:
                    _check_retrospective(workflow, an, proc, ell, actual)
    usage = {}
    if with_usage:
        for n in an.order:
            usage[n] = usage_report(an.results[n])
    done = [r.completion_time for r in an.results.values()]
    makespan = math.inf if any(t is None for t in done) else max(done, default=0.0)
    return WorkflowResult(
        results={n: an.results[n] for n in an.order},
        usage=usage,
        allocations={n: an.alloc[n] for n in an.order},
        reported_allocations={n: reported[n] for n in an.order},
        makespan=makespan,
        order=an.order,
    )


def _check_retrospective(workflow, an, proc, ell, actual):
    res = an.results[proc]
    inputs = list(res.context.resource_inputs)
    inputs[ell] = actual
    again = solve(workflow.processes[proc], replace(res.context, resource_inputs=tuple(inputs)))
    diff = again.progress - res.progress
    scale = workflow.processes[proc].target_progress
    for x in set(diff.breakpoints) | set(res.progress.breakpoints):
        if abs(diff(x)) > 1e-6 * scale:
            raise AssertionError(
                f"retrospective allocation changes progress of {proc!r} at t={x:g} by {diff(x):g}"
            )


def pool_usage(workflow: Workflow, result: WorkflowResult, reported=True) -> dict:
    """Per pool, the summed allocation over time (retrospective by default)."""
    allocs = result.reported_allocations if reported else result.allocations
    out = {}
    for proc, slots in workflow.bindings.items():
        for slot, b in slots.items():
            if isinstance(b, PoolShare):
                fn = allocs[proc][workflow.processes[proc].resource_index(slot)]
                out[b.pool] = fn if b.pool not in out else out[b.pool] + fn
    return {k: v.simplify() for k, v in out.items()}


# -- parameters and sweeps ---------------------------------------------------


def set_parameter(workflow: Workflow, path: str, value: float) -> Workflow:
    """Copy of ``workflow`` with the scalar at ``path`` replaced.

    Paths: ``bindings.<process>.<slot>.fraction`` (``<slot>`` may be left
    out when the process holds a single pool share),
    ``processes.<process>.target_progress`` and ``pools.<pool>.scale``
    (multiplies the capacity function).
    """
    parts = path.split(".")
    head = parts[0]
    if head == "bindings" and len(parts) in (3, 4) and parts[-1] == "fraction":
        proc = parts[1]
        slots = workflow.bindings.get(proc)
        if slots is None:
            raise UnknownParameter(path)
        if len(parts) == 4:
            slot = parts[2]
        else:
            shares = [s for s, b in slots.items() if isinstance(b, PoolShare)]
            if len(shares) != 1:
                raise UnknownParameter(path)
            slot = shares[0]
        b = slots.get(slot)
        if not isinstance(b, PoolShare):
            raise UnknownParameter(path)
        new_slots = dict(slots)
        new_slots[slot] = replace(b, fraction=float(value))
        bindings = dict(workflow.bindings)
        bindings[proc] = new_slots
        return replace(workflow, bindings=bindings)
    if head == "processes" and len(parts) == 3 and parts[2] == "target_progress":
        proc = workflow.processes.get(parts[1])
        if proc is None:
            raise UnknownParameter(path)
        procs = dict(workflow.processes)
        procs[parts[1]] = replace(proc, target_progress=float(value))
        return replace(workflow, processes=procs)
    if head == "pools" and len(parts) == 3 and parts[2] == "scale":
        cap = workflow.pools.get(parts[1])
        if cap is None:
            raise UnknownParameter(path)
        pools = dict(workflow.pools)
        pools[parts[1]] = cap.scale(float(value))
        return replace(workflow, pools=pools)
    raise UnknownParameter(path)


@dataclass(frozen=True)
class SweepPoint:
    value: float
    makespan: float
    completions: dict


def _sweep_one(args):
    workflow, path, value = args
    res = analyze(set_parameter(workflow, path, value), with_usage=False)
    return SweepPoint(value, res.makespan, {n: r.completion_time for n, r in res.results.items()})


def sweep(workflow: Workflow, path: str, values, *, parallel: bool = False, workers: int | None = None) -> list:
    """Independent analysis per value, results in order of ``values``."""
    values = [float(v) for v in values]
    if values:
        set_parameter(workflow, path, values[0])  # fail fast on a bad path
    jobs = [(workflow, path, v) for v in values]
    if parallel and len(values) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_sweep_one, jobs, chunksize=max(1, len(jobs) // 32)))
    return [_sweep_one(j) for j in jobs]


def linspace(start: float, stop: float, steps: int) -> list:
    if steps < 1:
        raise ValueError("steps must be at least 1")
    if steps == 1:
        return [float(start)]
    return [start + (stop - start) * i / (steps - 1) for i in range(steps)]


# -- critical path -------------------------------------------------------------


@dataclass(frozen=True)
class PathStep:
    process: str
    limiter: str
    t_a: float
    t_b: float


def critical_path(workflow: Workflow, result: WorkflowResult) -> list:
    """Limiters that determine the makespan, walked back from the last process.

    A data-limited stretch continues into the producer feeding that slot;
    the wait before a gated start continues into the gate predecessor that
    finished last.  Steps are returned in time order.
    """
    done = {n: r.completion_time for n, r in result.results.items() if r.completion_time is not None}
    if not done:
        return []
    cur = max(done, key=lambda n: (done[n], n))
    t = done[cur]
    feeds = {(e.consumer, e.slot): e.producer for e in workflow.edges}
    steps = []
    guard = 0
    while cur is not None and guard < 10_000:
        guard += 1
        res = result.results[cur]
        proc = workflow.processes[cur]
        nxt, t_next = None, None
        for seg in reversed(res.bottlenecks):
            if seg.limiter.rank == 2 or seg.t_a >= t:
                continue
            steps.append(PathStep(cur, str(seg.limiter), seg.t_a, min(seg.t_b, t)))
            if seg.limiter.rank == 0:
                slot = proc.data_requirements[seg.limiter.index].name
                prod = feeds.get((cur, slot))
                if prod is not None:
                    nxt, t_next = prod, min(seg.t_b, t)
                    break
        else:
            gates = workflow.gates.get(cur, ())
            if gates and res.start_time > 0.0:
                nxt = max(gates, key=lambda g: (done.get(g, -math.inf), g))
                t_next = res.start_time
        if nxt is None:
            break
        cur, t = nxt, t_next
    steps.reverse()
    return steps
