"""Brute-force reference: march forward in small time steps.

Nothing here uses the envelope, inversion or crossing machinery of the
analytic solver.  Each step asks, by plain evaluation, how far the data
available at the end of the step would let the process get, and how far
each resource's delivery over the step would pay for, and takes the
smallest.  Resource requirements may be any non-decreasing function.

A requirement counts from 0 just left of progress 0, and the cost of
reaching progress ``x`` is its left limit at ``x``; so a jump at ``x`` is
paid while progress sits at ``x``, exactly as the analytic solver stalls.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import StepTooCoarse
from .model import ExecutionContext, Process
from .piecewise import PiecewiseFn, atol
from .workflow import PoolShare, Workflow, topo_order

BISECT_STEPS = 60


@dataclass(frozen=True)
class OracleConfig:
    """Step ``dt`` (absolute), or ``dt_rel`` times ``horizon``.

    Stepping continues past ``horizon`` until completion or ``max_steps``.
    """

    dt: float | None = None
    dt_rel: float = 1e-3
    horizon: float | None = None
    max_steps: int = 2_000_000
    max_iterations: int = 8  # slope refinements per resource and step
    tolerance: float = 1e-9

    def step(self) -> float:
        if self.dt is not None:
            step = self.dt
        elif self.horizon is not None:
            step = self.dt_rel * self.horizon
        else:
            raise ValueError("OracleConfig needs dt or horizon")
        if not step > 0:
            raise ValueError("dt must be positive")
        return step


@dataclass
class Trajectory:
    times: np.ndarray
    progress: np.ndarray
    completion_time: float | None
    consumed: np.ndarray  # resource used so far, one column per resource
    start_time: float = 0.0
    diagnostics: list = field(default_factory=list)

    @property
    def starved(self) -> bool:
        return self.completion_time is None

    def at(self, t):
        """Linear interpolation of the sampled progress."""
        return np.interp(t, self.times, self.progress)


def _max_affordable(requirement: PiecewiseFn, p, cap, budget, dt, maxslope, cfg):
    """Largest ``x`` in ``[p, cap]`` with ``requirement.eval_left(x) <= budget``."""
    if cap <= p:
        return p
    tol = cfg.tolerance * max(1.0, abs(budget))
    if requirement.eval_left(cap) <= budget + tol:
        return cap
    if requirement.eval_left(p) > budget + tol:
        return p
    good, x = p, p
    h = max(dt * maxslope, 1e-12 * max(1.0, abs(p)))
    for _ in range(cfg.max_iterations):
        lo = max(x - h, requirement.x0)
        slope = (requirement(x + h) - requirement(lo)) / (x + h - lo)
        if slope <= 0.0:
            return cap
        nxt = min(cap, x + (budget - requirement.eval_left(x)) / slope)
        if requirement.eval_left(nxt) <= budget + tol:
            good = nxt
            if budget - requirement.eval_left(nxt) <= tol or nxt >= cap:
                return nxt
            x = nxt
        else:
            break
    # bisection between the last affordable point and the first unaffordable one
    lo, hi = good, cap
    for _ in range(BISECT_STEPS):
        mid = 0.5 * (lo + hi)
        if requirement.eval_left(mid) <= budget + tol:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15 * max(1.0, abs(hi)):
            break
    return lo


class _Stepper:
    """State of one process on the shared clock."""

    def __init__(self, process: Process, data_sources, dt, cfg):
        self.proc = process
        self.data = data_sources  # callables t -> available input
        self.cfg = cfg
        self.dt = dt
        self.reqs = [r.fn for r in process.resource_requirements]
        self.maxslope = [max((abs(p[1]) for p in r.pieces if len(p) > 1), default=0.0) for r in self.reqs]
        self.target = process.target_progress
        self.p = 0.0
        self.c = [0.0] * len(self.reqs)
        self.done = None
        self.started = False

    def cap(self, t_next):
        if not self.data:
            return self.target
        return min(min(r.fn(max(src(t_next), r.fn.x0)) for r, src in zip(self.proc.data_requirements, self.data)), self.target)

    def step(self, t, budgets, span=None):
        """Advance over ``[t, t + span]``; a zero span settles instantaneous jumps."""
        if self.done is not None:
            return
        dt = self.dt if span is None else span
        bound = self.cap(t + dt)
        if self.p > bound + atol(bound):
            raise StepTooCoarse(f"{self.proc.name}: progress {self.p} above data bound {bound} at t={t + dt}")
        pcap = max(self.p, bound)
        x = pcap
        for ell, requirement in enumerate(self.reqs):
            avail = self.c[ell] + budgets[ell]
            x = min(x, _max_affordable(requirement, self.p, pcap, avail, dt, self.maxslope[ell], self.cfg))
        p_new = max(self.p, x)
        for ell, requirement in enumerate(self.reqs):
            avail = self.c[ell] + budgets[ell]
            c_new = min(avail, max(self.c[ell], requirement(p_new)))
            used = c_new - self.c[ell]
            if used > budgets[ell] + self.cfg.tolerance * max(1.0, abs(avail)):
                raise AssertionError(f"{self.proc.name}: step demand {used} exceeds supply {budgets[ell]}")
            self.c[ell] = c_new
        self.p = p_new
        unpaid = any(requirement(self.target) > self.c[ell] + atol(requirement(self.target)) for ell, requirement in enumerate(self.reqs))
        if self.p >= self.target - atol(self.target) and not unpaid:
            self.p = self.target
            self.done = t + dt


def _budget_fn(fn: PiecewiseFn):
    acc = fn.antiderivative()
    return lambda a, b: max(0.0, acc(b) - acc(a))


def simulate(process: Process, ctx: ExecutionContext, config: OracleConfig | None = None) -> Trajectory:
    """Time-stepped progress of one process."""
    cfg = config or OracleConfig()
    dt = cfg.step()
    sources = [(lambda t, f=f: f(t)) for f in ctx.data_inputs]
    stepper = _Stepper(process, sources, dt, cfg)
    budgets = [_budget_fn(f) for f in ctx.resource_inputs]
    start = ctx.start_time
    stepper.step(start, [0.0] * len(budgets), span=0.0)
    times, prog, cons = [start], [stepper.p], [list(stepper.c)]
    t = start
    limit = cfg.max_steps
    end = cfg.horizon
    n = 0
    while stepper.done is None and n < limit:
        stepper.step(t, [b(t, t + dt) for b in budgets])
        n += 1
        t = start + n * dt
        times.append(t)
        prog.append(stepper.p)
        cons.append(list(stepper.c))
        if end is not None and t > start + 4 * cfg.horizon:
            break
    traj = Trajectory(np.array(times), np.array(prog), stepper.done, np.array(cons), start)
    if stepper.done is None:
        traj.diagnostics.append(f"StarvationDetected: {process.name} incomplete at t={t:g} (progress {stepper.p:g})")
    return traj


@dataclass
class WorkflowTrajectory:
    trajectories: dict
    makespan: float | None
    diagnostics: list = field(default_factory=list)


def simulate_workflow(workflow: Workflow, config: OracleConfig | None = None) -> WorkflowTrajectory:
    """All processes on one clock, producers stepped before consumers."""
    cfg = config or OracleConfig()
    dt = cfg.step()
    order = topo_order(workflow)
    procs = workflow.processes
    steppers = {}
    feeds = {(e.consumer, e.slot): e for e in workflow.edges}
    share = {}
    fixed = {}
    fractions = workflow.share_fractions()
    pool_budget = {name: _budget_fn(cap) for name, cap in workflow.pools.items()}
    for name in order:
        proc = procs[name]
        sources = []
        for r in proc.data_requirements:
            e = feeds.get((name, r.name))
            if e is not None:
                out = procs[e.producer].outputs[procs[e.producer].output_index(e.output)].fn
                sources.append(lambda t, e=e, out=out: out(steppers[e.producer].p))
            else:
                f = workflow.bindings[name][r.name]
                sources.append(lambda t, f=f: f(t))
        steppers[name] = _Stepper(proc, sources, dt, cfg)
        for r in proc.resource_requirements:
            b = workflow.bindings[name][r.name]
            if isinstance(b, PoolShare):
                share[(name, r.name)] = fractions[(name, r.name)]
            else:
                fixed[(name, r.name)] = _budget_fn(b)
    gates = {n: tuple(workflow.gates.get(n, ())) for n in order}
    released = set()
    starts = {n: (0.0 if not gates[n] else None) for n in order}
    for name in order:
        if starts[name] is not None:
            steppers[name].step(0.0, [0.0] * len(procs[name].resource_requirements), span=0.0)
    traj = {n: ([0.0], [steppers[n].p]) for n in order}
    t, n = 0.0, 0
    horizon_end = None if cfg.horizon is None else cfg.horizon * 4
    while n < cfg.max_steps and any(s.done is None for s in steppers.values()):
        t_next = (n + 1) * dt
        for name in order:
            st = steppers[name]
            if starts[name] is None:
                preds = [steppers[g].done for g in gates[name]]
                if all(d is not None for d in preds):
                    starts[name] = max(preds)
            if starts[name] is not None and starts[name] <= t + 1e-12 * max(1.0, t) and st.done is None:
                budgets = []
                for r in procs[name].resource_requirements:
                    key = (name, r.name)
                    if key in share:
                        budgets.append(share[key] * pool_budget[workflow.bindings[name][r.name].pool](t, t_next))
                    else:
                        budgets.append(fixed[key](t, t_next))
                st.step(t, budgets)
            traj[name][0].append(t_next)
            traj[name][1].append(st.p)
        # shares of completed holders pass to their still-running beneficiaries
        for (name, slot), frac in list(share.items()):
            b = workflow.bindings[name][slot]
            if steppers[name].done is not None and (name, slot) not in released:
                released.add((name, slot))
                bens = [x for x in b.release_to if steppers[x].done is None]
                for x in bens:
                    for s2, b2 in workflow.bindings[x].items():
                        if isinstance(b2, PoolShare) and b2.pool == b.pool:
                            share[(x, s2)] += frac / len(bens)
                            break
                if bens:
                    share[(name, slot)] = 0.0
        n += 1
        t = t_next
        if horizon_end is not None and t > horizon_end:
            break
    out = {}
    diags = []
    for name in order:
        st = steppers[name]
        times, prog = traj[name]
        out[name] = Trajectory(np.array(times), np.array(prog), st.done, np.zeros((0, 0)), starts[name] or 0.0)
        if st.done is None:
            diags.append(f"StarvationDetected: {name} incomplete at t={t:g} (progress {st.p:g})")
    done = [s.done for s in steppers.values()]
    makespan = None if any(d is None for d in done) else max(done)
    return WorkflowTrajectory(out, makespan, diags)


def max_deviation(progress: PiecewiseFn, traj: Trajectory) -> float:
    """Largest gap between an analytic progress function and the samples."""
    vals = np.array([progress(t) for t in traj.times])
    return float(np.max(np.abs(vals - traj.progress)))
