"""Process models and their execution context.

A process is described independently of where it runs: data requirements
map cumulative input to the progress it allows, resource requirements map
progress to cumulative resource use, and outputs map progress to cumulative
output.  The execution context supplies what the environment provides over
time.  Units are never checked, only shapes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from . import _poly as P
from .errors import InvalidParameter
from .piecewise import (
    PiecewiseFn,
    atol,
    constant,
    linear,
    min_value,
    monotone_witness,
    step,
    sup_value,
)


@dataclass(frozen=True)
class DataRequirement:
    name: str
    fn: PiecewiseFn


@dataclass(frozen=True)
class ResourceRequirement:
    name: str
    fn: PiecewiseFn


@dataclass(frozen=True)
class OutputSpec:
    name: str
    fn: PiecewiseFn


@dataclass(frozen=True)
class Process:
    name: str
    data_requirements: tuple = ()
    resource_requirements: tuple = ()
    outputs: tuple = ()
    target_progress: float = math.nan

    def __post_init__(self):
        for attr in ("data_requirements", "resource_requirements", "outputs"):
            object.__setattr__(self, attr, tuple(getattr(self, attr)))
        if math.isnan(self.target_progress):
            object.__setattr__(self, "target_progress", default_target(self))

    def data_index(self, name: str) -> int:
        for k, req in enumerate(self.data_requirements):
            if req.name == name:
                return k
        raise KeyError(f"process {self.name!r} has no data requirement {name!r}")

    def resource_index(self, name: str) -> int:
        for k, req in enumerate(self.resource_requirements):
            if req.name == name:
                return k
        raise KeyError(f"process {self.name!r} has no resource requirement {name!r}")

    def output_index(self, name: str) -> int:
        for k, out in enumerate(self.outputs):
            if out.name == name:
                return k
        raise KeyError(f"process {self.name!r} has no output {name!r}")


def default_target(process) -> float:
    """Maximum of the final output, so progress counts output units.

    Falls back to the largest progress every data requirement can allow
    when the output grows without bound.
    """
    if process.outputs:
        top = sup_value(process.outputs[-1].fn)
        if math.isfinite(top):
            return top
    if process.data_requirements:
        top = min(sup_value(r.fn) for r in process.data_requirements)
        if math.isfinite(top):
            return top
    raise ValueError(f"cannot infer target_progress for process {process.name!r}; set it explicitly")


@dataclass(frozen=True)
class ExecutionContext:
    data_inputs: tuple = ()
    resource_inputs: tuple = ()
    start_time: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "data_inputs", tuple(self.data_inputs))
        object.__setattr__(self, "resource_inputs", tuple(self.resource_inputs))


@dataclass(frozen=True)
class Violation:
    kind: str
    subject: str
    message: str
    witness: float | None = None

    def __str__(self):
        at = "" if self.witness is None else f" (at {self.witness:g})"
        return f"{self.kind}: {self.subject}: {self.message}{at}"


def _check_fn(subject, fn, out, *, start=0.0, monotone=True, linear_only=False):
    if abs(fn.x0 - start) > atol(start):
        out.append(Violation("DomainStartViolation", subject, f"domain must start at {start:g}, starts at {fn.x0:g}", fn.x0))
    if monotone:
        w = monotone_witness(fn)
        if w is not None:
            out.append(Violation("MonotonicityViolation", subject, "function must be non-decreasing", w))
    if linear_only:
        for s, e, p in fn.spans():
            width = e - s if math.isfinite(e) else max(1.0, abs(s))
            if len(P.trim(p, width)) > 2:
                out.append(
                    Violation(
                        "PiecewiseLinearityViolation",
                        subject,
                        "resource requirements must be piecewise-linear (degree <= 1 per piece)",
                        s,
                    )
                )
                break


def validate(process: Process, ctx: ExecutionContext | None = None) -> list:
    """Every structural constraint the solver relies on, as a list of violations.

    Never raises for well-formed functions.
    """
    out = []
    name = process.name
    if not process.outputs:
        out.append(Violation("StructureViolation", name, "a process needs at least one output"))
    if not (process.target_progress > 0 and math.isfinite(process.target_progress)):
        out.append(Violation("StructureViolation", name, f"target_progress must be positive, got {process.target_progress}"))
    slots = [r.name for r in process.data_requirements] + [r.name for r in process.resource_requirements]
    dupes = sorted({s for s in slots if slots.count(s) > 1})
    if dupes:
        out.append(Violation("StructureViolation", name, f"duplicate requirement names: {', '.join(dupes)}"))

    for req in process.data_requirements:
        subj = f"{name}.data.{req.name}"
        _check_fn(subj, req.fn, out)
        if req.fn(req.fn.x0) < -atol(0.0):
            out.append(Violation("NegativeValueViolation", subj, "value at 0 must be >= 0", req.fn.x0))
        top = sup_value(req.fn)
        if top < process.target_progress - atol(top, process.target_progress):
            out.append(
                Violation("UnreachableTarget", subj, f"maximum progress {top:g} is below target {process.target_progress:g}")
            )
    for req in process.resource_requirements:
        subj = f"{name}.resource.{req.name}"
        _check_fn(subj, req.fn, out, linear_only=True)
        if req.fn(req.fn.x0) < -atol(0.0):
            out.append(Violation("NegativeValueViolation", subj, "value at 0 must be >= 0", req.fn.x0))
    for o in process.outputs:
        _check_fn(f"{name}.output.{o.name}", o.fn, out)

    if ctx is None:
        return out
    if len(ctx.data_inputs) != len(process.data_requirements):
        out.append(
            Violation("ArityMismatch", name, f"{len(ctx.data_inputs)} data inputs for {len(process.data_requirements)} data requirements")
        )
    if len(ctx.resource_inputs) != len(process.resource_requirements):
        out.append(
            Violation(
                "ArityMismatch", name, f"{len(ctx.resource_inputs)} resource inputs for {len(process.resource_requirements)} resource requirements"
            )
        )
    for req, fn in zip(process.data_requirements, ctx.data_inputs):
        subj = f"{name}.input.{req.name}"
        _check_fn(subj, fn, out)
        if fn(fn.x0) < -atol(0.0):
            out.append(Violation("NegativeValueViolation", subj, "data input must be >= 0", fn.x0))
        avail = sup_value(fn)
        reach = sup_value(req.fn) if math.isinf(avail) else req.fn(max(avail, req.fn.x0))
        if reach < process.target_progress - atol(reach, process.target_progress):
            out.append(
                Violation("UnreachableTarget", subj, f"available input only allows progress {reach:g} < target {process.target_progress:g}")
            )
    for req, fn in zip(process.resource_requirements, ctx.resource_inputs):
        subj = f"{name}.input.{req.name}"
        _check_fn(subj, fn, out, monotone=False)
        lo, where = min_value(fn)
        if lo < -atol(0.0):
            out.append(Violation("NegativeValueViolation", subj, "resource input must be >= 0", where))
    return out


# -- canonical requirement shapes ------------------------------------------


def data_stream(slope: float) -> PiecewiseFn:
    """Progress proportional to the input read so far."""
    if not slope > 0:
        raise InvalidParameter(f"stream slope must be positive, got {slope}")
    return linear(slope)


def data_burst(input_total: float, target: float) -> PiecewiseFn:
    """No progress until all ``input_total`` units are there, then ``target`` at once."""
    if not input_total > 0:
        raise InvalidParameter(f"burst threshold must be positive, got {input_total}")
    if not target > 0:
        raise InvalidParameter(f"burst target must be positive, got {target}")
    return step(input_total, 0.0, target)


def resource_stream(slope: float) -> PiecewiseFn:
    """Resource needed evenly along the progress."""
    if not slope > 0:
        raise InvalidParameter(f"stream slope must be positive, got {slope}")
    return linear(slope)


def resource_burst(total: float) -> PiecewiseFn:
    """The whole ``total`` is needed before any progress.

    Requirement functions count from zero just left of the origin, so a
    positive value at 0 is a jump the process pays for before it moves.
    """
    if not total > 0:
        raise InvalidParameter(f"burst total must be positive, got {total}")
    return constant(total)


def canonical_requirements() -> dict:
    return {
        "data": {"stream": data_stream, "burst": data_burst},
        "resource": {"stream": resource_stream, "burst": resource_burst},
    }
