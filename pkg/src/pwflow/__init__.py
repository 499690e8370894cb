"""Analytic progress and bottleneck analysis for workflows of processes.

Every model function is a piecewise polynomial (:mod:`pwflow.piecewise`).
A process (:mod:`pwflow.model`) is solved for its progress over time
(:mod:`pwflow.solver`), analysed further with :mod:`pwflow.metrics`, and
chained with others in :mod:`pwflow.workflow`.  :mod:`pwflow.oracle` is an
independent time-stepped reference used for checking.
"""
from .errors import (
    CyclicDependency,
    DivisionByZero,
    DomainError,
    NoProgress,
    NonTermination,
    NotInvertible,
    NotMonotone,
    NotPiecewiseConstant,
    PwflowError,
    SolverError,
    UnknownParameter,
    ValidationError,
)
from .model import DataRequirement, ExecutionContext, OutputSpec, Process, ResourceRequirement, validate
from .piecewise import PiecewiseFn
from .solver import BottleneckSegment, Limiter, ProgressResult, data_progress, impose_resource_limits, solve
from .workflow import DataEdge, PoolShare, Workflow, analyze, critical_path, sweep, topo_order

__version__ = "0.1.0"
