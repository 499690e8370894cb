"""Command line: ``analyze``, ``sweep`` and ``validate`` on workflow documents.

Only the requested artifact goes to stdout; diagnostics go to stderr.

Exit codes: 0 success, 2 schema or model violation, 3 cyclic dependency,
4 solver failure, 5 unknown sweep parameter.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

from .document import load_document, parse_document, set_document_value
from .errors import CyclicDependency, NotPiecewiseConstant, PwflowError, SolverError, UnknownParameter, ValidationError
from .metrics import buffered_data, relative_usage, resource_demand
from .oracle import OracleConfig, max_deviation, simulate_workflow
from .workflow import analyze, critical_path, linspace, set_parameter, sweep

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_CYCLE = 3
EXIT_SOLVER = 4
EXIT_PARAM = 5


def _num(x):
    """JSON-safe number: infinities become null."""
    return x if x is not None and math.isfinite(x) else None


def build_report(workflow, result) -> dict:
    procs = {}
    for name, res in result.results.items():
        proc = workflow.processes[name]
        segs = []
        for s in res.bottlenecks:
            lim = s.limiter
            slot = None
            if lim.kind == "data":
                slot = proc.data_requirements[lim.index].name
            elif lim.kind == "resource":
                slot = proc.resource_requirements[lim.index].name
            segs.append(
                {
                    "t_a": s.t_a,
                    "t_b": _num(s.t_b),
                    "limiter": str(lim),
                    "slot": slot,
                    "co_limiters": sorted(str(c) for c in s.co_limiters),
                }
            )
        procs[name] = {"start_time": res.start_time, "completion_time": res.completion_time, "bottlenecks": segs}
    path = [
        {"process": st.process, "limiter": st.limiter, "t_a": st.t_a, "t_b": st.t_b}
        for st in critical_path(workflow, result)
    ]
    return {"makespan": _num(result.makespan), "processes": procs, "critical_path": path}


def _sample_times(fns, end, samples):
    ts = {0.0, end}
    for fn in fns:
        ts.update(x for x in fn.breakpoints if 0.0 <= x <= end)
    if samples > 1:
        ts.update(end * i / (samples - 1) for i in range(samples))
    return sorted(ts)


def _label_at(res, t):
    for s in res.bottlenecks:
        if s.t_a <= t < s.t_b:
            return str(s.limiter)
    return "waiting"


def series_rows(workflow, result, kind, samples):
    """Per process, ``(t, value, label)`` rows of the requested series."""
    end = result.makespan if math.isfinite(result.makespan) else max(
        (r.completion_time or 0.0) for r in result.results.values()
    )
    out = {}
    for name, res in result.results.items():
        proc = workflow.processes[name]
        rows = []
        if kind == "progress":
            for t in _sample_times([res.progress], end, samples):
                rows.append((t, res.progress(t), _label_at(res, t)))
        elif kind == "usage":
            for ell, req in enumerate(proc.resource_requirements):
                try:
                    fn, label = relative_usage(res, ell), req.name
                except NotPiecewiseConstant:
                    fn, label = resource_demand(res, ell), f"{req.name}:demand"
                for t in _sample_times([fn], end, samples):
                    rows.append((t, fn(t), label))
        elif kind == "buffered":
            for k, req in enumerate(proc.data_requirements):
                fn = buffered_data(res, k)
                for t in _sample_times([fn], end, samples):
                    rows.append((t, fn(t), req.name))
        else:
            raise ValueError(kind)
        out[name] = rows
    return out


def write_series(rows_by_proc, directory):
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    for name, rows in rows_by_proc.items():
        with open(d / f"{name}.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", "value", "label"])
            for t, v, label in rows:
                w.writerow([repr(float(t)), repr(float(v)), label])


def _emit(text, out_path):
    if out_path:
        Path(out_path).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_analyze(args) -> int:
    doc = load_document(args.path)
    wf = doc.workflow
    result = analyze(wf, debug=args.debug)
    report = build_report(wf, result)
    if args.oracle_check:
        horizon = result.makespan if math.isfinite(result.makespan) else 1.0
        traj = simulate_workflow(wf, OracleConfig(dt_rel=args.dt, horizon=horizon))
        report["oracle_makespan"] = traj.makespan
        report["max_deviation"] = max(
            max_deviation(result.results[n].progress, traj.trajectories[n]) for n in result.results
        )
        for line in traj.diagnostics:
            print(line, file=sys.stderr)
    if args.series:
        if not args.csv:
            print("--series needs --csv DIR", file=sys.stderr)
            return EXIT_INVALID
        write_series(series_rows(wf, result, args.series, args.samples), args.csv)
    _emit(json.dumps(report, indent=2) + "\n", args.out)
    return EXIT_OK


def _sweep_points(doc, path, values, parallel):
    try:
        set_parameter(doc.workflow, path, values[0] if values else 0.0)
    except UnknownParameter:
        # generic path into the document: rebuild the model per value
        pts = []
        for v in values:
            wf = parse_document(set_document_value(doc.data, path, v))
            res = analyze(wf, with_usage=False)
            pts.append((v, res.makespan, {n: r.completion_time for n, r in res.results.items()}))
        return pts
    return [(p.value, p.makespan, p.completions) for p in sweep(doc.workflow, path, values, parallel=parallel)]


def cmd_sweep(args) -> int:
    doc = load_document(args.path)
    values = linspace(args.start, args.stop, args.steps)
    points = _sweep_points(doc, args.param, values, args.parallel)
    names = list(doc.workflow.processes)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["value", "makespan"] + [f"{n}_completion" for n in names])
    for v, mk, comp in points:
        w.writerow([repr(v), repr(mk)] + [repr(comp[n]) if comp[n] is not None else "" for n in names])
    _emit(buf.getvalue(), args.out)
    return EXIT_OK


def cmd_validate(args) -> int:
    load_document(args.path)
    print("OK")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pwflow", description="Analytic bottleneck analysis of workflow models.")
    sub = parser.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="solve a workflow and report completion times and bottlenecks")
    a.add_argument("path")
    a.add_argument("--out", help="write the JSON report here instead of stdout")
    a.add_argument("--series", choices=["progress", "usage", "buffered"], help="also emit a per-process CSV series")
    a.add_argument("--csv", metavar="DIR", help="directory for --series files")
    a.add_argument("--samples", type=int, default=512, help="uniform samples added to the breakpoints (default 512)")
    a.add_argument("--oracle-check", action="store_true", help="compare against the time-stepped reference")
    a.add_argument("--dt", type=float, default=1e-3, help="oracle step as a fraction of the makespan (default 1e-3)")
    a.add_argument("--debug", action="store_true", help="re-check retrospective allocations by re-solving")
    a.set_defaults(func=cmd_analyze)

    s = sub.add_parser("sweep", help="makespan over a range of one parameter")
    s.add_argument("path")
    s.add_argument("--param", required=True, help="dot path, e.g. bindings.dl1.fraction")
    s.add_argument("--from", dest="start", type=float, required=True)
    s.add_argument("--to", dest="stop", type=float, required=True)
    s.add_argument("--steps", type=int, required=True)
    s.add_argument("--parallel", action="store_true", help="evaluate points in worker processes")
    s.add_argument("--out", help="write the CSV here instead of stdout")
    s.set_defaults(func=cmd_sweep)

    v = sub.add_parser("validate", help="check a document against the schema and model rules")
    v.add_argument("path")
    v.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "steps", 1) < 1:
        parser.error("--steps must be at least 1")
    try:
        return args.func(args)
    except ValidationError as exc:
        for v in exc.violations:
            print(str(v), file=sys.stderr)
        return EXIT_INVALID
    except CyclicDependency as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_CYCLE
    except UnknownParameter as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_PARAM
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except FileNotFoundError as exc:
        print(f"cannot read {exc.filename}", file=sys.stderr)
        return EXIT_INVALID
    except PwflowError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
