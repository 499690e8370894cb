"""JSON workflow documents: loading, validation and serialization.

Functions are declared once under ``functions`` and referenced by name.
Numbers are written with Python's shortest round-trip ``repr``, so a
load/dump/load cycle reproduces every breakpoint and coefficient bit for bit.
"""
from __future__ import annotations

import copy
import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import jsonschema

from .errors import UnknownParameter, ValidationError
from .model import DataRequirement, OutputSpec, Process, ResourceRequirement, Violation
from .piecewise import PiecewiseFn
from .workflow import REST, DataEdge, PoolShare, Workflow, validate_workflow

_SCHEMA = None


def schema() -> dict:
    global _SCHEMA
    if _SCHEMA is None:
        _SCHEMA = json.loads(resources.files(__package__).joinpath("schema.json").read_text())
    return _SCHEMA


@dataclass
class Document:
    data: dict
    workflow: Workflow


def fn_to_json(fn: PiecewiseFn) -> dict:
    return {"breakpoints": list(fn.breakpoints), "pieces": [list(p) for p in fn.pieces]}


def fn_from_json(obj: dict) -> PiecewiseFn:
    return PiecewiseFn(obj["breakpoints"], obj["pieces"], obj.get("extension", "hold"))


def _schema_violations(data) -> list:
    validator = jsonschema.Draft202012Validator(schema())
    out = []
    for err in sorted(validator.iter_errors(data), key=lambda e: list(e.absolute_path)):
        where = "/".join(str(p) for p in err.absolute_path) or "<document>"
        out.append(Violation("SchemaViolation", where, err.message))
    return out


def parse_document(data: dict) -> Workflow:
    """Build a :class:`Workflow` from a decoded document or raise :class:`ValidationError`."""
    problems = _schema_violations(data)
    if problems:
        raise ValidationError(problems)
    fns = {}
    for name, obj in data["functions"].items():
        try:
            fns[name] = fn_from_json(obj)
        except ValueError as exc:
            problems.append(Violation("FunctionViolation", name, str(exc)))

    def ref(name, where):
        if name not in fns:
            if name not in data["functions"]:
                problems.append(Violation("UnresolvedName", name, f"function referenced by {where} is not defined"))
            return None
        return fns[name]

    processes = {}
    for p in data["processes"]:
        name = p["name"]
        if name in processes:
            problems.append(Violation("StructureViolation", name, "duplicate process name"))
        dreq = [DataRequirement(s["name"], ref(s["fn"], f"{name}.{s['name']}")) for s in p.get("data_requirements", [])]
        rreq = [ResourceRequirement(s["name"], ref(s["fn"], f"{name}.{s['name']}")) for s in p.get("resource_requirements", [])]
        outs = [OutputSpec(s["name"], ref(s["fn"], f"{name}.{s['name']}")) for s in p.get("outputs", [])]
        if any(x.fn is None for x in dreq + rreq + outs):
            continue
        try:
            processes[name] = Process(name, dreq, rreq, outs, p.get("target_progress", float("nan")))
        except ValueError as exc:
            problems.append(Violation("StructureViolation", name, str(exc)))
    pools = {}
    for pool in data.get("pools", []):
        cap = ref(pool["capacity_fn"], f"pool {pool['name']}")
        if cap is not None:
            pools[pool["name"]] = cap
    bindings = {}
    for proc, slots in data.get("bindings", {}).items():
        out = {}
        for slot, b in slots.items():
            if "fn" in b:
                fn = ref(b["fn"], f"binding {proc}.{slot}")
                if fn is not None:
                    out[slot] = fn
            else:
                out[slot] = PoolShare(b["pool"], b["fraction"], b.get("release_to") or ())
        bindings[proc] = out
    edges = [DataEdge(e["from"], e["output"], e["to"], e["slot"]) for e in data.get("edges", [])]
    gates = {g["process"]: tuple(g["after"]) for g in data.get("gates", [])}
    if problems:
        raise ValidationError(problems)
    wf = Workflow(processes, edges, pools, bindings, gates)
    problems = validate_workflow(wf)
    if problems:
        raise ValidationError(problems)
    return wf


def load_document(source) -> Document:
    """Read a document from a path, a JSON string or an already decoded dict."""
    if isinstance(source, dict):
        data = source
    else:
        text = Path(source).read_text() if not str(source).lstrip().startswith("{") else str(source)
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValidationError([Violation("SchemaViolation", "<document>", f"invalid JSON: {exc}")]) from exc
    return Document(data, parse_document(data))


def load_workflow(source) -> Workflow:
    return load_document(source).workflow


def workflow_to_dict(workflow: Workflow, description: str | None = None) -> dict:
    """Serializable form of ``workflow``; identical functions share one name."""
    functions = {}
    names = {}

    def name_for(fn, suggested):
        key = (fn.breakpoints, fn.pieces)
        if key not in names:
            base = suggested
            n = 2
            while suggested in functions:
                suggested = f"{base}_{n}"
                n += 1
            names[key] = suggested
            functions[suggested] = fn_to_json(fn)
        return names[key]

    procs = []
    for pname, p in workflow.processes.items():
        entry = {"name": pname, "target_progress": p.target_progress}
        for key, items in (
            ("data_requirements", p.data_requirements),
            ("resource_requirements", p.resource_requirements),
            ("outputs", p.outputs),
        ):
            entry[key] = [{"name": s.name, "fn": name_for(s.fn, f"{pname}_{s.name}")} for s in items]
        procs.append(entry)
    pools = [{"name": n, "capacity_fn": name_for(f, f"{n}_capacity")} for n, f in workflow.pools.items()]
    bindings = {}
    for proc, slots in workflow.bindings.items():
        out = {}
        for slot, b in slots.items():
            if isinstance(b, PoolShare):
                out[slot] = {"pool": b.pool, "fraction": b.fraction, "release_to": list(b.release_to) or None}
            else:
                out[slot] = {"fn": name_for(b, f"{proc}_{slot}_input")}
        bindings[proc] = out
    doc = {"version": 1}
    if description:
        doc["description"] = description
    doc.update(
        {
            "functions": functions,
            "processes": procs,
            "pools": pools,
            "bindings": bindings,
            "edges": [{"from": e.producer, "output": e.output, "to": e.consumer, "slot": e.slot} for e in workflow.edges],
            "gates": [{"process": p, "after": list(a)} for p, a in workflow.gates.items()],
        }
    )
    return doc


def dump_document(obj, indent=2) -> str:
    data = obj.data if isinstance(obj, Document) else workflow_to_dict(obj) if isinstance(obj, Workflow) else obj
    return json.dumps(data, indent=indent)


def set_document_value(data: dict, path: str, value: float) -> dict:
    """Copy of a decoded document with the number at dot ``path`` replaced.

    Path segments index objects by key and arrays by position; process and
    pool arrays may also be indexed by ``name``.  The shortcut
    ``bindings.<process>.fraction`` addresses the single pool share of a
    process.
    """
    parts = path.split(".")
    out = copy.deepcopy(data)
    if len(parts) == 3 and parts[0] == "bindings" and parts[2] == "fraction":
        slots = out.get("bindings", {}).get(parts[1], {})
        shares = [s for s, b in slots.items() if "pool" in b]
        if len(shares) != 1:
            raise UnknownParameter(path)
        parts = ["bindings", parts[1], shares[0], "fraction"]
    node = out
    for i, part in enumerate(parts):
        last = i == len(parts) - 1
        if isinstance(node, list):
            idx = None
            if part.lstrip("-").isdigit():
                idx = int(part)
            else:
                for j, item in enumerate(node):
                    if isinstance(item, dict) and item.get("name") == part:
                        idx = j
            if idx is None or not -len(node) <= idx < len(node):
                raise UnknownParameter(path)
            if last:
                if not isinstance(node[idx], (int, float)) or isinstance(node[idx], bool):
                    raise UnknownParameter(path)
                node[idx] = float(value)
            node = node[idx]
        elif isinstance(node, dict):
            if part not in node:
                raise UnknownParameter(path)
            if last:
                cur = node[part]
                if not (isinstance(cur, (int, float)) and not isinstance(cur, bool)) and cur != REST:
                    raise UnknownParameter(path)
                node[part] = float(value)
            node = node[part]
        else:
            raise UnknownParameter(path)
    return out


def fixture_path(name: str) -> Path:
    """Path of a document shipped with the package, e.g. ``"eval-workflow.json"``."""
    return Path(str(resources.files(__package__).joinpath("data", name)))
