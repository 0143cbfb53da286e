"""JSON formats: tasks, automata, sequential executions and check verdicts."""

from __future__ import annotations

import json
from pathlib import Path

import jsonschema

from ._serial import canonical_sorted, decode, encode, sort_key
from .complexes import Complex, Task, closure, simplex, sorted_simplex
from .errors import SchemaError
from .histories import history_from_json, history_to_json
from .objects import CheckResult, Invocation, Response, SeqObject, TableObject, tabulate

_SCALAR = {"type": ["integer", "string", "null", "boolean"]}
_SIMPLEX = {"type": "array", "items": {"type": "array", "prefixItems": [_SCALAR, _SCALAR],
                                       "minItems": 2, "maxItems": 2}}
_SIMPLEXES = {"type": "array", "items": _SIMPLEX}

TASK_SCHEMA = {
    "type": "object",
    "required": ["pids", "input_maximal", "output_maximal", "delta"],
    "properties": {
        "name": {"type": "string"},
        "pids": {"type": "array", "items": _SCALAR, "minItems": 1},
        "input_maximal": _SIMPLEXES,
        "output_maximal": _SIMPLEXES,
        "delta": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["input", "output_maximal"],
                "properties": {"input": _SIMPLEX, "output_maximal": _SIMPLEXES},
            },
        },
    },
}


def _simplex_json(s) -> list:
    return [list(v) for v in sorted_simplex(s)]


def _maximal_json(c: Complex) -> list:
    return [_simplex_json(s) for s in c.maximal()]


def task_to_json(t: Task) -> dict:
    return {
        "name": t.name,
        "pids": list(t.pids),
        "input_maximal": _maximal_json(t.inputs),
        "output_maximal": _maximal_json(t.outputs),
        "delta": [{"input": _simplex_json(s), "output_maximal": _maximal_json(t.delta[s])}
                  for s in canonical_sorted(t.delta)],
    }


def task_from_json(data) -> Task:
    """Build a task from its JSON form, closing every complex.

    Raises :class:`SchemaError` (with a JSON pointer) on shape errors and
    :class:`~taskseq.errors.ChromaticityError` on a repeated pid.  Axioms
    are not checked here; see :func:`load_task`.
    """
    try:
        jsonschema.validate(data, TASK_SCHEMA)
    except jsonschema.ValidationError as e:
        raise SchemaError(e.message, "/" + "/".join(str(p) for p in e.absolute_path)) from None
    delta = {}
    for entry in data["delta"]:
        delta[simplex(entry["input"])] = closure(entry["output_maximal"])
    return Task(
        tuple(canonical_sorted(data["pids"])),
        closure(data["input_maximal"]),
        closure(data["output_maximal"]),
        delta,
        data.get("name", ""),
    )


def read_json(path) -> object:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def write_json(path, payload) -> None:
    Path(path).write_text(dumps(payload) + "\n", encoding="utf-8")


def dumps(payload) -> str:
    return json.dumps(payload, indent=2, sort_keys=True)


# -- automata -----------------------------------------------------------------


def _inv_json(i: Invocation) -> dict:
    return {"kind": i.kind, "pid": encode(i.pid), "input": encode(i.input)}


def _resp_json(r: Response) -> dict:
    return {"kind": r.kind, "pid": encode(r.pid), "output": encode(r.output)}


def _inv_from(d) -> Invocation:
    return Invocation(d["kind"], decode(d["pid"]), decode(d["input"]))


def _resp_from(d) -> Response:
    return Response(d["kind"], decode(d["pid"]), decode(d["output"]))


def object_to_json(o: SeqObject) -> dict:
    """The reachable part of ``o`` as an explicit, canonically numbered table."""
    table = o if isinstance(o, TableObject) else tabulate(o)
    states = {table.initial}
    for (src, _), branches in table.table.items():
        states.add(src)
        states.update(nxt for nxt, _ in branches)
    order = sorted(states, key=sort_key)
    number = {s: i for i, s in enumerate(order)}
    transitions = []
    for (src, i), branches in table.table.items():
        for nxt, r in branches:
            transitions.append({"from": number[src], "inv": _inv_json(i),
                                "to": number[nxt], "resp": _resp_json(r)})
    transitions.sort(key=lambda t: (t["from"], sort_key(_inv_from(t["inv"])), t["to"]))
    return {
        "name": table.name,
        "initial": number[table.initial],
        "states": [encode(s) for s in order],
        "alphabet": [_inv_json(i) for i in table.alphabet],
        "transitions": transitions,
    }


def object_from_json(data) -> TableObject:
    states = [decode(s) for s in data["states"]]
    table: dict = {}
    for t in data["transitions"]:
        key = (states[t["from"]], _inv_from(t["inv"]))
        table.setdefault(key, []).append((states[t["to"]], _resp_from(t["resp"])))
    table = {k: tuple(sorted(v, key=lambda b: sort_key(b[1]))) for k, v in table.items()}
    return TableObject(states[data["initial"]], table,
                       [_inv_from(i) for i in data["alphabet"]], data.get("name", "table"))


# -- executions and verdicts --------------------------------------------------


def execution_to_json(execution) -> list[dict]:
    return [{"inv": _inv_json(i), "resp": _resp_json(r)} for i, r in execution]


def execution_from_json(data) -> tuple:
    return tuple((_inv_from(d["inv"]), _resp_from(d["resp"])) for d in data)


def _cex_to_json(cex):
    if cex is None or isinstance(cex, int):
        return {"kind": "none" if cex is None else "prefix", "value": cex}
    if cex and isinstance(cex[0], tuple) and isinstance(cex[0][0], Invocation):
        return {"kind": "execution", "value": execution_to_json(cex)}
    return {"kind": "history", "value": history_to_json(cex)}


def _cex_from_json(d):
    if d["kind"] in ("none", "prefix"):
        return d["value"]
    if d["kind"] == "execution":
        return execution_from_json(d["value"])
    return history_from_json(d["value"])


def verdict_to_json(result: CheckResult) -> dict:
    return {"ok": result.ok, "counterexample": _cex_to_json(result.counterexample),
            "detail": result.detail}


def verdict_from_json(data) -> CheckResult:
    return CheckResult(data["ok"], _cex_from_json(data["counterexample"]), data.get("detail", ""))
