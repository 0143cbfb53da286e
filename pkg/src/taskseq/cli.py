"""Command-line front end.

Exit status: 0 when the check holds, 1 on a property violation (the
counterexample is in the output), 2 on usage or input errors, 3 when a
state cap is exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field

from . import io
from .complexes import validate_task
from .errors import ExplosionError, TaskSeqError
from .histories import history_from_json, history_to_json, satisfies_task, enumerate_VE_task
from .linearizability import check_bijection, sequentializable_single_op
from .objects import (
    AdhocExchangerObject,
    AdhocSplitterObject,
    TestAndSetObject,
    complete_wrt_task,
    correct_wrt_task,
    generic_setget_object,
    objects_equivalent,
    theorem1_object,
)
from .renaming import check_rw_splitter, model_check_renaming
from .tasks import BUILTINS, builtin_task

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE, EXIT_EXPLOSION = 0, 1, 2, 3


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    task: str | None = None
    task_file: str | None = None
    n: int = 2
    k: int | None = None
    domain: list | None = None
    cap: int | None = None
    workers: int = 1
    out: str | None = None
    format: str = "json"
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.task and self.task_file:
            raise UsageError("--task and --task-file are mutually exclusive")
        if self.cap is not None and self.cap <= 0:
            raise UsageError("--cap must be positive")
        if self.n < 1:
            raise UsageError("--n must be positive")


def _domain(values):
    if values is None:
        return None
    out = []
    for v in values:
        try:
            out.append(int(v))
        except ValueError:
            out.append(v)
    return out


def resolve_task(cfg: RunConfig):
    if cfg.task_file:
        return load_task(cfg.task_file)
    if not cfg.task:
        raise UsageError("a task is required: --task NAME or --task-file PATH")
    return builtin_task(cfg.task, cfg.n, cfg.k, cfg.domain)


class TaskRejected(Exception):
    def __init__(self, report):
        self.report = report
        super().__init__("task violates the task axioms")


def load_task(path):
    """Read a task file, close its complexes and reject it unless it is valid."""
    try:
        data = io.read_json(path)
    except (OSError, json.JSONDecodeError) as e:
        raise UsageError(f"cannot read {path}: {e}") from None
    t = io.task_from_json(data)
    report = validate_task(t)
    if not report.ok:
        raise TaskRejected(report)
    return t


def resolve_object(kind: str, t, cfg: RunConfig):
    if kind == "fig3":
        return generic_setget_object(t)
    if kind == "thm1":
        return theorem1_object(t, cap=cfg.cap)
    if kind == "adhoc":
        name = t.name
        if name == "splitter":
            return AdhocSplitterObject(t.pids)
        if name == "exchanger":
            return AdhocExchangerObject(t.pids)
        if name == "test-and-set":
            return TestAndSetObject(t.pids)
        raise UsageError(f"no ad hoc object for task {name!r}")
    try:
        return io.object_from_json(io.read_json(kind))
    except (OSError, json.JSONDecodeError, KeyError) as e:
        raise UsageError(f"cannot load automaton {kind}: {e}") from None


def _verdict_payload(command, result, **extra):
    payload = {"command": command, **io.verdict_to_json(result), **extra}
    return payload, EXIT_OK if result.ok else EXIT_VIOLATION


def run(cfg: RunConfig) -> tuple[dict, int]:
    """Dispatch one command; returns the JSON payload and the exit status."""
    c, x = cfg.command, cfg.extra
    if c == "task validate":
        report = validate_task(resolve_task(cfg))
        return {"command": c, **report.to_dict()}, EXIT_OK if report.ok else EXIT_VIOLATION
    if c == "task export":
        return io.task_to_json(resolve_task(cfg)), EXIT_OK
    if c == "synth":
        t = resolve_task(cfg)
        return io.object_to_json(resolve_object(x["method"], t, cfg)), EXIT_OK
    if c == "eq":
        t = resolve_task(cfg)
        a, b = resolve_object(x["left"], t, cfg), resolve_object(x["right"], t, cfg)
        return _verdict_payload(c, objects_equivalent(a, b, t.pids, cap=cfg.cap))
    if c in ("correct", "complete"):
        t = resolve_task(cfg)
        o = resolve_object(x["object"], t, cfg)
        check = correct_wrt_task if c == "correct" else complete_wrt_task
        return _verdict_payload(c, check(o, t, cap=cfg.cap))
    if c == "bijection":
        t = resolve_task(cfg)
        o = resolve_object(x["object"], t, cfg)
        return _verdict_payload(c, check_bijection(t, o, cap=cfg.cap))
    if c == "ve":
        t = resolve_task(cfg)
        from ._serial import shortest_first

        hs = shortest_first(enumerate_VE_task(t, cap=cfg.cap))
        return {"command": c, "count": len(hs), "histories": [history_to_json(h) for h in hs]}, EXIT_OK
    if c == "check-history":
        t = resolve_task(cfg)
        try:
            h = history_from_json(io.read_json(x["history"]))
        except (OSError, json.JSONDecodeError, KeyError, TypeError) as e:
            raise UsageError(f"cannot read history {x['history']}: {e}") from None
        return _verdict_payload(c, satisfies_task(h, t))
    if c == "sequentializable":
        t = resolve_task(cfg)
        r = sequentializable_single_op(t, cap=cfg.cap)
        payload = {
            "command": c,
            "task": t.name,
            "n": t.n,
            "sequentializable": r.yes,
            "counts": r.counts,
            "counterexample": None if r.counterexample is None else history_to_json(r.counterexample),
            "counterexample_side": None if r.yes else ("task" if r.in_task_only else "object"),
        }
        if x.get("counterexample_out") and r.counterexample is not None:
            io.write_json(x["counterexample_out"], history_to_json(r.counterexample))
        return payload, EXIT_OK if r.yes else EXIT_VIOLATION
    if c == "mc renaming":
        rep = model_check_renaming(cfg.n, x["variant"], x["crashes"], x["subsets"],
                                   x["labeling"], workers=cfg.workers, cap=cfg.cap)
        return rep.to_dict(), EXIT_OK if rep.ok else EXIT_VIOLATION
    if c == "mc rw-splitter":
        rep = check_rw_splitter(cfg.n, x["mutation"], workers=cfg.workers, cap=cfg.cap)
        return rep.to_dict(), EXIT_OK if rep.ok else EXIT_VIOLATION
    raise UsageError(f"unknown command {c!r}")


def render_text(payload, indent: int = 0) -> str:
    """Plain-text view of a JSON payload."""
    pad = "  " * indent
    lines = []
    if isinstance(payload, dict):
        for k in sorted(payload):
            v = payload[k]
            if isinstance(v, (dict, list)) and v:
                lines.append(f"{pad}{k}:")
                lines.append(render_text(v, indent + 1))
            else:
                lines.append(f"{pad}{k}: {json.dumps(v)}")
    elif isinstance(payload, list):
        for v in payload:
            if isinstance(v, dict) and all(not isinstance(x, (dict, list)) for x in v.values()):
                lines.append(pad + "- " + " ".join(f"{k}={json.dumps(v[k])}" for k in sorted(v)))
            elif isinstance(v, (dict, list)):
                lines.append(pad + "-")
                lines.append(render_text(v, indent + 1))
            else:
                lines.append(f"{pad}- {json.dumps(v)}")
    else:
        lines.append(pad + json.dumps(payload))
    return "\n".join(lines)


def _add_task_args(p):
    p.add_argument("--task", choices=BUILTINS + ("consensus",), help="builtin task")
    p.add_argument("--task-file", help="task JSON file")
    p.add_argument("--n", type=int, default=2, help="number of processes (pids 1..n)")
    p.add_argument("--k", type=int, help="agreement bound for k-set-agreement")
    p.add_argument("--domain", nargs="+", help="input domain for k-set-agreement")


def _add_common(p):
    p.add_argument("--out", help="write the JSON result here")
    p.add_argument("--format", choices=("json", "text"), default="json")
    p.add_argument("--cap", type=int, help="state/execution cap (default from TASKSEQ_STATE_CAP)")
    p.add_argument("--workers", type=int, default=1)


OBJECT_HELP = "fig3, thm1, adhoc, or a path to an automaton JSON file"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="taskseq", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    task = sub.add_parser("task", help="validate or export a task")
    task_sub = task.add_subparsers(dest="action", required=True)
    for name in ("validate", "export"):
        p = task_sub.add_parser(name)
        _add_task_args(p)
        _add_common(p)

    p = sub.add_parser("synth", help="emit a set/get automaton for a task")
    _add_task_args(p)
    _add_common(p)
    p.add_argument("--method", choices=("fig3", "thm1", "adhoc"), default="fig3")

    p = sub.add_parser("eq", help="compare two objects' sequential executions")
    _add_task_args(p)
    _add_common(p)
    p.add_argument("--left", default="adhoc", help=OBJECT_HELP)
    p.add_argument("--right", default="fig3", help=OBJECT_HELP)

    for name in ("correct", "complete", "bijection"):
        p = sub.add_parser(name)
        _add_task_args(p)
        _add_common(p)
        p.add_argument("--object", default="fig3", help=OBJECT_HELP)

    p = sub.add_parser("ve", help="enumerate the valid histories of a task")
    _add_task_args(p)
    _add_common(p)

    p = sub.add_parser("check-history", help="check one history file against a task")
    p.add_argument("history")
    _add_task_args(p)
    _add_common(p)

    p = sub.add_parser("sequentializable", help="decide single-operation sequentializability")
    _add_task_args(p)
    _add_common(p)
    p.add_argument("--counterexample-out", help="write the counterexample history here")

    mc = sub.add_parser("mc", help="model checking")
    mc_sub = mc.add_subparsers(dest="action", required=True)
    p = mc_sub.add_parser("renaming")
    _add_common(p)
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--variant", choices=("setget", "registers"), default="setget")
    p.add_argument("--crashes", action="store_true")
    p.add_argument("--subsets", action="store_true", help="also check every participant subset")
    p.add_argument("--labeling", choices=("adaptive", "original"), default="adaptive")
    p = mc_sub.add_parser("rw-splitter")
    _add_common(p)
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--mutation", choices=("skip_closed_write", "skip_last_recheck"))
    return parser


_SHARED = {"command", "action", "task", "task_file", "n", "k", "domain", "cap",
           "workers", "out", "format"}


def config_from_args(args) -> RunConfig:
    command = args.command if not getattr(args, "action", None) else f"{args.command} {args.action}"
    ns = vars(args)
    return RunConfig(
        command=command,
        task=ns.get("task"),
        task_file=ns.get("task_file"),
        n=ns.get("n", 2),
        k=ns.get("k"),
        domain=_domain(ns.get("domain")),
        cap=ns.get("cap"),
        workers=ns.get("workers", 1),
        out=ns.get("out"),
        format=ns.get("format", "json"),
        extra={k: v for k, v in ns.items() if k not in _SHARED},
    )


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
        payload, status = run(cfg)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except TaskRejected as e:
        payload, status = {"command": "load", **e.report.to_dict()}, EXIT_VIOLATION
        cfg = config_from_args(args)
    except ExplosionError as e:
        print(f"error: {e}", file=sys.stderr)
        print(io.dumps({"error": "explosion", "count": e.count, "cap": e.cap}))
        return EXIT_EXPLOSION
    except TaskSeqError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    if cfg.out:
        io.write_json(cfg.out, payload)
    print(render_text(payload) if cfg.format == "text" else io.dumps(payload))
    return status


if __name__ == "__main__":
    sys.exit(main())
