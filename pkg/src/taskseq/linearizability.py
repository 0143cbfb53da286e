"""Linearizability against sequential objects, and the task/object comparisons
built on it: valid-history sets of objects, the history/execution bijection,
and the single-operation sequentializability decision.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Any

from ._serial import canonical_sorted, shortest_first, sort_key, state_cap
from .complexes import Task
from .errors import ExplosionError
from .histories import INV, RESP, Event, check_wellformed, enumerate_VE_task, is_sequential
from .objects import (
    GET,
    OP,
    SET,
    CheckResult,
    Invocation,
    Response,
    SeqObject,
    TrieObject,
    _next_kinds,
    execution_to_history,
    history_to_execution,
    sspec_enumerate,
)


@dataclass
class LinWitness:
    """A sequential execution plus, per position, the history operation it linearizes."""

    execution: tuple
    order: tuple  # indices into the history's operation list, one per step


@dataclass(frozen=True)
class _Op:
    pid: Any
    kind: str
    input: Any
    output: Any
    start: int
    end: int | None  # None while pending


def _operations(history) -> list[_Op]:
    ops = []
    open_ops = {}
    for i, e in enumerate(history):
        if e.kind == INV:
            open_ops[e.pid] = len(ops)
            ops.append(_Op(e.pid, e.op, e.value, None, i, None))
        else:
            j = open_ops.pop(e.pid)
            o = ops[j]
            ops[j] = _Op(o.pid, o.kind, o.input, e.value, o.start, i)
    return ops


def _invocation(op: _Op) -> Invocation:
    return Invocation(op.kind, op.pid, None if op.kind == GET else op.input)


def linearizable(history, o: SeqObject) -> tuple[bool, LinWitness | None]:
    """Search every linearization order, memoizing failed (state, done) pairs.

    An operation may be placed next only when no unplaced completed
    operation responded before it was invoked.  Completed operations must
    reproduce their recorded output; pending ones may be placed with any
    response or left out.
    """
    check_wellformed(history, one_shot=False)
    ops = _operations(history)
    completed = frozenset(i for i, op in enumerate(ops) if op.end is not None)
    failed: set = set()

    def search(state, done: frozenset):
        if completed <= done:
            return []
        if (state, done) in failed:
            return None
        horizon = min((ops[i].end for i in completed - done), default=len(history))
        for i, op in enumerate(ops):
            if i in done or op.start > horizon:
                continue
            for nxt, r in o.transitions(state, _invocation(op)):
                if op.end is not None and r.output != op.output:
                    continue
                rest = search(nxt, done | {i})
                if rest is not None:
                    return [((_invocation(op), r), i)] + rest
        failed.add((state, done))
        return None

    found = search(o.initial, frozenset())
    if found is None:
        return False, None
    return True, LinWitness(tuple(s for s, _ in found), tuple(i for _, i in found))


class _Frontier:
    """Online linearizability: the set of object configurations consistent with a prefix.

    A configuration is ``(state, early)`` where ``early`` records pending
    operations that were already linearized, with the output they got.
    """

    def __init__(self, o: SeqObject):
        self.o = o

    def close(self, configs, pending: dict) -> frozenset:
        seen = set(configs)
        stack = list(configs)
        while stack:
            state, early = stack.pop()
            placed = {key for key, _ in early}
            for key, inv in pending.items():
                if key in placed:
                    continue
                for nxt, r in self.o.transitions(state, inv):
                    c = (nxt, early | {(key, r.output)})
                    if c not in seen:
                        seen.add(c)
                        stack.append(c)
        return frozenset(seen)

    @staticmethod
    def respond(configs, key, output) -> frozenset:
        hit = (key, output)
        return frozenset((s, early - {hit}) for s, early in configs if hit in early)


def enumerate_VE_obj(o: SeqObject, pids=None, cap: int | None = None) -> set:
    """Every well-formed one-shot history over ``pids`` linearizable w.r.t. ``o``.

    For a set/get object each pid issues ``set`` then ``get``; otherwise one
    ``op``.  Linearizability is prefix-closed, so the search prunes as soon
    as the configuration frontier empties.
    """
    cap = state_cap(cap)
    pids = canonical_sorted(o.pids() if pids is None else pids)
    setget = o.is_setget
    inputs = defaultdict(list)
    for i in o.alphabet:
        inputs[(i.pid, i.kind)].append(i.input)
    fr = _Frontier(o)
    out = set()
    start = frozenset({(o.initial, frozenset())})
    stack = [((), start, {}, {})]
    while stack:
        h, configs, pending, done = stack.pop()
        out.add(h)
        if len(out) > cap:
            raise ExplosionError(len(out), cap, "histories")
        for p in pids:
            if p in pending:
                key = (p, pending[p].kind)
                outputs = canonical_sorted({r for _, early in configs for k, r in early if k == key})
                for y in outputs:
                    nxt = fr.respond(configs, key, y)
                    rest = dict(pending)
                    del rest[p]
                    d = dict(done)
                    d[p] = done.get(p, ()) + (key[1],)
                    stack.append((h + (Event(RESP, p, y, key[1]),), nxt, rest, d))
                continue
            for kind in _next_kinds(setget, done.get(p, ())):
                for x in inputs.get((p, kind), ()):
                    inv = Invocation(kind, p, x)
                    grown = dict(pending)
                    grown[p] = inv
                    keyed = {(q, i.kind): i for q, i in grown.items()}
                    nxt = fr.close(configs, keyed)
                    if nxt:
                        stack.append((h + (Event(INV, p, x, kind),), nxt, grown, done))
    return out


def project_setget_history(history) -> tuple:
    """Collapse a set/get object history onto task events.

    The invocation of ``set`` becomes the task invocation and the response
    of ``get`` becomes the task response; the other two events disappear.
    """
    out = []
    for e in history:
        if e.op == SET and e.kind == INV:
            out.append(Event(INV, e.pid, e.value))
        elif e.op == GET and e.kind == RESP:
            out.append(Event(RESP, e.pid, e.value))
    return tuple(out)


def check_bijection(t: Task, o: SeqObject, pids=None, cap: int | None = None) -> CheckResult:
    """Check that sets/gets <-> invocations/responses is a bijection VE(t) -> SSpec(o).

    The map is injective by construction, so the check is that it lands in
    the well-formed executions of ``o`` and hits every one of them.
    """
    pids = t.pids if pids is None else pids
    ve = enumerate_VE_task(t, pids, cap=cap)
    sspec = sspec_enumerate(o, pids, cap=cap)
    image = {history_to_execution(h) for h in ve}
    missing = [h for h in ve if history_to_execution(h) not in sspec]
    extra = [ex for ex in sspec if ex not in image]
    if missing:
        return CheckResult(False, shortest_first(missing)[0], "valid history with no execution")
    if extra:
        return CheckResult(False, shortest_first(extra)[0], "execution with no valid history")
    if len(image) != len(ve):
        return CheckResult(False, None, "map is not injective")
    return CheckResult(True, detail=f"{len(ve)} histories")


def single_op_candidate(t: Task, pids=None, ve: set | None = None) -> TrieObject:
    """The only single-operation object that could share VE with ``t``.

    Its sequential executions are exactly the sequential histories of ``t``.
    """
    if ve is None:
        ve = enumerate_VE_task(t, pids)
    edges: dict = defaultdict(lambda: defaultdict(list))
    for h in ve:
        if not h or not is_sequential(h):
            continue
        parent, a, b = h[:-2], h[-2], h[-1]
        edges[parent][Invocation(OP, a.pid, a.value)].append((h, Response(OP, b.pid, b.value)))
    return TrieObject((), {s: dict(v) for s, v in edges.items()}, name="single-op")


def _counterexample_rank(n_pids: int):
    """Prefer histories where everyone completes and all invocations come first."""

    def key(h):
        invoked = {e.pid for e in h if e.kind == INV}
        answered = {e.pid for e in h if e.kind == RESP}
        full = len(invoked) == n_pids and answered == invoked
        first_resp = next((i for i, e in enumerate(h) if e.kind == RESP), len(h))
        concurrent = first_resp == len(invoked)
        return (not full, not concurrent, len(h), sort_key(tuple(h)))

    return key


@dataclass
class Sequentializability:
    yes: bool
    candidate: TrieObject
    counterexample: tuple | None = None
    in_task_only: bool = True
    counts: dict = field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.yes


def sequentializable_single_op(t: Task, pids=None, cap: int | None = None) -> Sequentializability:
    """Decide whether some single-operation object has the same valid histories as ``t``.

    Any such object's complete sequential executions are the sequential
    histories of ``t``, so one candidate is built and compared.  A NO comes
    with a history from the symmetric difference, preferring fully
    concurrent, fully completed ones.
    """
    pids = canonical_sorted(t.pids if pids is None else pids)
    ve_task = enumerate_VE_task(t, pids, cap=cap)
    cand = single_op_candidate(t, pids, ve_task)
    ve_obj = enumerate_VE_obj(cand, pids, cap=cap)
    counts = {"task": len(ve_task), "object": len(ve_obj)}
    diff = ve_task ^ ve_obj
    if not diff:
        return Sequentializability(True, cand, counts=counts)
    cex = min(diff, key=_counterexample_rank(len(pids)))
    return Sequentializability(False, cand, cex, cex in ve_task, counts)


def ve_obj_as_task_histories(o: SeqObject, pids=None, cap: int | None = None) -> set:
    return {project_setget_history(h) for h in enumerate_VE_obj(o, pids, cap=cap)}


def execution_as_history(execution) -> tuple:
    """Read a sequential execution as a history: each step is inv then resp."""
    out = []
    for i, r in execution:
        out.append(Event(INV, i.pid, i.input, i.kind))
        out.append(Event(RESP, r.pid, r.output, r.kind))
    return tuple(out)


__all__ = [
    "LinWitness",
    "Sequentializability",
    "check_bijection",
    "enumerate_VE_obj",
    "execution_as_history",
    "execution_to_history",
    "linearizable",
    "project_setget_history",
    "sequentializable_single_op",
    "single_op_candidate",
    "ve_obj_as_task_histories",
]
