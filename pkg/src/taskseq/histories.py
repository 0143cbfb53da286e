"""Concurrent histories of one-shot tasks and the prefix satisfaction relation."""

from __future__ import annotations

from typing import Any, Hashable, NamedTuple

from ._serial import canonical_sorted, state_cap
from .complexes import Task, Vertex, ids
from .errors import ExplosionError, UnknownInputVertex, WellFormednessError

INV, RESP = "inv", "resp"


class Event(NamedTuple):
    kind: str
    pid: Hashable
    value: Any = None
    op: str = "op"


History = tuple  # of Event


def inv(pid, value=None, op: str = "op") -> Event:
    return Event(INV, pid, value, op)


def resp(pid, value=None, op: str = "op") -> Event:
    return Event(RESP, pid, value, op)


def check_wellformed(history, one_shot: bool = True) -> None:
    """Raise :class:`WellFormednessError` at the first offending event.

    Per pid, events alternate invocation then response.  With ``one_shot``
    each pid invokes at most once.
    """
    pending: dict = {}
    invoked: set = set()
    for i, e in enumerate(history):
        if e.kind == INV:
            if e.pid in pending:
                raise WellFormednessError(i, f"pid {e.pid!r} invokes while pending")
            if one_shot and e.pid in invoked:
                raise WellFormednessError(i, f"pid {e.pid!r} invokes twice")
            pending[e.pid] = e.op
            invoked.add(e.pid)
        elif e.kind == RESP:
            if e.pid not in pending:
                raise WellFormednessError(i, f"response to pid {e.pid!r} without invocation")
            if pending.pop(e.pid) != e.op:
                raise WellFormednessError(i, f"response kind {e.op!r} does not match invocation")
        else:
            raise WellFormednessError(i, f"unknown event type {e.kind!r}")


def extract_simplexes(history) -> tuple[frozenset, frozenset]:
    """``(sigma, tau)``: the invoked input vertices and the produced output vertices."""
    check_wellformed(history)
    sigma = frozenset(Vertex(e.pid, e.value) for e in history if e.kind == INV)
    tau = frozenset(Vertex(e.pid, e.value) for e in history if e.kind == RESP)
    return sigma, tau


def satisfies_task(history, t: Task):
    """Check that every prefix keeps its outputs inside the carrier of its inputs.

    Returns a :class:`~taskseq.objects.CheckResult` whose counterexample is
    the length of the shortest bad prefix.
    """
    from .objects import CheckResult

    check_wellformed(history)
    inputs = t.inputs.vertices()
    sigma, tau = frozenset(), frozenset()
    for i, e in enumerate(history):
        v = Vertex(e.pid, e.value)
        if e.kind == INV:
            if v not in inputs:
                raise UnknownInputVertex(f"event {i}: {v} is not an input vertex")
            sigma = sigma | {v}
            if sigma not in t.inputs:
                return CheckResult(False, i + 1, "input simplex outside the input complex")
        else:
            tau = tau | {v}
        if tau not in t.carrier(sigma):
            return CheckResult(False, i + 1, "outputs outside the carrier")
    return CheckResult(True)


def enumerate_VE_task(t: Task, pids=None, cap: int | None = None) -> set:
    """Every well-formed one-shot history over ``pids`` that satisfies ``t``.

    Pending invocations are allowed.  The search extends histories one event
    at a time and prunes on the prefix condition, which is sound because the
    set is prefix-closed.
    """
    cap = state_cap(cap)
    pids = canonical_sorted(t.pids if pids is None else pids)
    in_values = {p: t.input_values(p) for p in pids}
    out_values = {p: t.output_values(p) for p in pids}
    out = set()
    stack = [((), frozenset(), frozenset())]
    while stack:
        h, sigma, tau = stack.pop()
        out.add(h)
        if len(out) > cap:
            raise ExplosionError(len(out), cap, "histories")
        image = t.carrier(sigma)
        invoked, answered = ids(sigma), ids(tau)
        for p in pids:
            if p not in invoked:
                for x in in_values[p]:
                    grown = sigma | {Vertex(p, x)}
                    if grown in t.inputs and tau in t.carrier(grown):
                        stack.append((h + (Event(INV, p, x),), grown, tau))
            elif p not in answered:
                for y in out_values[p]:
                    grown = tau | {Vertex(p, y)}
                    if grown in image:
                        stack.append((h + (Event(RESP, p, y),), sigma, grown))
    return out


def is_sequential(history) -> bool:
    """Every invocation is immediately followed by its response."""
    if len(history) % 2:
        return False
    for a, b in zip(history[::2], history[1::2]):
        if a.kind != INV or b.kind != RESP or a.pid != b.pid or a.op != b.op:
            return False
    return True


def history_to_json(history) -> list[dict]:
    out = []
    for e in history:
        d = {"type": e.kind, "pid": e.pid, "value": e.value}
        if e.op != "op":
            d["op"] = e.op
        out.append(d)
    return out


def history_from_json(data) -> History:
    return tuple(Event(d["type"], d["pid"], d.get("value"), d.get("op", "op")) for d in data)
