"""Sequential objects as (possibly nondeterministic) Mealy automata.

An object exposes an initial state, a finite alphabet of invocations and a
transition relation returning ``(next_state, response)`` branches.  An empty
branch list means the invocation is disabled (its pre-condition fails);
enumeration treats that as a non-event, :meth:`SeqObject.apply` raises.

Set/get objects follow the one-shot discipline: each pid calls ``set`` at
most once and then ``get`` at most once.  Objects whose alphabet only uses
the ``op`` kind are single-operation objects, one call per pid.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Any, Hashable, Iterable, NamedTuple

from ._serial import canonical_sorted, shortest_first, sort_key, state_cap
from .complexes import Task, Vertex, ids
from .errors import ExplosionError, NondeterminismError, PreconditionError
from .tasks import BOTTOM, DOWN, RIGHT, STOP

SET, GET, OP = "set", "get", "op"


class Invocation(NamedTuple):
    kind: str
    pid: Hashable
    input: Any = None


class Response(NamedTuple):
    kind: str
    pid: Hashable
    output: Any = None


Step = tuple  # (Invocation, Response)
SeqExecution = tuple  # of Step


class SeqObject:
    name = "object"

    def __init__(self, initial, alphabet: Iterable[Invocation]):
        self.initial = initial
        self.alphabet = tuple(canonical_sorted(set(alphabet)))
        self._cache: dict = {}

    def _step(self, state, inv: Invocation) -> list[tuple[Any, Response]]:
        raise NotImplementedError

    def transitions(self, state, inv: Invocation) -> tuple:
        key = (state, inv)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        branches = tuple(sorted(self._step(state, inv), key=lambda b: sort_key(b[1])))
        seen = {}
        for nxt, resp in branches:
            if seen.setdefault(resp, nxt) != nxt:
                raise NondeterminismError(f"{inv} at {state!r}: response {resp} has two next states")
        self._cache[key] = branches
        return branches

    def apply(self, state, inv: Invocation) -> tuple:
        branches = self.transitions(state, inv)
        if not branches:
            raise PreconditionError(f"{inv} is not enabled in state {state!r}")
        return branches

    def replay(self, execution: SeqExecution):
        """Final state after ``execution``, or ``None`` if it is not an execution."""
        state = self.initial
        for inv, resp in execution:
            for nxt, r in self.transitions(state, inv):
                if r == resp:
                    state = nxt
                    break
            else:
                return None
        return state

    @property
    def is_setget(self) -> bool:
        return any(i.kind in (SET, GET) for i in self.alphabet)

    def pids(self) -> list:
        return canonical_sorted({i.pid for i in self.alphabet})


class GenericSetGetObject(SeqObject):
    """The task-generic set/get object with states ``(sigma, tau)``.

    ``set(id, x)`` adds an input vertex when the result stays in the input
    complex; ``get(id)`` answers any ``y`` keeping ``tau`` inside the
    carrier of ``sigma``.
    """

    name = "fig3"

    def __init__(self, task: Task):
        self.task = task
        self._outputs = {p: task.output_values(p) for p in task.pids}
        alphabet = [Invocation(SET, v.pid, v.value) for v in task.inputs.vertices()]
        alphabet += [Invocation(GET, p) for p in task.pids]
        super().__init__((frozenset(), frozenset()), alphabet)

    def _step(self, state, inv):
        sigma, tau = state
        if inv.kind == SET:
            if inv.pid in ids(sigma):
                return []
            grown = sigma | {Vertex(inv.pid, inv.input)}
            if grown not in self.task.inputs:
                return []
            return [((grown, tau), Response(SET, inv.pid))]
        if inv.kind == GET:
            if inv.pid not in ids(sigma) or inv.pid in ids(tau):
                return []
            image = self.task.carrier(sigma)
            out = []
            for y in self._outputs[inv.pid]:
                grown = tau | {Vertex(inv.pid, y)}
                if grown in image:
                    out.append(((sigma, grown), Response(GET, inv.pid, y)))
            return out
        return []


def generic_setget_object(t: Task) -> GenericSetGetObject:
    return GenericSetGetObject(t)


class TrieObject(SeqObject):
    """Deterministic object whose states are nodes of a prefix tree.

    ``edges`` maps ``state -> invocation -> [(next_state, response), ...]``.
    """

    def __init__(self, initial, edges: dict, name: str = "trie"):
        self.edges = edges
        self.name = name
        alphabet = {inv for by_inv in edges.values() for inv in by_inv}
        super().__init__(initial, alphabet)

    def _step(self, state, inv):
        return list(self.edges.get(state, {}).get(inv, ()))

    def states(self) -> set:
        out = {self.initial}
        for src, by_inv in self.edges.items():
            out.add(src)
            for branches in by_inv.values():
                out.update(nxt for nxt, _ in branches)
        return out


def theorem1_object(t: Task, pids=None, cap: int | None = None) -> TrieObject:
    """One state per valid history of ``t``; invocations become sets, responses gets."""
    from .histories import INV, enumerate_VE_task

    edges: dict = defaultdict(lambda: defaultdict(list))
    for h in enumerate_VE_task(t, pids, cap=cap):
        if not h:
            continue
        parent, e = h[:-1], h[-1]
        if e.kind == INV:
            edges[parent][Invocation(SET, e.pid, e.value)].append((h, Response(SET, e.pid)))
        else:
            edges[parent][Invocation(GET, e.pid)].append((h, Response(GET, e.pid, e.value)))
    return TrieObject((), {s: dict(v) for s, v in edges.items()}, name="thm1")


class AdhocSplitterObject(SeqObject):
    """Splitter with state ``(Participants, Stop, Down, Right)``.

    ``set`` takes the pid as input so that its alphabet lines up with the
    splitter task's input vertices ``(id, id)``.
    """

    name = "adhoc-splitter"

    def __init__(self, pids, allow_second_stop: bool = False):
        pids = tuple(pids)
        e = frozenset()
        self.allow_second_stop = allow_second_stop
        alphabet = [Invocation(SET, p, p) for p in pids] + [Invocation(GET, p) for p in pids]
        super().__init__((e, e, e, e), alphabet)

    def _step(self, state, inv):
        part, stop, down, right = state
        if inv.kind == SET:
            if inv.pid in part or inv.input != inv.pid:
                return []
            return [((part | {inv.pid}, stop, down, right), Response(SET, inv.pid))]
        if inv.kind != GET:
            return []
        me = inv.pid
        if me not in part or me in stop or me in down or me in right:
            return []
        out = []
        if not stop or self.allow_second_stop:
            out.append(((part, stop | {me}, down, right), Response(GET, me, STOP)))
        if len(down) < len(part) - 1:
            out.append(((part, stop, down | {me}, right), Response(GET, me, DOWN)))
        if len(right) < len(part) - 1:
            out.append(((part, stop, down, right | {me}), Response(GET, me, RIGHT)))
        return out


def adhoc_splitter_object(pids) -> AdhocSplitterObject:
    return AdhocSplitterObject(pids)


class AdhocExchangerObject(SeqObject):
    """Exchanger with state ``(Participants, Matching)``.

    Matching holds 2-sets ``{id, partner}``, with ``{id, None}`` for an
    unmatched pid.  A pid already matched by its partner gets the partner
    back without a state change; a second ``get`` is excluded by the
    one-shot discipline rather than by the object.
    """

    name = "adhoc-exchanger"

    def __init__(self, pids):
        pids = tuple(pids)
        alphabet = [Invocation(SET, p, p) for p in pids] + [Invocation(GET, p) for p in pids]
        super().__init__((frozenset(), frozenset()), alphabet)

    def _step(self, state, inv):
        part, matching = state
        me = inv.pid
        if inv.kind == SET:
            if me in part or inv.input != me:
                return []
            return [((part | {me}, matching), Response(SET, me))]
        if inv.kind != GET or me not in part:
            return []
        matched = {p for pair in matching for p in pair if p is not BOTTOM}
        if me in matched:
            pair = next(pair for pair in matching if me in pair)
            partner = next(iter(pair - {me}), BOTTOM) if len(pair) == 2 else BOTTOM
            return [(state, Response(GET, me, partner))]
        free = canonical_sorted(part - matched - {me})
        return [((part, matching | {frozenset((me, other))}), Response(GET, me, other))
                for other in [BOTTOM] + free]


def adhoc_exchanger_object(pids) -> AdhocExchangerObject:
    return AdhocExchangerObject(pids)


class TestAndSetObject(SeqObject):
    """Test&Set register: the first caller reads 0 (the winner), later callers 1.

    Single-operation; one call per pid comes from the one-shot discipline.
    The invocation input is the pid, matching the task's input vertices.
    """

    name = "test-and-set"
    __test__ = False

    def __init__(self, pids):
        super().__init__(0, [Invocation(OP, p, p) for p in pids])

    def _step(self, state, inv):
        if inv.kind != OP or inv.input != inv.pid:
            return []
        return [(1, Response(OP, inv.pid, state))]


class TableObject(SeqObject):
    """An object given as an explicit transition table (e.g. loaded from JSON)."""

    def __init__(self, initial, table: dict, alphabet, name: str = "table"):
        self.table = table
        self.name = name
        super().__init__(initial, alphabet)

    def _step(self, state, inv):
        return list(self.table.get((state, inv), ()))

    def __eq__(self, other):
        return (isinstance(other, TableObject) and self.initial == other.initial
                and self.alphabet == other.alphabet and _norm(self.table) == _norm(other.table))

    __hash__ = None


def _norm(table):
    return {k: frozenset(v) for k, v in table.items() if v}


def tabulate(o: SeqObject, cap: int | None = None) -> TableObject:
    """Explore every state reachable from ``o.initial`` over its alphabet."""
    cap = state_cap(cap)
    table = {}
    seen = {o.initial}
    stack = [o.initial]
    while stack:
        s = stack.pop()
        for inv in o.alphabet:
            branches = o.transitions(s, inv)
            if branches:
                table[(s, inv)] = branches
            for nxt, _ in branches:
                if nxt not in seen:
                    seen.add(nxt)
                    if len(seen) > cap:
                        raise ExplosionError(len(seen), cap)
                    stack.append(nxt)
    return TableObject(o.initial, table, o.alphabet, name=o.name)


# -- enumeration and comparison ---------------------------------------------


def _next_kinds(is_setget: bool, done: tuple) -> tuple:
    if is_setget:
        if not done:
            return (SET,)
        if done == (SET,):
            return (GET,)
        return ()
    return () if done else (OP,)


def sspec_enumerate(o: SeqObject, pids=None, wellformed_only: bool = True,
                    cap: int | None = None) -> set:
    """All sequential executions from ``o.initial`` (prefix-closed, includes ``()``).

    With ``wellformed_only`` each pid follows the one-shot discipline;
    otherwise any enabled alphabet invocation may come next and the cap is
    the only bound.
    """
    cap = state_cap(cap)
    pids = o.pids() if pids is None else canonical_sorted(pids)
    alphabet = [i for i in o.alphabet if i.pid in set(pids)]
    setget = o.is_setget
    out = set()
    stack = [((), o.initial, {})]
    while stack:
        execution, state, done = stack.pop()
        out.add(execution)
        if len(out) > cap:
            raise ExplosionError(len(out), cap, "executions")
        for inv in alphabet:
            if wellformed_only and inv.kind not in _next_kinds(setget, done.get(inv.pid, ())):
                continue
            for nxt, resp in o.transitions(state, inv):
                d = done
                if wellformed_only:
                    d = dict(done)
                    d[inv.pid] = done.get(inv.pid, ()) + (inv.kind,)
                stack.append((execution + ((inv, resp),), nxt, d))
    return out


@dataclass
class CheckResult:
    """Verdict of a check plus a counterexample when it fails."""

    ok: bool
    counterexample: Any = None
    detail: str = ""

    def __bool__(self) -> bool:
        return self.ok


def objects_equivalent(a: SeqObject, b: SeqObject, pids=None, cap: int | None = None) -> CheckResult:
    if pids is None:
        pids = sorted(set(a.pids()) | set(b.pids()), key=sort_key)
    sa = sspec_enumerate(a, pids, cap=cap)
    sb = sspec_enumerate(b, pids, cap=cap)
    diff = sa ^ sb
    if not diff:
        return CheckResult(True, detail=f"{len(sa)} executions")
    cex = shortest_first(diff)[0]
    side = a.name if cex in sa else b.name
    return CheckResult(False, cex, f"only in {side}")


def execution_simplexes(execution: SeqExecution) -> tuple[frozenset, frozenset]:
    """Input simplex from completed sets, output simplex from completed gets."""
    sigma = frozenset(Vertex(i.pid, i.input) for i, _ in execution if i.kind == SET)
    tau = frozenset(Vertex(r.pid, r.output) for _, r in execution if r.kind == GET)
    return sigma, tau


def correct_wrt_task(o: SeqObject, t: Task, pids=None, cap: int | None = None) -> CheckResult:
    bad = []
    for ex in sspec_enumerate(o, t.pids if pids is None else pids, cap=cap):
        sigma, tau = execution_simplexes(ex)
        if sigma and sigma not in t.inputs:
            bad.append(ex)
        elif tau not in t.carrier(sigma):
            bad.append(ex)
    if bad:
        return CheckResult(False, shortest_first(bad)[0])
    return CheckResult(True)


def history_to_execution(history) -> SeqExecution:
    """Replace each task invocation with a complete set, each response with a complete get."""
    from .histories import INV

    return tuple(
        (Invocation(SET, e.pid, e.value), Response(SET, e.pid)) if e.kind == INV
        else (Invocation(GET, e.pid), Response(GET, e.pid, e.value))
        for e in history
    )


def execution_to_history(execution: SeqExecution):
    """Inverse of :func:`history_to_execution`; ``None`` if not a set/get execution."""
    from .histories import Event, INV, RESP

    out = []
    for inv, resp in execution:
        if inv.kind == SET:
            out.append(Event(INV, inv.pid, inv.input))
        elif inv.kind == GET:
            out.append(Event(RESP, inv.pid, resp.output))
        else:
            return None
    return tuple(out)


def complete_wrt_task(o: SeqObject, t: Task, pids=None, cap: int | None = None) -> CheckResult:
    from .histories import enumerate_VE_task

    bad = [h for h in enumerate_VE_task(t, pids, cap=cap)
           if o.replay(history_to_execution(h)) is None]
    if bad:
        return CheckResult(False, shortest_first(bad)[0])
    return CheckResult(True)


def reachable_states(o: SeqObject, pids=None, cap: int | None = None) -> set:
    """States reached by well-formed executions."""
    states = set()
    for ex in sspec_enumerate(o, pids, cap=cap):
        states.add(o.replay(ex))
    return states
