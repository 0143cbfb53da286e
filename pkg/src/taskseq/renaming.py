"""Moir & Anderson splitter-grid renaming and an exhaustive interleaving checker.

Two variants share the grid and the checker:

* ``setget``: every grid splitter is a sequential set/get splitter object and
  a process takes one atomic step per ``set`` and per ``get``;
* ``registers``: every grid splitter is an independent copy of the
  read/write splitter (``LAST``/``CLOSED`` registers), one atomic step per
  register access.

Crashes are scheduler choices that stop a process for good.  The search is
a plain DFS with state deduplication; properties are evaluated on every
reachable state so the outcome does not depend on exploration order.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations
from typing import Any, Hashable, NamedTuple

from ._serial import state_cap
from .complexes import Vertex
from .errors import ExplosionError, InvalidParameter
from .histories import history_to_json, inv, resp
from .objects import GET, SET, AdhocSplitterObject, Invocation, SeqObject
from .tasks import DOWN, RIGHT, STOP, splitter_task, triangular


class GridPos(NamedTuple):
    r: int  # rights taken
    d: int  # downs taken


def build_grid(n: int, labeling: str = "adaptive") -> dict[GridPos, int]:
    """Names of the ``n(n+1)/2`` half-grid splitters.

    ``adaptive`` numbers diagonals ``r + d = 0, 1, ...`` in turn, so the
    first ``p`` diagonals use names ``1..p(p+1)/2``.  ``original`` numbers
    row by row.
    """
    if n < 1:
        raise InvalidParameter("n must be >= 1")
    if labeling == "adaptive":
        return {GridPos(r, m - r): triangular(m) + (m - r) + 1
                for m in range(n) for r in range(m + 1)}
    if labeling == "original":
        names, next_name = {}, 1
        for d in range(n):
            for r in range(n - d):
                names[GridPos(r, d)] = next_name
                next_name += 1
        return names
    raise InvalidParameter(f"unknown labeling {labeling!r}")


# -- states -------------------------------------------------------------------

TO_SET, TO_GET, DECIDED, CRASHED, OVERFLOW = "to_set", "to_get", "decided", "crashed", "overflow"
L01, L02, L04, L05 = "L01", "L02", "L04", "L05"
IDLE_PHASES = {DECIDED, CRASHED, OVERFLOW}


class ProcessCtl(NamedTuple):
    pid: Hashable
    pos: GridPos
    phase: str
    name: int | None = None


class Action(NamedTuple):
    kind: str  # set, get, write_last, read_closed, write_closed, read_last, crash
    pos: GridPos | None = None


class Step(NamedTuple):
    pid: Hashable
    action: str
    pos: GridPos | None
    result: Any = None


class MCState(NamedTuple):
    """Global state.  ``objects`` and ``audit`` are indexed like ``Model.positions``.

    ``audit`` holds, per splitter, the pids that reached it and the
    directions they obtained, which is what the splitting check reads.
    """

    objects: tuple
    procs: tuple
    audit: tuple


_ACTION_OF_PC = {L01: "write_last", L02: "read_closed", L04: "write_closed", L05: "read_last"}


@dataclass
class RenamingModel:
    n: int
    variant: str = "setget"
    crashes: bool = False
    participants: tuple | None = None
    labeling: str = "adaptive"
    splitter: SeqObject | None = None
    mutation: str | None = None

    def __post_init__(self):
        if self.variant not in ("setget", "registers"):
            raise InvalidParameter(f"unknown variant {self.variant!r}")
        self.pids = tuple(range(1, self.n + 1))
        if self.participants is None:
            self.participants = self.pids
        self.grid = build_grid(self.n, self.labeling)
        self.positions = sorted(self.grid, key=lambda g: (g.r + g.d, g.d))
        self.index = {g: i for i, g in enumerate(self.positions)}
        if self.variant == "setget" and self.splitter is None:
            self.splitter = AdhocSplitterObject(self.pids)
        self.spl_task = splitter_task(self.pids)

    def bound(self, participants: int) -> int:
        """Largest name allowed once ``participants`` processes have started."""
        return triangular(participants if self.labeling == "adaptive" else self.n)

    # ---- transition system

    def initial(self) -> MCState:
        blank = self.splitter.initial if self.variant == "setget" else (None, False)
        first = TO_SET if self.variant == "setget" else L01
        return MCState(
            tuple(blank for _ in self.positions),
            tuple(ProcessCtl(p, GridPos(0, 0), first) for p in self.pids),
            tuple((frozenset(), frozenset()) for _ in self.positions),
        )

    def enabled_steps(self, s: MCState) -> list[tuple[Hashable, Action]]:
        out = []
        for c in s.procs:
            if c.phase in IDLE_PHASES or c.pid not in self.participants:
                continue
            if self.variant == "setget":
                out.append((c.pid, Action(SET if c.phase == TO_SET else GET, c.pos)))
            else:
                out.append((c.pid, Action(_ACTION_OF_PC[c.phase], c.pos)))
        if self.crashes:
            out += [(pid, Action("crash")) for pid, _ in list(out)]
        return out

    def apply_step(self, s: MCState, pid, action: Action) -> list[MCState]:
        return [nxt for _, nxt in self._apply(s, pid, action)]

    def successors(self, s: MCState) -> list[tuple[Step, MCState]]:
        out = []
        for pid, action in self.enabled_steps(s):
            for result, nxt in self._apply(s, pid, action):
                out.append((Step(pid, action.kind, action.pos, result), nxt))
        return out

    def _apply(self, s: MCState, pid, action: Action) -> list[tuple[Any, MCState]]:
        i = self.pids.index(pid)
        c = s.procs[i]
        if action.kind == "crash":
            return [(None, s._replace(procs=_put(s.procs, i, c._replace(phase=CRASHED))))]
        k = self.index[c.pos]
        if self.variant == "setget":
            return self._apply_object(s, i, c, k, action)
        return self._apply_registers(s, i, c, k)

    def _arrive(self, audit, k, pid):
        arrived, results = audit[k]
        return _put(audit, k, (arrived | {pid}, results))

    def _leave(self, s: MCState, i, c: ProcessCtl, k, direction, objects, audit):
        arrived, results = audit[k]
        audit = _put(audit, k, (arrived, results | {Vertex(c.pid, direction)}))
        if direction == STOP:
            c = c._replace(phase=DECIDED, name=self.grid[c.pos])
        else:
            pos = GridPos(c.pos.r + (direction == RIGHT), c.pos.d + (direction == DOWN))
            if pos in self.grid:
                c = c._replace(pos=pos, phase=TO_SET if self.variant == "setget" else L01)
            else:
                c = c._replace(pos=pos, phase=OVERFLOW)
        return MCState(objects, _put(s.procs, i, c), audit)

    def _apply_object(self, s, i, c, k, action):
        obj_state = s.objects[k]
        if action.kind == SET:
            out = []
            for nxt, _ in self.splitter.transitions(obj_state, Invocation(SET, c.pid, c.pid)):
                out.append((None, MCState(_put(s.objects, k, nxt),
                                          _put(s.procs, i, c._replace(phase=TO_GET)),
                                          self._arrive(s.audit, k, c.pid))))
            return out
        out = []
        for nxt, r in self.splitter.transitions(obj_state, Invocation(GET, c.pid)):
            out.append((r.output, self._leave(s, i, c, k, r.output, _put(s.objects, k, nxt), s.audit)))
        return out

    def _apply_registers(self, s, i, c, k):
        last, closed = s.objects[k]
        me = c.pid
        if c.phase == L01:
            return [(None, MCState(_put(s.objects, k, (me, closed)),
                                   _put(s.procs, i, c._replace(phase=L02)),
                                   self._arrive(s.audit, k, me)))]
        if c.phase == L02:
            if closed:
                return [(RIGHT, self._leave(s, i, c, k, RIGHT, s.objects, s.audit))]
            return [(None, s._replace(procs=_put(s.procs, i, c._replace(phase=L04))))]
        if c.phase == L04:
            objects = s.objects
            if self.mutation != "skip_closed_write":
                objects = _put(objects, k, (last, True))
            if self.mutation == "skip_last_recheck":
                return [(STOP, self._leave(s, i, c, k, STOP, objects, s.audit))]
            return [(None, MCState(objects, _put(s.procs, i, c._replace(phase=L05)), s.audit))]
        if c.phase == L05:
            direction = STOP if last == me else DOWN
            return [(direction, self._leave(s, i, c, k, direction, s.objects, s.audit))]
        raise AssertionError(c.phase)

    # ---- properties

    properties = ("validity", "uniqueness", "termination", "depth", "splitting")

    def violations(self, s: MCState, succs) -> list[str]:
        bad = []
        started = len(s.audit[0][0])
        decided = [c for c in s.procs if c.phase == DECIDED]
        names = [c.name for c in decided]
        if any(c.phase == OVERFLOW for c in s.procs) or any(
                not 1 <= x <= self.bound(started) for x in names):
            bad.append("validity")
        if len(set(names)) != len(names):
            bad.append("uniqueness")
        if not any(step.action != "crash" for step, _ in succs):
            live = [c for c in s.procs
                    if c.pid in self.participants and c.phase not in (DECIDED, CRASHED)]
            if live:
                bad.append("termination")
        if any(c.pos.r + c.pos.d > started - 1 for c in decided):
            bad.append("depth")
        if self.splitting_violation(s) is not None:
            bad.append("splitting")
        return bad

    def splitting_violation(self, s: MCState):
        for g, (arrived, results) in zip(self.positions, s.audit):
            if not arrived:
                continue
            sigma = frozenset(Vertex(p, p) for p in arrived)
            if results not in self.spl_task.carrier(sigma):
                return g
        return None

    # ---- counterexample rendering

    def induced_history(self, trace) -> tuple:
        """Renaming-level history: invocation at a pid's first step, response at its decision."""
        out, started = [], set()
        for st in trace:
            if st.action == "crash":
                continue
            if st.pid not in started:
                started.add(st.pid)
                out.append(inv(st.pid, st.pid))
            if st.result == STOP:
                out.append(resp(st.pid, self.grid[st.pos]))
        return tuple(out)

    def splitter_history(self, trace, pos) -> tuple:
        out, started = [], set()
        for st in trace:
            if st.pos != pos or st.action == "crash":
                continue
            if st.pid not in started:
                started.add(st.pid)
                out.append(inv(st.pid, st.pid))
            if st.result is not None:
                out.append(resp(st.pid, st.result))
        return tuple(out)


def _put(t: tuple, i: int, v) -> tuple:
    return t[:i] + (v,) + t[i + 1:]


# -- single read/write splitter ----------------------------------------------


@dataclass
class RWSplitterModel:
    """``n`` processes on one read/write splitter; the result is the returned direction."""

    n: int
    mutation: str | None = None

    def __post_init__(self):
        self.pids = tuple(range(1, self.n + 1))
        self.task = splitter_task(self.pids)

    properties = ("splitting", "termination")

    def initial(self):
        # (LAST, CLOSED, pcs, results)
        return (None, False, tuple(L01 for _ in self.pids), tuple(None for _ in self.pids))

    def successors(self, s):
        last, closed, pcs, results = s
        out = []
        for i, pid in enumerate(self.pids):
            pc = pcs[i]
            if pc == DECIDED:
                continue
            action = _ACTION_OF_PC[pc]

            def done(direction, l=last, c=closed):
                return (direction, (l, c, _put(pcs, i, DECIDED), _put(results, i, direction)))

            if pc == L01:
                nxt = [(None, (pid, closed, _put(pcs, i, L02), results))]
            elif pc == L02:
                nxt = [done(RIGHT)] if closed else [(None, (last, closed, _put(pcs, i, L04), results))]
            elif pc == L04:
                c2 = closed if self.mutation == "skip_closed_write" else True
                if self.mutation == "skip_last_recheck":
                    nxt = [done(STOP, last, c2)]
                else:
                    nxt = [(None, (last, c2, _put(pcs, i, L05), results))]
            else:
                nxt = [done(STOP if last == pid else DOWN)]
            out += [(Step(pid, action, None, r), t) for r, t in nxt]
        return out

    def violations(self, s, succs):
        _, _, pcs, results = s
        sigma = frozenset(Vertex(p, p) for p, pc in zip(self.pids, pcs) if pc != L01)
        tau = frozenset(Vertex(p, r) for p, r in zip(self.pids, results) if r is not None)
        bad = []
        if tau not in self.task.carrier(sigma):
            bad.append("splitting")
        if not succs and any(pc != DECIDED for pc in pcs):
            bad.append("termination")
        return bad

    def induced_history(self, trace):
        out, started = [], set()
        for st in trace:
            if st.pid not in started:
                started.add(st.pid)
                out.append(inv(st.pid, st.pid))
            if st.result is not None:
                out.append(resp(st.pid, st.result))
        return tuple(out)


# -- exploration --------------------------------------------------------------


@dataclass
class _Shard:
    visited: set
    terminal: set
    height: int
    found: dict  # property -> trace


def _dfs(model, root, prefix: tuple, cap: int, visited: set | None = None) -> _Shard:
    """Iterative DFS from ``root``; records the first trace violating each property."""
    visited = set() if visited is None else visited
    terminal = set()
    heights: dict = {}
    found: dict = {}

    def visit(state, trace):
        succs = model.successors(state)
        for prop in model.violations(state, succs):
            if prop not in found:
                found[prop] = trace
        if not succs:
            terminal.add(state)
        return succs

    visited.add(root)
    stack = [(root, prefix, iter(visit(root, prefix)), 0)]
    while stack:
        state, trace, it, h = stack[-1]
        advanced = False
        for step, nxt in it:
            if nxt in visited:
                h = max(h, heights[nxt] + 1)
                continue
            visited.add(nxt)
            if len(visited) > cap:
                raise ExplosionError(len(visited), cap)
            stack[-1] = (state, trace, it, h)
            t2 = trace + (step,)
            stack.append((nxt, t2, iter(visit(nxt, t2)), 0))
            advanced = True
            break
        if advanced:
            continue
        stack.pop()
        heights[state] = h
        if stack:
            ps, pt, pit, ph = stack[-1]
            stack[-1] = (ps, pt, pit, max(ph, h + 1))
    return _Shard(visited, terminal, heights[root], found)


def _shard_job(args):
    model, root, prefix, cap = args
    return _dfs(model, root, prefix, cap)


def explore(model, workers: int = 1, cap: int | None = None) -> "RunReport":
    """Explore every reachable state of ``model``.

    With ``workers > 1`` the successors of the initial state are explored in
    separate processes with private visited sets and merged: state sets are
    unioned, and each property keeps the trace from the earliest shard that
    violates it, which is the trace a single DFS finds as well.
    """
    cap = state_cap(cap)
    init = model.initial()
    if workers <= 1:
        shard = _dfs(model, init, (), cap)
        visited, terminal, height, found = shard.visited, shard.terminal, shard.height, shard.found
    else:
        succs = model.successors(init)
        found = {p: () for p in model.violations(init, succs)}
        jobs = [(model, nxt, (step,), cap) for step, nxt in succs]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            shards = list(pool.map(_shard_job, jobs))
        visited, terminal = {init}, set() if succs else {init}
        height = 0
        for sh in shards:
            visited |= sh.visited
            terminal |= sh.terminal
            height = max(height, sh.height + 1)
            for prop, trace in sh.found.items():
                found.setdefault(prop, trace)
        if len(visited) > cap:
            raise ExplosionError(len(visited), cap)
    verdicts = {}
    for prop in model.properties:
        if prop not in found:
            verdicts[prop] = PropertyVerdict(True)
            continue
        trace = found[prop]
        cex = {
            "trace": [_step_json(st) for st in trace],
            "history": history_to_json(model.induced_history(trace)),
        }
        if prop == "splitting" and isinstance(model, RenamingModel):
            pos = _first_bad_splitter(model, trace)
            if pos is not None:
                cex["splitter"] = list(pos)
                cex["splitter_history"] = history_to_json(model.splitter_history(trace, pos))
        verdicts[prop] = PropertyVerdict(False, cex)
    return RunReport(
        participants=list(getattr(model, "participants", model.pids)),
        states=len(visited),
        terminal_states=len(terminal),
        max_depth=height,
        verdicts=verdicts,
    )


def _first_bad_splitter(model: RenamingModel, trace):
    s = model.initial()
    for st in trace:
        s = next(nxt for step, nxt in model.successors(s) if step == st)
    return model.splitting_violation(s)


def _step_json(st: Step) -> dict:
    return {"pid": st.pid, "action": st.action,
            "splitter": None if st.pos is None else list(st.pos), "result": st.result}


# -- reports ------------------------------------------------------------------


@dataclass
class PropertyVerdict:
    ok: bool
    counterexample: dict | None = None

    def to_dict(self):
        return {"ok": self.ok, "counterexample": self.counterexample}


@dataclass
class RunReport:
    participants: list
    states: int
    terminal_states: int
    max_depth: int
    verdicts: dict[str, PropertyVerdict]

    @property
    def ok(self) -> bool:
        return all(v.ok for v in self.verdicts.values())

    def to_dict(self):
        return {
            "participants": list(self.participants),
            "states": self.states,
            "terminal_states": self.terminal_states,
            "max_depth": self.max_depth,
            "ok": self.ok,
            "verdicts": {k: v.to_dict() for k, v in self.verdicts.items()},
        }

    @classmethod
    def from_dict(cls, d):
        return cls(d["participants"], d["states"], d["terminal_states"], d["max_depth"],
                   {k: PropertyVerdict(v["ok"], v["counterexample"]) for k, v in d["verdicts"].items()})


@dataclass
class MCReport:
    check: str
    n: int
    options: dict = field(default_factory=dict)
    runs: list[RunReport] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.runs)

    def verdicts(self) -> dict[str, bool]:
        out: dict[str, bool] = {}
        for r in self.runs:
            for k, v in r.verdicts.items():
                out[k] = out.get(k, True) and v.ok
        return out

    def first_counterexample(self):
        for r in self.runs:
            for k, v in r.verdicts.items():
                if not v.ok:
                    return k, r.participants, v.counterexample
        return None

    def to_dict(self):
        return {
            "check": self.check,
            "n": self.n,
            "options": dict(self.options),
            "ok": self.ok,
            "verdicts": self.verdicts(),
            "states": sum(r.states for r in self.runs),
            "runs": [r.to_dict() for r in self.runs],
        }

    @classmethod
    def from_dict(cls, d):
        return cls(d["check"], d["n"], d["options"], [RunReport.from_dict(r) for r in d["runs"]])

    def summary(self) -> str:
        lines = [f"{self.check} n={self.n} {self.options}: {'PASS' if self.ok else 'FAIL'}"]
        for prop, ok in self.verdicts().items():
            lines.append(f"  {prop:12s} {'ok' if ok else 'VIOLATED'}")
        lines.append(f"  states explored: {sum(r.states for r in self.runs)} in {len(self.runs)} run(s)")
        first = self.first_counterexample()
        if first:
            prop, parts, cex = first
            lines.append(f"  first violation: {prop} with participants {parts}")
            for st in cex["trace"]:
                lines.append(f"    p{st['pid']} {st['action']} @{st['splitter']} -> {st['result']}")
        return "\n".join(lines)


def participant_sets(n: int) -> list[tuple]:
    pids = range(1, n + 1)
    return [c for k in range(1, n + 1) for c in combinations(pids, k)]


DEFAULT_BOUND = {"setget": 4, "registers": 3}


def model_check_renaming(n: int, variant: str = "setget", crashes: bool = False,
                         subsets: bool = True, labeling: str = "adaptive",
                         splitter: SeqObject | None = None, workers: int = 1,
                         cap: int | None = None, max_n: int | None = None) -> MCReport:
    """Check Validity, Uniqueness, Termination, the depth bound and per-splitter splitting.

    With ``subsets`` every nonempty participant set is checked in its own
    run; otherwise only the run where all ``n`` pids participate.
    """
    limit = DEFAULT_BOUND[variant] if max_n is None else max_n
    if n > limit:
        raise InvalidParameter(f"n={n} is above the configured bound {limit} for {variant}")
    runs = []
    groups = participant_sets(n) if subsets else [tuple(range(1, n + 1))]
    for group in groups:
        model = RenamingModel(n, variant, crashes, group, labeling, splitter)
        runs.append(explore(model, workers, cap))
    return MCReport("renaming", n, {"variant": variant, "crashes": crashes, "subsets": subsets,
                                    "labeling": labeling}, runs)


def check_rw_splitter(n: int, mutation: str | None = None, workers: int = 1,
                      cap: int | None = None) -> MCReport:
    """Every interleaving of the register splitter must induce a splitter-task history."""
    if n > 4:
        raise InvalidParameter("check_rw_splitter supports n <= 4")
    model = RWSplitterModel(n, mutation)
    return MCReport("rw-splitter", n, {"mutation": mutation}, [explore(model, workers, cap)])


def two_stop_splitter(pids) -> AdhocSplitterObject:
    """Mutant set/get splitter that lets every caller stop."""
    return AdhocSplitterObject(pids, allow_second_stop=True)


def default_workers() -> int:
    return max(1, min(4, os.cpu_count() or 1))
