from itertools import permutations

import pytest

from taskseq.histories import enumerate_VE_task, inv, resp
from taskseq.linearizability import (
    check_bijection,
    enumerate_VE_obj,
    execution_as_history,
    linearizable,
    sequentializable_single_op,
    single_op_candidate,
    ve_obj_as_task_histories,
)
from taskseq.objects import (
    OP,
    AdhocSplitterObject,
    Invocation,
    Response,
    SeqObject,
    TestAndSetObject,
    adhoc_splitter_object,
    generic_setget_object,
    objects_equivalent,
    sspec_enumerate,
)
from taskseq.tasks import (
    adaptive_renaming_task,
    exchanger_task,
    k_set_agreement_task,
    splitter_task,
    test_and_set_task,
)


class Counter(SeqObject):
    """Fetch-and-increment: returns the count before the call."""

    def __init__(self, pids, limit=4):
        super().__init__(0, [Invocation(OP, p) for p in pids])
        self.limit = limit

    def _step(self, state, inv):
        if state >= self.limit:
            return []
        return [(state + 1, Response(OP, inv.pid, state))]


def brute_linearizable(history, o):
    """Try every order of every subset of operations that contains the completed ones."""
    ops, pending = [], {}
    for i, e in enumerate(history):
        if e.kind == "inv":
            pending[e.pid] = len(ops)
            ops.append([e.pid, e.op, e.value, None, i, None])
        else:
            k = pending.pop(e.pid)
            ops[k][3], ops[k][5] = e.value, i
    done = [k for k, op in enumerate(ops) if op[5] is not None]
    optional = [k for k, op in enumerate(ops) if op[5] is None]
    for mask in range(2 ** len(optional)):
        chosen = done + [k for j, k in enumerate(optional) if mask >> j & 1]
        for order in permutations(chosen):
            if any(ops[b][5] is not None and ops[b][5] < ops[a][4]
                   for x, a in enumerate(order) for b in order[x + 1:]):
                continue
            states = {o.initial}
            for k in order:
                pid, kind, value, out, _, end = ops[k]
                invk = Invocation(kind, pid, None if kind == "get" else value)
                states = {n for s in states for n, r in o.transitions(s, invk)
                          if end is None or r.output == out}
            if states:
                return True
    return False


def test_swapped_sequential_counter_is_rejected():
    o = Counter([1, 2])
    h = (inv(1), resp(1, 1), inv(2), resp(2, 0))
    ok, witness = linearizable(h, o)
    assert not ok and witness is None
    assert not brute_linearizable(h, o)


def test_overlapping_counter_is_accepted():
    o = Counter([1, 2])
    h = (inv(1), inv(2), resp(1, 1), resp(2, 0))
    ok, witness = linearizable(h, o)
    assert ok
    assert [r.output for _, r in witness.execution] == [0, 1]
    assert [witness.execution[i][0].pid for i in range(2)] == [2, 1]


def test_pending_may_be_linearized():
    o = Counter([1, 2])
    assert linearizable((inv(1), inv(2), resp(2, 1)), o)[0]
    assert not linearizable((inv(1), resp(1, 1)), o)[0]


@pytest.mark.parametrize("o", [adhoc_splitter_object([1, 2]), generic_setget_object(exchanger_task([1, 2]))])
def test_sequential_executions_are_linearizable(o):
    for ex in sspec_enumerate(o):
        ok, witness = linearizable(execution_as_history(ex), o)
        assert ok
        assert witness.execution == ex


def test_linearizable_agrees_with_brute_force_on_counter():
    o = Counter([1, 2, 3])
    for h in enumerate_VE_obj(o, cap=10_000):
        assert brute_linearizable(h, o)
    # histories outside VE_obj are rejected by both
    bad = (inv(1), resp(1, 0), inv(2), inv(3), resp(3, 2), resp(2, 2))
    assert not linearizable(bad, o)[0] and not brute_linearizable(bad, o)


def test_ve_obj_equals_brute_force_filter():
    o = TestAndSetObject([1, 2, 3])
    ve = enumerate_VE_obj(o)
    cand = enumerate_VE_task(test_and_set_task([1, 2, 3]))
    assert () in ve
    for h in cand:
        assert (h in ve) == brute_linearizable(h, o)


def test_completing_pending_preserves_linearizability():
    o = TestAndSetObject([1, 2, 3])
    ve = enumerate_VE_obj(o)
    for h in ve:
        if linearizable(h, o)[0]:
            pending = {e.pid for e in h if e.kind == "inv"} - {e.pid for e in h if e.kind == "resp"}
            for p in pending:
                for y in (0, 1):
                    longer = h + (resp(p, y),)
                    assert linearizable(longer, o)[0] == (longer in ve)


def test_adhoc_splitter_histories_project_to_task_histories():
    for n in (1, 2):
        t = splitter_task(range(1, n + 1))
        assert ve_obj_as_task_histories(adhoc_splitter_object(t.pids)) == enumerate_VE_task(t)


def test_bijection_holds_for_generic_splitter():
    assert check_bijection(splitter_task([1, 2]), generic_setget_object(splitter_task([1, 2])))


def test_bijection_fails_without_solo_stop():
    class NoStop(AdhocSplitterObject):
        def _step(self, state, inv):
            return [b for b in super()._step(state, inv) if b[1].output != "stop"]

    r = check_bijection(splitter_task([1]), NoStop([1]))
    assert not r
    assert r.counterexample == (inv(1, 1), resp(1, "stop"))


class TestSequentializable:
    def test_splitter_three_gives_concurrent_down_down_right(self):
        r = sequentializable_single_op(splitter_task([1, 2, 3]))
        assert not r
        h = r.counterexample
        assert [e.kind for e in h] == ["inv"] * 3 + ["resp"] * 3
        assert sorted(e.value for e in h[3:]) == ["down", "down", "right"]
        assert r.in_task_only

    def test_splitter_two(self):
        r = sequentializable_single_op(splitter_task([1, 2]))
        assert not r and r.in_task_only

    def test_exchanger_two(self):
        r = sequentializable_single_op(exchanger_task([1, 2]))
        assert not r
        assert sorted(e.value for e in r.counterexample if e.kind == "resp") == [1, 2]

    def test_renaming_two(self):
        assert not sequentializable_single_op(adaptive_renaming_task([1, 2]))

    def test_test_and_set_two(self):
        r = sequentializable_single_op(test_and_set_task([1, 2]))
        assert r
        assert objects_equivalent(r.candidate, TestAndSetObject([1, 2]))

    @pytest.mark.parametrize("n", [2, 3])
    def test_consensus(self, n):
        assert sequentializable_single_op(k_set_agreement_task(range(1, n + 1), 1, (0, 1)))

    def test_two_set_agreement_three(self):
        assert not sequentializable_single_op(k_set_agreement_task([1, 2, 3], 2))

    def test_test_and_set_three_is_not_sequentializable(self):
        """A loser may finish before the eventual winner even starts.

        The task only constrains outputs of participating sets, so this
        history is valid, yet no linearization lets p1 lose to nobody.
        """
        t = test_and_set_task([1, 2, 3])
        h = (inv(1, 1), inv(2, 2), resp(1, 1), inv(3, 3), resp(2, 1), resp(3, 0))
        assert h in enumerate_VE_task(t)
        assert not linearizable(h, TestAndSetObject([1, 2, 3]))[0]
        assert not brute_linearizable(h, TestAndSetObject([1, 2, 3]))
        r = sequentializable_single_op(t)
        assert not r
        assert r.counterexample == h
        assert objects_equivalent(r.candidate, TestAndSetObject([1, 2, 3]))

    def test_candidate_sspec_is_sequential_part_of_ve(self):
        t = splitter_task([1, 2])
        ve = enumerate_VE_task(t)
        cand = single_op_candidate(t, ve=ve)
        seq = {execution_as_history(ex) for ex in sspec_enumerate(cand)}
        assert seq == {h for h in ve if all(h[i].kind == "inv" and h[i + 1].kind == "resp"
                                            for i in range(0, len(h) - 1, 2)) and len(h) % 2 == 0}
