import pytest

from taskseq.complexes import Vertex, ids
from taskseq.errors import ExplosionError, NondeterminismError, PreconditionError
from taskseq.histories import inv, resp
from taskseq.objects import (
    GET,
    SET,
    AdhocExchangerObject,
    AdhocSplitterObject,
    Invocation,
    Response,
    SeqObject,
    TestAndSetObject,
    adhoc_exchanger_object,
    adhoc_splitter_object,
    complete_wrt_task,
    correct_wrt_task,
    execution_simplexes,
    execution_to_history,
    generic_setget_object,
    history_to_execution,
    objects_equivalent,
    reachable_states,
    sspec_enumerate,
    tabulate,
    theorem1_object,
)
from taskseq.tasks import BOTTOM, builtin_task, exchanger_task, splitter_task, test_and_set_task


def S(*pairs):
    return frozenset(Vertex(p, x) for p, x in pairs)


def outputs(o, state, pid):
    return [r.output for _, r in o.transitions(state, Invocation(GET, pid))]


class StopFirst(AdhocSplitterObject):
    """Mutant: whoever calls get first is told to stop."""

    def _step(self, state, inv):
        branches = super()._step(state, inv)
        _, stop, down, right = state
        if inv.kind == GET and not (stop or down or right):
            return [b for b in branches if b[1].output == "stop"]
        return branches


class AlwaysStop(AdhocSplitterObject):
    def __init__(self, pids):
        super().__init__(pids, allow_second_stop=True)

    def _step(self, state, inv):
        return [b for b in super()._step(state, inv)
                if inv.kind == SET or b[1].output == "stop"]


# -- generic set/get object -------------------------------------------------------


class TestGeneric:
    def test_solo_get_stops(self):
        o = generic_setget_object(splitter_task([1, 2, 3]))
        assert outputs(o, (S((1, 1)), frozenset()), 1) == ["stop"]

    def test_full_participation_get_has_three_branches(self):
        o = generic_setget_object(splitter_task([1, 2, 3]))
        full = S((1, 1), (2, 2), (3, 3))
        assert sorted(outputs(o, (full, frozenset()), 1)) == ["down", "right", "stop"]

    def test_second_set_is_disabled(self):
        o = generic_setget_object(splitter_task([1, 2]))
        (state, _), = o.apply(o.initial, Invocation(SET, 1, 1))
        with pytest.raises(PreconditionError):
            o.apply(state, Invocation(SET, 1, 1))

    def test_get_before_set_is_disabled(self):
        o = generic_setget_object(splitter_task([1, 2]))
        with pytest.raises(PreconditionError):
            o.apply(o.initial, Invocation(GET, 1))

    @pytest.mark.parametrize("name", ["splitter", "exchanger", "test-and-set", "renaming",
                                      "k-set-agreement", "consensus"])
    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_reachable_states_respect_carrier(self, name, n):
        t = builtin_task(name, n, k=2 if name == "k-set-agreement" else None)
        o = generic_setget_object(t)
        for sigma, tau in reachable_states(o):
            assert not sigma or sigma in t.inputs
            assert tau in t.carrier(sigma)
            assert ids(tau) <= ids(sigma)

    @pytest.mark.parametrize("name", ["splitter", "exchanger", "test-and-set", "renaming"])
    def test_correct_and_complete(self, name):
        t = builtin_task(name, 3)
        o = generic_setget_object(t)
        assert correct_wrt_task(o, t)
        assert complete_wrt_task(o, t)


# -- synthesized from valid histories ------------------------------------------


class TestHistoryIndexed:
    def test_first_set_moves_to_one_event_history(self):
        o = theorem1_object(splitter_task([1, 2]))
        (state, r), = o.apply(o.initial, Invocation(SET, 1, 1))
        assert state == (inv(1, 1),)
        assert r == Response(SET, 1)

    def test_get_first_is_disabled(self):
        o = theorem1_object(splitter_task([1, 2]))
        assert o.transitions(o.initial, Invocation(GET, 1)) == ()

    def test_is_deterministic(self):
        o = theorem1_object(exchanger_task([1, 2, 3]))
        tabulate(o)  # determinism is asserted while building branches

    @pytest.mark.parametrize("make", [splitter_task, exchanger_task, test_and_set_task])
    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_equivalent_to_generic(self, make, n):
        t = make(range(1, n + 1))
        assert objects_equivalent(theorem1_object(t), generic_setget_object(t))


# -- ad hoc objects --------------------------------------------------------------


class TestAdhocSplitter:
    def test_solo_get(self):
        o = adhoc_splitter_object([1])
        part = frozenset({1})
        e = frozenset()
        assert outputs(o, (part, e, e, e), 1) == ["stop"]

    def test_get_after_a_stop(self):
        o = adhoc_splitter_object([1, 2])
        e = frozenset()
        state = (frozenset({1, 2}), frozenset({1}), e, e)
        assert sorted(outputs(o, state, 2)) == ["down", "right"]

    def test_get_before_set(self):
        o = adhoc_splitter_object([1, 2])
        with pytest.raises(PreconditionError):
            o.apply(o.initial, Invocation(GET, 1))

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_matches_generic_and_task(self, n):
        t = splitter_task(range(1, n + 1))
        o = adhoc_splitter_object(t.pids)
        assert objects_equivalent(o, generic_setget_object(t))
        assert correct_wrt_task(o, t)
        assert complete_wrt_task(o, t)

    def test_differs_from_exchanger(self):
        r = objects_equivalent(adhoc_splitter_object([1, 2]), adhoc_exchanger_object([1, 2]))
        assert not r
        assert len(r.counterexample) <= 4


class TestAdhocExchanger:
    def test_first_get_branches(self):
        o = adhoc_exchanger_object([1, 2])
        state = (frozenset({1, 2}), frozenset())
        assert outputs(o, state, 1) == [BOTTOM, 2]

    def test_matched_partner_answers_deterministically(self):
        o = adhoc_exchanger_object([1, 2])
        state = (frozenset({1, 2}), frozenset({frozenset({1, 2})}))
        assert o.transitions(state, Invocation(GET, 2)) == ((state, Response(GET, 2, 1)),)

    def test_solo_unmatched(self):
        o = adhoc_exchanger_object([1, 2])
        assert outputs(o, (frozenset({1}), frozenset()), 1) == [BOTTOM]

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_matches_generic_and_task(self, n):
        t = exchanger_task(range(1, n + 1))
        o = AdhocExchangerObject(t.pids)
        assert objects_equivalent(o, generic_setget_object(t))
        assert correct_wrt_task(o, t)
        assert complete_wrt_task(o, t)


# -- enumeration ---------------------------------------------------------------


def test_sspec_contains_empty_execution():
    assert () in sspec_enumerate(adhoc_splitter_object([1, 2]))


def test_sspec_solo_splitter():
    nonempty = sspec_enumerate(adhoc_splitter_object([1])) - {()}
    assert nonempty == {
        ((Invocation(SET, 1, 1), Response(SET, 1)),),
        ((Invocation(SET, 1, 1), Response(SET, 1)), (Invocation(GET, 1), Response(GET, 1, "stop"))),
    }


def test_sspec_exchanger_swap():
    ex = (
        (Invocation(SET, 1, 1), Response(SET, 1)),
        (Invocation(SET, 2, 2), Response(SET, 2)),
        (Invocation(GET, 1), Response(GET, 1, 2)),
        (Invocation(GET, 2), Response(GET, 2, 1)),
    )
    assert ex in sspec_enumerate(adhoc_exchanger_object([1, 2]))


def test_sspec_is_prefix_closed():
    sspec = sspec_enumerate(generic_setget_object(splitter_task([1, 2, 3])))
    assert all(ex[:i] in sspec for ex in sspec for i in range(len(ex)))


def test_sspec_cap():
    with pytest.raises(ExplosionError):
        sspec_enumerate(generic_setget_object(splitter_task([1, 2, 3])), cap=50)


def test_equivalence_is_reflexive():
    o = adhoc_splitter_object([1, 2])
    assert objects_equivalent(o, o)


def test_always_stop_is_incorrect():
    t = splitter_task([1, 2])
    r = correct_wrt_task(AlwaysStop(t.pids), t)
    assert not r
    _, tau = execution_simplexes(r.counterexample)
    assert sorted(v.value for v in tau) == ["stop", "stop"]


def test_stop_first_is_incomplete():
    t = splitter_task([1, 2])
    o = StopFirst(t.pids)
    assert correct_wrt_task(o, t)
    r = complete_wrt_task(o, t)
    assert not r
    first = next(e for e in r.counterexample if e.kind == "resp")
    assert first.value != "stop"
    assert generic_setget_object(t).replay(history_to_execution(r.counterexample)) is not None


def test_solo_splitter_complete():
    t = splitter_task([1])
    assert complete_wrt_task(adhoc_splitter_object([1]), t)


def test_history_execution_round_trip():
    h = (inv(1, 1), inv(2, 2), resp(2, "stop"))
    assert execution_to_history(history_to_execution(h)) == h


def test_test_and_set_object():
    o = TestAndSetObject([1, 2])
    (state, r), = o.apply(o.initial, Invocation("op", 2, 2))
    assert r.output == 0
    assert o.apply(state, Invocation("op", 1, 1))[0][1].output == 1


def test_response_determinism_enforced():
    class Broken(SeqObject):
        def _step(self, state, inv):
            return [(1, Response(GET, inv.pid, "x")), (2, Response(GET, inv.pid, "x"))]

    o = Broken(0, [Invocation(GET, 1)])
    with pytest.raises(NondeterminismError):
        o.transitions(0, Invocation(GET, 1))
