import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from taskseq.complexes import Vertex
from taskseq.errors import ExplosionError, UnknownInputVertex, WellFormednessError
from taskseq.histories import (
    check_wellformed,
    enumerate_VE_task,
    extract_simplexes,
    history_from_json,
    history_to_json,
    inv,
    is_sequential,
    resp,
    satisfies_task,
)
from taskseq.tasks import builtin_task, splitter_task, test_and_set_task

E = (inv(1, 1), inv(2, 2), inv(3, 3), resp(1, "down"), resp(2, "down"), resp(3, "right"))
SPL3 = splitter_task([1, 2, 3])
VE_SPL3 = enumerate_VE_task(SPL3)


def S(*pairs):
    return frozenset(Vertex(p, x) for p, x in pairs)


def test_extract_empty():
    assert extract_simplexes(()) == (frozenset(), frozenset())


def test_extract_concurrent_history():
    sigma, tau = extract_simplexes(E)
    assert sigma == S((1, 1), (2, 2), (3, 3))
    assert tau == S((1, "down"), (2, "down"), (3, "right"))


def test_extract_pending():
    assert extract_simplexes((inv(1, 1), inv(2, 2), resp(1, "stop"))) == (
        S((1, 1), (2, 2)), S((1, "stop")))


@pytest.mark.parametrize("bad, index", [
    ((resp(1, "stop"),), 0),
    ((inv(1, 1), inv(1, 1)), 1),
    ((inv(1, 1), resp(1, "stop"), inv(1, 1)), 2),
    ((inv(1, 1), resp(2, "stop")), 1),
])
def test_wellformedness_errors(bad, index):
    with pytest.raises(WellFormednessError) as exc:
        extract_simplexes(bad)
    assert exc.value.index == index


def test_multi_shot_allowed_when_requested():
    check_wellformed((inv(1, 1), resp(1, 0), inv(1, 1)), one_shot=False)


def test_concurrent_history_satisfies_splitter():
    assert satisfies_task(E, SPL3)


def test_early_down_fails_at_second_event():
    r = satisfies_task((inv(1, 1), resp(1, "down")), SPL3)
    assert not r and r.counterexample == 2


def test_invocations_only_always_satisfy():
    assert satisfies_task((inv(2, 2), inv(1, 1)), SPL3)


def test_unknown_input_vertex():
    with pytest.raises(UnknownInputVertex):
        satisfies_task((inv(1, 7),), SPL3)


@given(st.sampled_from(sorted(VE_SPL3)), st.data())
@settings(max_examples=80, deadline=None)
def test_satisfaction_survives_truncation(h, data):
    k = data.draw(st.integers(0, len(h)))
    assert satisfies_task(h[:k], SPL3)


def test_solo_splitter_histories():
    assert enumerate_VE_task(splitter_task([1])) == {(), (inv(1, 1),), (inv(1, 1), resp(1, "stop"))}


def test_test_and_set_contains_late_winner():
    assert (inv(1, 1), inv(2, 2), resp(2, 0), resp(1, 1)) in enumerate_VE_task(test_and_set_task([1, 2]))


def test_splitter_pair_early_response_must_be_stop():
    for h in enumerate_VE_task(splitter_task([1, 2])):
        if len(h) >= 2 and h[1].kind == "resp":
            assert h[1].value == "stop"


@pytest.mark.parametrize("name", ["splitter", "exchanger", "test-and-set", "renaming", "consensus"])
def test_ve_matches_brute_force(name):
    """Every well-formed history over the task's values, filtered by satisfies_task."""
    t = builtin_task(name, 2)
    brute = set()

    def grow(h, invoked, answered):
        if satisfies_task(h, t):
            brute.add(h)
        else:
            return
        for p in t.pids:
            if p not in invoked:
                for x in t.input_values(p):
                    grow(h + (inv(p, x),), invoked | {p}, answered)
            elif p not in answered:
                for y in t.output_values(p):
                    grow(h + (resp(p, y),), invoked, answered | {p})

    grow((), frozenset(), frozenset())
    assert enumerate_VE_task(t) == brute


def test_ve_is_prefix_closed():
    rng = random.Random(7)
    for h in rng.sample(sorted(VE_SPL3), 100):
        assert all(h[:k] in VE_SPL3 for k in range(len(h)))


def test_ve_cap():
    with pytest.raises(ExplosionError):
        enumerate_VE_task(SPL3, cap=10)


def test_sequential():
    assert is_sequential(())
    assert is_sequential((inv(1, 1), resp(1, "stop")))
    assert not is_sequential(E)


def test_json_round_trip():
    h = E + (inv(4, None, op="set"),)
    data = history_to_json(h)
    assert data[0] == {"type": "inv", "pid": 1, "value": 1}
    assert history_from_json(data) == h
