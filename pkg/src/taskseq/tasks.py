"""Constructors for concrete tasks over a finite, ordered pid set."""

from __future__ import annotations

from collections import Counter
from itertools import product
from typing import Callable, Iterable

from .complexes import Complex, Task, Vertex, closure, ids
from .errors import EmptyPidsError, InvalidAdaptiveBound, InvalidParameter

STOP, DOWN, RIGHT = "stop", "down", "right"
DIRECTIONS = (STOP, DOWN, RIGHT)
BOTTOM = None  # unmatched exchanger output, serialized as JSON null


def triangular(p: int) -> int:
    return p * (p + 1) // 2


def _pids(pids: Iterable) -> tuple:
    pids = tuple(sorted(set(pids)))
    if not pids:
        raise EmptyPidsError("task needs at least one pid")
    return pids


def _build(name, pids, inputs: Complex, choices, accept) -> Task:
    """Assemble a task whose carrier is given by a predicate on top simplexes.

    ``choices(pid, sigma)`` lists candidate outputs of ``pid`` when the
    participating input simplex is ``sigma``; ``accept(tau, sigma)`` decides
    whether a top-dimensional ``tau`` belongs to the carrier of ``sigma``.
    Faces come from closure, and the output complex is the union of the
    carriers of the maximal input simplexes.
    """
    delta = {}
    for sigma in inputs:
        order = sorted(ids(sigma))
        tops = []
        for values in product(*(choices(p, sigma) for p in order)):
            tau = frozenset(Vertex(p, y) for p, y in zip(order, values))
            if accept(tau, sigma):
                tops.append(tau)
        delta[sigma] = closure(tops)
    n = len(pids)
    outputs = set()
    for sigma in inputs.of_dim(n - 1):
        outputs |= delta[sigma].simplexes
    return Task(pids, inputs, Complex(frozenset(outputs)), delta, name)


def _identity_inputs(pids) -> Complex:
    return closure([[(p, p) for p in pids]])


def splitter_predicate(tau, k: int) -> bool:
    c = Counter(v.value for v in tau)
    return c[STOP] <= 1 and c[DOWN] <= k - 1 and c[RIGHT] <= k - 1


def splitter_task(pids) -> Task:
    pids = _pids(pids)
    return _build(
        "splitter", pids, _identity_inputs(pids),
        lambda p, sigma: DIRECTIONS,
        lambda tau, sigma: splitter_predicate(tau, len(sigma)),
    )


def exchanger_predicate(tau) -> bool:
    partner = {v.pid: v.value for v in tau}
    taken = Counter(y for y in partner.values() if y is not BOTTOM)
    for p, y in partner.items():
        if y is BOTTOM:
            continue
        if y == p or y not in partner or taken[y] > 1 or partner[y] != p:
            return False
    return True


def exchanger_task(pids) -> Task:
    pids = _pids(pids)
    return _build(
        "exchanger", pids, _identity_inputs(pids),
        lambda p, sigma: [BOTTOM] + [q for q in sorted(ids(sigma)) if q != p],
        lambda tau, sigma: exchanger_predicate(tau),
    )


def test_and_set_task(pids) -> Task:
    pids = _pids(pids)
    return _build(
        "test-and-set", pids, _identity_inputs(pids),
        lambda p, sigma: (0, 1),
        lambda tau, sigma: sum(v.value == 0 for v in tau) == 1,
    )


test_and_set_task.__test__ = False  # keep pytest from collecting it


def check_adaptive_bound(f: Callable[[int], int], n: int) -> None:
    if f(1) != 1:
        raise InvalidAdaptiveBound(f"f(1) must be 1, got {f(1)}")
    for p in range(2, n + 1):
        if not p - 1 <= f(p - 1) <= f(p):
            raise InvalidAdaptiveBound(
                f"need {p - 1} <= f({p - 1}) <= f({p}); got f({p - 1})={f(p - 1)}, f({p})={f(p)}")


def adaptive_renaming_task(pids, f: Callable[[int], int] = triangular) -> Task:
    pids = _pids(pids)
    check_adaptive_bound(f, len(pids))
    return _build(
        "renaming", pids, _identity_inputs(pids),
        lambda p, sigma: range(1, f(len(sigma)) + 1),
        lambda tau, sigma: len({v.value for v in tau}) == len(tau),
    )


def k_set_agreement_task(pids, k: int, input_domain: Iterable | None = None) -> Task:
    """At most ``k`` distinct decisions, each some participant's input.

    Inputs are every assignment of ``input_domain`` values to pids; the
    default domain is ``0..k`` so that agreement is never vacuous.  ``k``
    larger than the pid count is accepted and only leaves validity.
    """
    pids = _pids(pids)
    if k < 1:
        raise InvalidParameter(f"k must be >= 1, got {k}")
    domain = tuple(range(k + 1)) if input_domain is None else tuple(dict.fromkeys(input_domain))
    if not domain:
        raise InvalidParameter("input domain is empty")
    inputs = closure(
        [[(p, x) for p, x in zip(pids, xs)] for xs in product(domain, repeat=len(pids))])
    return _build(
        f"{k}-set-agreement", pids, inputs,
        lambda p, sigma: sorted({v.value for v in sigma}, key=domain.index),
        lambda tau, sigma: len({v.value for v in tau}) <= k,
    )


BUILTINS = ("splitter", "exchanger", "test-and-set", "renaming", "k-set-agreement")


def builtin_task(name: str, n: int, k: int | None = None, domain: Iterable | None = None) -> Task:
    """Look up a library task by its CLI name, over pids ``1..n``."""
    if n < 1:
        raise EmptyPidsError("n must be >= 1")
    pids = range(1, n + 1)
    if name == "splitter":
        return splitter_task(pids)
    if name == "exchanger":
        return exchanger_task(pids)
    if name == "test-and-set":
        return test_and_set_task(pids)
    if name == "renaming":
        return adaptive_renaming_task(pids)
    if name in ("k-set-agreement", "consensus"):
        return k_set_agreement_task(pids, 1 if k is None and name == "consensus" else (k or 1), domain)
    raise InvalidParameter(f"unknown task {name!r}; choose from {', '.join(BUILTINS)}")
