"""Chromatic simplicial complexes and tasks.

A simplex is a ``frozenset`` of :class:`Vertex` pairs with pairwise distinct
pids.  A :class:`Complex` is an explicit, containment-closed set of nonempty
simplexes.  The empty simplex is treated as a member of every complex, which
is what the prefix condition on histories needs (no responses yet means the
output simplex is empty).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Any, Hashable, Iterable, Iterator, Mapping, NamedTuple

from ._serial import canonical_sorted, sort_key
from .errors import CarrierError, ChromaticityError

Simplex = frozenset  # of Vertex

EMPTY: frozenset = frozenset()


class Vertex(NamedTuple):
    pid: Hashable
    value: Any


def simplex(vertices: Iterable) -> frozenset:
    """Build a chromatic simplex from ``(pid, value)`` pairs."""
    seen = set()
    out = []
    for v in vertices:
        v = Vertex(*v)
        if v.pid in seen:
            raise ChromaticityError(v.pid, tuple(out) + (v,))
        seen.add(v.pid)
        out.append(v)
    return frozenset(out)


def ids(s: Iterable[Vertex]) -> frozenset:
    return frozenset(v.pid for v in s)


def dim(s) -> int:
    return len(s) - 1


def value_of(s, pid):
    for v in s:
        if v.pid == pid:
            return v.value
    raise KeyError(pid)


def faces(s) -> Iterator[frozenset]:
    """All nonempty faces of ``s``, including ``s`` itself."""
    items = tuple(s)
    for r in range(1, len(items) + 1):
        for c in combinations(items, r):
            yield frozenset(c)


def is_chromatic(s) -> bool:
    return len(ids(s)) == len(s)


def sorted_simplex(s) -> list[Vertex]:
    return sorted(s, key=sort_key)


@dataclass(frozen=True)
class Complex:
    simplexes: frozenset = frozenset()

    def __contains__(self, s) -> bool:
        return not s or s in self.simplexes

    def __iter__(self):
        return iter(self.simplexes)

    def __len__(self) -> int:
        return len(self.simplexes)

    def __le__(self, other: "Complex") -> bool:
        return self.simplexes <= other.simplexes

    @property
    def dimension(self) -> int:
        return max((len(s) for s in self.simplexes), default=0) - 1

    def vertices(self) -> frozenset:
        return frozenset(v for s in self.simplexes if len(s) == 1 for v in s)

    def maximal(self) -> list[frozenset]:
        """Maximal simplexes in canonical order."""
        by_size = sorted(self.simplexes, key=len, reverse=True)
        top: list[frozenset] = []
        for s in by_size:
            if not any(s < t for t in top):
                top.append(s)
        return canonical_sorted(top)

    def of_dim(self, k: int) -> list[frozenset]:
        return [s for s in self.simplexes if len(s) == k + 1]


def closure(maximal_simplexes: Iterable) -> Complex:
    out = set()
    for s in maximal_simplexes:
        s = simplex(s)
        if s in out:
            continue
        out.update(faces(s))
    return Complex(frozenset(out))


def is_pure(c: Complex, k: int) -> bool:
    covered = set()
    for s in c.of_dim(k):
        covered.update(faces(s))
    return all(s in covered for s in c)


@dataclass(frozen=True)
class Task:
    """A one-shot task: input complex, output complex and carrier map."""

    pids: tuple
    inputs: Complex
    outputs: Complex
    delta: Mapping = field(hash=False)
    name: str = field(default="", compare=False)

    @property
    def n(self) -> int:
        return len(self.pids)

    def carrier(self, sigma) -> Complex:
        if not sigma:
            return Complex()
        try:
            return self.delta[sigma]
        except KeyError:
            raise CarrierError(sorted_simplex(sigma)) from None

    def input_values(self, pid) -> list:
        return canonical_sorted({v.value for v in self.inputs.vertices() if v.pid == pid})

    def output_values(self, pid) -> list:
        return canonical_sorted({v.value for v in self.outputs.vertices() if v.pid == pid})


@dataclass(frozen=True)
class Violation:
    axiom: str
    simplex: tuple
    detail: str = ""
    other: tuple | None = None

    def to_dict(self) -> dict:
        d = {"axiom": self.axiom, "simplex": [list(v) for v in self.simplex], "detail": self.detail}
        if self.other is not None:
            d["other"] = [list(v) for v in self.other]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Violation":
        other = d.get("other")
        return cls(
            d["axiom"],
            tuple(Vertex(*v) for v in d["simplex"]),
            d.get("detail", ""),
            None if other is None else tuple(Vertex(*v) for v in other),
        )


@dataclass
class ValidityReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok

    def axioms(self) -> set[str]:
        return {v.axiom for v in self.violations}

    def to_dict(self) -> dict:
        return {"ok": self.ok, "violations": [v.to_dict() for v in self.violations]}

    @classmethod
    def from_dict(cls, d: dict) -> "ValidityReport":
        return cls([Violation.from_dict(v) for v in d["violations"]])


def _complex_violations(c: Complex, label: str, k: int) -> list[Violation]:
    out = []
    for s in canonical_sorted(c):
        if not is_chromatic(s):
            out.append(Violation(f"{label}-chromatic", tuple(sorted_simplex(s))))
    for s in canonical_sorted(c):
        missing = next((f for f in faces(s) if f not in c), None)
        if missing is not None:
            out.append(Violation(f"{label}-closed", tuple(sorted_simplex(s)),
                                 "face missing", tuple(sorted_simplex(missing))))
            break
    if not c.of_dim(k):
        out.append(Violation(f"{label}-pure", (), f"no {k}-simplex"))
    elif not is_pure(c, k):
        covered = set()
        for s in c.of_dim(k):
            covered.update(faces(s))
        bad = canonical_sorted(s for s in c if s not in covered)
        out.append(Violation(f"{label}-pure", tuple(sorted_simplex(bad[0])),
                             f"not a face of any {k}-simplex"))
    return out


def validate_task(t: Task) -> ValidityReport:
    """Check the three task axioms plus shape conditions on both complexes.

    Every violation carries a witnessing simplex; the report is empty iff
    ``t`` is a valid task.
    """
    report = ValidityReport()
    v = report.violations
    k = t.n - 1
    v += _complex_violations(t.inputs, "inputs", k)
    v += _complex_violations(t.outputs, "outputs", k)
    if ids(t.inputs.vertices()) - set(t.pids) or ids(t.outputs.vertices()) - set(t.pids):
        v.append(Violation("pids", (), "complex mentions a pid outside the task's pid set"))

    inputs = canonical_sorted(t.inputs)
    for sigma in inputs:
        if sigma not in t.delta:
            v.append(Violation("carrier", tuple(sorted_simplex(sigma)), "no delta entry"))
    for sigma in canonical_sorted(t.delta):
        if sigma not in t.inputs.simplexes:
            v.append(Violation("carrier", tuple(sorted_simplex(sigma)),
                               "delta entry for a simplex outside inputs"))

    for sigma in inputs:
        if sigma not in t.delta:
            continue
        image = t.delta[sigma]
        d = dim(sigma)
        wit = tuple(sorted_simplex(sigma))
        stray = canonical_sorted(s for s in image if s not in t.outputs)
        if stray:
            v.append(Violation("subcomplex", wit, "image simplex outside outputs",
                               tuple(sorted_simplex(stray[0]))))
        # A1: pure of dimension dim(sigma); an empty image has no dimension at all
        if not image.of_dim(d):
            v.append(Violation("A1", wit, f"image has no {d}-simplex"))
        elif image.dimension != d or not is_pure(image, d):
            v.append(Violation("A1", wit, f"image is not pure of dimension {d}"))
        # A2
        for tau in canonical_sorted(image.of_dim(d)):
            if ids(tau) != ids(sigma):
                v.append(Violation("A2", wit, "top simplex with other pids",
                                   tuple(sorted_simplex(tau))))
                break
    # A3
    for sigma in inputs:
        if sigma not in t.delta:
            continue
        for face in faces(sigma):
            if face == sigma or face not in t.delta:
                continue
            if not t.delta[face] <= t.delta[sigma]:
                v.append(Violation("A3", tuple(sorted_simplex(sigma)),
                                   "image of face not contained in image",
                                   tuple(sorted_simplex(face))))
    return report
