"""Elements of the free soluble group Sol(m, d) = F_m / F_m^(d).

Level 1 is Z^m (exponent-sum vectors).  An element of level ``d >= 2`` is the
flow its words induce on the Cayley graph of level ``d - 1``: two words are equal
in Sol(m, d) exactly when their flows agree, so the flow is a complete normal
form.  Vertices of that Cayley graph are themselves level ``d - 1`` elements.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

from . import flows as fl
from .flows import Flow, LatticeGraph
from .words import FreeWord, reduce

MAX_DEPTH = int(os.environ.get("CAYLEYFLOWS_MAX_DEPTH", "6"))


class SpecError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class GroupSpec:
    m: int = 2
    d: int = 2

    def __post_init__(self):
        if self.m < 1 or self.d < 1:
            raise SpecError(f"need m >= 1 and d >= 1, got {self}")
        if self.d > MAX_DEPTH:
            raise SpecError(f"d = {self.d} exceeds the depth guard {MAX_DEPTH} (CAYLEYFLOWS_MAX_DEPTH)")

    def __str__(self):
        return f"Sol({self.m},{self.d})"


class SolubleElement:
    """Immutable group element.  ``payload`` is a tuple for d = 1 and a :class:`Flow` otherwise.

    For d >= 2 the endpoint of the flow (the image in level d - 1) is cached
    alongside; it is always the value produced by the group law, never set
    independently of the payload.
    """

    __slots__ = ("spec", "payload", "_endpoint", "_key", "_hash")

    def __init__(self, spec: GroupSpec, payload, endpoint=None):
        self.spec = spec
        self.payload = payload
        self._endpoint = endpoint
        self._key = None
        self._hash = None

    @property
    def m(self):
        return self.spec.m

    @property
    def d(self):
        return self.spec.d

    @property
    def endpoint(self):
        """Image in Sol(m, d-1); for d = 1 the element itself."""
        if self.spec.d == 1:
            return self
        if self._endpoint is None:
            report = fl.classify(self.payload, graph_of(self.spec))
            if report.kind == "balanced":
                self._endpoint = graph_of(self.spec).identity
            else:
                self._endpoint = report.v_plus
        return self._endpoint

    @property
    def key(self) -> tuple:
        if self._key is None:
            if self.spec.d == 1:
                self._key = self.payload
            else:
                self._key = self.payload.key()
        return self._key

    def __eq__(self, other):
        if not isinstance(other, SolubleElement):
            return NotImplemented
        if other.spec != self.spec:
            raise SpecError(f"cannot compare {self.spec} with {other.spec}")
        return self.key == other.key

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.key)
        return self._hash

    def __lt__(self, other: SolubleElement):
        return self.key < other.key

    def __mul__(self, other: SolubleElement) -> SolubleElement:
        return multiply(self, other)

    def __repr__(self):
        return f"<{self.spec} element {self.key!r}>"

    def is_identity(self) -> bool:
        return not any(self.payload) if self.spec.d == 1 else not self.payload

    def mul_letter(self, x: int) -> SolubleElement:
        """Right multiplication by one generator or inverse generator."""
        spec = self.spec
        if spec.d == 1:
            i = abs(x) - 1
            p = self.payload
            return SolubleElement(spec, p[:i] + (p[i] + (1 if x > 0 else -1),) + p[i + 1:])
        graph = graph_of(spec)
        v = self.endpoint
        edge, sign, w = fl.step_edge(graph, v, x)
        values = dict(self.payload.values)
        c = values.get(edge, 0) + sign
        if c:
            values[edge] = c
        else:
            del values[edge]
        return SolubleElement(spec, Flow(values, spec.m, _trusted=True), w)


class TowerGraph:
    """Cayley graph of Sol(m, d) as a graph provider for level d + 1 flows."""

    def __init__(self, spec: GroupSpec):
        self.spec = spec
        self.m = spec.m
        self.identity = identity(spec)

    def __repr__(self):
        return f"TowerGraph({self.spec})"

    def mul_gen(self, v: SolubleElement, x: int) -> SolubleElement:
        return v.mul_letter(x)

    def left_mul(self, u, v):
        return multiply(u, v)

    def inverse(self, v):
        return invert(v)

    def length(self, v) -> int:
        from .geodesic import element_length

        return element_length(v)

    def path_word(self, u, v) -> list[int]:
        from .geodesic import geodesic_word

        return list(geodesic_word(multiply(invert(u), v)))

    def serialize_vertex(self, v) -> str:
        return json.dumps(serialize_payload(v), sort_keys=True, separators=(",", ":"))


@lru_cache(maxsize=None)
def graph_of(spec: GroupSpec):
    """Cayley graph carrying the payload flows of ``spec`` (level d - 1)."""
    if spec.d < 2:
        raise SpecError("level-1 elements carry no flow")
    if spec.d == 2:
        return LatticeGraph(spec.m)
    return TowerGraph(GroupSpec(spec.m, spec.d - 1))


@lru_cache(maxsize=None)
def identity(spec: GroupSpec) -> SolubleElement:
    if spec.d == 1:
        return SolubleElement(spec, (0,) * spec.m)
    return SolubleElement(spec, Flow.zero(spec.m), graph_of(spec).identity)


def generator(spec: GroupSpec, x: int) -> SolubleElement:
    return identity(spec).mul_letter(x)


def from_word(w: FreeWord | Sequence[int] | str, spec: GroupSpec) -> SolubleElement:
    if isinstance(w, str):
        from .words import parse

        w = parse(w, spec.m)
    if isinstance(w, FreeWord):
        if w.m != spec.m:
            raise SpecError(f"word of rank {w.m} used in {spec}")
        letters = w.letters
    else:
        letters = reduce(w, spec.m).letters
    if spec.d == 1:
        vec = [0] * spec.m
        for x in letters:
            vec[abs(x) - 1] += 1 if x > 0 else -1
        return SolubleElement(spec, tuple(vec))
    f, end = fl.flow_from_word(letters, graph_of(spec))
    return SolubleElement(spec, f, end)


def _check(x: SolubleElement, y: SolubleElement):
    if x.spec != y.spec:
        raise SpecError(f"spec mismatch: {x.spec} vs {y.spec}")


def multiply(x: SolubleElement, y: SolubleElement) -> SolubleElement:
    _check(x, y)
    spec = x.spec
    if spec.d == 1:
        return SolubleElement(spec, tuple(a + b for a, b in zip(x.payload, y.payload)))
    graph = graph_of(spec)
    ex = x.endpoint
    payload = fl.add(x.payload, fl.translate(y.payload, ex, graph))
    return SolubleElement(spec, payload, graph.left_mul(ex, y.endpoint))


def invert(x: SolubleElement) -> SolubleElement:
    spec = x.spec
    if spec.d == 1:
        return SolubleElement(spec, tuple(-a for a in x.payload))
    graph = graph_of(spec)
    back = graph.inverse(x.endpoint)
    return SolubleElement(spec, fl.negate(fl.translate(x.payload, back, graph)), back)


def equals(x: SolubleElement, y: SolubleElement) -> bool:
    _check(x, y)
    return x.key == y.key


def abelianization(x: SolubleElement) -> tuple[int, ...]:
    while x.spec.d > 2:
        x = x.endpoint
    if x.spec.d == 1:
        return x.payload
    return x.endpoint


def word_of(x: SolubleElement) -> FreeWord:
    """Some word representing ``x`` (not necessarily shortest)."""
    if x.spec.d == 1:
        letters = []
        for i, a in enumerate(x.payload, start=1):
            letters += [i if a > 0 else -i] * abs(a)
        return reduce(letters, x.spec.m)
    return fl.word_from_flow(x.payload, graph_of(x.spec))


def serialize_payload(x: SolubleElement):
    if x.spec.d == 1:
        return list(x.payload)
    return fl.serialize(x.payload, graph_of(x.spec))


def serialize(x: SolubleElement) -> str:
    """Canonical JSON document ``{"d", "m", "payload"}`` with sorted keys."""
    doc = {"m": x.spec.m, "d": x.spec.d, "payload": serialize_payload(x)}
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def canonical_hash(x: SolubleElement) -> str:
    return hashlib.sha256(serialize(x).encode()).hexdigest()


def _parse_vertex(text: str, spec: GroupSpec):
    if spec.d == 1:
        return tuple(json.loads(text))
    return _from_payload(json.loads(text), spec)


def _from_payload(payload, spec: GroupSpec) -> SolubleElement:
    if spec.d == 1:
        return SolubleElement(spec, tuple(int(a) for a in payload))
    lower = GroupSpec(spec.m, spec.d - 1)
    values = {}
    for rec in payload:
        v = tuple(json.loads(rec["source"])) if spec.d == 2 else _parse_vertex(rec["source"], lower)
        values[(v, int(rec["gen"]))] = int(rec["val"])
    return SolubleElement(spec, Flow(values, spec.m))


def deserialize(text: str) -> SolubleElement:
    doc = json.loads(text)
    spec = GroupSpec(doc["m"], doc["d"])
    return _from_payload(doc["payload"], spec)
