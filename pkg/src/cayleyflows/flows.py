"""Integer flows on right Cayley graphs.

An edge ``(s, i)`` goes from vertex ``s`` to ``s * x_i``.  Only positively
labelled edges are stored; the value on the inverse edge is the negation.  The
underlying group is supplied by a *graph provider*, any object with

* ``m`` and ``identity``,
* ``mul_gen(v, x)`` for a signed letter ``x`` (right multiplication),
* ``left_mul(u, v)`` (group product ``u * v``, used for translation),
* ``serialize_vertex(v)`` (canonical text form),
* ``length(v)`` and ``path_word(u, v)`` (a shortest word from ``u`` to ``v``),

so the same code runs over ``Z^m`` and over every level of the soluble tower.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Any, Hashable, Iterable, Sequence

from .words import FreeWord, reduce

Vertex = Hashable
EdgeKey = tuple  # (source vertex, generator index)


class FlowError(ValueError):
    pass


class Flow:
    """Finite sparse integer flow.  Treated as immutable once built."""

    __slots__ = ("values", "m", "_key", "_hash")

    def __init__(self, values: dict | None = None, m: int = 2, *, _trusted: bool = False):
        if values is None:
            values = {}
        elif not _trusted:
            values = {k: int(v) for k, v in values.items() if v != 0}
            for (_, g) in values:
                if not 1 <= g <= m:
                    raise FlowError(f"generator {g} out of range for rank {m}")
        self.values = values
        self.m = m
        self._key = None
        self._hash = None

    @classmethod
    def zero(cls, m: int) -> Flow:
        return cls({}, m, _trusted=True)

    def key(self) -> tuple:
        if self._key is None:
            self._key = tuple(sorted((s, g, v) for (s, g), v in self.values.items()))
        return self._key

    def __eq__(self, other):
        if not isinstance(other, Flow):
            return NotImplemented
        return self.m == other.m and self.values == other.values

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.key())
        return self._hash

    def __lt__(self, other: Flow):
        return self.key() < other.key()

    def __bool__(self):
        return bool(self.values)

    def __len__(self):
        return len(self.values)

    def __repr__(self):
        return f"Flow({dict(self.values)!r}, m={self.m})"

    def __getitem__(self, edge: EdgeKey) -> int:
        return self.values.get(edge, 0)

    def __add__(self, other: Flow) -> Flow:
        return add(self, other)

    def __neg__(self) -> Flow:
        return negate(self)

    def __sub__(self, other: Flow) -> Flow:
        return add(self, negate(other))

    def scaled(self, c: int) -> Flow:
        if c == 0:
            return Flow.zero(self.m)
        return Flow({k: c * v for k, v in self.values.items()}, self.m, _trusted=True)

    def value_on_step(self, graph, v: Vertex, x: int) -> int:
        """Flow through the directed step ``v -> v*x`` (negative letters read the stored edge backwards)."""
        if x > 0:
            return self.values.get((v, x), 0)
        return -self.values.get((graph.mul_gen(v, x), -x), 0)


@dataclass(frozen=True)
class BalanceReport:
    kind: str  # "balanced" | "semi_balanced" | "unconstrained"
    v_minus: Any = None
    v_plus: Any = None


@dataclass
class SupportGraph:
    vertices: set = field(default_factory=set)
    edges: set = field(default_factory=set)
    components: list = field(default_factory=list)  # list of vertex sets


def step_edge(graph, v: Vertex, x: int) -> tuple[EdgeKey, int, Vertex]:
    """Stored edge, orientation sign and target for a step from ``v`` by letter ``x``."""
    w = graph.mul_gen(v, x)
    if x > 0:
        return (v, x), 1, w
    return (w, -x), -1, w


def flow_from_word(w: FreeWord | Sequence[int], graph) -> tuple[Flow, Vertex]:
    """Flow induced by the path of ``w`` from the identity, and its endpoint."""
    values: dict = defaultdict(int)
    v = graph.identity
    for x in w:
        edge, sign, v = step_edge(graph, v, x)
        values[edge] += sign
    return Flow({k: c for k, c in values.items() if c}, graph.m, _trusted=True), v


def flow_of_steps(steps: Iterable[tuple[Vertex, int]], graph) -> Flow:
    values: dict = defaultdict(int)
    for v, x in steps:
        edge, sign, _ = step_edge(graph, v, x)
        values[edge] += sign
    return Flow({k: c for k, c in values.items() if c}, graph.m, _trusted=True)


def inflows(f: Flow, graph) -> dict:
    out: dict = defaultdict(int)
    for (s, g), val in f.values.items():
        out[graph.mul_gen(s, g)] += val
        out[s] -= val
    return out


def inflow(f: Flow, v: Vertex, graph) -> int:
    return inflows(f, graph).get(v, 0)


def classify(f: Flow, graph) -> BalanceReport:
    exceptional = {v: c for v, c in inflows(f, graph).items() if c}
    if not exceptional:
        return BalanceReport("balanced")
    if len(exceptional) == 2 and sorted(exceptional.values()) == [-1, 1]:
        vm = next(v for v, c in exceptional.items() if c == -1)
        vp = next(v for v, c in exceptional.items() if c == 1)
        return BalanceReport("semi_balanced", vm, vp)
    return BalanceReport("unconstrained")


def add(f: Flow, g: Flow) -> Flow:
    if f.m != g.m:
        raise FlowError("rank mismatch")
    if len(f.values) < len(g.values):
        f, g = g, f
    values = dict(f.values)
    for k, v in g.values.items():
        s = values.get(k, 0) + v
        if s:
            values[k] = s
        else:
            values.pop(k, None)
    return Flow(values, f.m, _trusted=True)


def negate(f: Flow) -> Flow:
    return Flow({k: -v for k, v in f.values.items()}, f.m, _trusted=True)


def translate(f: Flow, by: Vertex, graph) -> Flow:
    """Left translation: edge ``(s, i)`` moves to ``(by*s, i)``."""
    if by == graph.identity:
        return f
    return Flow({(graph.left_mul(by, s), g): v for (s, g), v in f.values.items()}, f.m, _trusted=True)


def weight(f: Flow) -> int:
    return sum(abs(v) for v in f.values.values())


class _UnionFind:
    def __init__(self):
        self.parent: dict = {}

    def find(self, x):
        parent = self.parent
        parent.setdefault(x, x)
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[ra] = rb


def support(f: Flow, graph) -> SupportGraph:
    uf = _UnionFind()
    vertices = set()
    for (s, g) in f.values:
        t = graph.mul_gen(s, g)
        vertices.add(s)
        vertices.add(t)
        uf.union(s, t)
    groups: dict = defaultdict(set)
    for v in vertices:
        groups[uf.find(v)].add(v)
    components = sorted(groups.values(), key=lambda c: min(c))
    return SupportGraph(vertices, set(f.values), components)


def restrict(f: Flow, vertices: set) -> Flow:
    return Flow({k: v for k, v in f.values.items() if k[0] in vertices}, f.m, _trusted=True)


def _letter_order(m: int) -> list[int]:
    out = []
    for i in range(1, m + 1):
        out += [i, -i]
    return out


def _euler_loop(out: dict, targets: dict, base: Vertex, letters: list[int]) -> list[tuple[Vertex, int]]:
    """Closed walk at ``base`` using every directed step ``(v, x)`` exactly ``out[v][x]`` times.

    Cycles are peeled off by walking until a vertex repeats (lowest letter first),
    then spliced into one loop at shared vertices.
    """
    out = {v: dict(d) for v, d in out.items()}

    def pick(v):
        avail = out.get(v)
        if avail:
            for x in letters:
                if avail.get(x, 0) > 0:
                    return x
        return None

    cycles: list[list[tuple[Vertex, int]]] = []
    for start in [base] + [v for v in out if v != base]:
        while pick(start) is not None:
            steps: list[tuple[Vertex, int]] = []
            seen = {start: 0}
            v = start
            while True:
                x = pick(v)
                if x is None:
                    raise FlowError("walk got stuck: flow is not balanced")
                steps.append((v, x))
                v = targets[(v, x)]
                if v in seen:
                    cycle = steps[seen[v]:]
                    for u, y in cycle:
                        out[u][y] -= 1
                    cycles.append(cycle)
                    break
                seen[v] = len(steps)
    if not cycles:
        return []
    # splice
    first = next((i for i, c in enumerate(cycles) if any(u == base for u, _ in c)), None)
    if first is None:
        raise FlowError("base vertex is not on the support")
    loop = _rotate_to(cycles.pop(first), base)
    pending = cycles
    while pending:
        positions: dict = {}
        for idx, (u, _) in enumerate(loop):
            positions.setdefault(u, idx)
        progressed = False
        rest = []
        for cyc in pending:
            hit = next((u for u, _ in cyc if u in positions), None)
            if hit is None:
                rest.append(cyc)
                continue
            at = positions[hit]
            loop[at:at] = _rotate_to(cyc, hit)
            progressed = True
            positions = {}
            for idx, (u, _) in enumerate(loop):
                positions.setdefault(u, idx)
        if not progressed:
            raise FlowError("support is disconnected")
        pending = rest
    return loop


def _rotate_to(cycle: list, v: Vertex) -> list:
    i = next(i for i, (u, _) in enumerate(cycle) if u == v)
    return cycle[i:] + cycle[:i]


def positive_steps(f: Flow, graph) -> tuple[dict, dict]:
    """Out-multiplicities ``{v: {x: count}}`` of P-edges and the step targets."""
    out: dict = defaultdict(dict)
    targets: dict = {}
    for (s, g), val in f.values.items():
        t = graph.mul_gen(s, g)
        if val > 0:
            out[s][g] = out[s].get(g, 0) + val
            targets[(s, g)] = t
        else:
            out[t][-g] = out[t].get(-g, 0) - val
            targets[(t, -g)] = s
    return out, targets


def realize_loop(f: Flow, base: Vertex, graph) -> list[tuple[Vertex, int]]:
    """Closed path at ``base`` made of P-edges, each edge ``e`` used ``f(e)`` times.

    Returned as a list of steps ``(vertex, letter)``.
    """
    if not f:
        raise FlowError("flow is zero")
    if classify(f, graph).kind != "balanced":
        raise FlowError("flow is not balanced")
    sup = support(f, graph)
    if len(sup.components) != 1:
        raise FlowError("support is disconnected")
    if base not in sup.vertices:
        raise FlowError("base vertex is not on the support")
    out, targets = positive_steps(f, graph)
    return _euler_loop(out, targets, base, _letter_order(f.m))


def steps_to_letters(steps: Iterable[tuple[Vertex, int]]) -> list[int]:
    return [x for _, x in steps]


def word_from_flow(f: Flow, graph) -> FreeWord:
    """A word inducing exactly ``f``."""
    report = classify(f, graph)
    if report.kind == "unconstrained":
        raise FlowError("flow is neither balanced nor semi-balanced")
    if report.kind == "semi_balanced":
        if report.v_minus != graph.identity:
            raise FlowError("semi-balanced flow must start at the identity")
        back = graph.path_word(report.v_plus, graph.identity)
        closed = add(f, flow_of_steps(_trace(report.v_plus, back, graph), graph))
        w = word_from_flow(closed, graph)
        return reduce(list(w.letters) + [-x for x in reversed(back)], f.m)
    letters: list[int] = []
    comps = support(f, graph).components
    entries = []
    for comp in comps:
        v = min(comp, key=lambda u: (graph.length(u), u))
        entries.append((graph.length(v), v, comp))
    entries.sort(key=lambda e: (e[0], e[1]))
    for _, v, comp in entries:
        q = graph.path_word(graph.identity, v)
        loop = realize_loop(restrict(f, comp), v, graph)
        letters += list(q) + steps_to_letters(loop) + [-x for x in reversed(q)]
    return reduce(letters, f.m)


def _trace(v: Vertex, letters: Sequence[int], graph) -> list[tuple[Vertex, int]]:
    steps = []
    for x in letters:
        steps.append((v, x))
        v = graph.mul_gen(v, x)
    return steps


def serialize(f: Flow, graph) -> list[dict]:
    """Canonical record list: sorted by (source serialization, generator)."""
    recs = [(graph.serialize_vertex(s), g, v) for (s, g), v in f.values.items()]
    recs.sort(key=lambda r: (r[0], r[1]))
    return [{"source": s, "gen": g, "val": str(v)} for s, g, v in recs]


class LatticeGraph:
    """Cayley graph of ``Z^m`` with the standard basis."""

    def __init__(self, m: int):
        self.m = m
        self.identity = (0,) * m

    def __repr__(self):
        return f"LatticeGraph({self.m})"

    def mul_gen(self, v, x):
        i = abs(x) - 1
        return v[:i] + (v[i] + (1 if x > 0 else -1),) + v[i + 1:]

    def left_mul(self, u, v):
        return tuple(a + b for a, b in zip(u, v))

    def inverse(self, v):
        return tuple(-a for a in v)

    def length(self, v) -> int:
        return sum(abs(a) for a in v)

    def path_word(self, u, v) -> list[int]:
        letters = []
        for i, (a, b) in enumerate(zip(u, v), start=1):
            letters += [i if b > a else -i] * abs(b - a)
        return letters

    def serialize_vertex(self, v) -> str:
        return "[" + ",".join(str(a) for a in v) + "]"
