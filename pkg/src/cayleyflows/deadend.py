"""Dead-end depth: strict and non-strict depth search, the worked depth-2
example, and the loop-sum construction of deep strict dead ends with a
checkable certificate.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field

from . import flows as fl
from .flows import Flow, LatticeGraph
from .geodesic import element_length
from .relations import relators_of_length, shortest_relation
from .tower import GroupSpec, SolubleElement, TowerGraph, from_word, graph_of
from .words import FreeWord, format_letters

log = logging.getLogger(__name__)

EXAMPLE_WORD = "b^2 (a b^-1)^2 (b^-1 a^-1)^2 (a^-1 b)^2 (b a)^2 b^-2"
EXAMPLE_WORD_LETTERS = "bbaBaBBABAAbAbbabaBB"


class DepthError(RuntimeError):
    def __init__(self, msg, element=None):
        super().__init__(msg)
        self.element = element


@dataclass
class DepthReport:
    strict_depth: int
    is_dead_end: bool
    limiting_witness: FreeWord | None = None
    limiting_length: int | None = None
    length: int = 0
    chain: list = field(default_factory=list)  # [(k, sorted set of |g w| over irreducible w of length k)]
    diagnostic: str = ""

    def to_dict(self) -> dict:
        return {
            "strict_depth": self.strict_depth,
            "is_dead_end": self.is_dead_end,
            "limiting_witness": str(self.limiting_witness) if self.limiting_witness is not None else None,
            "limiting_length": self.limiting_length,
            "length": self.length,
            "chain": [{"k": k, "lengths": ls} for k, ls in self.chain],
            "diagnostic": self.diagnostic,
        }


def _safe_length(length_fn, y, word):
    try:
        return length_fn(y)
    except Exception as exc:  # noqa: BLE001 - re-raised with the offending element attached
        raise DepthError(f"length of g*{format_letters(word)} failed: {exc}", y) from exc


def strict_depth(x: SolubleElement, max_k: int, length_fn=element_length) -> DepthReport:
    """Largest k <= max_k such that lengths strictly drop along every irreducible word of length k."""
    n = length_fn(x)
    if x.is_identity():
        return DepthReport(0, False, None, None, 0, [], "identity: depth 0 by convention")
    frontier = [((), x, n)]
    chain = []
    depth = 0
    letters = [y for i in range(1, x.spec.m + 1) for y in (i, -i)]
    while depth < max_k:
        nxt = []
        for word, e, le in frontier:
            for a in letters:
                if word and word[-1] == -a:
                    continue
                w2 = word + (a,)
                y = e.mul_letter(a)
                ly = _safe_length(length_fn, y, w2)
                if ly >= le:
                    chain.append((depth + 1, sorted({t[2] for t in nxt} | {ly})))
                    return DepthReport(depth, depth >= 1, FreeWord(w2, x.spec.m), ly, n, chain)
                nxt.append((w2, y, ly))
        depth += 1
        chain.append((depth, sorted({t[2] for t in nxt})))
        frontier = nxt
    return DepthReport(depth, depth >= 1, None, None, n, chain, f"reached max_k = {max_k}")


def nonstrict_depth(x: SolubleElement, max_k: int, length_fn=element_length) -> int:
    """Largest k <= max_k with |g w| <= |g| for every word w of length at most k."""
    n = length_fn(x)
    letters = [y for i in range(1, x.spec.m + 1) for y in (i, -i)]
    seen = {x}
    layer = [x]
    for k in range(1, max_k + 1):
        nxt = []
        for e in layer:
            for a in letters:
                y = e.mul_letter(a)
                if y in seen:
                    continue
                seen.add(y)
                if length_fn(y) > n:
                    return k - 1
                nxt.append(y)
        layer = nxt
    return max_k


def paper_example() -> SolubleElement:
    """The depth-2 strict dead end of Sol(2, 2) drawn as a 16-edge closed curve."""
    return from_word(EXAMPLE_WORD, GroupSpec(2, 2))


# ---------------------------------------------------------------- construction


@dataclass
class DepthCertificate:
    k: int
    N: int
    rho_lower: int
    sphere_coverage: bool
    support_connected: bool
    distance_check: bool
    base: str = ""
    sigma_edges: int = 0
    loops: int = 0
    diagnostics: dict = field(default_factory=dict)

    @property
    def valid(self) -> bool:
        return (2 * self.k + 1 < self.rho_lower and self.sphere_coverage
                and self.support_connected and self.distance_check)

    def to_dict(self) -> dict:
        return {
            "k": self.k, "N": str(self.N), "rho_lower": self.rho_lower,
            "sphere_coverage": self.sphere_coverage, "support_connected": self.support_connected,
            "distance_check": self.distance_check, "base": self.base,
            "sigma_edges": self.sigma_edges, "loops": self.loops, "valid": self.valid,
        }


class BaseData:
    """Base group ``G = F_m / R`` seen through its Cayley graph: ball layers and loop labels."""

    def __init__(self, graph, rho: int, relators: list):
        self.graph = graph
        self.rho = rho
        self.relators = relators  # all cyclically reduced relator words, sorted by (length, lex)
        self._layers = [[graph.identity]]
        self._dist = {graph.identity: 0}

    @classmethod
    def for_spec(cls, base: GroupSpec, extra: int = 4) -> BaseData:
        """Base Sol(m, d) with loop labels of length rho .. rho + extra."""
        graph = LatticeGraph(base.m) if base.d == 1 else TowerGraph(base)
        rho = shortest_relation(base, 4 * 3 ** (base.d - 1) + 2).rho
        words = []
        for length in range(rho, rho + extra + 1, 2):
            words += relators_of_length(base, length)[1]
        order = lambda w: (len(w), [2 * (abs(x) - 1) + (x < 0) for x in w])
        return cls(graph, rho, sorted(words, key=order))

    def ball(self, radius: int) -> dict:
        letters = [y for i in range(1, self.graph.m + 1) for y in (i, -i)]
        while len(self._layers) <= radius:
            nxt = []
            for v in self._layers[-1]:
                for a in letters:
                    w = self.graph.mul_gen(v, a)
                    if w not in self._dist:
                        self._dist[w] = len(self._layers)
                        nxt.append(w)
            self._layers.append(nxt)
        return self._dist

    def sphere(self, radius: int) -> list:
        self.ball(radius)
        return self._layers[radius]

    def trace(self, v, letters) -> list:
        out = [v]
        for a in letters:
            v = self.graph.mul_gen(v, a)
            out.append(v)
        return out


def _outside(dist: dict, k: int):
    return lambda v: dist.get(v, k) >= k


def _letter_key(x):
    return 2 * (abs(x) - 1) + (x < 0)


def _connect_sphere(base: BaseData, k: int, uf, outside) -> list:
    """Paths in C - B_(k-1) joining all sphere vertices, as lists of steps (vertex, letter).

    Works bottom-up through the tree B_k: below each node z the child branches
    are joined by a relator loop at z whose middle stays outside B_(k-1).
    """
    g = base.graph
    dist = base.ball(k)
    letters = sorted([y for i in range(1, g.m + 1) for y in (i, -i)], key=_letter_key)
    paths = []
    for level in range(k - 1, -1, -1):
        for z in sorted(base.sphere(level)):
            outward = [a for a in letters if dist.get(g.mul_gen(z, a)) == level + 1]
            depth = k - level
            for x, y in zip(outward, outward[1:]):
                rep_x = _sphere_rep(g, z, x, depth, letters)
                rep_y = _sphere_rep(g, z, y, depth, letters)
                if uf.find(rep_x) == uf.find(rep_y):
                    continue
                seg = _relator_segment(base, z, x, y, depth, outside)
                if seg is None:
                    seg = _bfs_segment(base, z, x, y, depth, outside, dist, letters)
                if seg is None:
                    raise DepthError(f"no path outside B_{k - 1} between branches {x}, {y} at a level-{level} vertex")
                paths.append(seg)
                v = seg[0][0]
                for (u, a) in seg:
                    uf.union(u, g.mul_gen(u, a))
                uf.union(rep_x, v)
                uf.union(rep_y, g.mul_gen(seg[-1][0], seg[-1][1]))
    return paths


def _sphere_rep(g, z, x, depth, letters):
    # leftmost sphere vertex of the branch z*x...
    v = g.mul_gen(z, x)
    last = x
    for _ in range(depth - 1):
        a = next(a for a in letters if a != -last)
        v = g.mul_gen(v, a)
        last = a
    return v


def _relator_segment(base: BaseData, z, x, y, depth, outside):
    for r in base.relators:
        if r[0] != x or r[-1] != -y or len(r) <= 2 * depth:
            continue
        verts = base.trace(z, r)
        mid = verts[depth:len(r) - depth + 1]
        if all(outside(v) for v in mid) and len(set(verts[:-1])) == len(r):
            return [(verts[i], r[i]) for i in range(depth, len(r) - depth)]
    return None


def _bfs_segment(base: BaseData, z, x, y, depth, outside, dist, letters, max_steps=200000):
    """Shortest path outside B_(k-1) from the x-branch sphere to the y-branch sphere (fallback)."""
    g = base.graph

    def branch_sphere(a):
        out = [g.mul_gen(z, a)]
        for _ in range(depth - 1):
            out = [g.mul_gen(v, b) for v in out for b in letters if dist.get(g.mul_gen(v, b)) == dist[v] + 1]
        return out

    targets = set(branch_sphere(y))
    starts = branch_sphere(x)
    prev = {v: None for v in starts}
    queue = deque(starts)
    steps = 0
    while queue and steps < max_steps:
        v = queue.popleft()
        steps += 1
        if v in targets:
            path = []
            while prev[v] is not None:
                u, a = prev[v]
                path.append((u, a))
                v = u
            return path[::-1]
        for a in letters:
            w = g.mul_gen(v, a)
            if w in prev or not outside(w):
                continue
            prev[w] = (v, a)
            queue.append(w)
    return None


def _loop_through(base: BaseData, v, a, outside, banned_bfs_limit=200000):
    """Shortest simple loop through the step (v, a) inside C - B_(k-1), ties broken lexicographically."""
    for r in base.relators:
        if r[0] != a:
            continue
        verts = base.trace(v, r)
        if len(set(verts[:-1])) == len(r) and all(outside(u) for u in verts):
            return tuple((verts[i], r[i]) for i in range(len(r)))
    return _bfs_loop(base, v, a, outside, banned_bfs_limit)


def _bfs_loop(base: BaseData, v, a, outside, limit):
    g = base.graph
    w0 = g.mul_gen(v, a)
    letters = sorted([y for i in range(1, g.m + 1) for y in (i, -i)], key=_letter_key)
    prev = {w0: None}
    queue = deque([w0])
    while queue and len(prev) < limit:
        u = queue.popleft()
        for b in letters:
            if u == w0 and b == -a:
                continue  # the removed edge
            t = g.mul_gen(u, b)
            if t in prev or not outside(t):
                continue
            prev[t] = (u, b)
            if t == v:
                path = []
                node = t
                while prev[node] is not None:
                    p, c = prev[node]
                    path.append((p, c))
                    node = p
                return ((v, a),) + tuple(path[::-1])
            queue.append(t)
    return None


def construct_theorem1(base_spec: GroupSpec, k: int | None = None, multipliers: str = "proof",
                       base: BaseData | None = None):
    """Strict dead end of depth k in Sol(m, base.d + 1) built from a sum of loop flows.

    ``multipliers``: ``"proof"`` puts ``2**i`` on the loop chosen for the i-th positive
    edge of Sigma (edges in canonical order); ``"loop"`` uses ``2**j`` for the j-th
    distinct loop; ``"unit"`` uses 1.  The latter two re-check that no edge cancels.
    """
    base = base or BaseData.for_spec(base_spec)
    rho = base.rho
    if k is None:
        k = rho // 2 - 1
    if 2 * k + 1 >= rho:
        raise DepthError(f"k = {k} too large: need 2k+1 < rho = {rho}")
    if k < 1:
        raise DepthError("k must be at least 1")
    g = base.graph
    dist = base.ball(k)
    outside = _outside(dist, k)
    uf = fl._UnionFind()
    sphere = sorted(base.sphere(k))
    for v in sphere:
        uf.find(v)
    paths = _connect_sphere(base, k, uf, outside)
    # positive edges of the connecting subgraph
    path_edges = set()
    for seg in paths:
        for (u, a) in seg:
            path_edges.add(fl.step_edge(g, u, a)[0])
    loops = []
    edge_loop: dict = {}
    for e in sorted(path_edges):
        if e in edge_loop:
            continue
        q = _loop_through(base, e[0], e[1], outside)
        if q is None:
            raise DepthError(f"no simple loop through edge {e} outside B_{k - 1}: base graph data problem")
        idx = len(loops)
        loops.append(q)
        for (u, a) in q:
            edge_loop.setdefault(fl.step_edge(g, u, a)[0], idx)
    sigma = sorted(edge_loop)
    coeff = [0] * len(loops)
    if multipliers == "proof":
        for i, e in enumerate(sigma, start=1):
            coeff[edge_loop[e]] += 1 << i
    elif multipliers == "loop":
        for j in range(len(loops)):
            coeff[j] = 1 << (j + 1)
    elif multipliers == "unit":
        coeff = [1] * len(loops)
    else:
        raise ValueError(f"unknown multiplier scheme {multipliers!r}")
    values: dict = {}
    for c, q in zip(coeff, loops):
        for (u, a) in q:
            edge, sign, _ = fl.step_edge(g, u, a)
            values[edge] = values.get(edge, 0) + sign * c
    values = {e: v for e, v in values.items() if v}
    missing = [e for e in sigma if e not in values]
    if missing:
        raise DepthError(f"{len(missing)} edges of Sigma cancelled under multipliers={multipliers!r}")
    top = GroupSpec(g.m, (1 if isinstance(g, LatticeGraph) else g.spec.d) + 1)
    mu = Flow(values, g.m, _trusted=True)
    x = SolubleElement(top, mu, g.identity)
    sup = fl.support(mu, g)
    cert = DepthCertificate(
        k=k,
        N=fl.weight(mu),
        rho_lower=rho,
        sphere_coverage=set(sphere) <= sup.vertices,
        support_connected=len(sup.components) == 1,
        distance_check=min(g.length(v) for v in sup.vertices) == k,
        base=str(GroupSpec(g.m, top.d - 1)),
        sigma_edges=len(sigma),
        loops=len(loops),
    )
    return x, cert


def verify_certificate(cert: DepthCertificate, x: SolubleElement, rho_lower: int | None = None,
                       metric=None) -> tuple[bool, dict]:
    """Re-derive every certificate field from ``x``; true only when all hold."""
    diag = {}
    if x.spec.d < 2:
        return False, {"error": "element carries no flow"}
    g = graph_of(x.spec)
    f = x.payload
    metric = metric or g.length
    base_spec = GroupSpec(x.spec.m, x.spec.d - 1)
    if rho_lower is None:
        rho_lower = shortest_relation(base_spec, 4 * 3 ** (base_spec.d - 1) + 2).rho
    diag["rho_searched"] = rho_lower
    diag["rho_ok"] = cert.rho_lower <= rho_lower
    diag["tree_ball"] = 2 * cert.k + 1 < cert.rho_lower
    if not f or fl.classify(f, g).kind != "balanced":
        diag["balanced"] = False
        return False, diag
    diag["balanced"] = True
    diag["weight"] = fl.weight(f) == cert.N
    sup = fl.support(f, g)
    diag["support_connected"] = len(sup.components) == 1 and cert.support_connected
    diag["distance"] = min(metric(v) for v in sup.vertices) == cert.k and cert.distance_check
    data = BaseData(g, rho_lower, [])
    sphere = data.sphere(cert.k)
    diag["sphere_coverage"] = set(sphere) <= sup.vertices and cert.sphere_coverage
    ok = all(diag[key] for key in ("rho_ok", "tree_ball", "weight", "support_connected", "distance", "sphere_coverage"))
    return ok, diag
