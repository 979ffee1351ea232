"""Exact word length in the free metabelian group and friends.

For ``g`` in Sol(m, 2) with flow ``mu`` on Z^m, a shortest word traces every
P-edge ``mu(e)`` times and must also make the support plus the identity
connected; connector edges carry zero net flow and are therefore walked twice.
Hence ``|g| = weight(mu) + 2 * C`` where ``C`` is the least number of lattice
edges joining all support components and the identity.  ``C`` is an exact
Steiner problem with each component contracted to one terminal.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from . import _kernels
from . import flows as fl
from .config import DEFAULT_STEINER_BOUND, BudgetExceeded
from .flows import LatticeGraph
from .tower import GroupSpec, SolubleElement, graph_of
from .words import FreeWord, reduce

WITNESS_LIMIT = 1_000_000  # longest witness word ever materialised


class LengthError(ValueError):
    pass


@dataclass(frozen=True)
class GeodesicResult:
    length: int
    weight_N: int
    connection_cost: int
    witness: FreeWord | None

    def to_dict(self) -> dict:
        return {
            "length": self.length,
            "N": self.weight_N,
            "conn": self.connection_cost,
            "witness": str(self.witness) if self.witness is not None else None,
        }


@dataclass
class SteinerInstance:
    terminal_groups: list  # list of sets of lattice points
    blocked_free: set | None = None  # lattice edges (v, i) that cost nothing
    region: tuple | None = None  # (lo, hi) corners; defaults to the bounding box

    def __post_init__(self):
        if not self.terminal_groups or any(not g for g in self.terminal_groups):
            raise LengthError("empty Steiner instance")
        pts = [p for g in self.terminal_groups for p in g]
        m = len(pts[0])
        box = (tuple(min(p[i] for p in pts) for i in range(m)), tuple(max(p[i] for p in pts) for i in range(m)))
        if self.region is None:
            self.region = box
        lo, hi = self.region
        if any(not all(lo[i] <= p[i] <= hi[i] for i in range(m)) for p in pts):
            raise LengthError("terminal outside the Steiner region")


def steiner_connect(inst: SteinerInstance, bound: int = DEFAULT_STEINER_BOUND) -> tuple[int, list]:
    """Least number of non-free lattice edges joining every terminal group.

    Returns ``(cost, edges)`` with ``edges`` the paid edges as ``(v, i)`` keys.
    Groups are contracted by giving the edges listed in ``blocked_free`` (and
    the members of each group, via zero-cost chaining) cost zero.
    """
    groups = inst.terminal_groups
    if len(groups) > bound:
        raise BudgetExceeded(f"{len(groups)} terminal groups exceed the Steiner bound {bound}")
    if len(groups) == 1:
        return 0, []
    free = inst.blocked_free or set()
    lo, hi = inst.region
    m = len(lo)
    ranges = [range(lo[i], hi[i] + 1) for i in range(m)]
    points = list(product(*ranges))
    index = {p: j for j, p in enumerate(points)}
    # members of a group are tied together at zero cost
    group_of = {}
    for gi, g in enumerate(groups):
        for p in g:
            group_of[p] = gi
    adj: list[list[tuple[int, int]]] = [[] for _ in points]
    graph = LatticeGraph(m)
    for p in points:
        for i in range(1, m + 1):
            q = graph.mul_gen(p, i)
            if q not in index:
                continue
            w = 0 if ((p, i) in free) else 1
            a, b = index[p], index[q]
            adj[a].append((b, w))
            adj[b].append((a, w))
    for gi, g in enumerate(groups):
        members = sorted(g)
        for p in members[1:]:
            a, b = index[members[0]], index[p]
            adj[a].append((b, 0))
            adj[b].append((a, 0))
    indptr = np.zeros(len(points) + 1, dtype=np.int64)
    for j, nb in enumerate(adj):
        indptr[j + 1] = indptr[j] + len(nb)
    indices = np.array([b for nb in adj for b, _ in nb], dtype=np.int64)
    weights = np.array([w for nb in adj for _, w in nb], dtype=np.int64)
    terminals = np.array([index[min(g)] for g in groups], dtype=np.int64)
    cost, dp, pred, split = _kernels.steiner_dp(indptr, indices, weights, terminals)
    # walk the DP back to the paid edges
    paid = set()
    full = (1 << len(groups)) - 1
    stack = [(full, int(terminals[0]))]
    while stack:
        S, v = stack.pop()
        u = int(pred[S, v])
        if u >= 0:
            w = next(wt for b, wt in adj[u] if b == v and dp[S, u] + wt == dp[S, v])
            if w:
                pu, pv = points[u], points[v]
                diff = [pv[i] - pu[i] for i in range(m)]
                i = next(i for i in range(m) if diff[i])
                paid.add((pu, i + 1) if diff[i] > 0 else (pv, i + 1))
            stack.append((S, u))
        elif split[S, v]:
            T = int(split[S, v])
            stack.append((T, v))
            stack.append((S ^ T, v))
    paid = sorted(paid)
    if len(paid) != cost:
        raise AssertionError(f"Steiner backtrack recovered {len(paid)} edges for cost {cost}")
    return int(cost), paid


def _two_group_distance(a: set, b: set) -> tuple[int, tuple, tuple]:
    best = None
    for p in sorted(a):
        for q in sorted(b):
            d = sum(abs(x - y) for x, y in zip(p, q))
            if best is None or d < best[0]:
                best = (d, p, q)
    return best


def _connection(x: SolubleElement, bound: int):
    graph = graph_of(x.spec)
    sup = fl.support(x.payload, graph)
    groups = [set(c) for c in sup.components]
    origin = graph.identity
    if not any(origin in g for g in groups):
        groups.insert(0, {origin})
    else:
        groups.sort(key=lambda g: origin not in g)
    return groups, sup


def length_exact_metabelian(x: SolubleElement, witness: bool = True,
                            bound: int = DEFAULT_STEINER_BOUND) -> GeodesicResult:
    """Exact length in Sol(m, 2) with a shortest representative."""
    if x.spec.d != 2:
        raise LengthError("length_exact_metabelian needs d = 2")
    if x.is_identity():
        return GeodesicResult(0, 0, 0, FreeWord((), x.spec.m) if witness else None)
    N = fl.weight(x.payload)
    groups, sup = _connection(x, bound)
    if len(groups) == 1:
        cost, paid = 0, []
    elif len(groups) == 2 and not witness:
        cost = _two_group_distance(groups[0], groups[1])[0]
        paid = None
    else:
        cost, paid = steiner_connect(SteinerInstance(groups, set(sup.edges)), bound)
    if witness and N + 2 * cost > WITNESS_LIMIT:
        witness = False
    if witness and paid is None:
        paid = steiner_connect(SteinerInstance(groups, set(sup.edges)), bound)[1]
    w = _witness(x, paid) if witness else None
    return GeodesicResult(N + 2 * cost, N, cost, w)


def _witness(x: SolubleElement, paid: list) -> FreeWord:
    graph = graph_of(x.spec)
    out, targets = fl.positive_steps(x.payload, graph)
    for (v, i) in paid:
        t = graph.mul_gen(v, i)
        out[v][i] = out[v].get(i, 0) + 1
        out[t][-i] = out[t].get(-i, 0) + 1
        targets[(v, i)] = t
        targets[(t, -i)] = v
    origin = graph.identity
    end = x.endpoint
    letters = fl._letter_order(x.spec.m)
    if end != origin:
        out[end][0] = 1
        targets[(end, 0)] = origin
        letters = letters + [0]
    loop = fl._euler_loop(out, targets, origin, letters)
    if end != origin:
        k = next(j for j, (_, a) in enumerate(loop) if a == 0)
        loop = loop[k + 1:] + loop[:k]
    return reduce(fl.steps_to_letters(loop), x.spec.m)


def length_connected_balanced(x: SolubleElement, metric=None, witness: bool = True) -> GeodesicResult:
    """``weight + 2 * dist(identity, support)`` for a balanced flow with connected support."""
    if x.spec.d < 2:
        raise LengthError("need d >= 2")
    graph = graph_of(x.spec)
    f = x.payload
    if not f:
        raise LengthError("flow is zero")
    if fl.classify(f, graph).kind != "balanced":
        raise LengthError("flow is not balanced")
    sup = fl.support(f, graph)
    if len(sup.components) != 1:
        raise LengthError("support is disconnected")
    metric = metric or graph.length
    dist, v = min((metric(u), u) for u in sup.vertices)
    N = fl.weight(f)
    w = None
    if witness and N + 2 * dist <= WITNESS_LIMIT:
        q = graph.path_word(graph.identity, v)
        loop = fl.realize_loop(f, v, graph)
        w = reduce(list(q) + fl.steps_to_letters(loop) + [-a for a in reversed(q)], x.spec.m)
    return GeodesicResult(N + 2 * dist, N, dist, w)


def element_length(x: SolubleElement) -> int:
    if x.spec.d == 1:
        return sum(abs(a) for a in x.payload)
    if x.spec.d == 2:
        return length_exact_metabelian(x, witness=False).length
    return length_connected_balanced(x, witness=False).length


def geodesic_word(x: SolubleElement) -> FreeWord:
    if x.spec.d == 1:
        from .tower import word_of

        return word_of(x)
    if x.spec.d == 2:
        return length_exact_metabelian(x).witness
    return length_connected_balanced(x).witness


# ---------------------------------------------------------------- BFS oracle

def bfs_ball(spec: GroupSpec, radius: int, mem_limit_mib: int | None = None, centre: SolubleElement | None = None) -> dict:
    """``{element: distance}`` for the ball of ``radius`` around ``centre`` (default identity)."""
    from .growth import bfs_layers

    dist = {}
    for r, layer in enumerate(bfs_layers(spec, radius, mem_limit_mib=mem_limit_mib, centre=centre)):
        for e in layer:
            dist[e] = r
    return dist


_BALLS: dict = {}


def _identity_ball(spec: GroupSpec, radius: int, mem_limit_mib=None) -> dict:
    have = _BALLS.get(spec)
    if have is None or have[0] < radius:
        _BALLS[spec] = (radius, bfs_ball(spec, radius, mem_limit_mib))
    return _BALLS[spec][1]


def bfs_length_oracle(x: SolubleElement, max_radius: int, mem_limit_mib: int | None = None) -> int | None:
    """Distance from the identity by breadth-first search, or ``None`` beyond ``max_radius``.

    Meets in the middle: a ball of radius ceil(r/2) around the identity and one
    of radius floor(r/2) around ``x``.
    """
    a = (max_radius + 1) // 2
    b = max_radius - a
    near = _identity_ball(x.spec, a, mem_limit_mib)
    if x in near:
        return near[x] if near[x] <= max_radius else None
    best = None
    far = bfs_ball(x.spec, b, mem_limit_mib, centre=x)
    for e, dx in far.items():
        d0 = near.get(e)
        if d0 is not None and (best is None or d0 + dx < best):
            best = d0 + dx
    if best is not None and best > max_radius:
        return None
    return best
