"""Hot inner loops: Steiner DP on lattice boxes, SAW backtracking, relator DFS.

Each kernel is written once in plain numpy-indexed Python and compiled with
``numba.njit`` unless ``CAYLEYFLOWS_BACKEND=numpy`` is set (or numba is
missing), in which case the same source runs under CPython.
"""

from __future__ import annotations

import os

import numpy as np

BACKEND = os.environ.get("CAYLEYFLOWS_BACKEND", "numba").lower()

try:
    if BACKEND == "numpy":
        raise ImportError
    from numba import njit

    USE_NUMBA = True
except ImportError:
    USE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f


INF = 1 << 40


@njit(cache=True)
def _relax(dist, pred, indptr, indices, weights, queue, inq):
    # SPFA over a 0/1-weighted graph; ``queue`` is a circular buffer of size V+1
    n = dist.shape[0]
    size = n + 1
    head = 0
    tail = 0
    for v in range(n):
        if dist[v] < INF:
            queue[tail] = v
            tail = (tail + 1) % size
            inq[v] = True
    while head != tail:
        u = queue[head]
        head = (head + 1) % size
        inq[u] = False
        du = dist[u]
        for p in range(indptr[u], indptr[u + 1]):
            v = indices[p]
            nd = du + weights[p]
            if nd < dist[v]:
                dist[v] = nd
                pred[v] = u
                if not inq[v]:
                    inq[v] = True
                    queue[tail] = v
                    tail = (tail + 1) % size


@njit(cache=True)
def steiner_dp(indptr, indices, weights, terminals):
    """Dreyfus-Wagner over subsets of ``terminals``.

    Returns ``(cost, dp, pred, split)``; ``pred[S, v] >= 0`` means (S, v) was
    reached along an edge from ``pred``, otherwise ``split[S, v]`` holds the
    subset merged at ``v`` (0 for a bare terminal).
    """
    n = indptr.shape[0] - 1
    t = terminals.shape[0]
    full = (1 << t) - 1
    dp = np.full((full + 1, n), INF, dtype=np.int64)
    pred = np.full((full + 1, n), -1, dtype=np.int64)
    split = np.zeros((full + 1, n), dtype=np.int64)
    queue = np.zeros(n + 1, dtype=np.int64)
    inq = np.zeros(n, dtype=np.bool_)
    for i in range(t):
        dp[1 << i, terminals[i]] = 0
    for S in range(1, full + 1):
        if S & (S - 1):
            # proper submasks T with T containing the lowest bit of S, so each split is seen once
            low = S & (-S)
            T = (S - 1) & S
            while T > 0:
                if T & low:
                    R = S ^ T
                    for v in range(n):
                        c = dp[T, v] + dp[R, v]
                        if c < dp[S, v]:
                            dp[S, v] = c
                            split[S, v] = T
                T = (T - 1) & S
        _relax(dp[S], pred[S], indptr, indices, weights, queue, inq)
    return dp[full, terminals[0]], dp, pred, split


@njit(cache=True)
def saw_counts_grid(n_max):
    """Self-avoiding walks of each length 0..n_max from the origin of Z^2 (grid visited array)."""
    side = 2 * n_max + 3
    visited = np.zeros((side, side), dtype=np.bool_)
    counts = np.zeros(n_max + 1, dtype=np.int64)
    xs = np.zeros(n_max + 2, dtype=np.int64)
    ys = np.zeros(n_max + 2, dtype=np.int64)
    choice = np.zeros(n_max + 2, dtype=np.int64)
    dx = np.array([1, -1, 0, 0])
    dy = np.array([0, 0, 1, -1])
    o = n_max + 1
    xs[0] = o
    ys[0] = o
    visited[o, o] = True
    counts[0] = 1
    depth = 0
    choice[0] = 0
    while depth >= 0:
        if depth == n_max or choice[depth] == 4:
            if depth > 0:
                visited[xs[depth], ys[depth]] = False
            depth -= 1
            if depth >= 0:
                choice[depth] += 1
            continue
        k = choice[depth]
        nx = xs[depth] + dx[k]
        ny = ys[depth] + dy[k]
        if visited[nx, ny]:
            choice[depth] += 1
            continue
        depth += 1
        xs[depth] = nx
        ys[depth] = ny
        visited[nx, ny] = True
        counts[depth] += 1
        choice[depth] = 0
    return counts


@njit(cache=True)
def saw_counts_prefix(n_max, prefix):
    """Like :func:`saw_counts_grid` but only walks starting with the step codes in ``prefix``."""
    side = 2 * n_max + 3
    visited = np.zeros((side, side), dtype=np.bool_)
    counts = np.zeros(n_max + 1, dtype=np.int64)
    xs = np.zeros(n_max + 2, dtype=np.int64)
    ys = np.zeros(n_max + 2, dtype=np.int64)
    choice = np.zeros(n_max + 2, dtype=np.int64)
    dx = np.array([1, -1, 0, 0])
    dy = np.array([0, 0, 1, -1])
    o = n_max + 1
    xs[0] = o
    ys[0] = o
    visited[o, o] = True
    start = prefix.shape[0]
    if start > n_max:
        return counts
    for i in range(start):
        nx = xs[i] + dx[prefix[i]]
        ny = ys[i] + dy[prefix[i]]
        if visited[nx, ny]:
            return counts
        xs[i + 1] = nx
        ys[i + 1] = ny
        visited[nx, ny] = True
    counts[start] = 1
    depth = start
    choice[depth] = 0
    while depth >= start:
        if depth == n_max or choice[depth] == 4:
            if depth > start:
                visited[xs[depth], ys[depth]] = False
            depth -= 1
            if depth >= start:
                choice[depth] += 1
            continue
        k = choice[depth]
        nx = xs[depth] + dx[k]
        ny = ys[depth] + dy[k]
        if visited[nx, ny]:
            choice[depth] += 1
            continue
        depth += 1
        xs[depth] = nx
        ys[depth] = ny
        visited[nx, ny] = True
        counts[depth] += 1
        choice[depth] = 0
    return counts


@njit(cache=True)
def relator_dfs(m, length, level, first_letter, max_out):
    """Cyclically reduced words of exactly ``length`` that are trivial in Sol(m, level), level in {1, 2}.

    Letters are coded ``2*i`` (generator i+1) and ``2*i+1`` (its inverse).  The walk
    lives on Z^m; at level 2 every lattice edge must end with zero net flow, at
    level 1 only the endpoint must return.  Prefixes are pruned when the
    remaining steps cannot undo what has been done (total |flow| for level 2,
    L1 distance for level 1).  If ``first_letter >= 0`` the first letter is fixed.
    Returns ``(count, words)`` with at most ``max_out`` words stored.
    """
    side = 2 * length + 3
    o = length + 1
    nverts = side ** m
    stride = np.ones(m, dtype=np.int64)
    for i in range(1, m):
        stride[i] = stride[i - 1] * side
    flow = np.zeros(nverts * m, dtype=np.int64)
    pos = np.zeros(length + 1, dtype=np.int64)
    coord = np.zeros((length + 1, m), dtype=np.int64)
    letters = np.zeros(length, dtype=np.int64)
    choice = np.zeros(length + 1, dtype=np.int64)
    words = np.zeros((max_out, length), dtype=np.int64)
    origin = 0
    for i in range(m):
        origin += o * stride[i]
    pos[0] = origin
    for i in range(m):
        coord[0, i] = o
    count = 0
    weight = 0
    depth = 0
    nletters = 2 * m
    choice[0] = first_letter if first_letter >= 0 else 0
    while depth >= 0:
        last = nletters if (depth > 0 or first_letter < 0) else first_letter + 1
        if depth == length or choice[depth] >= last:
            if depth == length:
                ok = True
                if level == 2:
                    ok = weight == 0
                else:
                    ok = pos[depth] == origin
                if ok and (letters[0] ^ 1) != letters[length - 1]:
                    if count < max_out:
                        for j in range(length):
                            words[count, j] = letters[j]
                    count += 1
            # undo the step that led here
            depth -= 1
            if depth >= 0:
                k = letters[depth]
                g = k >> 1
                if k & 1:
                    e = pos[depth + 1] * m + g
                    before = flow[e]
                    flow[e] = before + 1
                else:
                    e = pos[depth] * m + g
                    before = flow[e]
                    flow[e] = before - 1
                weight += abs(flow[e]) - abs(before)
                choice[depth] += 1
            continue
        k = choice[depth]
        if depth > 0 and (letters[depth - 1] ^ 1) == k:
            choice[depth] += 1
            continue
        g = k >> 1
        if k & 1:
            npos = pos[depth] - stride[g]
            e = npos * m + g
            before = flow[e]
            flow[e] = before - 1
        else:
            npos = pos[depth] + stride[g]
            e = pos[depth] * m + g
            before = flow[e]
            flow[e] = before + 1
        nweight = weight + abs(flow[e]) - abs(before)
        remaining = length - depth - 1
        prune = False
        if level == 2:
            prune = nweight > remaining
        else:
            dist = 0
            for i in range(m):
                c = coord[depth, i]
                if i == g:
                    c += -1 if (k & 1) else 1
                dist += abs(c - o)
            prune = dist > remaining
        if prune:
            flow[e] = before
            choice[depth] += 1
            continue
        weight = nweight
        letters[depth] = k
        for i in range(m):
            coord[depth + 1, i] = coord[depth, i]
        coord[depth + 1, g] += -1 if (k & 1) else 1
        depth += 1
        pos[depth] = npos
        choice[depth] = 0
    return count, words[: min(count, max_out)]
