"""Ball sizes of Sol(m, d), self-avoiding walks on Z^2, n-th root estimates."""

from __future__ import annotations

import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .config import CACHE_VERSION, DEFAULT_MEM_LIMIT_MIB, BudgetExceeded
from .tower import GroupSpec, SolubleElement, deserialize, from_word, identity, serialize

SAW_CONSTANT = "2.63815853034"  # cited lower bound on the SAW growth rate, reference text only
SAW_BOUND = 20


@dataclass
class GrowthSeries:
    counts: list
    kind: str  # "ball" | "sphere" | "saw"
    spec: GroupSpec | str
    truncated: bool = False
    notes: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        rows = ["n,count,nth_root"]
        for n, c in enumerate(self.counts):
            if self.kind == "saw" and n == 0:
                continue
            root = "" if n == 0 else f"{c ** (1.0 / n):.12f}"
            rows.append(f"{n},{c},{root}")
        return "\n".join(rows) + "\n"


def _letters(m):
    out = []
    for i in range(1, m + 1):
        out += [i, -i]
    return out


def _element_bytes(e: SolubleElement) -> int:
    # rough footprint of one stored element and its dict slot
    size = 200
    if e.spec.d >= 2:
        size += 150 * len(e.payload)
        if e.spec.d >= 3:
            size += sum(150 * len(s.payload) for (s, _) in e.payload.values)
    return size


def _expand(chunk, letters):
    return [[e.mul_letter(x) for x in letters] for e in chunk]


def bfs_layers(spec: GroupSpec, radius: int, mem_limit_mib: int | None = None, centre: SolubleElement | None = None,
               threads: int = 1, start_layers: list | None = None):
    """Yield spheres 0..radius of the Cayley graph, level-synchronously.

    Every element is expanded once.  Neighbour generation may be spread over
    ``threads`` workers; merging runs in frontier order so the layers do not
    depend on the worker count.
    """
    limit = (mem_limit_mib or DEFAULT_MEM_LIMIT_MIB) * (1 << 20)
    letters = _letters(spec.m)
    if start_layers:
        layers = [list(layer) for layer in start_layers]
    else:
        layers = [[centre if centre is not None else identity(spec)]]
    used = 0
    for layer in layers:
        for e in layer:
            used += _element_bytes(e)
    yield from layers
    prev = set(layers[-2]) if len(layers) > 1 else set()
    cur = layers[-1]
    cur_set = set(cur)
    for r in range(len(layers), radius + 1):
        if threads > 1 and len(cur) > 1000:
            size = (len(cur) + threads - 1) // threads
            chunks = [cur[i:i + size] for i in range(0, len(cur), size)]
            with ThreadPoolExecutor(threads) as pool:
                expanded = [row for part in pool.map(lambda c: _expand(c, letters), chunks) for row in part]
        else:
            expanded = _expand(cur, letters)
        nxt = []
        seen = set()
        for row in expanded:
            for nb in row:
                if nb in prev or nb in cur_set or nb in seen:
                    continue
                seen.add(nb)
                nxt.append(nb)
                used += _element_bytes(nb)
        if used > limit:
            raise BudgetExceeded(f"ball of radius {r} exceeds the memory guard of {limit >> 20} MiB")
        yield nxt
        prev, cur, cur_set = cur_set, nxt, seen


def _cache_path(cache_dir: str, spec: GroupSpec, level: int) -> str:
    return os.path.join(cache_dir, f"ball-v{CACHE_VERSION}-m{spec.m}-d{spec.d}-r{level}.jsonl")


def _load_level(path: str, spec: GroupSpec):
    with open(path) as fh:
        header = json.loads(fh.readline())
        if header.get("version") != CACHE_VERSION or header.get("m") != spec.m or header.get("d") != spec.d:
            return None
        return [deserialize(line) for line in fh if line.strip()]


def _save_level(path: str, spec: GroupSpec, level: int, layer: list):
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        fh.write(json.dumps({"version": CACHE_VERSION, "m": spec.m, "d": spec.d, "level": level}) + "\n")
        for e in layer:
            fh.write(serialize(e) + "\n")
    os.replace(tmp, path)


def sphere_layers(spec: GroupSpec, radius: int, mem_limit_mib: int | None = None, cache_dir: str | None = None,
                  threads: int = 1):
    """All spheres up to ``radius``, resuming from and persisting to ``cache_dir`` when given."""
    layers = []
    if cache_dir:
        os.makedirs(cache_dir, exist_ok=True)
        for r in range(radius + 1):
            path = _cache_path(cache_dir, spec, r)
            if not os.path.exists(path):
                break
            layer = _load_level(path, spec)
            if layer is None:
                break
            layers.append(layer)
    if len(layers) > radius:
        return layers[: radius + 1]
    out = []
    for r, layer in enumerate(bfs_layers(spec, radius, mem_limit_mib, threads=threads, start_layers=layers or None)):
        out.append(layer)
        if cache_dir and r >= len(layers):
            _save_level(_cache_path(cache_dir, spec, r), spec, r, layer)
    return out


def ball_sizes(spec: GroupSpec, n_max: int, mem_limit_mib: int | None = None, cache_dir: str | None = None,
               threads: int = 1) -> GrowthSeries:
    counts = []
    total = 0
    truncated = False
    try:
        if cache_dir:
            layers = sphere_layers(spec, n_max, mem_limit_mib, cache_dir, threads)
        else:
            layers = bfs_layers(spec, n_max, mem_limit_mib, threads=threads)
        for layer in layers:
            total += len(layer)
            counts.append(total)
    except BudgetExceeded as exc:
        truncated = True
        return GrowthSeries(counts, "ball", spec, truncated, {"guard": str(exc)})
    return GrowthSeries(counts, "ball", spec, truncated)


def tree_ball_size(m: int, n: int) -> int:
    """Reduced-word count 1 + sum 2m(2m-1)^(i-1); the ball size while balls are trees."""
    return 1 + sum(2 * m * (2 * m - 1) ** (i - 1) for i in range(1, n + 1))


# ---------------------------------------------------------------- SAW

_STEPS = ((1, 0), (-1, 0), (0, 1), (0, -1))  # a, A, b, B


def saw_counts_set(n_max: int) -> list[int]:
    """SAW counts c_0..c_n by recursive backtracking with a hash-set of visited points."""
    counts = [0] * (n_max + 1)
    visited = {(0, 0)}
    sys.setrecursionlimit(max(sys.getrecursionlimit(), 4 * n_max + 100))

    def rec(x, y, n):
        counts[n] += 1
        if n == n_max:
            return
        for dx, dy in _STEPS:
            p = (x + dx, y + dy)
            if p not in visited:
                visited.add(p)
                rec(p[0], p[1], n + 1)
                visited.remove(p)

    rec(0, 0, 0)
    return counts


def saw_counts_kernel(n_max: int, threads: int = 1) -> list[int]:
    """SAW counts from the grid kernel, split over the 16 two-step prefixes."""
    if n_max < 2:
        return [int(c) for c in _kernels.saw_counts_grid(n_max)]
    prefixes = [np.array([i, j], dtype=np.int64) for i in range(4) for j in range(4)]
    run = lambda p: _kernels.saw_counts_prefix(n_max, p)
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            parts = list(pool.map(run, prefixes))
    else:
        parts = [run(p) for p in prefixes]
    total = np.sum(parts, axis=0)
    total[0], total[1] = 1, 4
    return [int(c) for c in total]


def saw_counts(n_max: int, bound: int = SAW_BOUND, threads: int = 1) -> GrowthSeries:
    if n_max > bound:
        raise BudgetExceeded(f"n = {n_max} exceeds the SAW bound {bound}")
    return GrowthSeries(saw_counts_kernel(n_max, threads), "saw", "Z2",
                        notes={"reference_rate": SAW_CONSTANT})


def enumerate_saws(n: int):
    """Every SAW of length ``n`` from the origin, as a letter tuple (a=+x, b=+y)."""
    letter = {(1, 0): 1, (-1, 0): -1, (0, 1): 2, (0, -1): -2}
    path = []
    visited = {(0, 0)}

    def rec(x, y):
        if len(path) == n:
            yield tuple(path)
            return
        for dx, dy in _STEPS:
            p = (x + dx, y + dy)
            if p not in visited:
                visited.add(p)
                path.append(letter[(dx, dy)])
                yield from rec(*p)
                path.pop()
                visited.remove(p)

    yield from rec(0, 0)


def saw_injects_into_group(n: int, spec: GroupSpec = GroupSpec(2, 2)) -> tuple[bool, int]:
    """Map every length-n SAW to Sol(2, 2); report whether all images differ, and how many there are."""
    seen = set()
    count = 0
    for w in enumerate_saws(n):
        seen.add(from_word(list(w), spec))
        count += 1
    return len(seen) == count, count


def rate_estimates(series: GrowthSeries) -> list[float]:
    """``counts[n] ** (1/n)`` for n >= 1; no extrapolation."""
    return [series.counts[n] ** (1.0 / n) for n in range(1, len(series.counts))]

