"""Shortest nontrivial relations of Sol(m, d)."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import permutations, product

import numpy as np

from . import _kernels
from .tower import GroupSpec, from_word, identity
from .words import FreeWord, cyclic_reduce, format_letters


@dataclass
class RelationResult:
    rho: int | None
    lower_bound: int
    witnesses: list = field(default_factory=list)  # one canonical FreeWord per symmetry orbit
    searched_up_to: int = 0
    note: str = ""

    def to_dict(self) -> dict:
        return {"rho": self.rho, "lower_bound": self.lower_bound, "witnesses": [str(w) for w in self.witnesses]}


def _decode(codes, m) -> tuple[int, ...]:
    return tuple((int(c) >> 1) + 1 if not (int(c) & 1) else -((int(c) >> 1) + 1) for c in codes)


def _order(x: int) -> int:
    return 2 * (abs(x) - 1) + (x < 0)


def orbit(letters: tuple[int, ...], m: int) -> set:
    """Images under cyclic rotation, inversion and signed generator permutations."""
    out = set()
    n = len(letters)
    inv = tuple(-x for x in reversed(letters))
    for perm in permutations(range(1, m + 1)):
        for signs in product((1, -1), repeat=m):
            def phi(x):
                s = 1 if x > 0 else -1
                return s * signs[abs(x) - 1] * perm[abs(x) - 1]

            for base in (letters, inv):
                img = tuple(phi(x) for x in base)
                for r in range(n):
                    out.add(img[r:] + img[:r])
    return out


def canonical_rep(letters: tuple[int, ...], m: int) -> tuple[int, ...]:
    return min(orbit(letters, m), key=lambda w: [_order(x) for x in w])


def relators_of_length(spec: GroupSpec, length: int, first_letter: int | None = None,
                       max_out: int = 1_000_000) -> tuple[int, list]:
    """Cyclically reduced words of exactly ``length`` trivial in ``spec`` (d <= 2)."""
    if spec.d > 2:
        raise ValueError("the lattice kernel covers d <= 2 only")
    first = -1 if first_letter is None else _order(first_letter)
    count, words = _kernels.relator_dfs(spec.m, length, spec.d, first, max_out)
    return int(count), [_decode(w, spec.m) for w in np.asarray(words)]


def relation_length_lower_bound(d: int) -> int:
    """4 * 3^(d-1), from rho_1 = 4 and rho_(d+1) >= 3 rho_d."""
    return 4 * 3 ** (d - 1)


def shortest_relation(spec: GroupSpec, max_len: int, symmetry: bool = True) -> RelationResult:
    if spec.m < 2:
        # Z has no nonempty cyclically reduced relators at any level
        return RelationResult(None, max_len + 1, [], max_len, "rank 1: no relations")
    if spec.d >= 3:
        bound = relation_length_lower_bound(spec.d)
        lower = shortest_relation(GroupSpec(spec.m, spec.d - 1), max(max_len, 3 * bound), symmetry)
        if lower.rho is not None:
            bound = max(bound, 3 * lower.rho)
        if max_len < bound:
            return RelationResult(None, bound, [], 0, "below the recursive lower bound; not searched")
        # relators here are relators one level down, so the level-2 pruning stays sound
        return _generic_search(spec, max_len, bound)
    first = 1 if symmetry else None
    for length in range(1, max_len + 1):
        count, words = relators_of_length(spec, length, first)
        if count:
            reps = sorted({canonical_rep(w, spec.m) for w in words}, key=lambda w: [_order(x) for x in w])
            wits = [FreeWord(w, spec.m) for w in reps]
            for w in wits:
                if not (from_word(w, spec).is_identity() and w.is_cyclically_reduced() and len(w)):
                    raise AssertionError(f"kernel reported {w} which is not a relator of {spec}")
            return RelationResult(length, length, wits, length)
    return RelationResult(None, max(max_len + 1, relation_length_lower_bound(spec.d)), [], max_len)


def _generic_search(spec: GroupSpec, max_len: int, start: int) -> RelationResult:
    """Depth-first search with the word problem of ``spec`` as the final test."""
    level2 = GroupSpec(spec.m, 2)
    letters = [x for i in range(1, spec.m + 1) for x in (i, -i)]
    for length in range(start, max_len + 1):
        found = []
        word: list[int] = []

        def rec(e2):
            remaining = length - len(word)
            if len(e2.payload) > remaining:
                return
            if remaining == 0:
                if word[0] != -word[-1] and from_word(word, spec).is_identity():
                    found.append(tuple(word))
                return
            for x in letters:
                if word and word[-1] == -x:
                    continue
                if not word and x != 1:
                    continue
                word.append(x)
                rec(e2.mul_letter(x))
                word.pop()

        rec(identity(level2))
        if found:
            reps = sorted({canonical_rep(w, spec.m) for w in found}, key=lambda w: [_order(x) for x in w])
            return RelationResult(length, length, [FreeWord(w, spec.m) for w in reps], length)
    return RelationResult(None, max_len + 1, [], max_len)


def search_by_equality(spec: GroupSpec, max_len: int) -> RelationResult:
    """Slow reference search: every cyclically reduced word with zero abelianization, tested in ``spec``."""
    letters = [x for i in range(1, spec.m + 1) for x in (i, -i)]
    for length in range(1, max_len + 1):
        found = []
        word: list[int] = []
        ab = [0] * spec.m

        def rec():
            remaining = length - len(word)
            if sum(abs(a) for a in ab) > remaining:
                return
            if remaining == 0:
                if word[0] != -word[-1] and from_word(word, spec).is_identity():
                    found.append(tuple(word))
                return
            for x in letters:
                if word and word[-1] == -x:
                    continue
                word.append(x)
                ab[abs(x) - 1] += 1 if x > 0 else -1
                rec()
                ab[abs(x) - 1] -= 1 if x > 0 else -1
                word.pop()

        rec()
        if found:
            reps = sorted({canonical_rep(w, spec.m) for w in found}, key=lambda w: [_order(x) for x in w])
            return RelationResult(length, length, [FreeWord(w, spec.m) for w in reps], length)
    return RelationResult(None, max_len + 1, [], max_len)


def check_recursion(rho_d: int, rho_d_plus_1: int) -> bool:
    return rho_d_plus_1 >= 3 * rho_d


def verify_no_positive_relations(spec: GroupSpec, max_len: int = 0, exhaustive: bool = False) -> tuple[bool, str]:
    """No nonempty positive word is trivial in ``spec``.

    Every relator lies in the commutator subgroup, so its exponent sums vanish,
    which a nonempty positive word cannot satisfy.  ``exhaustive`` also tests
    every positive word up to ``max_len`` directly.
    """
    if spec.d < 1:
        raise ValueError("d >= 1 required")
    if not exhaustive:
        return True, "analytic: relators have zero exponent sum on every generator"
    for n in range(1, max_len + 1):
        for w in product(range(1, spec.m + 1), repeat=n):
            if from_word(list(w), spec).is_identity():
                return False, f"positive relator {format_letters(w)}"
    return True, f"exhaustive: no positive relator up to length {max_len}"


def is_relator(w: FreeWord, spec: GroupSpec) -> bool:
    return from_word(w, spec).is_identity()


def cyclic_canonical(w: FreeWord) -> FreeWord:
    return FreeWord(canonical_rep(cyclic_reduce(w).letters, w.m), w.m)
