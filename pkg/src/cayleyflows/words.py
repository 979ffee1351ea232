"""Free-group words over ``m`` generators.

A letter is a nonzero integer: ``+i`` is the ``i``-th generator and ``-i`` its
inverse (``1 <= i <= m``).  In text, generator ``i`` is the ``i``-th lowercase
Latin letter and its inverse the matching uppercase letter, so ``"abAB"`` is the
commutator of the first two generators.  The literal ``"1"`` is the empty word.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from itertools import product
from typing import Iterable, Iterator, Sequence

MAX_RANK = 26


class WordError(ValueError):
    pass


@dataclass(frozen=True)
class FreeWord:
    """A freely reduced word.  Construct through :func:`reduce` or :func:`parse`."""

    letters: tuple[int, ...]
    m: int

    def __post_init__(self):
        if not 1 <= self.m <= MAX_RANK:
            raise WordError(f"rank must be in 1..{MAX_RANK}, got {self.m}")
        prev = 0
        for x in self.letters:
            if x == 0 or abs(x) > self.m:
                raise WordError(f"letter {x} out of range for rank {self.m}")
            if x == -prev:
                raise WordError("word is not freely reduced")
            prev = x

    def __len__(self):
        return len(self.letters)

    def __iter__(self):
        return iter(self.letters)

    def __str__(self):
        return format_letters(self.letters)

    def __repr__(self):
        return f"FreeWord({str(self)!r}, m={self.m})"

    def __mul__(self, other: FreeWord) -> FreeWord:
        if other.m != self.m:
            raise WordError("rank mismatch")
        return reduce(self.letters + other.letters, self.m)

    def inverse(self) -> FreeWord:
        return FreeWord(tuple(-x for x in reversed(self.letters)), self.m)

    def is_cyclically_reduced(self) -> bool:
        return len(self.letters) < 2 or self.letters[0] != -self.letters[-1]


def letter_char(x: int) -> str:
    c = chr(ord("a") + abs(x) - 1)
    return c if x > 0 else c.upper()


def format_letters(letters: Iterable[int]) -> str:
    s = "".join(letter_char(x) for x in letters)
    return s or "1"


def _check_range(letters: Sequence[int], m: int):
    for x in letters:
        if x == 0 or abs(x) > m:
            raise WordError(f"letter {x} out of range for rank {m}")


def reduce(raw: Iterable[int], m: int) -> FreeWord:
    """Free reduction by a single stack pass."""
    stack: list[int] = []
    raw = list(raw)
    _check_range(raw, m)
    for x in raw:
        if stack and stack[-1] == -x:
            stack.pop()
        else:
            stack.append(x)
    return FreeWord(tuple(stack), m)


def cyclic_reduce(w: FreeWord) -> FreeWord:
    """Strip mutually inverse first/last letters; the result is a conjugate of ``w``."""
    letters = w.letters
    i, j = 0, len(letters)
    while j - i >= 2 and letters[i] == -letters[j - 1]:
        i += 1
        j -= 1
    return FreeWord(letters[i:j], w.m)


def parse_letters(text: str) -> list[int]:
    """Letters of ``text`` without reducing.

    Accepts the compact form ``"abAB"``, the literal ``"1"``, and the caret form
    ``"a b a^-1 b^-1"``, where any letter or parenthesised group may carry an
    integer exponent: ``"b^2 (a b^-1)^2"``.
    """
    text = text.strip()
    if text in ("", "1"):
        return []
    if re.fullmatch(r"[a-zA-Z]+", text):
        return [(ord(c) - ord("a") + 1) if c.islower() else -(ord(c) - ord("A") + 1) for c in text]
    tokens = re.findall(r"[a-zA-Z]|\(|\)|\^|-?\d+|\S", text)
    pos = 0

    def seq() -> list[int]:
        nonlocal pos
        out: list[int] = []
        while pos < len(tokens) and tokens[pos] != ")":
            tok = tokens[pos]
            if tok == "(":
                pos += 1
                body = seq()
                if pos >= len(tokens) or tokens[pos] != ")":
                    raise WordError(f"unbalanced parentheses in {text!r}")
                pos += 1
            elif tok.isalpha():
                g = ord(tok.lower()) - ord("a") + 1
                body = [g if tok.islower() else -g]
                pos += 1
            else:
                raise WordError(f"unexpected {tok!r} in {text!r}")
            if pos < len(tokens) and tokens[pos] == "^":
                if pos + 1 >= len(tokens) or not re.fullmatch(r"-?\d+", tokens[pos + 1]):
                    raise WordError(f"bad exponent in {text!r}")
                e = int(tokens[pos + 1])
                pos += 2
                if e < 0:
                    body = [-x for x in reversed(body)]
                body = body * abs(e)
            out += body
        return out

    letters = seq()
    if pos != len(tokens):
        raise WordError(f"unbalanced parentheses in {text!r}")
    return letters


def parse(text: str, m: int | None = None) -> FreeWord:
    """Parse and freely reduce.  ``m`` defaults to the highest generator used (at least 2)."""
    letters = parse_letters(text)
    if m is None:
        m = max([2] + [abs(x) for x in letters])
    return reduce(letters, m)


def _alphabet(m: int) -> list[int]:
    # a < A < b < B < ...
    out = []
    for i in range(1, m + 1):
        out += [i, -i]
    return out


def enumerate_irreducible(m: int, k: int) -> Iterator[FreeWord]:
    """All freely reduced words of length exactly ``k``, in lexicographic order a < A < b < B."""
    if m < 1 or k < 0:
        raise WordError("need m >= 1 and k >= 0")
    alphabet = _alphabet(m)
    if k == 0:
        yield FreeWord((), m)
        return
    word: list[int] = []

    def rec():
        if len(word) == k:
            yield FreeWord(tuple(word), m)
            return
        for x in alphabet:
            if word and word[-1] == -x:
                continue
            word.append(x)
            yield from rec()
            word.pop()

    yield from rec()


def irreducible_count(m: int, k: int) -> int:
    return 1 if k == 0 else 2 * m * (2 * m - 1) ** (k - 1)


def enumerate_irreducible_range(m: int, k: int, start: int, stop: int) -> Iterator[FreeWord]:
    """Words ``start..stop-1`` of :func:`enumerate_irreducible`, addressed by rank.

    The i-th word is decoded directly so disjoint ranges can be swept independently.
    """
    alphabet = _alphabet(m)
    total = irreducible_count(m, k)
    for idx in range(max(start, 0), min(stop, total)):
        if k == 0:
            yield FreeWord((), m)
            continue
        block = (2 * m - 1) ** (k - 1)
        first, rest = divmod(idx, block)
        letters = [alphabet[first]]
        for pos in range(k - 1):
            block //= 2 * m - 1
            choice, rest = divmod(rest, block)
            allowed = [x for x in alphabet if x != -letters[-1]]
            letters.append(allowed[choice])
        yield FreeWord(tuple(letters), m)


def enumerate_reduced_upto(m: int, k: int) -> Iterator[FreeWord]:
    for j in range(k + 1):
        yield from enumerate_irreducible(m, j)


def all_raw_words(m: int, k: int) -> Iterator[tuple[int, ...]]:
    """Every (not necessarily reduced) letter sequence of length ``k``."""
    return product(_alphabet(m), repeat=k)
