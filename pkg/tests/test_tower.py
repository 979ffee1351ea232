import json

import pytest

from cayleyflows import flows as fl
from cayleyflows.geodesic import bfs_ball
from cayleyflows.tower import (
    GroupSpec, SpecError, abelianization, canonical_hash, deserialize, equals, from_word, graph_of,
    identity, invert, multiply, serialize, word_of,
)
from cayleyflows.words import parse, reduce

from conftest import random_word

SPECS = [GroupSpec(2, 1), GroupSpec(2, 2), GroupSpec(2, 3), GroupSpec(3, 2)]


def test_from_word_examples():
    assert from_word("ABab", GroupSpec(2, 1)).is_identity()
    assert not from_word("ABab", GroupSpec(2, 2)).is_identity()
    for spec in SPECS:
        assert from_word("1", spec) == identity(spec)


def test_spec_guards():
    with pytest.raises(SpecError):
        GroupSpec(0, 2)
    with pytest.raises(SpecError):
        GroupSpec(2, 7)
    with pytest.raises(SpecError):
        equals(from_word("a", GroupSpec(2, 2)), from_word("a", GroupSpec(2, 1)))
    with pytest.raises(SpecError):
        multiply(from_word("a", GroupSpec(2, 2)), from_word("a", GroupSpec(3, 2)))


@pytest.mark.parametrize("spec", SPECS, ids=str)
def test_group_axioms(spec, rng):
    e = identity(spec)
    n = 1000 if spec.d < 3 else 300
    for _ in range(n):
        x, y, z = (from_word(random_word(rng, spec.m, rng.randint(0, 8)), spec) for _ in range(3))
        assert (x * y) * z == x * (y * z)
        assert e * x == x == x * e
        assert multiply(x, invert(x)).is_identity()
        assert multiply(invert(x), x).is_identity()


@pytest.mark.parametrize("spec", SPECS, ids=str)
def test_multiplication_matches_concatenation(spec, rng):
    n = 1000 if spec.d < 3 else 300
    for _ in range(n):
        u = random_word(rng, spec.m, rng.randint(0, 10))
        v = random_word(rng, spec.m, rng.randint(0, 10))
        assert from_word(u, spec) * from_word(v, spec) == from_word(reduce(u + v, spec.m), spec)


def test_endpoint_is_derived_from_payload(rng):
    spec = GroupSpec(2, 3)
    for _ in range(50):
        x = from_word(random_word(rng, 2, 9), spec) * from_word(random_word(rng, 2, 5), spec)
        rep = fl.classify(x.payload, graph_of(spec))
        derived = graph_of(spec).identity if rep.kind == "balanced" else rep.v_plus
        assert x.endpoint == derived


def test_equality_and_hash():
    spec = GroupSpec(2, 2)
    ab, ba = from_word("ab", spec), from_word("ba", spec)
    assert serialize(ab) != serialize(ba) and not equals(ab, ba)
    w = from_word("abbA", spec)
    r = parse("aabABAbaaBAbAB")
    assert equals(w, from_word(reduce(parse("abbA").letters + r.letters, 2), spec))
    assert canonical_hash(w) == canonical_hash(from_word("abbAaA", spec))


def random_relator(rng, spec, n):
    """A word trivial in ``spec``: a random walk closed up by a shortest return word."""
    w = random_word(rng, spec.m, n)
    back = list(word_of(invert(from_word(w, spec)))) if spec.d > 1 else None
    if spec.d == 1:
        end = from_word(w, spec).payload
        back = []
        for i, a in enumerate(end, start=1):
            back += [-i if a > 0 else i] * abs(a)
    r = reduce(w + back, spec.m)
    assert from_word(r, spec).is_identity()
    return list(r.letters)


@pytest.mark.parametrize("d", [2, 3])
def test_commutators_of_relators_vanish(d, rng):
    lower = GroupSpec(2, d - 1)
    spec = GroupSpec(2, d)
    for _ in range(1000):
        r1 = random_relator(rng, lower, rng.randint(1, 6))
        r2 = random_relator(rng, lower, rng.randint(1, 6))
        inv = lambda w: [-x for x in reversed(w)]
        c = reduce(inv(r1) + inv(r2) + r1 + r2, 2)
        assert from_word(c, spec).is_identity()


def test_factors_through_free_reduction(rng):
    spec = GroupSpec(2, 3)
    for _ in range(100):
        w = random_word(rng, 2, 8)
        i = rng.randint(0, len(w))
        padded = w[:i] + [1, -1, -2, 2] + w[i:]
        assert from_word(padded, spec) == from_word(w, spec)


def test_abelianization():
    spec = GroupSpec(2, 2)
    assert abelianization(from_word("aab", spec)) == (2, 1)
    assert abelianization(from_word("ABab", spec)) == (0, 0)
    assert abelianization(identity(spec)) == (0, 0)
    assert abelianization(from_word("aabBBB", GroupSpec(2, 3))) == (2, -2)
    assert abelianization(from_word("aab", GroupSpec(2, 1))) == (2, 1)


def test_parity_against_lengths():
    spec = GroupSpec(2, 2)
    for x, n in bfs_ball(spec, 8).items():
        assert n % 2 == sum(abs(a) for a in abelianization(x)) % 2


@pytest.mark.parametrize("spec", SPECS, ids=str)
def test_serialization_round_trip(spec, rng):
    for _ in range(30):
        x = from_word(random_word(rng, spec.m, rng.randint(0, 9)), spec)
        text = serialize(x)
        assert deserialize(text) == x
        assert serialize(deserialize(text)) == text
        doc = json.loads(text)
        assert list(doc) == sorted(doc) and doc["m"] == spec.m and doc["d"] == spec.d


def test_word_of_represents(rng):
    for spec in SPECS:
        for _ in range(30):
            x = from_word(random_word(rng, spec.m, rng.randint(0, 9)), spec)
            assert from_word(word_of(x), spec) == x
