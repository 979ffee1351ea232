import pytest

from cayleyflows import flows as fl
from cayleyflows.deadend import (
    BaseData, DepthCertificate, DepthError, construct_theorem1, nonstrict_depth, paper_example,
    strict_depth, verify_certificate,
)
from cayleyflows.flows import Flow, LatticeGraph
from cayleyflows.geodesic import bfs_ball, element_length, length_exact_metabelian
from cayleyflows.tower import GroupSpec, SolubleElement, from_word, identity
from cayleyflows.words import enumerate_irreducible

S22 = GroupSpec(2, 2)
Z2 = LatticeGraph(2)


@pytest.fixture(scope="module")
def g():
    return paper_example()


@pytest.fixture(scope="module")
def z2_construction():
    return construct_theorem1(GroupSpec(2, 1), 1)


def test_example_shape(g):
    assert g == from_word("bbaBaBBABAAbAbbabaBB", S22)
    assert fl.classify(g.payload, Z2).kind == "balanced"
    sup = fl.support(g.payload, Z2)
    assert len(sup.components) == 1 and len(sup.edges) == 16
    assert min(sum(map(abs, v)) for v in sup.vertices) == 2
    assert fl.weight(g.payload) == 16
    assert element_length(g) == 20


def test_example_chain(g):
    for w in enumerate_irreducible(2, 1):
        assert element_length(g * from_word(w, S22)) == 19
    for w in enumerate_irreducible(2, 2):
        assert element_length(g * from_word(w, S22)) == 18
    assert element_length(g * from_word("abA", S22)) == 19


def test_example_depth(g):
    r = strict_depth(g, 5)
    assert r.strict_depth == 2 and r.is_dead_end
    assert r.chain[0] == (1, [19]) and r.chain[1] == (2, [18])
    assert len(r.limiting_witness) == 3 and r.limiting_length >= 18
    assert nonstrict_depth(g, 3) >= 2


def test_small_depths():
    assert strict_depth(from_word("a", S22), 3).strict_depth == 0
    r = strict_depth(identity(S22), 3)
    assert r.strict_depth == 0 and "identity" in r.diagnostic
    assert nonstrict_depth(identity(S22), 3) == 0


def test_dead_ends_of_small_length():
    ball = bfs_ball(S22, 10)
    dead = [x for x, n in ball.items() if n and strict_depth(x, 1).strict_depth >= 1]
    assert dead  # there are dead ends already below length 11
    for x in dead:
        assert nonstrict_depth(x, 2) >= 1
        assert strict_depth(x, 8).strict_depth <= nonstrict_depth(x, 8)


def test_depth_error_identifies_element():
    def broken(x):
        if x.payload and len(x.payload) > 16:
            raise ValueError("boom")
        return element_length(x)

    with pytest.raises(DepthError) as info:
        strict_depth(paper_example(), 2, broken)
    assert info.value.element is not None


def test_z2_construction(z2_construction):
    x, cert = z2_construction
    assert x.spec == S22 and cert.valid
    assert cert.k == 1 and cert.rho_lower == 4
    ok, diag = verify_certificate(cert, x)
    assert ok, diag
    r = length_exact_metabelian(x, witness=False)
    assert r.length == cert.N + 2 and r.connection_cost == 1
    rep = strict_depth(x, 3)
    assert rep.strict_depth >= 1
    assert nonstrict_depth(x, 1) >= 1


def test_certificate_rejects_inflated_k(z2_construction):
    x, cert = z2_construction
    bad = DepthCertificate(**{**cert.__dict__, "k": 2})
    assert not bad.valid
    assert not verify_certificate(bad, x)[0]


def test_certificate_rejects_disconnected_support(z2_construction):
    x, cert = z2_construction
    values = dict(x.payload.values)
    edge = min(values)
    del values[edge]
    y = SolubleElement(S22, Flow(values, 2))
    assert not verify_certificate(cert, y)[0]


def test_certificate_rejects_wrong_weight(z2_construction):
    x, cert = z2_construction
    bad = DepthCertificate(**{**cert.__dict__, "N": cert.N + 1})
    assert not verify_certificate(bad, x)[0]


def test_multiplier_schemes():
    x, cert = construct_theorem1(GroupSpec(2, 1), 1, multipliers="loop")
    assert verify_certificate(cert, x)[0]
    assert strict_depth(x, 2).strict_depth >= 1
    with pytest.raises(DepthError):
        construct_theorem1(GroupSpec(2, 1), 1, multipliers="unit")


def test_proof_multipliers_never_cancel(z2_construction):
    x, cert = z2_construction
    assert all(v != 0 for v in x.payload.values.values())
    assert fl.weight(x.payload) == cert.N
    assert fl.classify(x.payload, Z2).kind == "balanced"


def test_construction_rejects_large_k():
    with pytest.raises(DepthError):
        construct_theorem1(GroupSpec(2, 1), 2)


def test_base_data_sphere():
    base = BaseData(Z2, 4, [])
    assert sorted(base.sphere(1)) == [(-1, 0), (0, -1), (0, 1), (1, 0)]
    assert len(base.sphere(2)) == 8


@pytest.mark.slow
def test_d3_construction_certifies_depth_6():
    x, cert = construct_theorem1(GroupSpec(2, 2), 6)
    assert x.spec == GroupSpec(2, 3)
    assert cert.k == 6 and cert.rho_lower == 14 and cert.valid
    ok, diag = verify_certificate(cert, x)
    assert ok, diag
    assert cert.k >= 2 * 3 ** (3 - 2) - 1
