import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from softuniform.core import (
    ParameterSet,
    SoftElement,
    SoftRelation,
    SoftSet,
    Universe,
    compose,
    diagonal,
    enumerate_soft_elements,
    inverse,
    is_subrelation,
    join,
    meet,
    relation_properties,
)
from softuniform.errors import SizeCapError, SoftError

U3 = Universe("abc")


def soft_set(sections, universe=U3):
    return SoftSet.from_sections(universe, ParameterSet(list(sections)), sections)


@st.composite
def relations(draw, host=None):
    if host is None:
        host = draw(hosts())
    graph = {}
    for e in host.params:
        sec = host.section(e)
        pairs = [(a, b) for a in sec for b in sec]
        graph[e] = draw(st.lists(st.sampled_from(pairs), unique=True)) if pairs else []
    return SoftRelation.from_pairs(host, graph)


@st.composite
def hosts(draw):
    n = draw(st.integers(1, 4))
    u = Universe("abcd"[:n])
    m = draw(st.integers(1, 3))
    params = [f"e{i}" for i in range(m)]
    sections = {e: draw(st.lists(st.sampled_from(list(u)), unique=True)) for e in params}
    return SoftSet.from_sections(u, ParameterSet(params), sections)


@st.composite
def relation_triples(draw):
    h = draw(hosts())
    return draw(relations(h)), draw(relations(h)), draw(relations(h))


def test_soft_elements_of_fixture(host):
    xs = enumerate_soft_elements(host)
    assert [x.names() for x in xs] == [("a", "b"), ("a", "c"), ("b", "b"), ("b", "c")]


def test_no_soft_elements_with_empty_section():
    assert enumerate_soft_elements(soft_set({"e1": "ab", "e2": ""})) == []


def test_singleton_product():
    assert len(enumerate_soft_elements(soft_set({"e": "a"}))) == 1


def test_element_cap(host):
    with pytest.raises(SizeCapError):
        enumerate_soft_elements(host, cap=3)


def test_soft_set_operations(host):
    A = SoftSet.from_sections(host.universe, host.params, {"e1": "a", "e2": "bc"})
    B = SoftSet.from_sections(host.universe, host.params, {"e1": "ab", "e2": "c"})
    assert A.union(B) == host
    assert A.intersection(B).sections() == {"e1": ("a",), "e2": ("c",)}
    assert host.difference(A).sections() == {"e1": ("b",), "e2": ()}
    assert A.issubset(host) and not host.issubset(A)
    x = SoftElement.from_names(host, {"e1": "a", "e2": "c"})
    assert x in A and x in B
    assert x.as_soft_set().issubset(A)


def test_soft_element_must_choose_inside_sections(host):
    with pytest.raises(SoftError):
        SoftElement.from_names(host, {"e1": "c", "e2": "b"})


def test_diagonal_examples():
    F = soft_set({"e1": "ab", "e2": ""})
    D = diagonal(F)
    assert D.pairs("e1") == (("a", "a"), ("b", "b"))
    assert D.pairs("e2") == ()
    p = relation_properties(D)
    assert p.everywhere("symmetric") and p.everywhere("transitive")


def test_inverse_and_compose_examples():
    F = soft_set({"e": "abc"})
    R = SoftRelation.from_pairs(F, {"e": [("a", "b")]})
    assert inverse(R).pairs("e") == (("b", "a"),)
    S = SoftRelation.from_pairs(F, {"e": [("a", "b")]})
    R2 = SoftRelation.from_pairs(F, {"e": [("b", "c")]})
    # S first, then R2
    assert compose(R2, S).pairs("e") == (("a", "c"),)
    assert compose(S, R2).pairs("e") == ()
    assert compose(R2, diagonal(F)) == R2


def test_relation_outside_section_square_rejected(host):
    with pytest.raises(SoftError):
        SoftRelation.from_pairs(host, {"e1": [("a", "c")]})


def test_single_pair_properties():
    F = soft_set({"e": "ab"})
    p = relation_properties(SoftRelation.from_pairs(F, {"e": [("a", "b")]}))
    # R∘R is empty, so transitivity holds vacuously
    assert (p.reflexive["e"], p.symmetric["e"], p.transitive["e"]) == (False, False, True)


def test_full_relation_properties(host):
    p = relation_properties(SoftRelation.full(host))
    assert all(p.everywhere(k) for k in ("reflexive", "symmetric", "transitive"))


@given(relations())
def test_inverse_is_involution(R):
    assert inverse(inverse(R)) == R


@given(hosts())
def test_inverse_of_diagonal(F):
    assert inverse(diagonal(F)) == diagonal(F)


@given(relation_triples())
def test_composition_associative(t):
    R, S, T = t
    assert compose(compose(R, S), T) == compose(R, compose(S, T))


@given(relation_triples())
def test_inverse_reverses_composition(t):
    R, S, _ = t
    assert inverse(compose(R, S)) == compose(inverse(S), inverse(R))


@given(relation_triples())
def test_lattice_laws(t):
    R, S, _ = t
    assert meet(R, join(R, S)) == R
    assert join(R, SoftRelation.empty(R.host)) == R
    assert is_subrelation(meet(R, S), R) and is_subrelation(R, join(R, S))


@given(relation_triples())
def test_subrelation_partial_order(t):
    R, S, T = t
    assert is_subrelation(R, R)
    if is_subrelation(R, S) and is_subrelation(S, R):
        assert R == S
    if is_subrelation(R, S) and is_subrelation(S, T):
        assert is_subrelation(R, T)


@settings(max_examples=200)
@given(relations())
def test_property_characterisations(R):
    # relation_properties raises if the quantifier and algebraic routes disagree
    p = relation_properties(R)
    D = diagonal(R.host)
    for e in R.host.params:
        k = R.host.params.index(e)
        assert p.reflexive[e] == all(R.holds(k, i, i) for i in range(len(R.host.universe)) if R.host.masks[k] >> i & 1)
    assert is_subrelation(D, R) == p.everywhere("reflexive")
    assert (inverse(R) == R) == p.everywhere("symmetric")
    assert is_subrelation(compose(R, R), R) == p.everywhere("transitive")
