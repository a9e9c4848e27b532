import random
from pathlib import Path

import pytest

from conftest import load, load_map
from softuniform import fixture_path
from softuniform.documents import build_instance, serialize_mapping
from softuniform.errors import SoftError
from softuniform.generate import Profile, generate_document, generate_instance, generate_mapping, search_relaxed_gap
from softuniform.oracle import bridge_disagreements, oracle_report, restrict


def test_same_seed_same_bytes():
    for seed in (0, 1, 2**63 + 5):
        assert generate_document(seed) == generate_document(seed)
    assert generate_document(1) != generate_document(2)


def test_profile_bounds():
    prof = Profile(max_universe=4, max_params=2, max_base=3)
    for seed in range(200):
        doc = generate_instance(seed, prof)
        assert len(doc.universe) <= 4 and len(doc.parameters) <= 2 and len(doc.base) <= 3
        assert all(doc.sections[e] for e in doc.parameters)
    with pytest.raises(SoftError):
        Profile(max_universe=0)


def test_default_generation_is_valid():
    for seed in range(200):
        assert build_instance(generate_instance(seed)).base.is_valid


def test_allow_invalid_lets_rootless_bases_through():
    invalid = 0
    for seed in range(200):
        B = build_instance(generate_instance(seed, allow_invalid=True)).base
        assert B.report.axiom_ok("U1")
        invalid += not B.is_valid
    assert invalid > 0


def test_mappings_share_parameters():
    for seed in range(30):
        doc = generate_mapping(seed)
        assert doc.domain.parameters == doc.codomain.parameters


def test_stored_relaxed_gap_is_reproduced():
    gap = search_relaxed_gap()
    assert gap is not None
    stored = Path(fixture_path("relaxed_gap.yaml")).read_text()
    assert serialize_mapping(gap.document()) == stored


def test_restrict_keeps_one_parameter(discrete):
    R = restrict(discrete, "e2")
    assert list(R.host.params) == ["e2"] and R.is_valid


def test_oracle_on_fixture_bases(discrete, full):
    for B in (discrete, full):
        assert oracle_report(B).exit_code == 0


def test_bridge_on_single_parameter_metric():
    B = load("metric_single.yaml").base
    assert bridge_disagreements(B, random.Random(0), maps=10) == []


def test_oracle_on_random_instances():
    for seed in range(60):
        B = build_instance(generate_instance(seed)).base
        rep = oracle_report(B, seed=seed)
        assert rep.exit_code == 0, rep.to_text()


def test_oracle_on_invalid_base_only_compares_slices():
    B = build_instance(load_map("relaxed_gap.yaml").domain).base
    rep = oracle_report(B)
    assert [c.name for c in rep.checks] == ["slices-vs-classical"]
    assert rep.exit_code == 0
