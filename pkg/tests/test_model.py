import random

import pytest
from hypothesis import given, settings, strategies as st

from scenariogen import (
    ChildGroup,
    DomainError,
    FeatureDiagram,
    GroupKind,
    IndividualMapping,
    Kind,
    Scenario,
    SystemModel,
    is_valid_scenario,
    load_model,
    validate_model,
)
from scenariogen.formats import FIXTURES, fixture_text, suite_from_csv

from oracles import all_configs, random_system, system_valid


def _codes(m):
    return sorted(i.code for i in validate_model(m))


def _minimal():
    return SystemModel(FeatureDiagram("C", kind=Kind.CONTEXT), FeatureDiagram("F"))


@pytest.mark.parametrize("name", FIXTURES)
def test_fixtures_are_well_formed(name):
    assert validate_model(load_model(name)) == []


def test_minimal_model_is_well_formed():
    assert validate_model(_minimal()) == []


def test_feature_in_mapping_sources():
    m = SystemModel(
        FeatureDiagram("C", ((("C", ChildGroup(GroupKind.OPTIONAL, ("X",)))),), kind=Kind.CONTEXT),
        FeatureDiagram("F", (("F", ChildGroup(GroupKind.OPTIONAL, ("Y",))),)),
        (IndividualMapping(("Y",), ("Y",)),),
    )
    assert "MappingSourceNotContext" in _codes(m)


def test_child_under_two_parents():
    d = FeatureDiagram(
        "R",
        (
            ("R", ChildGroup(GroupKind.OPTIONAL, ("A",))),
            ("R", ChildGroup(GroupKind.OPTIONAL, ("B",))),
            ("B", ChildGroup(GroupKind.OPTIONAL, ("A",))),
        ),
    )
    m = SystemModel(FeatureDiagram("C", kind=Kind.CONTEXT), d)
    assert _codes(m) == ["NonTreeHierarchy"]


@pytest.mark.parametrize(
    "groups, code",
    [
        ((("R", ChildGroup(GroupKind.ALTERNATIVE, ("A",))),), "GroupArity"),
        ((("R", ChildGroup(GroupKind.MANDATORY, ("A", "B"))),), "GroupArity"),
        ((("R", ChildGroup(GroupKind.OR, ())),), "EmptyGroup"),
        ((("X", ChildGroup(GroupKind.OPTIONAL, ("A",))),), "DetachedNode"),
    ],
)
def test_structural_issues(groups, code):
    m = SystemModel(FeatureDiagram("C", kind=Kind.CONTEXT), FeatureDiagram("R", groups))
    assert code in _codes(m)


def test_shared_namespace():
    m = SystemModel(FeatureDiagram("X", kind=Kind.CONTEXT), FeatureDiagram("X"))
    assert "DuplicateName" in _codes(m)


def test_ids_are_dense_contexts_first():
    m = load_model("messenger_v1")
    vs = m.variables
    assert [v.id for v in vs] == list(range(len(vs)))
    kinds = [v.kind for v in vs]
    assert kinds == sorted(kinds, key=lambda k: k is Kind.FEATURE)


@pytest.mark.parametrize("name", FIXTURES)
def test_variable_count_is_one_plus_group_members(name):
    m = load_model(name)
    for d in (m.contexts, m.features):
        assert len(d.names) == 1 + sum(len(g.members) for _, g in d.groups)


def test_default_scenario_has_only_roots():
    m = load_model("mini")
    assert m.default_scenario().active() == ["Noise", "App"]


def test_three_scenario_validity():
    m = load_model("mini")
    suite = suite_from_csv(fixture_text("three_scenarios.csv"), m)
    assert [is_valid_scenario(m, s) for s in suite] == [True, False, False]


def test_scenario_equality_is_assignment_equality():
    m = load_model("mini")
    a = m.scenario(["Noise", "App", "Normal", "Alarm", "Photo"])
    b = Scenario.from_dict(m.universe, {n: n in {"Photo", "Alarm", "App", "Normal", "Noise"} for n in m.universe.names})
    assert a == b and hash(a) == hash(b)
    assert a["Normal"] and not a["Quiet"]


def test_scenario_rejects_foreign_universe():
    mini, v1 = load_model("mini"), load_model("messenger_v1")
    with pytest.raises(DomainError):
        is_valid_scenario(v1, mini.default_scenario())
    with pytest.raises(DomainError):
        mini.scenario(["Nope"])


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**9))
def test_validity_matches_recursive_oracle(seed):
    m = random_system(random.Random(seed), n_max=10)
    names = list(m.universe.names)
    for cfg in all_configs(names):
        s = Scenario.from_dict(m.universe, cfg)
        assert is_valid_scenario(m, s) == system_valid(m, cfg)
