import itertools
import random
from collections import deque

import pytest

from scenariogen import (
    EvolutionNotMonotone,
    GenConfig,
    Scenario,
    TestSuite,
    augment_suite,
    coverage_report,
    diff_models,
    generate_suite,
    is_valid_scenario,
    load_model,
    parse_model,
    valid_pair_universe,
)
from scenariogen.augment import (
    augmentation_costs,
    generate_partial_scenarios,
    noreuse_baseline,
    update_scenario_sat,
    update_suite_strategy2,
)
from scenariogen.cnf import evaluate
from scenariogen.sat import Solver

OLD = parse_model(
    """
@contexts
C
C > optional(X)
@features
F
@mapping
"""
)
# Y is core in the new model and excludes X
NEW_EXCL = parse_model(
    """
@contexts
C
C > optional(X)
@features
F
F > mandatory(Y)
@cross
X excludes Y
@mapping
"""
)
NEW_OPT = parse_model(
    """
@contexts
C
C > optional(X)
@features
F
F > optional(Y)
@cross
X excludes Y
@mapping
"""
)
NEW_CTX = parse_model(
    """
@contexts
C
C > optional(X)
C > optional(D)
@features
F
@mapping
"""
)
NEW_TWO = parse_model(
    """
@contexts
C
C > optional(X)
C > optional(D)
C > optional(E)
@features
F
@mapping
"""
)


def _suite(name, seed=0):
    m = load_model(name)
    return generate_suite(m, cfg=GenConfig(10, rng_seed=seed))[0]


def test_new_variables_v1_v2():
    d = diff_models(load_model("messenger_v1"), load_model("messenger_v2"))
    assert set(d.new_variables) == {"Age", "Teen", "Adult", "Match", "Search", "ProfilePicture", "Description"}
    assert set(d.new_contexts) == {"Age", "Teen", "Adult"}


def test_new_variables_v2_v3():
    d = diff_models(load_model("messenger_v2"), load_model("messenger_v3"))
    expected = {"Device", "Smartphone", "Tablet", "Desktop", "Display", "Keyboard", "Layout", "Minimalist", "Complete"}
    assert set(d.new_variables) == expected


def test_identical_models():
    m = load_model("messenger_v1")
    assert diff_models(m, m).new_variables == ()


def test_removed_variable_rejected():
    with pytest.raises(EvolutionNotMonotone):
        diff_models(NEW_CTX, OLD)


def test_sat_update_repairs_tablet_scenario():
    v2, v3 = load_model("messenger_v2"), load_model("messenger_v3")
    d = diff_models(v2, v3)
    suite = _suite("messenger_v2", 3)
    s = next(s for s in suite if s["Photo"])
    naive = {**s.as_dict(), **{n: False for n in d.new_variables}}
    naive.update(Device=True, Tablet=True, Display=True, Keyboard=True)
    assert not is_valid_scenario(v3, Scenario.from_dict(v3.universe, naive))
    fixed = update_scenario_sat(s, d)
    assert fixed is not None and is_valid_scenario(v3, fixed)
    assert all(fixed[n] == v for n, v in s.as_dict().items())


def test_empty_delta_keeps_scenario():
    m = load_model("messenger_v1")
    s = _suite("messenger_v1")[0]
    assert update_scenario_sat(s, diff_models(m, m)) == s


def test_dismissed_when_no_extension():
    d = diff_models(OLD, NEW_EXCL)
    assert update_scenario_sat(OLD.scenario(["C", "F", "X"]), d) is None
    kept = update_scenario_sat(OLD.scenario(["C", "F"]), d)
    assert kept is not None and kept["Y"]


def test_single_new_variable_partials_alternate():
    d = diff_models(OLD, NEW_CTX)
    q = generate_partial_scenarios(d, None, 6, random.Random(0))
    values = [p["D"] for p in q]
    assert all(a != b for a, b in zip(values, values[1:]))


def test_two_free_new_variables_spread():
    d = diff_models(OLD, NEW_TWO)
    q = generate_partial_scenarios(d, None, 4, random.Random(0))
    assert {(p["D"], p["E"]) for p in q} == set(itertools.product((False, True), repeat=2))


def test_case_study_partials_are_completable():
    d = diff_models(load_model("messenger_v2"), load_model("messenger_v3"))
    s = Solver(d.new_cnf)
    idx = d.new.index
    q = generate_partial_scenarios(d, None, 8, random.Random(5))
    assert len(q) == 8
    for p in q:
        assert set(p) == set(d.new_variables)
        assert s.is_sat({idx[n]: v for n, v in p.items()})


def test_single_partial_updates_everything():
    d = diff_models(OLD, NEW_CTX)
    suite = [OLD.scenario(a) for a in (["C", "F"], ["C", "F", "X"], ["C", "F"])]
    res = update_suite_strategy2(suite, deque([{"D": True}]), 10, d)
    assert res.outcomes == ["partial"] * 3
    assert res.partial_uses == 1 and res.updates_per_partial == 3
    mod, _, _ = augmentation_costs([s for s in res.scenarios], [], NEW_CTX.default_scenario(), d.new_contexts)
    assert mod == 1


def test_incompatible_partial_falls_back_to_sat():
    d = diff_models(OLD, NEW_OPT)
    res = update_suite_strategy2([OLD.scenario(["C", "F", "X"])], deque([{"Y": True}]), 3, d)
    assert res.outcomes == ["sat"]
    assert res.scenarios[0]["Y"] is False


def test_window_limits_run_length():
    d = diff_models(OLD, NEW_CTX)
    suite = [OLD.scenario(["C", "F"])] * 5
    res = update_suite_strategy2(suite, deque([{"D": True}, {"D": False}]), 2, d)
    assert [s["D"] for s in res.scenarios] == [True, True, False, False, True]
    assert res.partial_uses == 3


def test_cost_helpers():
    t0 = NEW_TWO.default_scenario()
    s = NEW_TWO.scenario(["C", "F", "D", "E"])
    assert augmentation_costs([s], [], t0, ("D", "E"))[0] == 2
    assert augmentation_costs([s], [], t0, ())[0] == 0


def test_empty_delta_augmentation():
    m = load_model("messenger_v1")
    old = _suite("messenger_v1")
    for strategy in ("sat", "partial"):
        rep = augment_suite(old, m, strategy=strategy)
        assert rep.suite.scenarios == old.scenarios
        assert (rep.modification_cost, rep.generation_cost, rep.total_cost) == (0, 0, 0)


@pytest.mark.parametrize("strategy", ["sat", "partial"])
@pytest.mark.parametrize("pair", [("messenger_v1", "messenger_v2"), ("messenger_v2", "messenger_v3")])
def test_augmentation_invariants(strategy, pair):
    old_m, new_m = (load_model(n) for n in pair)
    old = _suite(pair[0], 7)
    d = diff_models(old_m, new_m)
    rep = augment_suite(old, new_m, strategy=strategy, window=4, m_candidates=10, rng_seed=7)
    assert rep.total_cost == rep.modification_cost + rep.generation_cost
    assert rep.updated_count + rep.dismissed_count == len(old)
    assert len(rep.suite) == rep.updated_count + rep.generated_count
    # updated scenarios keep old values and order
    kept = [s for s, o in zip(old, rep.outcomes) if o != "dismissed"]
    for s_old, s_new in zip(kept, rep.suite.scenarios[: rep.updated_count]):
        assert all(s_new[n] == v for n, v in s_old.as_dict().items())
    assert all(is_valid_scenario(new_m, s) for s in rep.suite)
    assert coverage_report(rep.suite, valid_pair_universe(new_m))[1] == []
    # dismissed exactly when no extension exists
    idx = new_m.index
    for s, outcome in zip(old, rep.outcomes):
        base = [None] * len(new_m.universe)
        for n, v in s.as_dict().items():
            base[idx[n]] = v
        exists = False
        for bits in itertools.product((False, True), repeat=len(d.new_variables)):
            vals = list(base)
            for n, b in zip(d.new_variables, bits):
                vals[idx[n]] = b
            if evaluate(d.new_cnf, vals):
                exists = True
                break
        assert exists == (outcome != "dismissed")


def test_augmentation_is_deterministic():
    old = _suite("messenger_v1", 2)
    v2 = load_model("messenger_v2")
    a = augment_suite(old, v2, rng_seed=9, m_candidates=10)
    b = augment_suite(old, v2, rng_seed=9, m_candidates=10, threads=3)
    assert a.suite.scenarios == b.suite.scenarios and a.total_cost == b.total_cost


def test_noreuse_baseline_covers():
    v2 = load_model("messenger_v2")
    suite, cost = noreuse_baseline(v2, m_candidates=10, rng_seed=1)
    assert coverage_report(suite, valid_pair_universe(v2))[1] == []
    assert cost > 0


def test_bad_arguments():
    old = TestSuite(OLD, [OLD.default_scenario()])
    with pytest.raises(ValueError):
        augment_suite(old, NEW_CTX, strategy="magic")
    with pytest.raises(ValueError):
        update_suite_strategy2(list(old), deque(), 0, diff_models(OLD, NEW_CTX))
