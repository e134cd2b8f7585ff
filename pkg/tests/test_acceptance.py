"""Acceptance criteria, each at its stated tolerance.

Every test prints one PASS/FAIL line (also collected in the terminal
summary) and then asserts the verdict.  Run on its own with::

    pytest tests/test_acceptance.py -v
"""

import json
import random
import statistics
import time
from collections import Counter
from functools import lru_cache

import pytest

from scenariogen import (
    GenConfig,
    Solver,
    TestSuite,
    augment_suite,
    coverage_report,
    creation_cost,
    diagram_to_cnf,
    generate_suite,
    load_model,
    noreuse_baseline,
    rearrange,
    solve,
    system_to_cnf,
    valid_pair_universe,
)
from scenariogen.citgen import make_pair, scenario_codes
from scenariogen.cli import main as cli_main
from scenariogen.cnf import CnfFormula, evaluate
from scenariogen.formats import (
    fixture_text,
    suite_from_csv,
    suite_from_switch_table,
    suite_to_csv,
    suite_to_switch_table,
)

from oracles import all_configs, brute_models, fd_valid, random_cnf, random_diagram

SEEDS = range(30)
MESSENGERS = ("messenger_v1", "messenger_v2", "messenger_v3")


@lru_cache(maxsize=None)
def _model(name):
    return load_model(name)


@lru_cache(maxsize=None)
def _universe(name):
    return valid_pair_universe(_model(name))


@lru_cache(maxsize=None)
def _suite(name, seed, m=30):
    return generate_suite(_model(name), cfg=GenConfig(m, rng_seed=seed), universe=_universe(name))[0]


def test_c01_pairwise_completeness(criterion):
    details, ok = [], True
    for name in ("mini", *MESSENGERS):
        start = time.perf_counter()
        m = _model(name)
        suite = generate_suite(m, cfg=GenConfig(30, rng_seed=0))[0]
        _, uncovered = coverage_report(suite, valid_pair_universe(m))
        elapsed = time.perf_counter() - start
        # oracle path: plain per-pair solve, no shortcuts, against the suite's own pairs
        f = system_to_cnf(m)
        s = Solver(f)
        present = set()
        for sc in suite:
            codes = scenario_codes(sc.values)
            present.update((a, b) for x, a in enumerate(codes) for b in codes[x + 1:])
        missing = 0
        for i in range(f.num_vars):
            for j in range(i + 1, f.num_vars):
                for vi in (False, True):
                    for vj in (False, True):
                        if make_pair(i, vi, j, vj) not in present and s.solve({i: vi, j: vj}).sat:
                            missing += 1
        good = not uncovered and missing == 0 and elapsed < 60
        ok &= good
        details.append(f"{name} uncovered={len(uncovered)} oracle_missing={missing} {elapsed:.1f}s")
    assert criterion(1, ok, "; ".join(details))


def test_c02_solver_oracle(criterion):
    rng = random.Random(20240601)
    mismatches = bad_models = 0
    for _ in range(1000):
        n, clauses = random_cnf(rng, 12, 40)
        f = CnfFormula(n, tuple(clauses))
        r = solve(f)
        if r.sat != (next(brute_models(n, clauses), None) is not None):
            mismatches += 1
        if r.sat and not evaluate(f, r.model):
            bad_models += 1
    ok = mismatches == 0 and bad_models == 0
    assert criterion(2, ok, f"1000 random CNFs, {mismatches} sat mismatches, {bad_models} invalid models")


def test_c03_cnf_fidelity(criterion):
    rng = random.Random(777)
    wrong = 0
    for _ in range(200):
        d = random_diagram(rng, 12)
        f = diagram_to_cnf(d)
        names = list(f.names)
        models = set(brute_models(f.num_vars, f.clauses))
        oracle = {tuple(c[n] for n in names) for c in all_configs(names) if fd_valid(d, c)}
        wrong += models != oracle
    assert criterion(3, wrong == 0, f"200 random diagrams, {wrong} with differing model sets")


def test_c04_creation_cost_arithmetic(criterion):
    m = _model("mini")
    suite = suite_from_csv(fixture_text("three_scenarios.csv"), m)
    t0 = m.default_scenario()
    a, b = creation_cost(suite, t0), creation_cost(suite.reordered([1, 0, 2]), t0)
    assert criterion(4, (a, b) == (6, 4), f"original order {a} (want 6), order [2,1,3] {b} (want 4)")


def test_c05_suite_size(criterion):
    sizes = [len(_suite("messenger_v3", s)) for s in SEEDS]
    mean = statistics.mean(sizes)
    assert criterion(5, 14 <= mean <= 22, f"mean size {mean:.2f} over 30 seeds, want [14, 22]")


def test_c06_rearrangement_gain(criterion):
    m = _model("messenger_v3")
    t0 = m.default_scenario()
    reductions, perms = [], True
    before_all, after_all = [], []
    for s in SEEDS:
        suite = _suite("messenger_v3", s)
        out = rearrange(suite, t0)
        perms &= Counter(out.scenarios) == Counter(suite.scenarios)
        b, a = creation_cost(suite, t0), creation_cost(out, t0)
        before_all.append(b)
        after_all.append(a)
        reductions.append(1 - a / b)
    mean = statistics.mean(reductions)
    ok = mean >= 0.30 and perms
    detail = (
        f"cost {statistics.mean(before_all):.1f} -> {statistics.mean(after_all):.1f}, "
        f"mean reduction {mean:.1%} (sd {statistics.pstdev(reductions):.1%}), permutations={perms}"
    )
    assert criterion(6, ok, detail)


def test_c07_optimization_one(criterion):
    ok, details = True, []
    for name in MESSENGERS:
        m, u = _model(name), _universe(name)
        on_calls, off_calls, on_vals, off_vals = [], [], 0, 0
        for s in range(10):
            on = generate_suite(m, cfg=GenConfig(30, True, True, s), universe=u)[1]
            off = generate_suite(m, cfg=GenConfig(30, False, True, s), universe=u)[1]
            on_calls.append(on.solve_calls)
            off_calls.append(off.solve_calls)
            on_vals += on.propagated_values
            off_vals += off.propagated_values
        strictly = all(a < b for a, b in zip(on_calls, off_calls))
        diff = abs(on_vals - off_vals) / max(on_vals, off_vals)
        ok &= strictly and diff < 0.15
        details.append(
            f"{name} solve_calls {sum(on_calls) / 10:.0f} vs {sum(off_calls) / 10:.0f} "
            f"(strict every seed: {strictly}), propagated {on_vals / 10:.0f} vs {off_vals / 10:.0f} ({diff:.1%})"
        )
    assert criterion(7, ok, "; ".join(details))


def test_c08_optimization_timing(criterion):
    m = _model("messenger_v3")
    medians = {}
    for label, o1, o2 in (("none", False, False), ("opt1", True, False), ("both", True, True)):
        times = []
        for s in range(10):
            start = time.perf_counter()
            generate_suite(m, cfg=GenConfig(30, o1, o2, s))
            times.append(time.perf_counter() - start)
        medians[label] = statistics.median(times)
    reduction = 1 - medians["both"] / medians["none"]
    ok = medians["both"] < medians["opt1"] < medians["none"] and reduction >= 0.40
    detail = (
        f"median both {medians['both']:.3f}s < opt1 {medians['opt1']:.3f}s < none {medians['none']:.3f}s, "
        f"reduction {reduction:.0%} (want >= 40%)"
    )
    assert criterion(8, ok, detail)


def _augmentation_table(old_name, new_name):
    new_m, u = _model(new_name), _universe(new_name)
    rows = {"s1": [], "s2": [], "noreuse": []}
    complete = True
    for s in SEEDS:
        base = _suite(old_name, s)
        for key, strategy in (("s1", "sat"), ("s2", "partial")):
            rep = augment_suite(base, new_m, strategy=strategy, window=9, rng_seed=s, universe=u)
            complete &= not coverage_report(rep.suite, u)[1]
            rows[key].append((rep.total_cost, len(rep.suite)))
        suite, cost = noreuse_baseline(new_m, rng_seed=s, universe=u)
        rows["noreuse"].append((cost, len(suite)))
    return {k: tuple(statistics.mean(x) for x in zip(*v)) for k, v in rows.items()}, complete


@pytest.mark.parametrize("old_name, new_name", [("messenger_v1", "messenger_v2"), ("messenger_v2", "messenger_v3")])
def test_c09_augmentation_ordering(criterion, old_name, new_name):
    t, complete = _augmentation_table(old_name, new_name)
    (c1, n1), (c2, n2), (c0, n0) = t["s1"], t["s2"], t["noreuse"]
    cost_order = c2 < c1 < c0
    size_order = n0 < n1 and n0 < n2
    ok = cost_order and size_order and complete
    detail = (
        f"{old_name[-2:]}->{new_name[-2:]} total cost S2 {c2:.1f} < S1 {c1:.1f} < NOREUSE {c0:.1f}: {cost_order}; "
        f"size NOREUSE {n0:.2f} smallest vs S1 {n1:.2f}, S2 {n2:.2f}: {size_order}; full coverage: {complete}"
    )
    assert criterion(9, ok, detail)


def test_c10_window_sweep(criterion):
    old_name, new_name = "messenger_v2", "messenger_v3"
    new_m, u = _model(new_name), _universe(new_name)
    costs, upp = {}, {}
    for S in range(1, 16):
        c, r = [], []
        for s in SEEDS:
            rep = augment_suite(_suite(old_name, s), new_m, strategy="partial", window=S, rng_seed=s, universe=u)
            c.append(rep.total_cost)
            r.append(rep.updates_per_partial)
        costs[S], upp[S] = statistics.mean(c), statistics.mean(r)
    best = min(costs, key=costs.get)
    interior = 1 < best < 15
    flattening = (upp[15] - upp[12]) < (upp[4] - upp[1])
    ok = interior and flattening
    curve = " ".join(f"{S}:{costs[S]:.1f}" for S in costs)
    detail = (
        f"min total cost at S={best} ({costs[best]:.1f}), interior: {interior}; "
        f"updates/partial +{upp[4] - upp[1]:.2f} (S 1->4) vs +{upp[15] - upp[12]:.2f} (S 12->15), "
        f"flattening: {flattening}; costs {curve}"
    )
    assert criterion(10, ok, detail)


def _random_valid_suite(rng):
    name = rng.choice(("mini", *MESSENGERS))
    m = _model(name)
    f = system_to_cnf(m)
    s = Solver(f)
    rows = []
    for _ in range(rng.randint(0, 12)):
        r = None
        while r is None or not r.sat:
            picks = rng.sample(range(f.num_vars), min(4, f.num_vars))
            r = s.solve({v: rng.random() < 0.5 for v in picks})
        rows.append(m.scenario([n for n, b in zip(m.universe.names, r.model) if b]))
    return TestSuite(m, rows)


def test_c11_round_trip(criterion):
    rng = random.Random(11)
    failures = 0
    for _ in range(100):
        suite = _random_valid_suite(rng)
        text = suite_to_csv(suite)
        back = suite_from_switch_table(suite_to_switch_table(suite_from_csv(text, suite.model)), suite.model)
        failures += suite_to_csv(back) != text
    assert criterion(11, failures == 0, f"100 random valid suites, {failures} round-trip differences")


def test_c12_determinism(criterion, tmp_path, capsys):
    results = []
    old = tmp_path / "old"
    cli_main(["generate", "messenger_v1", "--out", str(old)])
    runs = [
        ["generate", "messenger_v3", "--seed", "5"],
        ["generate", "messenger_v3", "--seed", "5", "--threads", "4", "--format", "json"],
        ["augment", "messenger_v1", "messenger_v2", str(old / "suite.csv"), "--seed", "2", "--threads", "4"],
    ]
    for k, argv in enumerate(runs):
        a, b = tmp_path / f"a{k}", tmp_path / f"b{k}"
        cli_main(argv + ["--out", str(a)])
        cli_main(argv + ["--out", str(b)])
        manifests_equal = (a / "manifest.json").read_bytes() == (b / "manifest.json").read_bytes()
        outputs = json.loads((a / "manifest.json").read_text())["outputs"]
        same = manifests_equal and all((a / n).read_bytes() == (b / n).read_bytes() for n in outputs)
        replay = cli_main(["replay", str(a / "manifest.json"), "--out", str(tmp_path / f"r{k}")]) == 0
        results.append(same and replay)
    capsys.readouterr()
    ok = all(results)
    assert criterion(12, ok, f"{sum(results)}/{len(results)} runs byte-identical and replayable (incl. --threads 4)")
