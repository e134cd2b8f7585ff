"""Incremental suite augmentation after a model evolves.

Step 1 carries every old scenario over to the evolved model, either by
letting the solver fill in the new variables (``"sat"``) or by combining
scenarios with a rotating queue of partial scenarios over the new
variables (``"partial"``).  Scenarios with no valid extension are dropped.
Step 2 reruns pairwise generation seeded with the updated scenarios; only
the generated tail is rearranged.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

from .citgen import GenConfig, PairUniverse, generate_suite, make_pair
from .cnf import CnfFormula, system_to_cnf
from .model import Kind, Scenario, SystemModel, TestSuite
from .rearrange import creation_cost, rearrange_order
from .sat import Solver

PartialScenario = dict[str, bool]


class EvolutionNotMonotone(ValueError):
    pass


class ExhaustedRetries(RuntimeError):
    pass


@dataclass(frozen=True)
class ModelDelta:
    old: SystemModel
    new: SystemModel
    new_variables: tuple[str, ...]
    new_cnf: CnfFormula

    @property
    def new_contexts(self) -> tuple[str, ...]:
        kinds = dict(zip(self.new.universe.names, self.new.universe.kinds))
        return tuple(n for n in self.new_variables if kinds[n] is Kind.CONTEXT)


def diff_models(old: SystemModel, new: SystemModel) -> ModelDelta:
    """Names added by ``new``; old variables must survive with the same kind."""
    new_kinds = dict(zip(new.universe.names, new.universe.kinds))
    for name, kind in zip(old.universe.names, old.universe.kinds):
        if name not in new_kinds:
            raise EvolutionNotMonotone(f"{name} was removed")
        if new_kinds[name] is not kind:
            raise EvolutionNotMonotone(f"{name} changed from {kind.value} to {new_kinds[name].value}")
    old_names = set(old.universe.names)
    added = tuple(n for n in new.universe.names if n not in old_names)
    return ModelDelta(old, new, added, system_to_cnf(new))


def _old_assumptions(s: Scenario, d: ModelDelta) -> dict[int, bool]:
    idx = d.new.index
    return {idx[name]: value for name, value in zip(s.universe.names, s.values)}


def update_scenario_sat(s: Scenario, d: ModelDelta, solver: Solver | None = None) -> Scenario | None:
    """Extend ``s`` with solver-chosen values for the new variables, or ``None``."""
    solver = solver or Solver(d.new_cnf)
    r = solver.solve(_old_assumptions(s, d))
    if not r.sat:
        return None
    return Scenario(d.new.universe, r.model)


def new_variant_pairs(d: ModelDelta, solver: Solver | None = None) -> set:
    """Valid variant pairs whose two variables are both new."""
    solver = solver or Solver(d.new_cnf)
    idx = d.new.index
    ids = [idx[n] for n in d.new_variables]
    pairs = set()
    for x, i in enumerate(ids):
        for j in ids[x + 1:]:
            for vi in (False, True):
                for vj in (False, True):
                    if solver.is_sat({i: vi, j: vj}):
                        pairs.add(make_pair(i, vi, j, vj))
    return pairs


def generate_partial_scenarios(
    d: ModelDelta,
    new_pairs: set | None,
    m: int,
    rng: random.Random,
    solver: Solver | None = None,
) -> deque[PartialScenario]:
    """``m`` assignments over the new variables, each completable to a model.

    Each partial fixes the new-new pair least represented so far, then gives
    the other new variables random values, flipping a value only when it
    would make the partial uncompletable.  With a single new variable the
    two values alternate instead.
    """
    if m < 1:
        raise ValueError("m must be at least 1")
    solver = solver or Solver(d.new_cnf)
    idx = d.new.index
    ids = [idx[n] for n in d.new_variables]
    if not ids:
        return deque()
    if new_pairs is None:
        new_pairs = new_variant_pairs(d, solver)
    names = d.new.universe.names
    if len(ids) == 1:
        v = ids[0]
        values = [b for b in (False, True) if solver.is_sat({v: b})]
        if not values:
            raise ExhaustedRetries("the new variable has no valid value")
        start = rng.randrange(len(values))
        return deque({names[v]: values[(start + k) % len(values)]} for k in range(m))
    targets = sorted(new_pairs)
    seeds = [{a >> 1: bool(a & 1), b >> 1: bool(b & 1)} for a, b in targets]
    counts = [0] * len(targets)
    out: deque[PartialScenario] = deque()
    attempts = 0
    while len(out) < m:
        if attempts >= 100 * m:
            raise ExhaustedRetries(f"only {len(out)} of {m} partial scenarios found")
        attempts += 1
        pick = None
        if seeds:
            low = min(counts)
            pick = rng.choice([k for k, c in enumerate(counts) if c == low])
            partial = dict(seeds[pick])
        else:
            partial = {}
        if not solver.is_sat(partial):
            if pick is not None:
                counts[pick] += 1
            continue
        rest = [v for v in ids if v not in partial]
        rng.shuffle(rest)
        for v in rest:
            partial[v] = rng.random() < 0.5
            if not solver.is_sat(partial):
                partial[v] = not partial[v]
        codes = {2 * v + int(b) for v, b in partial.items()}
        for k, t in enumerate(targets):
            if all(c in codes for c in t):
                counts[k] += 1
        out.append({names[v]: partial[v] for v in ids})
    return out


@dataclass
class Strategy2Result:
    scenarios: list[Scenario | None]
    outcomes: list[str]
    partial_uses: int = 0
    partial_updates: int = 0
    partial_pops: int = 0

    @property
    def updates_per_partial(self) -> float:
        return self.partial_updates / self.partial_uses if self.partial_uses else 0.0


def update_suite_strategy2(
    suite: Sequence[Scenario],
    queue: deque[PartialScenario],
    window: int,
    d: ModelDelta,
    solver: Solver | None = None,
) -> Strategy2Result:
    """Combine scenarios with partial scenarios taken from a rotating queue.

    The partial on top of the queue is applied to up to ``window``
    consecutive scenarios, stopping at the first incompatible one, and then
    goes to the back of the queue.  A scenario that every partial in the
    queue failed on is handed to :func:`update_scenario_sat`.  Dismissed
    scenarios come back as ``None``.
    """
    if window < 1:
        raise ValueError("window must be at least 1")
    solver = solver or Solver(d.new_cnf)
    idx = d.new.index
    queue = deque(queue)
    size = len(queue)
    n = len(suite)
    out: list[Scenario | None] = [None] * n
    outcomes = ["dismissed"] * n
    failures = [0] * n
    result = Strategy2Result(out, outcomes)
    k = 0
    while k < n:
        if size == 0 or failures[k] >= size:
            updated = update_scenario_sat(suite[k], d, solver)
            out[k] = updated
            outcomes[k] = "sat" if updated is not None else "dismissed"
            k += 1
            continue
        partial = queue.popleft()
        assumption_part = {idx[name]: v for name, v in partial.items()}
        updated_here = 0
        while updated_here < window and k < n:
            r = solver.solve({**_old_assumptions(suite[k], d), **assumption_part})
            if not r.sat:
                failures[k] += 1
                break
            out[k] = Scenario(d.new.universe, r.model)
            outcomes[k] = "partial"
            updated_here += 1
            k += 1
        result.partial_pops += 1
        if updated_here:
            result.partial_uses += 1
            result.partial_updates += updated_here
        queue.append(partial)
    return result


@dataclass
class AugmentationReport:
    suite: TestSuite
    updated_count: int
    dismissed_count: int
    generated_count: int
    modification_cost: int
    generation_cost: int
    total_cost: int
    updates_per_partial: float = 0.0
    outcomes: list[str] = field(default_factory=list)


def augmentation_costs(
    updated: Sequence[Scenario],
    generated: Sequence[Scenario],
    t0: Scenario,
    new_contexts: Sequence[str],
) -> tuple[int, int, int]:
    """Modification, generation and total cost.

    Modification counts switches of new contexts only, from ``t0`` through
    the updated scenarios.  Generation is the creation cost of the generated
    scenarios, starting from the last updated one.
    """
    new_ids = [t0.universe.index[n] for n in new_contexts]
    modification = 0
    prev = t0
    for s in updated:
        modification += sum(1 for i in new_ids if prev.values[i] != s.values[i])
        prev = s
    generation = creation_cost(generated, prev)
    return modification, generation, modification + generation


def augment_suite(
    old_suite: TestSuite,
    new_model: SystemModel,
    strategy: str = "partial",
    window: int = 9,
    partials: int | None = None,
    m_candidates: int = 30,
    rng_seed: int = 0,
    universe: PairUniverse | None = None,
    threads: int = 1,
) -> AugmentationReport:
    """Carry ``old_suite`` over to ``new_model`` and restore pairwise coverage.

    ``strategy`` is ``"sat"`` or ``"partial"``; ``partials`` defaults to twice
    the number of new variables.  ``universe`` may hold the precomputed,
    fully uncovered pair universe of ``new_model``.
    """
    if strategy not in ("sat", "partial"):
        raise ValueError(f"unknown strategy {strategy!r}")
    d = diff_models(old_suite.model, new_model)
    solver = Solver(d.new_cnf)
    outcomes: list[str]
    per_partial = 0.0
    if strategy == "sat":
        carried = [update_scenario_sat(s, d, solver) for s in old_suite]
        outcomes = ["sat" if s is not None else "dismissed" for s in carried]
    else:
        m = partials if partials is not None else 2 * len(d.new_variables)
        rng = random.Random(f"{rng_seed}:partials")
        queue = generate_partial_scenarios(d, None, m, rng, solver) if d.new_variables else deque()
        res = update_suite_strategy2(list(old_suite), queue, window, d, solver)
        carried, outcomes, per_partial = res.scenarios, res.outcomes, res.updates_per_partial
    updated = [s for s in carried if s is not None]

    cfg = GenConfig(m_candidates=m_candidates, rng_seed=rng_seed, threads=threads)
    full, _, _ = generate_suite(new_model, TestSuite(new_model, updated), cfg, universe=universe)
    tail = full.scenarios[len(updated):]
    t0 = new_model.default_scenario()
    start = updated[-1] if updated else t0
    tail = [tail[i] for i in rearrange_order(tail, start)]

    mod, gen, total = augmentation_costs(updated, tail, t0, d.new_contexts)
    return AugmentationReport(
        suite=TestSuite(new_model, updated + tail),
        updated_count=len(updated),
        dismissed_count=len(carried) - len(updated),
        generated_count=len(tail),
        modification_cost=mod,
        generation_cost=gen,
        total_cost=total,
        updates_per_partial=per_partial,
        outcomes=outcomes,
    )


def noreuse_baseline(
    new_model: SystemModel,
    m_candidates: int = 30,
    rng_seed: int = 0,
    universe: PairUniverse | None = None,
) -> tuple[TestSuite, int]:
    """Regenerate from scratch; returns the suite and its creation cost."""
    cfg = GenConfig(m_candidates=m_candidates, rng_seed=rng_seed)
    suite, _, _ = generate_suite(new_model, None, cfg, universe=universe)
    return suite, creation_cost(suite, new_model.default_scenario())
