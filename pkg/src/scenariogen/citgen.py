"""Pairwise covering-suite generation with SAT-checked greedy candidates.

A variant is a (variable, value) pair, encoded as ``2 * var + int(value)``.
A :data:`VariantPair` is a sorted tuple of two variant codes over distinct
variables.  Each new scenario is the best of ``m_candidates`` greedily built
candidates; every candidate starts from the variant present in the most
uncovered pairs, then visits the remaining variables in random order and
gives each the value covering the most uncovered pairs with what is already
assigned, subject to the prefix staying satisfiable.

Two optional speedups:

* ``opt_core_dead`` -- compute core and dead variables once and pre-assign
  them in every candidate;
* ``opt_propagation`` -- after each choice, commit the values forced by unit
  propagation and skip those variables.
"""

from __future__ import annotations

import random
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

from .cnf import CnfFormula, evaluate, system_to_cnf
from .model import Scenario, SystemModel, TestSuite
from .sat import Solver, SolverStats, UnsatisfiableModel

VariantPair = tuple[int, int]


def variant(var: int, value: bool) -> int:
    return 2 * var + int(value)


def make_pair(var_a: int, val_a: bool, var_b: int, val_b: bool) -> VariantPair:
    if var_a == var_b:
        raise ValueError("a variant pair needs two distinct variables")
    a, b = variant(var_a, val_a), variant(var_b, val_b)
    return (a, b) if a < b else (b, a)


def decode_pair(p: VariantPair) -> tuple[tuple[int, bool], tuple[int, bool]]:
    a, b = p
    return (a >> 1, bool(a & 1)), (b >> 1, bool(b & 1))


def scenario_codes(values: Sequence[bool]) -> list[int]:
    return [2 * v + int(b) for v, b in enumerate(values)]


class PairUniverse:
    """Valid variant pairs and the subset not yet covered."""

    def __init__(self, num_vars: int, valid_pairs: Iterable[VariantPair]):
        self.num_vars = num_vars
        self.valid_pairs = frozenset(valid_pairs)
        self.uncovered: set[VariantPair] = set(self.valid_pairs)
        self._partners: list[set[int]] = [set() for _ in range(2 * num_vars)]
        for a, b in self.valid_pairs:
            self._partners[a].add(b)
            self._partners[b].add(a)

    def copy(self) -> "PairUniverse":
        other = PairUniverse.__new__(PairUniverse)
        other.num_vars = self.num_vars
        other.valid_pairs = self.valid_pairs
        other.uncovered = set(self.uncovered)
        other._partners = [set(s) for s in self._partners]
        return other

    def participation(self, code: int) -> int:
        """Number of uncovered pairs containing the variant."""
        return len(self._partners[code])

    def gain(self, code: int, assigned: set[int]) -> int:
        return len(self._partners[code] & assigned)

    def count_new(self, values: Sequence[bool]) -> int:
        """Uncovered pairs a total assignment would cover."""
        codes = scenario_codes(values)
        present = set(codes)
        partners = self._partners
        return sum(len(partners[c] & present) for c in codes) // 2

    def cover(self, values: Sequence[bool]) -> int:
        codes = scenario_codes(values)
        present = set(codes)
        partners = self._partners
        newly = 0
        for c in codes:
            hits = partners[c] & present
            if hits:
                partners[c] -= hits
                for d in hits:
                    if c < d:
                        self.uncovered.discard((c, d))
                        newly += 1
        return newly

    def __len__(self):
        return len(self.valid_pairs)


def enumerate_valid_pairs(
    f: CnfFormula,
    core: Iterable[int] = (),
    dead: Iterable[int] = (),
    solver: Solver | None = None,
) -> PairUniverse:
    """All variant pairs that occur in some model of ``f``.

    ``core`` and ``dead`` must be either empty or the complete sets from
    :meth:`Solver.find_core_dead`; pairs touching them are then decided
    without the solver.  Remaining pairs go through a witness-model check,
    then unit propagation, then a full solve.
    """
    solver = solver or Solver(f)
    first = solver.solve()
    if not first.sat:
        raise UnsatisfiableModel("formula has no model")
    n = f.num_vars
    forced = {v: True for v in core}
    forced.update({v: False for v in dead})
    use_forced = bool(forced)

    witnessed = [set() for _ in range(2 * n)]

    def witness(model):
        codes = scenario_codes(model)
        for c in codes:
            witnessed[c].update(codes)

    witness(first.model)
    fixed = solver.fixed
    valid: list[VariantPair] = []
    for i in range(n):
        for vi in (False, True):
            a = variant(i, vi)
            if use_forced and i in forced and forced[i] != vi:
                continue
            implied = None  # computed lazily, once per variant
            for j in range(i + 1, n):
                for vj in (False, True):
                    b = variant(j, vj)
                    if use_forced:
                        if j in forced and forced[j] != vj:
                            continue
                        if i in forced or j in forced:
                            valid.append((a, b))
                            continue
                    if fixed.get(j, vj) != vj:
                        continue
                    if b in witnessed[a]:
                        valid.append((a, b))
                        continue
                    if implied is None:
                        implied = solver.propagate({i: vi})
                        if implied is None:
                            implied = False
                    if implied is False:
                        break
                    if implied.get(j, vj) != vj:
                        continue
                    r = solver.solve({i: vi, j: vj})
                    if r.sat:
                        witness(r.model)
                        valid.append((a, b))
                if implied is False:
                    break
    return PairUniverse(n, valid)


@dataclass
class GenConfig:
    m_candidates: int = 30
    opt_core_dead: bool = True
    opt_propagation: bool = True
    rng_seed: int = 0
    threads: int = 1

    def __post_init__(self):
        if self.m_candidates < 1:
            raise ValueError("m_candidates must be at least 1")
        if self.threads < 1:
            raise ValueError("threads must be at least 1")


def candidate_rng(seed: int, round_no: int, index: int) -> random.Random:
    """Independent stream per (round, candidate) so threading cannot change results."""
    return random.Random(f"{seed}:{round_no}:{index}")


class PairwiseGenerator:
    """Greedy covering-suite builder bound to one formula and configuration."""

    def __init__(self, formula: CnfFormula, cfg: GenConfig | None = None, universe: PairUniverse | None = None):
        self.formula = formula
        self.cfg = cfg or GenConfig()
        self.solver = Solver(formula)
        self._solvers = [self.solver]
        if not self.solver.is_sat():
            raise UnsatisfiableModel("formula has no model")
        core: set[int] = set()
        dead: set[int] = set()
        if self.cfg.opt_core_dead:
            core, dead = self.solver.find_core_dead()
        self.core, self.dead = core, dead
        self.forced = {v: True for v in core}
        self.forced.update({v: False for v in dead})
        if universe is None:
            universe = enumerate_valid_pairs(formula, core, dead, solver=self.solver)
        self.universe = universe
        # per-variable solver calls made while building candidates
        self.factor_calls = 0
        self.candidates_built = 0
        self._lock = threading.Lock()

    @property
    def stats(self) -> SolverStats:
        total = SolverStats()
        for s in self._solvers:
            total = total + s.stats
        return total

    def _new_solver(self) -> Solver:
        s = Solver(self.formula)
        self._solvers.append(s)
        return s

    def build_candidate(self, rng: random.Random, solver: Solver | None = None) -> list[bool]:
        solver = solver or self.solver
        u = self.universe
        n = self.formula.num_vars
        opt_prop = self.cfg.opt_propagation
        values: list[bool | None] = [None] * n
        prefix: dict[int, bool] = {}
        assigned: set[int] = set()
        calls = 0

        def commit(v, b):
            values[v] = b
            prefix[v] = b
            assigned.add(2 * v + b)

        def commit_inferred():
            inferred = solver.propagate(prefix)
            if inferred is None:
                raise AssertionError("propagation conflict on a satisfiable prefix")
            for w, b in inferred.items():
                if values[w] is None:
                    commit(w, b)

        for v, b in self.forced.items():
            commit(v, b)

        # step 1: the variant present in most uncovered pairs
        best, ties = -1, []
        for v in range(n):
            if values[v] is not None:
                continue
            for b in (False, True):
                p = u.participation(2 * v + b)
                if p > best:
                    best, ties = p, [(v, b)]
                elif p == best:
                    ties.append((v, b))
        if ties:
            first_var, first_val = ties[0] if len(ties) == 1 else rng.choice(ties)
            if best == 0 and not solver.is_sat({**prefix, first_var: first_val}):
                calls += 1
                first_val = not first_val
            commit(first_var, first_val)
            if opt_prop:
                commit_inferred()
        else:
            first_var = -1

        # steps 2-3: remaining variables in random order
        order = [v for v in range(n) if v != first_var]
        rng.shuffle(order)
        for v in order:
            if values[v] is not None:
                continue
            g_false = u.gain(2 * v, assigned)
            g_true = u.gain(2 * v + 1, assigned)
            if g_true != g_false:
                choice = g_true > g_false
            else:
                choice = rng.random() < 0.5
            prefix[v] = choice
            calls += 1
            if not solver.is_sat(prefix):
                # the prefix is satisfiable, so the other value must be
                choice = not choice
            commit(v, choice)
            if opt_prop:
                commit_inferred()

        with self._lock:
            self.factor_calls += calls
            self.candidates_built += 1
        out = [bool(x) for x in values]
        if not evaluate(self.formula, out):
            raise AssertionError("candidate violates the formula")
        return out

    def _fallback(self) -> list[bool]:
        # a pair no candidate reached: build a scenario around it directly
        (i, vi), (j, vj) = decode_pair(min(self.universe.uncovered))
        r = self.solver.solve({**self.forced, i: vi, j: vj})
        if not r.sat:
            raise AssertionError(f"uncovered pair {(i, vi, j, vj)} is not satisfiable")
        return list(r.model)

    def generate(self, seed_rows: Sequence[Sequence[bool]] = ()) -> list[list[bool]]:
        """Rows appended after ``seed_rows`` until every valid pair is covered."""
        u = self.universe
        for row in seed_rows:
            u.cover(row)
        cfg = self.cfg
        pool = None
        solvers = [self.solver]
        if cfg.threads > 1:
            pool = ThreadPoolExecutor(cfg.threads)
            solvers = [self._new_solver() for _ in range(cfg.m_candidates)]
        rows = []
        round_no = 0
        try:
            while u.uncovered:
                def build(idx, _round=round_no):
                    rng = candidate_rng(cfg.rng_seed, _round, idx)
                    cand = self.build_candidate(rng, solvers[idx % len(solvers)])
                    return u.count_new(cand), cand

                if pool is None:
                    results = [build(i) for i in range(cfg.m_candidates)]
                else:
                    results = list(pool.map(build, range(cfg.m_candidates)))
                best = max(range(len(results)), key=lambda i: (results[i][0], -i))
                gain, row = results[best]
                if gain == 0:
                    row = self._fallback()
                u.cover(row)
                rows.append(row)
                round_no += 1
        finally:
            if pool is not None:
                pool.shutdown()
        return rows


def build_candidate(u: PairUniverse, f: CnfFormula, cfg: GenConfig, rng: random.Random) -> list[bool]:
    """One greedy candidate against the uncovered pairs of ``u``."""
    return PairwiseGenerator(f, cfg, universe=u).build_candidate(rng)


def generate_suite(
    m: SystemModel,
    seed_suite: TestSuite | None = None,
    cfg: GenConfig | None = None,
    universe: PairUniverse | None = None,
) -> tuple[TestSuite, SolverStats, PairUniverse]:
    """Extend ``seed_suite`` until every valid variant pair of ``m`` is covered.

    A precomputed ``universe`` (fully uncovered) may be passed to skip pair
    enumeration; it is copied, not mutated.
    """
    f = system_to_cnf(m)
    gen = PairwiseGenerator(f, cfg, universe=universe.copy() if universe is not None else None)
    seeds = list(seed_suite) if seed_suite is not None else []
    for s in seeds:
        if s.universe != m.universe:
            raise ValueError("seed scenario ranges over other variables")
        if not evaluate(f, s.values):
            raise ValueError(f"seed scenario is not valid: {s}")
    rows = gen.generate([s.values for s in seeds])
    generated = [Scenario(m.universe, tuple(r)) for r in rows]
    return TestSuite(m, seeds + generated), gen.stats, gen.universe


def coverage_report(suite: Iterable[Scenario], u: PairUniverse) -> tuple[int, list[VariantPair]]:
    """Covered pair count and the sorted list of valid pairs still uncovered."""
    covered: set[VariantPair] = set()
    for s in suite:
        codes = scenario_codes(s.values)
        for x, a in enumerate(codes):
            for b in codes[x + 1:]:
                if (a, b) in u.valid_pairs:
                    covered.add((a, b))
    return len(covered), sorted(u.valid_pairs - covered)


def valid_pair_universe(m: SystemModel) -> PairUniverse:
    return enumerate_valid_pairs(system_to_cnf(m))
