"""A small DPLL solver with watched-literal unit propagation.

The solver is deterministic: it branches on the first unassigned variable
and tries ``False`` before ``True``.  No clause learning.  Unit clauses of
the formula are propagated once at construction ("top level"); the
resulting fixed values are part of every answer but are not reported by
:meth:`Solver.propagate` as consequences of the caller's assumptions.

Assumptions and inferred values are ``dict[int, bool]`` keyed by variable id.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from .cnf import CnfFormula


class UnsatisfiableModel(Exception):
    pass


@dataclass
class SolverStats:
    solve_calls: int = 0
    propagations: int = 0
    propagated_values: int = 0

    def __add__(self, other: "SolverStats") -> "SolverStats":
        return SolverStats(
            self.solve_calls + other.solve_calls,
            self.propagations + other.propagations,
            self.propagated_values + other.propagated_values,
        )

    def as_dict(self) -> dict[str, int]:
        return {
            "solve_calls": self.solve_calls,
            "propagations": self.propagations,
            "propagated_values": self.propagated_values,
        }


@dataclass(frozen=True)
class SolveResult:
    sat: bool
    model: tuple[bool, ...] | None = None

    @property
    def status(self) -> str:
        return "Sat" if self.sat else "Unsat"

    def __bool__(self):
        return self.sat


# Internal literal codes: 2*v for v=True, 2*v+1 for v=False; negation is ^1.
# value[code] is 1 (true), -1 (false) or 0 (unassigned).


class Solver:
    def __init__(self, formula: CnfFormula):
        self.formula = formula
        self.stats = SolverStats()
        n = self.num_vars = formula.num_vars
        self._value = [0] * (2 * n)
        self._trail: list[int] = []
        self._lim: list[int] = []
        self._qhead = 0
        self._watches: list[list[list[int]]] = [[] for _ in range(2 * n)]
        self._clauses: list[list[int]] = []
        self._ok = True
        units = []
        for c in formula.clauses:
            codes = list(dict.fromkeys(2 * (x - 1) if x > 0 else 2 * (-x - 1) + 1 for x in c))
            if not codes:
                self._ok = False
            elif len(codes) == 1:
                units.append(codes[0])
            else:
                self._clauses.append(codes)
                self._watches[codes[0]].append(codes)
                self._watches[codes[1]].append(codes)
        for u in units:
            if self._value[u] == -1:
                self._ok = False
            elif self._value[u] == 0:
                self._assign(u)
        if self._ok and not self._bcp():
            self._ok = False
        self._fixed = len(self._trail)

    # -- core machinery -------------------------------------------------

    def _assign(self, code: int):
        self._value[code] = 1
        self._value[code ^ 1] = -1
        self._trail.append(code)

    def _bcp(self) -> bool:
        value = self._value
        watches = self._watches
        trail = self._trail
        qhead = self._qhead
        while qhead < len(trail):
            false_lit = trail[qhead] ^ 1
            qhead += 1
            ws = watches[false_lit]
            keep = []
            i = 0
            n = len(ws)
            while i < n:
                c = ws[i]
                i += 1
                if c[0] == false_lit:
                    c[0], c[1] = c[1], false_lit
                first = c[0]
                if value[first] == 1:
                    keep.append(c)
                    continue
                for k in range(2, len(c)):
                    x = c[k]
                    if value[x] != -1:
                        c[1] = x
                        c[k] = false_lit
                        watches[x].append(c)
                        break
                else:
                    keep.append(c)
                    if value[first] == -1:
                        keep.extend(ws[i:])
                        watches[false_lit] = keep
                        self._qhead = len(trail)
                        return False
                    value[first] = 1
                    value[first ^ 1] = -1
                    trail.append(first)
            watches[false_lit] = keep
        self._qhead = qhead
        return True

    def _new_level(self):
        self._lim.append(len(self._trail))

    def _backtrack(self, level: int):
        if len(self._lim) > level:
            cut = self._lim[level]
            value = self._value
            for code in self._trail[cut:]:
                value[code] = 0
                value[code ^ 1] = 0
            del self._trail[cut:]
            del self._lim[level:]
            self._qhead = cut

    def _assume(self, assumptions: Mapping[int, bool]) -> bool:
        """Open level 1 with the assumptions and propagate."""
        self._new_level()
        value = self._value
        for v, b in assumptions.items():
            code = 2 * v if b else 2 * v + 1
            if value[code] == -1:
                return False
            if value[code] == 0:
                self._assign(code)
        return self._bcp()

    # -- public API -----------------------------------------------------

    @property
    def fixed(self) -> dict[int, bool]:
        """Values forced by top-level propagation of the formula alone."""
        return {c >> 1: not (c & 1) for c in self._trail[: self._fixed]} if self._ok else {}

    def solve(self, assumptions: Mapping[int, bool] | None = None) -> SolveResult:
        self.stats.solve_calls += 1
        if not self._ok:
            return SolveResult(False)
        try:
            if not self._assume(assumptions or {}):
                return SolveResult(False)
            return self._search()
        finally:
            self._backtrack(0)

    def _search(self) -> SolveResult:
        value = self._value
        n = self.num_vars
        decisions: list[tuple[int, bool]] = []
        nxt = 0
        while True:
            while nxt < n and value[2 * nxt] != 0:
                nxt += 1
            if nxt == n:
                return SolveResult(True, tuple(value[2 * v] == 1 for v in range(n)))
            code = 2 * nxt + 1
            self._new_level()
            self._assign(code)
            decisions.append((code, False))
            while not self._bcp():
                while decisions and decisions[-1][1]:
                    decisions.pop()
                if not decisions:
                    return SolveResult(False)
                code, _ = decisions.pop()
                level = len(decisions) + 1
                self._backtrack(level)
                self._new_level()
                self._assign(code ^ 1)
                decisions.append((code ^ 1, True))
                nxt = 0
            # assignments only grow until the next conflict
            nxt = min(nxt, code >> 1)

    def propagate(self, assumptions: Mapping[int, bool]) -> dict[int, bool] | None:
        """Values forced by unit propagation from ``assumptions``.

        Returns ``None`` on conflict.  Assumed variables and top-level fixed
        values are left out of the result.
        """
        self.stats.propagations += 1
        if not self._ok:
            return None
        try:
            start = len(self._trail)
            if not self._assume(assumptions):
                return None
            inferred = {}
            for code in self._trail[start:]:
                v = code >> 1
                if v not in assumptions:
                    inferred[v] = not (code & 1)
            self.stats.propagated_values += len(inferred)
            return inferred
        finally:
            self._backtrack(0)

    def is_sat(self, assumptions: Mapping[int, bool] | None = None) -> bool:
        return self.solve(assumptions).sat

    def find_core_dead(self) -> tuple[set[int], set[int]]:
        """Variables true in every model (core) and false in every model (dead)."""
        first = self.solve()
        if not first.sat:
            raise UnsatisfiableModel("formula has no model")
        seen_true = [False] * self.num_vars
        seen_false = [False] * self.num_vars

        def witness(model):
            for v, b in enumerate(model):
                if b:
                    seen_true[v] = True
                else:
                    seen_false[v] = True

        witness(first.model)
        core, dead = set(), set()
        for v in range(self.num_vars):
            if seen_true[v] and seen_false[v]:
                continue
            flip = not seen_true[v]
            r = self.solve({v: flip})
            if r.sat:
                witness(r.model)
            elif flip:
                dead.add(v)
            else:
                core.add(v)
        return core, dead


def solve(f: CnfFormula, assumptions: Mapping[int, bool] | None = None) -> SolveResult:
    return Solver(f).solve(assumptions)


def propagate(f: CnfFormula, assumptions: Mapping[int, bool]) -> dict[int, bool] | None:
    return Solver(f).propagate(assumptions)


def find_core_dead(f: CnfFormula) -> tuple[set[int], set[int]]:
    return Solver(f).find_core_dead()
