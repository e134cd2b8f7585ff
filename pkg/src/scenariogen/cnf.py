"""Compile feature diagrams and the mapping model into CNF.

Literals are signed integers in DIMACS style: variable id ``v`` (0-based)
appears as ``v + 1`` when positive and ``-(v + 1)`` when negated.  Clauses
are tuples of literals sorted by variable id.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import prod
from typing import Iterable, Mapping, Sequence

from .model import (
    ConstraintKind,
    CrossConstraint,
    FeatureDiagram,
    GroupKind,
    IndividualMapping,
    SystemModel,
)

MAX_BACKWARD_CLAUSES = 100_000


class ModelTooLarge(ValueError):
    pass


def lit(var: int, polarity: bool = True) -> int:
    return var + 1 if polarity else -(var + 1)


def var_of(literal: int) -> int:
    return abs(literal) - 1


def normalize_clause(literals: Iterable[int]) -> tuple[int, ...] | None:
    """Sorted, duplicate-free clause; ``None`` for a tautology."""
    lits = set(literals)
    if any(-x in lits for x in lits):
        return None
    return tuple(sorted(lits, key=abs))


@dataclass(frozen=True)
class CnfFormula:
    num_vars: int
    clauses: tuple[tuple[int, ...], ...]
    names: tuple[str, ...] | None = None

    def __post_init__(self):
        for c in self.clauses:
            for x in c:
                if x == 0 or abs(x) > self.num_vars:
                    raise ValueError(f"literal {x} outside universe of {self.num_vars}")

    def __len__(self):
        return len(self.clauses)

    def to_dimacs(self) -> str:
        lines = []
        if self.names:
            lines += [f"c {i + 1} {n}" for i, n in enumerate(self.names)]
        lines.append(f"p cnf {self.num_vars} {len(self.clauses)}")
        lines += [" ".join(map(str, c)) + " 0" for c in self.clauses]
        return "\n".join(lines) + "\n"

    def pretty(self) -> list[str]:
        def show(x):
            name = self.names[var_of(x)] if self.names else f"x{var_of(x)}"
            return name if x > 0 else f"¬{name}"

        return ["(" + " ∨ ".join(show(x) for x in c) + ")" for c in self.clauses]


def from_dimacs(text: str) -> CnfFormula:
    num_vars = None
    clauses: list[tuple[int, ...]] = []
    current: list[int] = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("c") or line.startswith("%"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise ValueError(f"line {lineno}: bad problem line {line!r}")
            num_vars = int(parts[2])
            continue
        for tok in line.split():
            x = int(tok)
            if x == 0:
                clauses.append(tuple(current))
                current = []
            else:
                current.append(x)
    if current:
        clauses.append(tuple(current))
    if num_vars is None:
        num_vars = max((abs(x) for c in clauses for x in c), default=0)
    return CnfFormula(num_vars, tuple(clauses))


def evaluate(f: CnfFormula, values: Sequence[bool]) -> bool:
    """Truth value of ``f`` under a total assignment indexed by variable id."""
    for c in f.clauses:
        for x in c:
            if values[x - 1] if x > 0 else not values[-x - 1]:
                break
        else:
            return False
    return True


class _Builder:
    def __init__(self):
        self.clauses: list[tuple[int, ...]] = []
        self._seen: set[tuple[int, ...]] = set()

    def add(self, literals: Iterable[int]):
        c = normalize_clause(literals)
        if c is not None and c not in self._seen:
            self._seen.add(c)
            self.clauses.append(c)


def _diagram_clauses(d: FeatureDiagram, index: Mapping[str, int], out: _Builder):
    def pos(name):
        return lit(index[name])

    out.add([pos(d.root)])
    for parent, group in d.groups:
        p = pos(parent)
        kids = [pos(m) for m in group.members]
        if group.kind is GroupKind.MANDATORY:
            for c in kids:
                out.add([-p, c])
                out.add([-c, p])
        elif group.kind is GroupKind.OPTIONAL:
            for c in kids:
                out.add([-c, p])
        else:
            out.add([-p, *kids])
            for c in kids:
                out.add([-c, p])
            if group.kind is GroupKind.ALTERNATIVE:
                for i, a in enumerate(kids):
                    for b in kids[i + 1:]:
                        out.add([-a, -b])
    _cross_clauses(d.cross_constraints, index, out)


def _cross_clauses(constraints: Iterable[CrossConstraint], index, out: _Builder):
    for c in constraints:
        a, b = lit(index[c.source]), lit(index[c.target])
        if c.kind is ConstraintKind.REQUIRES:
            out.add([-a, b])
        else:
            out.add([-a, -b])


def _mapping_clauses(mapping: Sequence[IndividualMapping], index, out: _Builder):
    # forward: all sources active selects each target
    for mp in mapping:
        neg_sources = [-lit(index[s]) for s in mp.sources]
        for t in mp.targets:
            out.add([*neg_sources, lit(index[t])])
    # backward: an active target needs one of its mappings fully active
    source_sets: dict[str, list[tuple[str, ...]]] = {}
    for mp in mapping:
        for t in mp.targets:
            source_sets.setdefault(t, []).append(tuple(dict.fromkeys(mp.sources)))
    for target, sets in source_sets.items():
        size = prod(len(s) for s in sets)
        if size > MAX_BACKWARD_CLAUSES:
            raise ModelTooLarge(
                f"backward constraint of {target} expands to {size} clauses"
            )
        f = lit(index[target])
        combos: list[list[int]] = [[]]
        for s in sets:
            combos = [c + [lit(index[x])] for c in combos for x in s]
        for c in combos:
            out.add([-f, *c])


def _formula(out: _Builder, index: Mapping[str, int]) -> CnfFormula:
    names = [None] * len(index)
    for n, i in index.items():
        names[i] = n
    return CnfFormula(len(index), tuple(out.clauses), tuple(names))


def diagram_to_cnf(d: FeatureDiagram, index: Mapping[str, int] | None = None) -> CnfFormula:
    """Clauses whose models are exactly the valid configurations of ``d``.

    Without ``index`` the variables are numbered in the diagram's own
    declaration order.
    """
    if index is None:
        index = {n: i for i, n in enumerate(d.names)}
    out = _Builder()
    _diagram_clauses(d, index, out)
    return _formula(out, index)


def mapping_to_cnf(mapping: Sequence[IndividualMapping], index: Mapping[str, int]) -> CnfFormula:
    out = _Builder()
    _mapping_clauses(mapping, index, out)
    return _formula(out, index)


@lru_cache(maxsize=64)
def system_to_cnf(m: SystemModel) -> CnfFormula:
    """Conjunction of both diagrams, the mapping and cross-model constraints."""
    index = m.index
    out = _Builder()
    _diagram_clauses(m.contexts, index, out)
    _diagram_clauses(m.features, index, out)
    _mapping_clauses(m.mapping, index, out)
    _cross_clauses(m.cross_model_constraints, index, out)
    return _formula(out, index)
