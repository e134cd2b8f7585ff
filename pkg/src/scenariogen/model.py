"""Context and feature diagrams, the mapping model, and scenarios.

A :class:`SystemModel` bundles two feature diagrams (contexts and features)
with a list of context-to-feature mappings.  Variables are identified by
name; ids are dense and follow declaration order, contexts first.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Mapping, Sequence


class Kind(enum.Enum):
    CONTEXT = "context"
    FEATURE = "feature"


class GroupKind(enum.Enum):
    MANDATORY = "mandatory"
    OPTIONAL = "optional"
    OR = "or"
    ALTERNATIVE = "alt"


class ConstraintKind(enum.Enum):
    REQUIRES = "requires"
    EXCLUDES = "excludes"


class DomainError(ValueError):
    """A scenario does not range over the expected variable universe."""


@dataclass(frozen=True)
class Variable:
    id: int
    name: str
    kind: Kind


@dataclass(frozen=True)
class ChildGroup:
    kind: GroupKind
    members: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(self.members))


@dataclass(frozen=True)
class CrossConstraint:
    kind: ConstraintKind
    source: str
    target: str

    def __str__(self):
        return f"{self.source} {self.kind.value} {self.target}"


@dataclass(frozen=True)
class IndividualMapping:
    """All ``sources`` active selects every feature in ``targets``."""

    sources: tuple[str, ...]
    targets: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "sources", tuple(self.sources))
        object.__setattr__(self, "targets", tuple(self.targets))

    def __str__(self):
        return f"{', '.join(self.sources)} -> {', '.join(self.targets)}"


@dataclass(frozen=True)
class FeatureDiagram:
    """A tree of named nodes with grouped children and cross-tree constraints.

    ``groups`` is an ordered sequence of ``(parent, ChildGroup)`` pairs; a
    parent may own several groups.  ``kind`` tells whether the nodes are
    contexts or features.
    """

    root: str
    groups: tuple[tuple[str, ChildGroup], ...] = ()
    cross_constraints: tuple[CrossConstraint, ...] = ()
    kind: Kind = Kind.FEATURE

    def __post_init__(self):
        object.__setattr__(self, "groups", tuple((p, g) for p, g in self.groups))
        object.__setattr__(self, "cross_constraints", tuple(self.cross_constraints))

    @property
    def children(self) -> dict[str, list[ChildGroup]]:
        out: dict[str, list[ChildGroup]] = {}
        for parent, group in self.groups:
            out.setdefault(parent, []).append(group)
        return out

    @property
    def names(self) -> list[str]:
        """Node names in declaration order, each listed once."""
        seen = {self.root: None}
        for parent, group in self.groups:
            seen.setdefault(parent, None)
            for m in group.members:
                seen.setdefault(m, None)
        return list(seen)


@dataclass(frozen=True)
class Universe:
    """Ordered variable names with their kinds; shared by scenarios of one model."""

    names: tuple[str, ...]
    kinds: tuple[Kind, ...]

    @cached_property
    def index(self) -> dict[str, int]:
        return {n: i for i, n in enumerate(self.names)}

    @cached_property
    def context_ids(self) -> tuple[int, ...]:
        return tuple(i for i, k in enumerate(self.kinds) if k is Kind.CONTEXT)

    def __len__(self):
        return len(self.names)


@dataclass(frozen=True)
class Scenario:
    """A total activation assignment; ``True`` is Activated, ``False`` Deactivated."""

    universe: Universe
    values: tuple[bool, ...]

    def __post_init__(self):
        values = tuple(bool(v) for v in self.values)
        if len(values) != len(self.universe):
            raise DomainError(
                f"scenario has {len(values)} values for {len(self.universe)} variables"
            )
        object.__setattr__(self, "values", values)

    @classmethod
    def from_active(cls, universe: Universe, active: Iterable[str]) -> "Scenario":
        active = set(active)
        unknown = active - set(universe.names)
        if unknown:
            raise DomainError(f"unknown variables: {sorted(unknown)}")
        return cls(universe, tuple(n in active for n in universe.names))

    @classmethod
    def from_dict(cls, universe: Universe, assignment: Mapping[str, bool]) -> "Scenario":
        if set(assignment) != set(universe.names):
            missing = set(universe.names) - set(assignment)
            extra = set(assignment) - set(universe.names)
            raise DomainError(f"assignment mismatch: missing {sorted(missing)}, extra {sorted(extra)}")
        return cls(universe, tuple(assignment[n] for n in universe.names))

    def __getitem__(self, name: str) -> bool:
        return self.values[self.universe.index[name]]

    def active(self) -> list[str]:
        return [n for n, v in zip(self.universe.names, self.values) if v]

    def as_dict(self) -> dict[str, bool]:
        return dict(zip(self.universe.names, self.values))

    def __repr__(self):
        return f"Scenario(active={self.active()})"


@dataclass
class TestSuite:
    """An ordered list of scenarios over one model's universe."""

    __test__ = False  # keep pytest from collecting this class

    model: "SystemModel"
    scenarios: list[Scenario] = field(default_factory=list)

    def __post_init__(self):
        self.scenarios = list(self.scenarios)
        for s in self.scenarios:
            if s.universe != self.model.universe:
                raise DomainError("scenario universe differs from the suite's model")

    def __len__(self):
        return len(self.scenarios)

    def __iter__(self) -> Iterator[Scenario]:
        return iter(self.scenarios)

    def __getitem__(self, i):
        return self.scenarios[i]

    def reordered(self, order: Sequence[int]) -> "TestSuite":
        return TestSuite(self.model, [self.scenarios[i] for i in order])


@dataclass(frozen=True)
class SystemModel:
    contexts: FeatureDiagram
    features: FeatureDiagram
    mapping: tuple[IndividualMapping, ...] = ()
    cross_model_constraints: tuple[CrossConstraint, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "mapping", tuple(self.mapping))
        object.__setattr__(self, "cross_model_constraints", tuple(self.cross_model_constraints))

    @cached_property
    def variables(self) -> tuple[Variable, ...]:
        out: list[Variable] = []
        seen: set[str] = set()
        for diagram, kind in ((self.contexts, Kind.CONTEXT), (self.features, Kind.FEATURE)):
            for name in diagram.names:
                if name not in seen:
                    seen.add(name)
                    out.append(Variable(len(out), name, kind))
        return tuple(out)

    @cached_property
    def universe(self) -> Universe:
        return Universe(
            tuple(v.name for v in self.variables), tuple(v.kind for v in self.variables)
        )

    @property
    def index(self) -> dict[str, int]:
        return self.universe.index

    @property
    def context_names(self) -> list[str]:
        return [v.name for v in self.variables if v.kind is Kind.CONTEXT]

    @property
    def feature_names(self) -> list[str]:
        return [v.name for v in self.variables if v.kind is Kind.FEATURE]

    def scenario(self, active: Iterable[str]) -> Scenario:
        return Scenario.from_active(self.universe, active)

    def default_scenario(self) -> Scenario:
        """Starting configuration: everything deactivated except the two roots."""
        return self.scenario([self.contexts.root, self.features.root])


@dataclass(frozen=True)
class ModelIssue:
    code: str
    element: str
    message: str

    def __str__(self):
        return f"{self.code}: {self.element}: {self.message}"


def _diagram_issues(d: FeatureDiagram, label: str) -> list[ModelIssue]:
    issues: list[ModelIssue] = []
    parent_of: dict[str, str] = {}
    for parent, group in d.groups:
        n = len(group.members)
        where = f"{label}:{parent}"
        if n == 0:
            issues.append(ModelIssue("EmptyGroup", where, "group has no members"))
        elif group.kind in (GroupKind.MANDATORY, GroupKind.OPTIONAL) and n != 1:
            issues.append(ModelIssue("GroupArity", where, f"{group.kind.value} group must have one member"))
        elif group.kind in (GroupKind.OR, GroupKind.ALTERNATIVE) and n < 2:
            issues.append(ModelIssue("GroupArity", where, f"{group.kind.value} group needs at least two members"))
        for m in group.members:
            if m == d.root:
                issues.append(ModelIssue("NonTreeHierarchy", m, "root listed as a child"))
            elif m in parent_of:
                issues.append(
                    ModelIssue("NonTreeHierarchy", m, f"child of both {parent_of[m]} and {parent}")
                )
            else:
                parent_of[m] = parent
    # every parent must hang off the root
    for parent, _ in d.groups:
        seen = {parent}
        node = parent
        while node != d.root:
            if node not in parent_of:
                issues.append(ModelIssue("DetachedNode", parent, "not reachable from the root"))
                break
            node = parent_of[node]
            if node in seen:
                issues.append(ModelIssue("NonTreeHierarchy", parent, "cycle in hierarchy"))
                break
            seen.add(node)
    names = set(d.names)
    for c in d.cross_constraints:
        for end in (c.source, c.target):
            if end not in names:
                issues.append(ModelIssue("CrossConstraintUnknown", str(c), f"{end} not in the {label} diagram"))
        if c.source == c.target:
            issues.append(ModelIssue("SelfConstraint", str(c), "source equals target"))
    return issues


def validate_model(m: SystemModel) -> list[ModelIssue]:
    """Structural checks; an empty list means the model is well formed."""
    issues = _diagram_issues(m.contexts, "contexts") + _diagram_issues(m.features, "features")
    ctx, feat = set(m.contexts.names), set(m.features.names)
    for name in sorted(ctx & feat):
        issues.append(ModelIssue("DuplicateName", name, "declared as both context and feature"))
    for mp in m.mapping:
        if not mp.sources:
            issues.append(ModelIssue("EmptyMappingSide", str(mp), "no source contexts"))
        if not mp.targets:
            issues.append(ModelIssue("EmptyMappingSide", str(mp), "no target features"))
        for s in mp.sources:
            if s in feat and s not in ctx:
                issues.append(ModelIssue("MappingSourceNotContext", str(mp), f"{s} is a feature"))
            elif s not in ctx:
                issues.append(ModelIssue("UnknownName", str(mp), f"{s} is undeclared"))
        for t in mp.targets:
            if t in ctx and t not in feat:
                issues.append(ModelIssue("MappingTargetNotFeature", str(mp), f"{t} is a context"))
            elif t not in feat:
                issues.append(ModelIssue("UnknownName", str(mp), f"{t} is undeclared"))
    every = ctx | feat
    for c in m.cross_model_constraints:
        for end in (c.source, c.target):
            if end not in every:
                issues.append(ModelIssue("CrossConstraintUnknown", str(c), f"{end} is undeclared"))
        if c.source == c.target:
            issues.append(ModelIssue("SelfConstraint", str(c), "source equals target"))
    return issues


def is_valid_scenario(m: SystemModel, s: Scenario) -> bool:
    """True iff ``s`` satisfies every clause of the model's CNF."""
    from .cnf import evaluate, system_to_cnf

    if s.universe != m.universe:
        raise DomainError("scenario does not range over the model's variables")
    return evaluate(system_to_cnf(m), s.values)
