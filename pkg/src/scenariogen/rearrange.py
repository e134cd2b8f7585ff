"""Context-switch distance, creation cost and greedy rearrangement."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .model import DomainError, Kind, Scenario, TestSuite


@dataclass(frozen=True)
class SwitchDelta:
    context_activations: tuple[str, ...] = ()
    context_deactivations: tuple[str, ...] = ()
    feature_activations: tuple[str, ...] = ()
    feature_deactivations: tuple[str, ...] = ()

    @property
    def context_switches(self) -> int:
        return len(self.context_activations) + len(self.context_deactivations)


def distance(s1: Scenario, s2: Scenario) -> int:
    """Number of contexts whose activation differs between the two scenarios."""
    if s1.universe != s2.universe:
        raise DomainError("scenarios range over different variables")
    a, b = s1.values, s2.values
    return sum(1 for i in s1.universe.context_ids if a[i] != b[i])


def creation_cost(suite: Sequence[Scenario], t0: Scenario) -> int:
    """Context switches needed to play ``suite`` in order, starting from ``t0``."""
    total = 0
    prev = t0
    for s in suite:
        total += distance(prev, s)
        prev = s
    return total


def rearrange_order(scenarios: Sequence[Scenario], t0: Scenario) -> list[int]:
    """Indices of ``scenarios`` in nearest-neighbour order from ``t0``.

    Ties go to the lowest original index.
    """
    remaining = list(range(len(scenarios)))
    order = []
    current = t0
    while remaining:
        best = min(remaining, key=lambda i: (distance(current, scenarios[i]), i))
        remaining.remove(best)
        order.append(best)
        current = scenarios[best]
    return order


def rearrange(suite: TestSuite, t0: Scenario | None = None) -> TestSuite:
    t0 = t0 or suite.model.default_scenario()
    return suite.reordered(rearrange_order(suite.scenarios, t0))


def to_switch_table(suite: Sequence[Scenario], t0: Scenario) -> list[SwitchDelta]:
    deltas = []
    prev = t0
    for s in suite:
        if s.universe != prev.universe:
            raise DomainError("scenarios range over different variables")
        buckets: dict[tuple[Kind, bool], list[str]] = {
            (Kind.CONTEXT, True): [],
            (Kind.CONTEXT, False): [],
            (Kind.FEATURE, True): [],
            (Kind.FEATURE, False): [],
        }
        for name, kind, old, new in zip(s.universe.names, s.universe.kinds, prev.values, s.values):
            if old != new:
                buckets[kind, new].append(name)
        deltas.append(
            SwitchDelta(
                tuple(buckets[Kind.CONTEXT, True]),
                tuple(buckets[Kind.CONTEXT, False]),
                tuple(buckets[Kind.FEATURE, True]),
                tuple(buckets[Kind.FEATURE, False]),
            )
        )
        prev = s
    return deltas


def apply_switch_table(deltas: Sequence[SwitchDelta], t0: Scenario) -> list[Scenario]:
    """Replay switch deltas from ``t0``; inverse of :func:`to_switch_table`."""
    out = []
    current = t0.as_dict()
    for d in deltas:
        for names, value in (
            (d.context_activations, True),
            (d.context_deactivations, False),
            (d.feature_activations, True),
            (d.feature_deactivations, False),
        ):
            for n in names:
                if n not in current:
                    raise DomainError(f"unknown variable {n!r} in switch table")
                if current[n] == value:
                    raise DomainError(f"{n!r} is already {'active' if value else 'inactive'}")
                current[n] = value
        out.append(Scenario.from_dict(t0.universe, current))
    return out
