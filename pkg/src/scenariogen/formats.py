"""Text formats: model files, suite CSV, switch tables and JSON.

Model file, line oriented, ``#`` starts a comment::

    @contexts
    Context                         # first line of a section names the root
    Context > mandatory(Noise)
    Noise > alt(Quiet, Normal, Loud)
    @features
    Messenger
    Messenger > optional(Alarm, Photo)
    @cross
    Photo requires Normal
    @mapping
    Normal -> Alarm, Photo
"""

from __future__ import annotations

import csv
import io
import json
import re
from importlib import resources
from pathlib import Path

from .model import (
    ChildGroup,
    ConstraintKind,
    CrossConstraint,
    FeatureDiagram,
    GroupKind,
    IndividualMapping,
    Kind,
    Scenario,
    SystemModel,
    TestSuite,
)
from .rearrange import SwitchDelta, apply_switch_table, to_switch_table

FIXTURES = ("mini", "messenger_v1", "messenger_v2", "messenger_v3")

_NAME = r"[A-Za-z_][A-Za-z0-9_]*"
_NAME_RE = re.compile(_NAME)
_GROUP_RE = re.compile(rf"^({_NAME})\s*>\s*(\w+)\s*\((.*)\)\s*$")
_CROSS_RE = re.compile(rf"^({_NAME})\s+(requires|excludes)\s+({_NAME})\s*$")
_KINDS = {k.value: k for k in GroupKind}


class ModelParseError(ValueError):
    def __init__(self, message: str, line: int, column: int = 1):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


def _names(text: str, lineno: int, offset: int) -> list[tuple[str, int]]:
    """Comma-separated identifiers with their 1-based columns."""
    out = []
    pos = 0
    for part in text.split(","):
        name = part.strip()
        col = offset + pos + (len(part) - len(part.lstrip())) + 1
        if not _NAME_RE.fullmatch(name):
            raise ModelParseError(f"bad identifier {name!r}", lineno, col)
        out.append((name, col))
        pos += len(part) + 1
    return out


class _DiagramDraft:
    def __init__(self, kind: Kind):
        self.kind = kind
        self.root: str | None = None
        self.groups: list[tuple[str, ChildGroup]] = []
        self.declared: list[str] = []


def parse_model(text: str) -> SystemModel:
    drafts = {"contexts": _DiagramDraft(Kind.CONTEXT), "features": _DiagramDraft(Kind.FEATURE)}
    declared: dict[str, str] = {}  # name -> section
    cross: list[tuple[CrossConstraint, int]] = []
    mapping: list[tuple[IndividualMapping, int]] = []
    section = None

    def declare(name, where, lineno, col):
        if name in declared:
            raise ModelParseError(f"duplicate name {name!r}", lineno, col)
        declared[name] = where

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].rstrip()
        stripped = line.strip()
        if not stripped:
            continue
        indent = len(line) - len(line.lstrip())
        if stripped.startswith("@"):
            section = stripped[1:]
            if section not in ("contexts", "features", "cross", "mapping"):
                raise ModelParseError(f"unknown section {stripped!r}", lineno, indent + 1)
            continue
        if section is None:
            raise ModelParseError("content before any section header", lineno, indent + 1)
        if section in drafts:
            d = drafts[section]
            if d.root is None:
                if not _NAME_RE.fullmatch(stripped):
                    raise ModelParseError("expected the root name", lineno, indent + 1)
                declare(stripped, section, lineno, indent + 1)
                d.root = stripped
                continue
            m = _GROUP_RE.match(stripped)
            if not m:
                raise ModelParseError("expected 'parent > kind(child, ...)'", lineno, indent + 1)
            parent, kind_word, body = m.groups()
            if declared.get(parent) != section:
                raise ModelParseError(f"unknown identifier {parent!r}", lineno, indent + 1)
            if kind_word not in _KINDS:
                raise ModelParseError(
                    f"unknown group kind {kind_word!r}", lineno, indent + 1 + m.start(2)
                )
            kind = _KINDS[kind_word]
            named = _names(body, lineno, indent + m.start(3))
            for name, col in named:
                declare(name, section, lineno, col)
            members = [name for name, _ in named]
            if kind in (GroupKind.MANDATORY, GroupKind.OPTIONAL):
                d.groups += [(parent, ChildGroup(kind, (name,))) for name in members]
            else:
                if len(members) < 2:
                    raise ModelParseError(f"{kind_word} group needs two or more children", lineno, indent + 1)
                d.groups.append((parent, ChildGroup(kind, tuple(members))))
        elif section == "cross":
            m = _CROSS_RE.match(stripped)
            if not m:
                raise ModelParseError("expected 'A requires B' or 'A excludes B'", lineno, indent + 1)
            a, word, b = m.groups()
            for name, pos in ((a, m.start(1)), (b, m.start(3))):
                if name not in declared:
                    raise ModelParseError(f"unknown identifier {name!r}", lineno, indent + 1 + pos)
            cross.append((CrossConstraint(ConstraintKind(word), a, b), lineno))
        else:
            if "->" not in stripped:
                raise ModelParseError("expected 'C1, C2 -> F1, F2'", lineno, indent + 1)
            left, right = stripped.split("->", 1)
            sources = _names(left, lineno, indent)
            targets = _names(right, lineno, indent + len(left) + 2)
            for (name, col), want, what in [
                *((x, "contexts", "mapping source is not a context") for x in sources),
                *((x, "features", "mapping target is not a feature") for x in targets),
            ]:
                if declared.get(name) != want:
                    raise ModelParseError(f"{what if name in declared else 'unknown identifier'} {name!r}", lineno, col)
            mapping.append(
                (IndividualMapping(tuple(n for n, _ in sources), tuple(n for n, _ in targets)), lineno)
            )

    for key, d in drafts.items():
        if d.root is None:
            raise ModelParseError(f"missing @{key} section or root", max(1, len(text.splitlines())))

    per_diagram = {"contexts": [], "features": []}
    cross_model = []
    for c, _ in cross:
        a, b = declared[c.source], declared[c.target]
        if a == b:
            per_diagram[a].append(c)
        else:
            cross_model.append(c)

    def diagram(key):
        d = drafts[key]
        return FeatureDiagram(d.root, tuple(d.groups), tuple(per_diagram[key]), d.kind)

    return SystemModel(
        diagram("contexts"), diagram("features"), tuple(m for m, _ in mapping), tuple(cross_model)
    )


def format_model(m: SystemModel) -> str:
    lines = []
    for title, d in (("contexts", m.contexts), ("features", m.features)):
        lines.append(f"@{title}")
        lines.append(d.root)
        for parent, g in d.groups:
            lines.append(f"{parent} > {g.kind.value}({', '.join(g.members)})")
    constraints = [*m.contexts.cross_constraints, *m.features.cross_constraints, *m.cross_model_constraints]
    if constraints:
        lines.append("@cross")
        lines += [str(c) for c in constraints]
    lines.append("@mapping")
    lines += [str(mp) for mp in m.mapping]
    return "\n".join(lines) + "\n"


def load_model(path_or_name: str | Path) -> SystemModel:
    """Parse a model file, or a bundled fixture given by name (``"mini"``...)."""
    if str(path_or_name) in FIXTURES:
        return parse_model(fixture_text(f"{path_or_name}.model"))
    return parse_model(Path(path_or_name).read_text(encoding="utf-8"))


def fixture_text(filename: str) -> str:
    return resources.files("scenariogen.fixtures").joinpath(filename).read_text(encoding="utf-8")


# -- suites -----------------------------------------------------------------


def suite_to_csv(suite: TestSuite) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["Scenario", *suite.model.universe.names])
    for i, s in enumerate(suite, 1):
        w.writerow([i, *("A" if v else "D" for v in s.values)])
    return buf.getvalue()


def suite_from_csv(text: str, model: SystemModel) -> TestSuite:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or rows[0][:1] != ["Scenario"]:
        raise ValueError("suite CSV must start with a 'Scenario' header")
    header = rows[0][1:]
    universe = model.universe
    known = set(universe.names)
    unknown = [h for h in header if h not in known]
    if unknown:
        raise ValueError(f"unknown columns: {unknown}")
    scenarios = []
    for row in rows[1:]:
        if not row:
            continue
        cells = dict(zip(header, row[1:]))
        for name, cell in cells.items():
            if cell not in ("A", "D"):
                raise ValueError(f"scenario {row[0]}: {name} must be A or D, got {cell!r}")
        # columns omitted from the CSV default to deactivated, roots to activated
        roots = {model.contexts.root, model.features.root}
        values = {n: (cells[n] == "A") if n in cells else n in roots for n in universe.names}
        scenarios.append(Scenario.from_dict(universe, values))
    return TestSuite(model, scenarios)


def suite_to_switch_table(suite: TestSuite, t0: Scenario | None = None) -> str:
    t0 = t0 or suite.model.default_scenario()
    lines = ["Scenario;CtxAct;CtxDeact;FeatAct;FeatDeact"]
    for i, d in enumerate(to_switch_table(suite, t0), 1):
        cols = [d.context_activations, d.context_deactivations, d.feature_activations, d.feature_deactivations]
        lines.append(";".join([str(i), *(",".join(c) for c in cols)]))
    return "\n".join(lines) + "\n"


def suite_from_switch_table(text: str, model: SystemModel, t0: Scenario | None = None) -> TestSuite:
    t0 = t0 or model.default_scenario()
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("Scenario;"):
        raise ValueError("switch table must start with the 'Scenario;...' header")
    deltas = []
    for ln in lines[1:]:
        parts = ln.split(";")
        if len(parts) != 5:
            raise ValueError(f"expected 5 columns: {ln!r}")
        cols = [tuple(x for x in p.split(",") if x) for p in parts[1:]]
        deltas.append(SwitchDelta(*cols))
    return TestSuite(model, apply_switch_table(deltas, t0))


def suite_to_json(suite: TestSuite) -> str:
    data = {
        "variables": list(suite.model.universe.names),
        "scenarios": [s.active() for s in suite],
    }
    return json.dumps(data, indent=2) + "\n"


def suite_from_json(text: str, model: SystemModel) -> TestSuite:
    data = json.loads(text)
    return TestSuite(model, [model.scenario(active) for active in data["scenarios"]])


def read_suite(path: str | Path, model: SystemModel) -> TestSuite:
    """Load a suite file, picking the format from its content."""
    text = Path(path).read_text(encoding="utf-8")
    head = text.lstrip()[:20]
    if head.startswith("{"):
        return suite_from_json(text, model)
    if head.startswith("Scenario;"):
        return suite_from_switch_table(text, model)
    return suite_from_csv(text, model)
