"""Class-sensitive situation feature tables.

A situation is a non-empty trace prefix plus the trace attributes; a
situation feature reads either a trace attribute or the latest prefix event
inside an event group. Situations are materialized as (trace, prefix length)
pairs, not copies, since prefix counts can be quadratic in trace length.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

from .errors import PlanError, SchemaError, TableError
from .jsonio import _format_float
from .logmodel import NOMINAL, NUMERIC, TIMESTAMP, EventGroup, EventLog, Trace

TRACE_SCOPE = None  # scope marker for trace-level features


@dataclass(frozen=True)
class SituationFeature:
    """An (attribute, scope) pair; scope is an EventGroup or None for trace level."""

    attribute: str
    scope: EventGroup | None = TRACE_SCOPE

    @property
    def label(self) -> str:
        where = "Trace" if self.scope is None else self.scope.label()
        return f"{where},{self.attribute}"

    def to_dict(self) -> dict:
        return {
            "attribute": self.attribute,
            "scope": None if self.scope is None else self.scope.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SituationFeature":
        scope = data.get("scope")
        return cls(data["attribute"], None if scope is None else EventGroup.from_dict(scope))


def trace_feature(attribute: str) -> SituationFeature:
    return SituationFeature(attribute, TRACE_SCOPE)


def activity_feature(attribute: str, *activities: str) -> SituationFeature:
    return SituationFeature(attribute, EventGroup("actName", frozenset(activities)))


@dataclass(frozen=True)
class Situation:
    """A prefix of one trace; ``prefix_len`` events starting at the first."""

    trace: Trace
    prefix_len: int

    @property
    def prefix(self):
        return self.trace.events[: self.prefix_len]

    @property
    def source_case_id(self) -> str:
        return self.trace.case_id

    @property
    def last_event(self):
        return self.trace.events[self.prefix_len - 1]


def situation_subset(log: EventLog, scope: EventGroup | None) -> list:
    """All situations whose last event lies in ``scope`` (trace scope: whole
    traces). Ordered by caseID then prefix length."""
    situations = []
    for trace in log.traces:
        if scope is None:
            situations.append(Situation(trace, len(trace.events)))
        else:
            for i, ev in enumerate(trace.events):
                if scope.contains(ev):
                    situations.append(Situation(trace, i + 1))
    situations.sort(key=lambda s: (str(s.source_case_id), s.prefix_len))
    return situations


def eval_feature(situation: Situation, feature: SituationFeature):
    """Value of the feature on the situation; None encodes a missing value.

    Group-scoped features read the latest prefix event in the group (maximum
    timestamp, position breaking ties toward the latest).
    """
    if feature.scope is None:
        return situation.trace.attrs.get(feature.attribute)
    for ev in reversed(situation.prefix):
        if feature.scope.contains(ev):
            return ev.attrs.get(feature.attribute)
    return None


@dataclass(frozen=True)
class ExtractionPlan:
    features: tuple
    class_feature: SituationFeature

    def __post_init__(self):
        object.__setattr__(self, "features", tuple(self.features))
        if not self.features:
            raise PlanError("plan needs at least one feature")
        if self.class_feature not in self.features:
            raise PlanError("class feature must be one of the plan features")
        labels = [f.label for f in self.features]
        if len(set(labels)) != len(labels):
            dupes = sorted({l for l in labels if labels.count(l) > 1})
            raise PlanError(f"duplicate feature labels: {dupes}")

    @property
    def class_index(self) -> int:
        return self.features.index(self.class_feature)

    def to_dict(self) -> dict:
        return {
            "features": [f.to_dict() for f in self.features],
            "classFeature": self.class_feature.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ExtractionPlan":
        features = tuple(SituationFeature.from_dict(f) for f in data["features"])
        return cls(features, SituationFeature.from_dict(data["classFeature"]))


def _column_type(feature: SituationFeature, schema: dict) -> str:
    kind = schema.get(feature.attribute, NOMINAL)
    return NUMERIC if kind in (NUMERIC, TIMESTAMP) else NOMINAL


@dataclass
class SituationTable:
    """Rows of feature values aligned with the plan's feature order."""

    plan: ExtractionPlan
    rows: list  # list of lists, one value per plan feature
    column_types: dict = field(default_factory=dict)  # label -> nominal|numeric

    def __post_init__(self):
        width = len(self.plan.features)
        for i, row in enumerate(self.rows):
            if len(row) != width:
                raise TableError(f"row {i} has {len(row)} values, plan has {width}")
        for f in self.plan.features:
            self.column_types.setdefault(f.label, NOMINAL)

    @property
    def labels(self) -> list:
        return [f.label for f in self.plan.features]

    def __len__(self) -> int:
        return len(self.rows)

    def feature_by_label(self, label: str) -> SituationFeature:
        for f in self.plan.features:
            if f.label == label:
                return f
        raise TableError(f"no feature labelled {label!r}")

    def resolve_feature(self, name: str) -> SituationFeature:
        """Find a feature by exact label, or by attribute name if unique."""
        for f in self.plan.features:
            if f.label == name:
                return f
        matches = [f for f in self.plan.features if f.attribute == name]
        if len(matches) == 1:
            return matches[0]
        if not matches:
            raise TableError(f"no feature named {name!r}")
        raise TableError(
            f"{name!r} is ambiguous; use a full label: {[f.label for f in matches]}"
        )

    def column(self, feature: SituationFeature) -> list:
        i = self.plan.features.index(feature)
        return [row[i] for row in self.rows]

    def class_values(self) -> list:
        return self.column(self.plan.class_feature)

    def is_complete(self) -> bool:
        return all(v is not None for row in self.rows for v in row)

    def to_dict(self) -> dict:
        return {
            "plan": self.plan.to_dict(),
            "columnTypes": dict(self.column_types),
            "rows": [list(r) for r in self.rows],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SituationTable":
        plan = ExtractionPlan.from_dict(data["plan"])
        return cls(plan, [list(r) for r in data["rows"]], dict(data["columnTypes"]))

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.labels)
        for row in self.rows:
            writer.writerow(
                [
                    ""
                    if v is None
                    else (_format_float(v) if isinstance(v, float) else v)
                    for v in row
                ]
            )
        return buf.getvalue()


def extract_table(log: EventLog, plan: ExtractionPlan) -> SituationTable:
    """One instance per situation of the class feature's situation subset."""
    for f in plan.features:
        if f.scope is not None and f.scope.attribute not in log.schema:
            raise SchemaError(f"group attribute {f.scope.attribute!r} not in schema")
    situations = situation_subset(log, plan.class_feature.scope)
    rows = [[eval_feature(s, f) for f in plan.features] for s in situations]
    types = {f.label: _column_type(f, log.schema) for f in plan.features}
    return SituationTable(plan, rows, types)


DROP_ROW = "drop-row"


def drop_incomplete_rows(table: SituationTable, policy=DROP_ROW) -> SituationTable:
    """Make the table complete.

    ``"drop-row"`` removes every row with a missing value. A
    ``("drop-column-threshold", fraction)`` policy first drops non-class
    columns missing in more than ``fraction`` of the rows, then drops the
    remaining incomplete rows.
    """
    plan, rows = table.plan, table.rows
    if policy != DROP_ROW:
        kind, fraction = policy
        if kind != "drop-column-threshold":
            raise TableError(f"unknown policy {policy!r}")
        n = len(rows) or 1
        keep = []
        for i, f in enumerate(plan.features):
            missing = sum(1 for row in rows if row[i] is None) / n
            if missing > fraction:
                if f == plan.class_feature:
                    raise TableError(
                        f"class column {f.label!r} exceeds the missing threshold"
                    )
                continue
            keep.append(i)
        plan = ExtractionPlan(tuple(plan.features[i] for i in keep), plan.class_feature)
        rows = [[row[i] for i in keep] for row in rows]
    kept_rows = [row for row in rows if all(v is not None for v in row)]
    if not kept_rows:
        raise TableError("no complete rows remain")
    types = {f.label: table.column_types[f.label] for f in plan.features}
    return SituationTable(plan, kept_rows, types)
