"""In-memory event log model.

Attribute values are plain Python values: str, int, float, bool, or an int
holding UTC epoch milliseconds for timestamps. ``None`` encodes a missing
value and is distinct from every typed value. Logs are treated as immutable
after construction; enrichment returns new logs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

from .errors import SchemaError

# attribute kinds in a log schema
NOMINAL = "nominal"
NUMERIC = "numeric"
TIMESTAMP = "timestamp"
BOOLEAN = "boolean"

KINDS = (NOMINAL, NUMERIC, TIMESTAMP, BOOLEAN)

#: attribute names every event must carry with a non-missing value
CORE_ATTRS = ("actName", "timestamp", "caseID")

Value = Optional[object]  # str | int | float | bool | None


def value_kind(v) -> str:
    """Kind of a single non-missing value."""
    if isinstance(v, bool):
        return BOOLEAN
    if isinstance(v, (int, float)):
        return NUMERIC
    return NOMINAL


@dataclass
class Event:
    """One activity occurrence; ``eid`` is unique across the whole log."""

    eid: int
    attrs: dict

    def __getitem__(self, name: str) -> Value:
        return self.attrs.get(name)

    @property
    def activity(self) -> str:
        return self.attrs["actName"]

    @property
    def timestamp(self) -> int:
        return self.attrs["timestamp"]

    @property
    def case_id(self) -> str:
        return self.attrs["caseID"]


@dataclass
class Trace:
    """Non-empty event sequence of one case plus case-level attributes."""

    events: list
    attrs: dict = field(default_factory=dict)

    @property
    def case_id(self) -> str:
        return self.events[0].case_id

    def __len__(self) -> int:
        return len(self.events)


@dataclass
class EventLog:
    traces: list
    schema: dict  # attribute name -> kind

    def __len__(self) -> int:
        return len(self.traces)

    def iter_events(self):
        for trace in self.traces:
            yield from trace.events

    def case_ids(self) -> list:
        return [t.case_id for t in self.traces]

    def trace_by_case(self, case_id: str) -> Trace:
        for t in self.traces:
            if t.case_id == case_id:
                return t
        raise SchemaError(f"unknown caseID {case_id !r}")

    def validate(self) -> None:
        """Check the structural invariants; raises SchemaError on violation."""
        seen_cases = set()
        seen_eids = set()
        for ti, trace in enumerate(self.traces):
            if not trace.events:
                raise SchemaError(f"trace {ti} has no events")
            cid = trace.events[0].attrs.get("caseID")
            if cid in seen_cases:
                raise SchemaError(f"duplicate caseID {cid!r}", detail={"trace": ti})
            seen_cases.add(cid)
            prev_ts = None
            for ei, ev in enumerate(trace.events):
                for name in CORE_ATTRS:
                    if ev.attrs.get(name) is None:
                        raise SchemaError(
                            f"event {ei} of trace {ti} missing {name}",
                            detail={"trace": ti, "event": ei},
                        )
                if ev.attrs["caseID"] != cid:
                    raise SchemaError(f"mixed caseID in trace {ti}")
                if ev.eid in seen_eids:
                    raise SchemaError(f"duplicate event id {ev.eid}")
                seen_eids.add(ev.eid)
                ts = ev.attrs["timestamp"]
                if prev_ts is not None and ts < prev_ts:
                    raise SchemaError(
                        f"timestamps decrease in trace {ti} at event {ei}"
                    )
                prev_ts = ts
            for name, v in trace.attrs.items():
                if name not in self.schema and v is not None:
                    raise SchemaError(f"trace attribute {name!r} not in schema")
        for ev in self.iter_events():
            for name in ev.attrs:
                if name not in self.schema:
                    raise SchemaError(f"event attribute {name!r} not in schema")

    # --- canonical form -------------------------------------------------

    def to_dict(self) -> dict:
        """Canonical dict form; event ids are internal and excluded."""
        return {
            "schema": dict(self.schema),
            "traces": [
                {
                    "attrs": dict(t.attrs),
                    "events": [dict(e.attrs) for e in t.events],
                }
                for t in self.traces
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "EventLog":
        eid = 0
        traces = []
        for t in data["traces"]:
            events = []
            for attrs in t["events"]:
                events.append(Event(eid, dict(attrs)))
                eid += 1
            traces.append(Trace(events, dict(t.get("attrs", {}))))
        log = cls(traces, dict(data["schema"]))
        log.validate()
        return log


@dataclass(frozen=True)
class EventGroup:
    """Events sharing one of the given values for one attribute."""

    attribute: str
    values: frozenset

    def __post_init__(self):
        if not self.values:
            raise SchemaError("event group needs a non-empty value set")
        object.__setattr__(self, "values", frozenset(self.values))

    def contains(self, event: Event) -> bool:
        v = event.attrs.get(self.attribute)
        return v is not None and v in self.values

    def label(self) -> str:
        vals = sorted(self.values, key=str)
        if self.attribute == "actName" and len(vals) == 1:
            return str(vals[0])
        return f"{self.attribute}={'|'.join(str(v) for v in vals)}"

    def to_dict(self) -> dict:
        return {"attribute": self.attribute, "values": sorted(self.values, key=str)}

    @classmethod
    def from_dict(cls, data: dict) -> "EventGroup":
        return cls(data["attribute"], frozenset(data["values"]))


def activity_group(*names: str) -> EventGroup:
    return EventGroup("actName", frozenset(names))


def group_events(log: EventLog, group: EventGroup) -> set:
    """Ids of events whose group attribute takes one of the group's values.

    Missing values never match.
    """
    if group.attribute not in log.schema:
        raise SchemaError(f"unknown attribute {group.attribute!r}")
    return {e.eid for e in log.iter_events() if group.contains(e)}


def infer_schema(traces: Iterable[Trace]) -> dict:
    """Schema covering every attribute seen on any event or trace."""
    schema: dict = {"caseID": NOMINAL, "actName": NOMINAL, "timestamp": TIMESTAMP}
    for trace in traces:
        items = list(trace.attrs.items())
        for ev in trace.events:
            items.extend(ev.attrs.items())
        for name, v in items:
            if v is None or name in schema:
                continue
            schema[name] = value_kind(v)
    return schema
