"""Derived, choice, windowed-aggregate, and conformance enrichment.

All operations are pure: they return a new EventLog and never mutate or
overwrite pre-existing attribute values.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

from .errors import ParseError, SchemaError
from .logmodel import BOOLEAN, NOMINAL, NUMERIC, Event, EventLog, Trace

#: trace attribute values for the delay classification
DELAYED = "delayed"
ON_TIME = "onTime"


def _copy_log(log: EventLog) -> EventLog:
    traces = [
        Trace([Event(e.eid, dict(e.attrs)) for e in t.events], dict(t.attrs))
        for t in log.traces
    ]
    return EventLog(traces, dict(log.schema))


def _set_new(attrs: dict, name: str, value) -> None:
    # enrichment adds, never overwrites
    if name not in attrs and value is not None:
        attrs[name] = value


def enrich_derived(log: EventLog, delay_threshold_fraction: float) -> EventLog:
    """Add time/control-flow attributes to events and traces.

    Per event: ``Duration`` (kept if already present, else gap to the next
    event of the case, 0 for the last one), ``nextActivity``,
    ``prevActivity``, ``eventIndex`` (1-based), ``elapsedSinceCaseStart``.
    Per trace: ``traceDuration``, ``numEvents``, and ``traceDelay`` which is
    ``delayed`` iff traceDuration > fraction * (maximum trace duration in the
    log).
    """
    if not log.traces:
        raise SchemaError("cannot enrich an empty log")
    if not 0 < delay_threshold_fraction <= 1:
        raise SchemaError("delay threshold fraction must be in (0, 1]")
    out = _copy_log(log)
    max_duration = max(t.events[-1].timestamp - t.events[0].timestamp for t in out.traces)
    for trace in out.traces:
        events = trace.events
        start = events[0].timestamp
        duration = events[-1].timestamp - start
        for i, ev in enumerate(events):
            nxt = events[i + 1] if i + 1 < len(events) else None
            prv = events[i - 1] if i > 0 else None
            _set_new(ev.attrs, "Duration", (nxt.timestamp - ev.timestamp) if nxt else 0)
            _set_new(ev.attrs, "nextActivity", nxt.activity if nxt else None)
            _set_new(ev.attrs, "prevActivity", prv.activity if prv else None)
            _set_new(ev.attrs, "eventIndex", i + 1)
            _set_new(ev.attrs, "elapsedSinceCaseStart", ev.timestamp - start)
        _set_new(trace.attrs, "traceDuration", duration)
        _set_new(trace.attrs, "numEvents", len(events))
        delayed = duration > delay_threshold_fraction * max_duration
        _set_new(trace.attrs, "traceDelay", DELAYED if delayed else ON_TIME)
    out.schema.update(
        {
            "Duration": NUMERIC,
            "nextActivity": NOMINAL,
            "prevActivity": NOMINAL,
            "eventIndex": NUMERIC,
            "elapsedSinceCaseStart": NUMERIC,
            "traceDuration": NUMERIC,
            "numEvents": NUMERIC,
            "traceDelay": NOMINAL,
        }
    )
    return out


def add_choice_attributes(log: EventLog) -> EventLog:
    """Stamp ``choice:<activity>`` on events at directly-follows decision points.

    An activity is a decision point when it has at least two distinct direct
    successors somewhere in the log; the attribute value is the activity of
    the next event in the case (missing on case-final events).
    """
    successors: dict = {}
    for trace in log.traces:
        for a, b in zip(trace.events, trace.events[1:]):
            successors.setdefault(a.activity, set()).add(b.activity)
    decision_points = {a for a, succ in successors.items() if len(succ) >= 2}
    out = _copy_log(log)
    for trace in out.traces:
        for i, ev in enumerate(trace.events):
            if ev.activity in decision_points and i + 1 < len(trace.events):
                _set_new(ev.attrs, f"choice:{ev.activity}", trace.events[i + 1].activity)
    for a in sorted(decision_points):
        out.schema.setdefault(f"choice:{a}", NOMINAL)
    return out


# --- windowed aggregates ----------------------------------------------------

AGGREGATE_NAMES = (
    "process-workload",
    "waiting-cases",
    "avg-service-time",
    "avg-waiting-time",
    "active-events-of",
    "waiting-events-of",
    "resource-avg-service-time",
)

EVENT_LEVEL = "event"
TRACE_LEVEL = "trace"


@dataclass(frozen=True)
class AggregatedAttribute:
    """A windowed metric plus the level it gets stamped at."""

    name: str
    level: str = EVENT_LEVEL
    param: str | None = None  # activity or resource for parameterized metrics

    def __post_init__(self):
        if self.name not in AGGREGATE_NAMES:
            raise SchemaError(f"unknown aggregated attribute {self.name!r}")
        if self.level not in (EVENT_LEVEL, TRACE_LEVEL):
            raise SchemaError(f"bad aggregate level {self.level!r}")
        needs_param = self.name.endswith("-of") or self.name.startswith("resource-")
        if needs_param and not self.param:
            raise SchemaError(f"{self.name} needs a parameter")
        if not needs_param and self.param:
            raise SchemaError(f"{self.name} takes no parameter")

    @property
    def attr_name(self) -> str:
        return f"{self.name}({self.param})" if self.param else self.name

    @classmethod
    def parse(cls, text: str, level: str = EVENT_LEVEL) -> "AggregatedAttribute":
        text = text.strip()
        if text.endswith(")") and "(" in text:
            name, param = text[:-1].split("(", 1)
            return cls(name, level, param)
        return cls(text, level)


@dataclass(frozen=True)
class WindowSpec:
    """k equal windows over [tmin, tmax]; the last window is right-closed."""

    k: int
    tmin: int
    tmax: int

    def __post_init__(self):
        if self.k < 1:
            raise SchemaError("window count k must be positive")
        if self.tmin > self.tmax:
            raise SchemaError("tmin must not exceed tmax")

    @property
    def length(self) -> float:
        return (self.tmax - self.tmin) / self.k

    def index(self, t: int) -> int:
        if not self.tmin <= t <= self.tmax:
            raise SchemaError(f"timestamp {t} outside the log span")
        if self.length == 0:
            return self.k - 1
        return min(int((t - self.tmin) / self.length), self.k - 1)

    def bounds(self, i: int) -> tuple:
        return self.tmin + i * self.length, self.tmin + (i + 1) * self.length


def log_window_spec(log: EventLog, k: int) -> WindowSpec:
    stamps = [e.timestamp for e in log.iter_events()]
    if not stamps:
        raise SchemaError("log has no events")
    return WindowSpec(k, min(stamps), max(stamps))


def compute_aggregate(log: EventLog, attr: AggregatedAttribute, k: int, t: int) -> float:
    """Evaluate the metric over the window containing timestamp ``t``."""
    spec = log_window_spec(log, k)
    return _aggregate_in_window(log, attr, spec, spec.index(t))


def _aggregate_in_window(
    log: EventLog, attr: AggregatedAttribute, spec: WindowSpec, w: int
) -> float:
    start, end = spec.bounds(w)
    if attr.name == "process-workload":
        return float(
            sum(
                1
                for tr in log.traces
                if tr.events[0].timestamp <= end and tr.events[-1].timestamp >= start
            )
        )
    if attr.name == "waiting-cases":
        count = 0
        for tr in log.traces:
            if not (tr.events[0].timestamp <= end and tr.events[-1].timestamp >= start):
                continue
            if not any(spec.index(e.timestamp) == w for e in tr.events):
                count += 1
        return float(count)
    if attr.name == "avg-service-time":
        durations = [
            e.attrs["Duration"]
            for e in log.iter_events()
            if spec.index(e.timestamp) == w and e.attrs.get("Duration") is not None
        ]
        return float(sum(durations) / len(durations)) if durations else 0.0
    if attr.name == "avg-waiting-time":
        gaps = []
        for tr in log.traces:
            for a, b in zip(tr.events, tr.events[1:]):
                if spec.index(b.timestamp) == w:
                    gaps.append(b.timestamp - a.timestamp)
        return float(sum(gaps) / len(gaps)) if gaps else 0.0
    if attr.name == "active-events-of":
        return float(
            sum(
                1
                for e in log.iter_events()
                if e.activity == attr.param and spec.index(e.timestamp) == w
            )
        )
    if attr.name == "waiting-events-of":
        count = 0
        for tr in log.traces:
            for a, b in zip(tr.events, tr.events[1:]):
                if (
                    b.activity == attr.param
                    and spec.index(a.timestamp) == w
                    and spec.index(b.timestamp) > w
                ):
                    count += 1
        return float(count)
    if attr.name == "resource-avg-service-time":
        durations = [
            e.attrs["Duration"]
            for e in log.iter_events()
            if spec.index(e.timestamp) == w
            and e.attrs.get("org:resource") == attr.param
            and e.attrs.get("Duration") is not None
        ]
        return float(sum(durations) / len(durations)) if durations else 0.0
    raise SchemaError(f"unknown aggregated attribute {attr.name!r}")


def enrich_aggregates(log: EventLog, attrs, k: int) -> EventLog:
    """Stamp each aggregate per event (at its own timestamp) or per trace (at
    the trace's maximum event timestamp)."""
    spec = log_window_spec(log, k)
    cache: dict = {}

    def value(attr: AggregatedAttribute, w: int) -> float:
        key = (attr.attr_name, w)
        if key not in cache:
            cache[key] = _aggregate_in_window(log, attr, spec, w)
        return cache[key]

    out = _copy_log(log)
    for attr in sorted(attrs, key=lambda a: (a.attr_name, a.level)):
        if attr.level == EVENT_LEVEL:
            for ev in out.iter_events():
                _set_new(ev.attrs, attr.attr_name, value(attr, spec.index(ev.timestamp)))
        else:
            for trace in out.traces:
                w = spec.index(max(e.timestamp for e in trace.events))
                _set_new(trace.attrs, attr.attr_name, value(attr, w))
        out.schema.setdefault(attr.attr_name, NUMERIC)
    return out


# --- conformance sidecar ----------------------------------------------------


@dataclass(frozen=True)
class ConformanceRecord:
    deviation: bool
    num_log_moves: int
    num_model_moves: int


def parse_conformance_csv(source) -> dict:
    """Read a ``caseID,deviation,numLogMoves,numModelMoves`` sidecar file."""
    if isinstance(source, bytes):
        source = source.decode("utf-8")
    if isinstance(source, str):
        source = io.StringIO(source)
    reader = csv.DictReader(source)
    expected = {"caseID", "deviation", "numLogMoves", "numModelMoves"}
    if reader.fieldnames is None or set(reader.fieldnames) != expected:
        raise ParseError(
            f"sidecar header must be exactly {sorted(expected)}, got {reader.fieldnames}"
        )
    sidecar = {}
    for i, row in enumerate(reader, start=2):
        dev = row["deviation"].strip().lower()
        if dev not in ("true", "false", "0", "1"):
            raise ParseError(f"line {i}: bad deviation value {row['deviation']!r}")
        sidecar[row["caseID"]] = ConformanceRecord(
            deviation=dev in ("true", "1"),
            num_log_moves=int(row["numLogMoves"]),
            num_model_moves=int(row["numModelMoves"]),
        )
    return sidecar


def attach_conformance(log: EventLog, sidecar: dict) -> EventLog:
    """Set ``deviation``/``numLogMoves``/``numModelMoves`` trace attributes.

    Cases absent from the sidecar read as missing; sidecar cases absent from
    the log are an error.
    """
    known = set(log.case_ids())
    unknown = sorted(set(sidecar) - known)
    if unknown:
        raise SchemaError(f"sidecar has unknown caseIDs: {unknown}")
    out = _copy_log(log)
    for trace in out.traces:
        rec = sidecar.get(trace.case_id)
        if rec is not None:
            _set_new(trace.attrs, "deviation", rec.deviation)
            _set_new(trace.attrs, "numLogMoves", rec.num_log_moves)
            _set_new(trace.attrs, "numModelMoves", rec.num_model_moves)
    out.schema.setdefault("deviation", BOOLEAN)
    out.schema.setdefault("numLogMoves", NUMERIC)
    out.schema.setdefault("numModelMoves", NUMERIC)
    return out
