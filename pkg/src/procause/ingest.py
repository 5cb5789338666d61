"""XES and CSV ingestion, XES emission, canonical log JSON.

XES support covers the core schema: ``log``/``trace``/``event`` elements with
string/int/float/date/boolean attribute children. ``concept:name`` on an
event becomes ``actName``, ``time:timestamp`` becomes ``timestamp`` (UTC
epoch milliseconds), and the trace's ``concept:name`` becomes the ``caseID``
copied onto every event. Any other key (including ``org:*`` and unknown
extensions) is kept verbatim as a plain attribute.
"""

from __future__ import annotations

import csv
import io
import xml.etree.ElementTree as ET
from datetime import datetime, timezone

from .errors import ParseError
from .jsonio import read_json, write_canonical
from .logmodel import Event, EventLog, Trace, infer_schema

_XES_VALUE_TAGS = ("string", "int", "float", "date", "boolean")


def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def _parse_xes_datetime(text: str, where: str) -> int:
    try:
        dt = datetime.fromisoformat(text.replace("Z", "+00:00"))
    except ValueError as exc:
        raise ParseError(f"bad timestamp {text!r} at {where}") from exc
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return round(dt.timestamp() * 1000)


def _xes_attr(elem, where: str):
    tag = _local(elem.tag)
    if tag not in _XES_VALUE_TAGS:
        return None
    key = elem.get("key")
    raw = elem.get("value")
    if key is None or raw is None:
        raise ParseError(f"attribute without key/value at {where}")
    if tag == "string":
        return key, raw
    if tag == "int":
        return key, int(raw)
    if tag == "float":
        return key, float(raw)
    if tag == "boolean":
        return key, raw.strip().lower() == "true"
    return key, _parse_xes_datetime(raw, where)


def parse_xes(source) -> EventLog:
    """Parse an XES document (bytes, str, or binary file) into an EventLog."""
    if isinstance(source, str):
        source = source.encode("utf-8")
    if isinstance(source, bytes):
        source = io.BytesIO(source)
    try:
        root = ET.parse(source).getroot()
    except ET.ParseError as exc:
        raise ParseError(f"malformed XML: {exc}") from exc
    if _local(root.tag) != "log":
        raise ParseError(f"root element is <{_local(root.tag)}>, expected <log>")

    traces = []
    seen_cases = {}
    eid = 0
    for ti, trace_el in enumerate(el for el in root if _local(el.tag) == "trace"):
        trace_attrs = {}
        raw_events = []
        for child in trace_el:
            tag = _local(child.tag)
            if tag == "event":
                where = f"trace {ti}, event {len(raw_events)}"
                attrs = {}
                for attr_el in child:
                    kv = _xes_attr(attr_el, where)
                    if kv is not None:
                        attrs[kv[0]] = kv[1]
                raw_events.append(attrs)
            else:
                kv = _xes_attr(child, f"trace {ti}")
                if kv is not None:
                    trace_attrs[kv[0]] = kv[1]
        case_id = trace_attrs.pop("concept:name", None)
        if case_id is None:
            raise ParseError(f"trace {ti} has no concept:name", detail={"trace": ti})
        case_id = str(case_id)
        if case_id in seen_cases:
            raise ParseError(
                f"duplicate caseID {case_id!r} (traces {seen_cases[case_id]} and {ti})",
                detail={"trace": ti},
            )
        seen_cases[case_id] = ti

        events = []
        for ei, attrs in enumerate(raw_events):
            act = attrs.pop("concept:name", None)
            ts = attrs.pop("time:timestamp", None)
            if act is None:
                raise ParseError(
                    f"event {ei} of trace {ti} has no concept:name",
                    detail={"trace": ti, "event": ei},
                )
            if ts is None:
                raise ParseError(
                    f"event {ei} of trace {ti} has no time:timestamp",
                    detail={"trace": ti, "event": ei},
                )
            attrs["actName"] = str(act)
            attrs["timestamp"] = ts
            attrs["caseID"] = case_id
            events.append(attrs)
        if not events:
            raise ParseError(f"trace {ti} has no events", detail={"trace": ti})
        # stable sort keeps document order for equal timestamps
        events.sort(key=lambda a: a["timestamp"])
        trace = Trace([], trace_attrs)
        for attrs in events:
            trace.events.append(Event(eid, attrs))
            eid += 1
        traces.append(trace)

    log = EventLog(traces, infer_schema(traces))
    log.validate()
    return log


def _fmt_xes_datetime(ms: int) -> str:
    dt = datetime.fromtimestamp(ms / 1000.0, tz=timezone.utc)
    return dt.isoformat(timespec="milliseconds")


def _xes_value_elem(parent, key: str, value, kind: str) -> None:
    if kind == "timestamp":
        ET.SubElement(parent, "date", key=key, value=_fmt_xes_datetime(value))
    elif isinstance(value, bool):
        ET.SubElement(parent, "boolean", key=key, value="true" if value else "false")
    elif isinstance(value, int):
        ET.SubElement(parent, "int", key=key, value=str(value))
    elif isinstance(value, float):
        ET.SubElement(parent, "float", key=key, value=repr(value))
    else:
        ET.SubElement(parent, "string", key=key, value=str(value))


def emit_xes(log: EventLog) -> bytes:
    """Serialize an EventLog back to XES (deterministic attribute order)."""
    root = ET.Element("log", attrib={"xes.version": "1.0"})
    for trace in log.traces:
        trace_el = ET.SubElement(root, "trace")
        ET.SubElement(trace_el, "string", key="concept:name", value=str(trace.case_id))
        for key in sorted(trace.attrs):
            v = trace.attrs[key]
            if v is not None:
                _xes_value_elem(trace_el, key, v, log.schema.get(key, ""))
        for ev in trace.events:
            ev_el = ET.SubElement(trace_el, "event")
            ET.SubElement(ev_el, "string", key="concept:name", value=ev.activity)
            ET.SubElement(
                ev_el, "date", key="time:timestamp", value=_fmt_xes_datetime(ev.timestamp)
            )
            for key in sorted(ev.attrs):
                if key in ("actName", "timestamp", "caseID"):
                    continue
                v = ev.attrs[key]
                if v is not None:
                    _xes_value_elem(ev_el, key, v, log.schema.get(key, ""))
    ET.indent(root)
    return ET.tostring(root, encoding="utf-8", xml_declaration=True) + b"\n"


# --- CSV ------------------------------------------------------------------


def _autotype(cells: list):
    """int if every non-empty cell parses as int, else float, else text."""

    def try_all(conv):
        out = []
        for c in cells:
            if c == "":
                out.append(None)
            else:
                out.append(conv(c))
        return out

    for conv in (int, float):
        try:
            return try_all(conv)
        except ValueError:
            continue
    return [c if c != "" else None for c in cells]


def parse_csv(source, mapping: dict, timestamp_format: str) -> EventLog:
    """Parse an event CSV (header row, RFC-4180 quoting).

    ``mapping`` sends column names to roles: ``caseID``, ``actName``,
    ``timestamp``, or ``traceAttr:<name>``. Unmapped columns become event
    attributes under their own name. ``timestamp_format`` is a strptime
    format; naive timestamps are taken as UTC.
    """
    if isinstance(source, bytes):
        source = source.decode("utf-8")
    if isinstance(source, str):
        source = io.StringIO(source)
    reader = csv.reader(source)
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("CSV has no header row") from None

    roles = {col: mapping.get(col, "event") for col in header}
    for role in ("caseID", "actName", "timestamp"):
        if role not in roles.values():
            raise ParseError(f"mapping does not designate a {role} column")
    for col in mapping:
        if col not in header:
            raise ParseError(f"mapped column {col!r} not in CSV header")

    col_idx = {col: i for i, col in enumerate(header)}
    case_col = next(c for c, r in roles.items() if r == "caseID")
    act_col = next(c for c, r in roles.items() if r == "actName")
    ts_col = next(c for c, r in roles.items() if r == "timestamp")
    trace_cols = {c: r.split(":", 1)[1] for c, r in roles.items() if r.startswith("traceAttr:")}
    event_cols = [c for c, r in roles.items() if r == "event"]

    rows = []
    for li, row in enumerate(reader, start=2):
        if len(row) != len(header):
            raise ParseError(f"line {li}: expected {len(header)} cells, got {len(row)}")
        rows.append(row)

    # column-wise auto-typing over the whole file
    typed: dict = {}
    for col in event_cols + list(trace_cols):
        typed[col] = _autotype([row[col_idx[col]] for row in rows])

    cases: dict = {}
    for li, row in enumerate(rows):
        case_id = row[col_idx[case_col]]
        if case_id == "":
            raise ParseError(f"line {li + 2}: empty caseID")
        raw_ts = row[col_idx[ts_col]]
        try:
            dt = datetime.strptime(raw_ts, timestamp_format)
        except ValueError as exc:
            raise ParseError(f"line {li + 2}: unparsable timestamp {raw_ts!r}") from exc
        if dt.tzinfo is None:
            dt = dt.replace(tzinfo=timezone.utc)
        attrs = {
            "caseID": case_id,
            "actName": row[col_idx[act_col]],
            "timestamp": round(dt.timestamp() * 1000),
        }
        for col in event_cols:
            v = typed[col][li]
            if v is not None:
                attrs[col] = v
        cases.setdefault(case_id, []).append((li, attrs))

    traces = []
    eid = 0
    for case_id, entries in cases.items():
        trace_attrs = {}
        for col, name in trace_cols.items():
            values = {typed[col][li] for li, _ in entries if typed[col][li] is not None}
            if len(values) > 1:
                raise ParseError(
                    f"trace attribute {name!r} varies within case {case_id!r}",
                    detail={"case": case_id, "values": sorted(values, key=str)},
                )
            if values:
                trace_attrs[name] = values.pop()
        entries.sort(key=lambda e: e[1]["timestamp"])
        trace = Trace([], trace_attrs)
        for _, attrs in entries:
            trace.events.append(Event(eid, attrs))
            eid += 1
        traces.append(trace)

    log = EventLog(traces, infer_schema(traces))
    log.validate()
    return log


# --- canonical log JSON -----------------------------------------------------


def save_log(log: EventLog, path) -> None:
    write_canonical(path, log.to_dict())


def load_log(path) -> EventLog:
    return EventLog.from_dict(read_json(path))
