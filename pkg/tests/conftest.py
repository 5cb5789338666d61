"""Shared fixtures: a small two-trace IT-company log in XES and CSV form.

Trace 1 runs the seven activities once; trace 2 loops the
development/test/release block a second time. Attribute values are chosen so
feature extraction has known answers (team sizes 21/33, backlog durations
35/63, development durations 200/226/62, priorities 2/1).
"""

from __future__ import annotations

import pytest

from procause.ingest import parse_csv, parse_xes
from procause.logmodel import EventGroup
from procause.situation import activity_feature, trace_feature

_BASE = "2024-01-01 {:02d}:00:00"

#: (caseID, activity, hour, extra attrs)
IT_EVENTS = [
    ("1", "Business case development", 1, {"Priority": 2}),
    ("1", "Feasibility study", 2, {}),
    ("1", "Product backlog", 3, {"Duration": 35}),
    ("1", "Team charter", 4, {"team size": 21}),
    ("1", "Development", 5, {"Duration": 200}),
    ("1", "Test", 6, {"Duration": 79}),
    ("1", "Release", 7, {}),
    ("2", "Business case development", 8, {"Priority": 1}),
    ("2", "Feasibility study", 9, {}),
    ("2", "Product backlog", 10, {"Duration": 63}),
    ("2", "Team charter", 11, {"team size": 33}),
    ("2", "Development", 12, {"Duration": 226}),
    ("2", "Test", 13, {"Duration": 74}),
    ("2", "Release", 14, {}),
    ("2", "Development", 15, {"Duration": 62}),
    ("2", "Test", 16, {"Duration": 117}),
    ("2", "Release", 17, {}),
]

IT_TRACE_ATTRS = {
    "1": {"Responsible": "Alice", "Implementation phase duration": 279},
    "2": {"Responsible": "Alex", "Implementation phase duration": 479},
}


def _xes_value(key: str, value) -> str:
    tag = "int" if isinstance(value, int) else "string"
    return f'<{tag} key="{key}" value="{value}"/>'


def it_xes_text() -> str:
    parts = ['<?xml version="1.0" encoding="UTF-8"?>', '<log xes.version="1.0">']
    for case_id in ("1", "2"):
        parts.append("<trace>")
        parts.append(f'<string key="concept:name" value="{case_id}"/>')
        for key, value in IT_TRACE_ATTRS[case_id].items():
            parts.append(_xes_value(key, value))
        for cid, act, hour, extra in IT_EVENTS:
            if cid != case_id:
                continue
            parts.append("<event>")
            parts.append(f'<string key="concept:name" value="{act}"/>')
            parts.append(
                f'<date key="time:timestamp" value="2024-01-01T{hour:02d}:00:00+00:00"/>'
            )
            for key, value in extra.items():
                parts.append(_xes_value(key, value))
            parts.append("</event>")
        parts.append("</trace>")
    parts.append("</log>")
    return "\n".join(parts)


def it_csv_text() -> str:
    attr_cols = ["Priority", "Duration", "team size"]
    header = (
        ["caseID", "activity", "timestamp"]
        + attr_cols
        + ["Responsible", "Implementation phase duration"]
    )
    rows = [",".join(header)]
    for cid, act, hour, extra in IT_EVENTS:
        cells = [cid, act, _BASE.format(hour)]
        cells += [str(extra[c]) if c in extra else "" for c in attr_cols]
        cells.append(IT_TRACE_ATTRS[cid]["Responsible"])
        cells.append(str(IT_TRACE_ATTRS[cid]["Implementation phase duration"]))
        rows.append(",".join(cells))
    return "\n".join(rows) + "\n"


IT_CSV_MAPPING = {
    "caseID": "caseID",
    "activity": "actName",
    "timestamp": "timestamp",
    "Responsible": "traceAttr:Responsible",
    "Implementation phase duration": "traceAttr:Implementation phase duration",
}


@pytest.fixture
def it_log():
    return parse_xes(it_xes_text())


@pytest.fixture
def it_log_csv():
    return parse_csv(it_csv_text(), IT_CSV_MAPPING, "%Y-%m-%d %H:%M:%S")


# groups and features used throughout
G_BCD = EventGroup("actName", frozenset(["Business case development"]))
G_BACKLOG = EventGroup("actName", frozenset(["Product backlog"]))
G_CHARTER = EventGroup("actName", frozenset(["Team charter"]))
G_DEV = EventGroup("actName", frozenset(["Development"]))

SF_TEAM = activity_feature("team size", "Team charter")
SF_BACKLOG = activity_feature("Duration", "Product backlog")
SF_PRIORITY = activity_feature("Priority", "Business case development")
SF_DEV = activity_feature("Duration", "Development")
SF_IMPL = trace_feature("Implementation phase duration")
