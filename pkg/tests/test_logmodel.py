import random

import pytest

from conftest import G_DEV
from procause.errors import ParseError, SchemaError
from procause.ingest import emit_xes, parse_csv, parse_xes
from procause.jsonio import canonical_dumps
from procause.logmodel import EventGroup, group_events


def test_two_trace_log_shape(it_log):
    assert len(it_log.traces) == 2
    assert [len(t) for t in it_log.traces] == [7, 10]
    assert it_log.traces[0].attrs["Responsible"] == "Alice"
    assert it_log.traces[1].attrs["Responsible"] == "Alex"


def test_minimal_xes():
    xes = """<log><trace><string key="concept:name" value="c"/>
    <event><string key="concept:name" value="A"/>
    <date key="time:timestamp" value="2024-01-01T00:00:00+00:00"/></event>
    </trace></log>"""
    log = parse_xes(xes)
    assert len(log.traces) == 1
    assert log.schema == {"actName": "nominal", "timestamp": "timestamp", "caseID": "nominal"}


def test_duplicate_case_id_rejected():
    xes = """<log>
    <trace><string key="concept:name" value="1"/>
    <event><string key="concept:name" value="A"/>
    <date key="time:timestamp" value="2024-01-01T00:00:00+00:00"/></event></trace>
    <trace><string key="concept:name" value="1"/>
    <event><string key="concept:name" value="B"/>
    <date key="time:timestamp" value="2024-01-01T01:00:00+00:00"/></event></trace>
    </log>"""
    with pytest.raises(ParseError, match="duplicate caseID"):
        parse_xes(xes)


@pytest.mark.parametrize(
    "missing,pattern",
    [("concept:name", "no concept:name"), ("time:timestamp", "no time:timestamp")],
)
def test_event_missing_core_attribute(missing, pattern):
    keep = {
        "concept:name": '<string key="concept:name" value="A"/>',
        "time:timestamp": '<date key="time:timestamp" value="2024-01-01T00:00:00+00:00"/>',
    }
    del keep[missing]
    xes = f"""<log><trace><string key="concept:name" value="1"/>
    <event>{''.join(keep.values())}</event></trace></log>"""
    with pytest.raises(ParseError, match=pattern):
        parse_xes(xes)


def test_malformed_xml():
    with pytest.raises(ParseError, match="malformed XML"):
        parse_xes("<log><trace>")


def test_csv_equals_xes(it_log, it_log_csv):
    assert canonical_dumps(it_log_csv.to_dict()) == canonical_dumps(it_log.to_dict())


MINIMAL_MAPPING = {"caseID": "caseID", "activity": "actName", "timestamp": "timestamp"}


def test_csv_header_only():
    log = parse_csv("caseID,activity,timestamp\n", MINIMAL_MAPPING, "%Y-%m-%d %H:%M:%S")
    assert log.traces == []


def test_csv_missing_case_column():
    mapping = {"activity": "actName", "timestamp": "timestamp"}
    with pytest.raises(ParseError, match="caseID"):
        parse_csv("activity,timestamp\n", mapping, "%Y-%m-%d %H:%M:%S")


def test_csv_bad_timestamp():
    text = "caseID,activity,timestamp\n1,A,not-a-date\n"
    with pytest.raises(ParseError, match="unparsable timestamp"):
        parse_csv(text, MINIMAL_MAPPING, "%Y-%m-%d %H:%M:%S")


def test_csv_trace_attr_must_be_constant():
    text = (
        "caseID,activity,timestamp,Responsible\n"
        "1,A,2024-01-01 01:00:00,Alice\n"
        "1,B,2024-01-01 02:00:00,Bob\n"
    )
    mapping = {
        "caseID": "caseID",
        "activity": "actName",
        "timestamp": "timestamp",
        "Responsible": "traceAttr:Responsible",
    }
    with pytest.raises(ParseError, match="varies within case"):
        parse_csv(text, mapping, "%Y-%m-%d %H:%M:%S")


def test_csv_rows_sorted_by_timestamp_within_case():
    rows = [
        "caseID,activity,timestamp",
        "1,C,2024-01-01 03:00:00",
        "1,A,2024-01-01 01:00:00",
        "1,B,2024-01-01 02:00:00",
    ]
    random.Random(3).shuffle(rows[1:])
    log = parse_csv("\n".join(rows) + "\n", MINIMAL_MAPPING, "%Y-%m-%d %H:%M:%S")
    acts = [e.activity for e in log.traces[0].events]
    assert acts == ["A", "B", "C"]


def test_group_development_events(it_log):
    got = group_events(it_log, G_DEV)
    expected = {e.eid for e in it_log.iter_events() if e.activity == "Development"}
    assert got == expected
    assert len(got) == 3


def test_group_absent_value_is_empty(it_log):
    assert group_events(it_log, EventGroup("actName", frozenset(["Deployment"]))) == set()


def test_group_team_size_band(it_log):
    got = group_events(it_log, EventGroup("team size", frozenset([33, 34, 35])))
    (match,) = [e for e in it_log.iter_events() if e.attrs.get("team size") == 33]
    assert got == {match.eid}
    assert match.activity == "Team charter"


def test_group_unknown_attribute(it_log):
    with pytest.raises(SchemaError, match="unknown attribute"):
        group_events(it_log, EventGroup("nope", frozenset(["x"])))


def test_group_union_property(it_log):
    g1 = EventGroup("actName", frozenset(["Development"]))
    g2 = EventGroup("actName", frozenset(["Test"]))
    g12 = EventGroup("actName", frozenset(["Development", "Test"]))
    assert group_events(it_log, g12) == group_events(it_log, g1) | group_events(it_log, g2)


def test_missing_values_never_match(it_log):
    # Priority exists only on business-case events; missing elsewhere
    got = group_events(it_log, EventGroup("Priority", frozenset([1, 2])))
    acts = {e.activity for e in it_log.iter_events() if e.eid in got}
    assert acts == {"Business case development"}


def test_xes_round_trip(it_log):
    reparsed = parse_xes(emit_xes(it_log))
    assert canonical_dumps(reparsed.to_dict()) == canonical_dumps(it_log.to_dict())


def test_xes_round_trip_preserves_types(it_log):
    reparsed = parse_xes(emit_xes(it_log))
    ev = reparsed.traces[0].events[0]
    assert ev.attrs["Priority"] == 2 and isinstance(ev.attrs["Priority"], int)
    assert reparsed.traces[0].attrs["Implementation phase duration"] == 279


def test_timestamp_ties_keep_document_order():
    xes = """<log><trace><string key="concept:name" value="1"/>
    <event><string key="concept:name" value="A"/>
    <date key="time:timestamp" value="2024-01-01T00:00:00+00:00"/></event>
    <event><string key="concept:name" value="B"/>
    <date key="time:timestamp" value="2024-01-01T00:00:00+00:00"/></event>
    </trace></log>"""
    log = parse_xes(xes)
    assert [e.activity for e in log.traces[0].events] == ["A", "B"]
