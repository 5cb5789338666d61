"""Command line interface.

Every stage reads and writes canonical JSON files, so re-running a stage on
identical inputs (and seeds) is byte-identical. Passing ``--session DIR``
routes a stage through the session store instead, which journals the action
for later replay. Exit codes: 0 success, 1 domain error, 2 usage error.
"""

from __future__ import annotations

import csv
import sys
from functools import wraps
from pathlib import Path

import click

from . import enrich as enrich_mod
from .causal import BackgroundKnowledge, CiTestConfig, discover_pag, orient_pag_to_dag
from .causal.pag import CIRCLE, Pag
from .causal.structure import CausalStructure, validate_compatibility
from .errors import ProcauseError, SchemaError
from .ingest import emit_xes, load_log, parse_csv, parse_xes, save_log
from .jsonio import canonical_dumps, read_json, write_canonical
from .logmodel import EventGroup
from .recommend import RecommendationConfig, Undesirable
from .sem import Sem, fit_sem, intervention_query
from .session import Session, default_session_root
from .situation import (
    DROP_ROW,
    ExtractionPlan,
    SituationFeature,
    SituationTable,
    drop_incomplete_rows,
    extract_table,
    trace_feature,
)
from .synthgen import (
    BUILTINS,
    GroundTruthSpec,
    generate_log,
    hidden_sidecar_rows,
    it_company_knowledge,
    it_company_plan,
)


def _fail(err: ProcauseError) -> None:
    click.echo(canonical_dumps(err.to_dict()), err=True)
    sys.exit(1)


def domain_errors(fn):
    @wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ProcauseError as err:
            _fail(err)

    return wrapper


def _emit(obj, out: str | None) -> None:
    if out:
        write_canonical(out, obj)
    click.echo(canonical_dumps(obj))


def parse_feature_text(text: str) -> SituationFeature:
    """``Trace,attr``, ``Activity,attr``, ``attr=v1|v2,attr2`` or a bare
    trace-attribute name."""
    if "," not in text:
        return trace_feature(text)
    scope_text, attr = text.split(",", 1)
    if scope_text == "Trace":
        return trace_feature(attr)
    if "=" in scope_text:
        group_attr, values_text = scope_text.split("=", 1)
        values = frozenset(_parse_value(v) for v in values_text.split("|"))
        return SituationFeature(attr, EventGroup(group_attr, values))
    return SituationFeature(attr, EventGroup("actName", frozenset([scope_text])))


def _parse_value(text: str):
    for conv in (int, float):
        try:
            return conv(text)
        except ValueError:
            continue
    return text


def resolve_label(labels, text: str) -> str:
    """Exact label, or a unique attribute-name suffix (``Complexity`` for
    ``Trace,Complexity``)."""
    if text in labels:
        return text
    matches = [l for l in labels if l.split(",", 1)[-1] == text]
    if len(matches) == 1:
        return matches[0]
    raise SchemaError(
        f"{text!r} does not name a feature; known: {list(labels)}"
        if not matches
        else f"{text!r} is ambiguous: {matches}"
    )


def _split_aggregates(text: str) -> list:
    items, depth, current = [], 0, ""
    for ch in text:
        if ch == "," and depth == 0:
            items.append(current)
            current = ""
            continue
        depth += ch == "("
        depth -= ch == ")"
        current += ch
    if current:
        items.append(current)
    return items


@click.group()
def main():
    """Event-log root-cause analysis: recommend features, discover causal
    structure, fit a structural equation model, answer what-if queries."""


# --- ingest -----------------------------------------------------------------


@main.command()
@click.argument("source", type=click.Path(exists=True, path_type=Path))
@click.option("-o", "--out", type=click.Path(path_type=Path), help="canonical log JSON")
@click.option("--format", "fmt", type=click.Choice(["xes", "csv"]), default=None)
@click.option("--case-col", default="caseID", show_default=True)
@click.option("--activity-col", default="activity", show_default=True)
@click.option("--time-col", default="timestamp", show_default=True)
@click.option("--timestamp-format", default="%Y-%m-%d %H:%M:%S", show_default=True)
@click.option("--trace-attr", multiple=True, help="CSV column holding a per-case constant")
@click.option("--session", type=click.Path(path_type=Path), help="session directory")
@domain_errors
def ingest(source, out, fmt, case_col, activity_col, time_col, timestamp_format, trace_attr, session):
    """Parse an XES or CSV event log into the canonical form."""
    fmt = fmt or ("csv" if source.suffix.lower() == ".csv" else "xes")
    data = source.read_bytes()
    if fmt == "xes":
        log = parse_xes(data)
    else:
        mapping = {case_col: "caseID", activity_col: "actName", time_col: "timestamp"}
        for col in trace_attr:
            mapping[col] = f"traceAttr:{col}"
        log = parse_csv(data, mapping, timestamp_format)
    if session:
        Session(session).init_log(log, {"file": str(source), "format": fmt})
    if out:
        save_log(log, out)
    click.echo(
        canonical_dumps(
            {"traces": len(log.traces), "events": sum(len(t) for t in log.traces)}
        )
    )


# --- simulate ----------------------------------------------------------------


@main.command()
@click.option("--builtin", type=click.Choice(sorted(BUILTINS)), default=None)
@click.option("--spec", "spec_file", type=click.Path(exists=True, path_type=Path))
@click.option("--traces", default=1000, show_default=True)
@click.option("--seed", default=7, show_default=True)
@click.option("--reveal-hidden", is_flag=True, help="write hidden features into the log")
@click.option("--rework-prob", default=0.0, show_default=True)
@click.option("-o", "--out", type=click.Path(path_type=Path), help="XES output path")
@click.option("--sidecar", type=click.Path(path_type=Path), help="hidden-values CSV")
@click.option("--emit-plan", type=click.Path(path_type=Path), help="write the builtin extraction plan")
@click.option("--emit-knowledge", type=click.Path(path_type=Path), help="write the builtin temporal knowledge")
@click.option("--session", type=click.Path(path_type=Path))
@domain_errors
def simulate(builtin, spec_file, traces, seed, reveal_hidden, rework_prob, out, sidecar, emit_plan, emit_knowledge, session):
    """Generate a ground-truth SEM event log."""
    if (builtin is None) == (spec_file is None):
        raise click.UsageError("pass exactly one of --builtin or --spec")
    if builtin:
        spec = BUILTINS[builtin](
            trace_count=traces,
            seed=seed,
            reveal_hidden=reveal_hidden,
            rework_probability=rework_prob,
        )
    else:
        spec = GroundTruthSpec.from_dict(read_json(spec_file))
    log, hidden = generate_log(spec)
    if session:
        Session(session).simulate(spec)
    if out:
        out.write_bytes(emit_xes(log))
    if sidecar:
        with open(sidecar, "w", newline="", encoding="utf-8") as fh:
            csv.writer(fh, lineterminator="\n").writerows(hidden_sidecar_rows(hidden))
    if emit_plan and builtin == "it-company":
        write_canonical(emit_plan, it_company_plan(spec).to_dict())
    if emit_knowledge and builtin == "it-company":
        write_canonical(emit_knowledge, it_company_knowledge(spec).to_dict())
    click.echo(canonical_dumps({"traces": len(log.traces), "seed": seed}))


# --- enrich -------------------------------------------------------------------


@main.command()
@click.argument("log_file", required=False, type=click.Path(exists=True, path_type=Path))
@click.option("-o", "--out", type=click.Path(path_type=Path))
@click.option("--delay-fraction", default=0.01, show_default=True)
@click.option("--windows", default=1, show_default=True)
@click.option("--aggregates", default="", help='e.g. "process-workload@trace,active-events-of(Test)"')
@click.option("--no-choices", is_flag=True, help="skip decision-point choice attributes")
@click.option("--conformance", type=click.Path(exists=True, path_type=Path), help="alignment sidecar CSV")
@click.option("--session", type=click.Path(path_type=Path))
@domain_errors
def enrich(log_file, out, delay_fraction, windows, aggregates, no_choices, conformance, session):
    """Add derived, choice, aggregated, and conformance attributes."""
    agg_params = []
    for item in _split_aggregates(aggregates):
        name, _, level = item.partition("@")
        agg_params.append({"name": name.strip(), "level": level or "event"})
    sidecar = None
    if conformance:
        parsed = enrich_mod.parse_conformance_csv(conformance.read_bytes())
        sidecar = {
            c: [r.deviation, r.num_log_moves, r.num_model_moves] for c, r in parsed.items()
        }
    params = {
        "delayFraction": delay_fraction,
        "windows": windows,
        "choices": not no_choices,
        "aggregates": agg_params,
        **({"conformance": sidecar} if sidecar else {}),
    }
    if session:
        log = Session(session).enrich(params)
    else:
        if log_file is None:
            raise click.UsageError("pass a log file or --session")
        log = load_log(log_file)
        log = enrich_mod.enrich_derived(log, delay_fraction)
        if not no_choices:
            log = enrich_mod.add_choice_attributes(log)
        aggs = [
            enrich_mod.AggregatedAttribute.parse(a["name"], a["level"]) for a in agg_params
        ]
        if aggs:
            log = enrich_mod.enrich_aggregates(log, aggs, windows)
        if sidecar:
            log = enrich_mod.attach_conformance(
                log,
                {c: enrich_mod.ConformanceRecord(*r) for c, r in sidecar.items()},
            )
    if out:
        save_log(log, out)
    click.echo(canonical_dumps({"schema": log.schema}))


# --- extract -------------------------------------------------------------------


@main.command()
@click.argument("log_file", required=False, type=click.Path(exists=True, path_type=Path))
@click.option("--plan", "plan_file", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("-o", "--out", type=click.Path(path_type=Path))
@click.option("--csv", "csv_out", type=click.Path(path_type=Path))
@click.option("--drop-policy", default="row", show_default=True, help="row | keep | missing-fraction threshold")
@click.option("--session", type=click.Path(path_type=Path))
@domain_errors
def extract(log_file, plan_file, out, csv_out, drop_policy, session):
    """Extract the class-sensitive situation feature table."""
    plan = ExtractionPlan.from_dict(read_json(plan_file))
    policy = drop_policy
    if policy not in ("row", "keep"):
        policy = float(policy)
    if session:
        table = Session(session).set_plan({"plan": plan.to_dict(), "dropPolicy": policy})
    else:
        if log_file is None:
            raise click.UsageError("pass a log file or --session")
        table = extract_table(load_log(log_file), plan)
        if policy == "row":
            table = drop_incomplete_rows(table, DROP_ROW)
        elif policy != "keep":
            table = drop_incomplete_rows(table, ("drop-column-threshold", policy))
    if csv_out:
        Path(csv_out).write_text(table.to_csv(), encoding="utf-8")
    _emit(table.to_dict(), out)


# --- recommend -----------------------------------------------------------------


@main.command()
@click.argument("log_file", required=False, type=click.Path(exists=True, path_type=Path))
@click.option("--class-feature", required=True, help='e.g. "Trace,traceDelay"')
@click.option("--alpha", required=True, type=float, help="support threshold as a plain fraction")
@click.option("--bins", default=10, show_default=True)
@click.option("--undesirable", required=True, help='e.g. "delayed", ">=100", "in:a,b"')
@click.option("--candidates", "candidates_file", type=click.Path(exists=True, path_type=Path))
@click.option("-o", "--out", type=click.Path(path_type=Path))
@click.option("--session", type=click.Path(path_type=Path))
@domain_errors
def recommend(log_file, class_feature, alpha, bins, undesirable, candidates_file, out, session):
    """Rank (feature, value) pairs by support among undesirable situations."""
    class_sf = parse_feature_text(class_feature)
    undes = Undesirable.parse(undesirable)
    cands = None
    if candidates_file:
        cands = [SituationFeature.from_dict(f) for f in read_json(candidates_file)]
    params = {
        "classFeature": class_sf.to_dict(),
        "alpha": alpha,
        "bins": bins,
        "undesirable": undes.to_dict(),
        **({"candidates": [f.to_dict() for f in cands]} if cands else {}),
    }
    if session:
        payload = Session(session).recommend(params)
    else:
        if log_file is None:
            raise click.UsageError("pass a log file or --session")
        from .recommend import recommend_features

        log = load_log(log_file)
        cfg = RecommendationConfig(alpha, bins, undes, tuple(cands or ()))
        payload = [r.to_dict() for r in recommend_features(log, class_sf, cfg)]
    for rec in payload:
        rec["supportPercent"] = f"{rec['support'] * 100:.2f}"
    _emit(payload, out)


# --- discover --------------------------------------------------------------------


@main.command()
@click.argument("table_file", required=False, type=click.Path(exists=True, path_type=Path))
@click.option("--knowledge", "knowledge_file", type=click.Path(exists=True, path_type=Path))
@click.option("--p-cutoff", default=0.05, show_default=True)
@click.option("--test", type=click.Choice(["fisher-z", "g-squared"]), default="fisher-z", show_default=True)
@click.option("--max-cond", type=int, default=None)
@click.option("--discretize-levels", default=5, show_default=True)
@click.option("-o", "--out", type=click.Path(path_type=Path))
@click.option("--text", is_flag=True, help="print the PAG with edge glyphs")
@click.option("--session", type=click.Path(path_type=Path))
@domain_errors
def discover(table_file, knowledge_file, p_cutoff, test, max_cond, discretize_levels, out, text, session):
    """Discover the PAG of a complete situation feature table."""
    knowledge = (
        BackgroundKnowledge.from_dict(read_json(knowledge_file)) if knowledge_file else None
    )
    params = {
        "knowledge": knowledge.to_dict() if knowledge else {},
        "test": test,
        "pCutoff": p_cutoff,
        "maxConditioningSize": max_cond,
        "discretizeLevels": discretize_levels,
    }
    if session:
        pag = Session(session).discover(params)
    else:
        if table_file is None:
            raise click.UsageError("pass a table file or --session")
        table = SituationTable.from_dict(read_json(table_file))
        cfg = CiTestConfig(test, p_cutoff, max_cond, discretize_levels)
        pag = discover_pag(table, knowledge, cfg)
    if text:
        click.echo(pag.to_text())
    _emit(pag.to_dict(), out)


# --- orient ---------------------------------------------------------------------


@main.command()
@click.argument("pag_file", required=False, type=click.Path(exists=True, path_type=Path))
@click.option("--orientations", "orientations_file", type=click.Path(exists=True, path_type=Path))
@click.option("--temporal", default=None, help='chronological labels, ";"-separated')
@click.option("-o", "--out", type=click.Path(path_type=Path))
@click.option("--session", type=click.Path(path_type=Path))
@domain_errors
def orient(pag_file, orientations_file, temporal, out, session, ):
    """Resolve the PAG's free edges into a validated causal structure."""
    if (orientations_file is None) == (temporal is None):
        raise click.UsageError("pass exactly one of --orientations or --temporal")
    if session:
        pag = Session(session).pag()
    else:
        if pag_file is None:
            raise click.UsageError("pass a PAG file or --session")
        pag = Pag.from_dict(read_json(pag_file))
    if orientations_file:
        orientations = [tuple(p) for p in read_json(orientations_file)]
    else:
        order = [resolve_label(pag.vertices, t.strip()) for t in temporal.split(";")]
        orientations = temporal_orientations(pag, order)
    if session:
        dag = Session(session).orient({"orientations": [list(p) for p in orientations]})
    else:
        dag = orient_pag_to_dag(pag, orientations)
    _emit(dag.to_dict(), out)


def temporal_orientations(pag: Pag, order: list) -> list:
    """Orient every circle–circle edge from the earlier to the later label."""
    rank = {label: i for i, label in enumerate(order)}
    missing = [v for v in pag.vertices if v not in rank]
    if missing:
        raise SchemaError(f"temporal order misses vertices: {missing}")
    orientations = []
    for a, b, ma, mb in pag.edges():
        if ma == CIRCLE and mb == CIRCLE:
            orientations.append((a, b) if rank[a] < rank[b] else (b, a))
    return orientations


# --- validate --------------------------------------------------------------------


@main.command()
@click.argument("pag_file", required=False, type=click.Path(exists=True, path_type=Path))
@click.option("--dag", "dag_file", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--literal", is_flag=True, help="use the permissive check (structure edges may leave the PAG)")
@click.option("--session", type=click.Path(path_type=Path))
@domain_errors
def validate(pag_file, dag_file, literal, session):
    """Check a causal structure against the discovered PAG."""
    if session:
        pag = Session(session).pag()
    else:
        if pag_file is None:
            raise click.UsageError("pass a PAG file or --session")
        pag = Pag.from_dict(read_json(pag_file))
    dag = CausalStructure.from_dict(read_json(dag_file))
    violations = validate_compatibility(dag, pag, strict=not literal)
    click.echo(canonical_dumps({"compatible": not violations, "violations": violations}))
    if violations:
        sys.exit(1)


# --- fit -------------------------------------------------------------------------


@main.command()
@click.argument("table_file", required=False, type=click.Path(exists=True, path_type=Path))
@click.option("--dag", "dag_file", type=click.Path(exists=True, path_type=Path))
@click.option("--mode", type=click.Choice(["linear-gaussian", "categorical"]), default=None)
@click.option("-o", "--out", type=click.Path(path_type=Path))
@click.option("--text", is_flag=True, help="print the fitted equations")
@click.option("--session", type=click.Path(path_type=Path))
@domain_errors
def fit(table_file, dag_file, mode, out, text, session):
    """Fit one equation per feature on the validated structure."""
    if session:
        sem = Session(session).fit({"mode": mode})
    else:
        if table_file is None or dag_file is None:
            raise click.UsageError("pass a table file and --dag, or --session")
        table = SituationTable.from_dict(read_json(table_file))
        dag = CausalStructure.from_dict(read_json(dag_file))
        sem = fit_sem(table, dag, mode)
    if text:
        click.echo(sem.to_text())
    _emit(sem.to_dict(), out)


# --- intervene ----------------------------------------------------------------------


@main.command()
@click.argument("sem_file", required=False, type=click.Path(exists=True, path_type=Path))
@click.option("--on", "on_", required=True, help="feature to force")
@click.option("--target", required=True, help="class feature to read off")
@click.option("--value", default=None, help="forced value (required for categorical)")
@click.option("--exact", "method", flag_value="exact")
@click.option("--sample", "samples", type=int, default=None, help="ancestral-sampling size")
@click.option("--seed", default=0, show_default=True)
@click.option("-o", "--out", type=click.Path(path_type=Path))
@click.option("--session", type=click.Path(path_type=Path))
@domain_errors
def intervene(sem_file, on_, target, value, method, samples, seed, out, session):
    """Answer a what-if query on the fitted model."""
    if session:
        sem = Session(session).sem()
    else:
        if sem_file is None:
            raise click.UsageError("pass a SEM file or --session")
        sem = Sem.from_dict(read_json(sem_file))
    on_label = resolve_label(sem.structure.vertices, on_)
    target_label = resolve_label(sem.structure.vertices, target)
    if sem.class_label is not None and on_label == sem.class_label:
        raise click.UsageError("--on must not name the class feature")
    parsed_value = _parse_value(value) if value is not None else None
    if samples is not None and method is None:
        method = "sample"
    params = {
        "on": on_label,
        "target": target_label,
        "value": parsed_value,
        "method": method,
        "samples": samples or 10_000,
        "seed": seed,
    }
    if session:
        result = Session(session).intervene(params)
    else:
        result = intervention_query(
            sem,
            on_label,
            target_label,
            value=parsed_value,
            method=method,
            n=samples or 10_000,
            seed=seed,
        ).to_dict()
    _emit(result, out)


# --- serve -----------------------------------------------------------------------


@main.command()
@click.option("--port", default=8000, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option(
    "--sessions",
    "sessions_root",
    default=None,
    help="sessions root directory (default: $PROCAUSE_SESSIONS or ./sessions)",
)
def serve(port, host, sessions_root):
    """Serve the HTTP JSON API consumed by the companion UI."""
    import uvicorn

    from .api import create_app

    app = create_app(sessions_root or default_session_root())
    uvicorn.run(app, host=host, port=port)


# --- replay (session maintenance) ---------------------------------------------------


@main.command()
@click.argument("session_dir", type=click.Path(exists=True, path_type=Path))
@domain_errors
def replay(session_dir):
    """Re-run a session's journal; fails if any artifact is not reproduced."""
    mismatches = Session(session_dir).replay()
    click.echo(canonical_dumps({"reproduced": not mismatches, "mismatches": mismatches}))
    if mismatches:
        sys.exit(1)


if __name__ == "__main__":
    main()
