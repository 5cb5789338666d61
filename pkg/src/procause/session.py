"""Sessions: a directory of canonical JSON artifacts plus an append-only
journal of user actions.

Artifacts form the analysis pipeline (log → enriched → recommendations /
plan+table → pag → dag → sem); each stage may only run once its predecessor
exists. A single-writer file lock serializes mutations; concurrent writers
are rejected, not queued. Replaying the journal against the stored inputs
reproduces every artifact byte-identically.
"""

from __future__ import annotations

import datetime
import json
import os
from pathlib import Path

from filelock import FileLock, Timeout

from . import enrich as enrich_mod
from .causal import BackgroundKnowledge, CiTestConfig, discover_pag, orient_pag_to_dag
from .causal.pag import Pag
from .causal.structure import CausalStructure, validate_compatibility
from .errors import SessionLockedError, SessionNotFoundError, StageOrderError
from .jsonio import read_json, write_canonical
from .logmodel import EventLog
from .recommend import (
    RecommendationConfig,
    Undesirable,
    flag_uninformative,
    recommend_from_table,
)
from .sem import Sem, fit_sem, intervention_query
from .situation import (
    DROP_ROW,
    ExtractionPlan,
    SituationFeature,
    SituationTable,
    drop_incomplete_rows,
    extract_table,
)
from .synthgen import GroundTruthSpec, generate_log

LOG = "log.json"
ENRICHED = "enriched.json"
RECOMMENDATIONS = "recommendations.json"
PLAN = "plan.json"
TABLE = "table.json"
KNOWLEDGE = "knowledge.json"
PAG = "pag.json"
DAG = "dag.json"
SEM = "sem.json"
INTERVENTION = "intervention.json"
META = "meta.json"
JOURNAL = "journal.jsonl"

#: artifact -> stage that must already exist
PREDECESSOR = {
    ENRICHED: LOG,
    RECOMMENDATIONS: LOG,
    TABLE: LOG,
    PAG: TABLE,
    DAG: PAG,
    SEM: DAG,
    INTERVENTION: SEM,
}

STAGES = (LOG, ENRICHED, RECOMMENDATIONS, PLAN, TABLE, KNOWLEDGE, PAG, DAG, SEM, INTERVENTION)


class Session:
    def __init__(self, directory):
        self.dir = Path(directory)
        self.id = self.dir.name
        self._lock = FileLock(str(self.dir / ".lock"))

    # --- plumbing ---------------------------------------------------------

    def path(self, name: str) -> Path:
        return self.dir / name

    def has(self, name: str) -> bool:
        return self.path(name).exists()

    def read(self, name: str):
        if not self.has(name):
            raise StageOrderError(
                f"session {self.id!r} has no {name}; run the earlier stage first",
                detail={"missing": name},
            )
        return read_json(self.path(name))

    def _require(self, artifact: str) -> None:
        pred = PREDECESSOR.get(artifact)
        if pred is not None and not self.has(pred):
            raise StageOrderError(
                f"stage needs {pred} first (session {self.id!r})",
                detail={"missing": pred, "requested": artifact},
            )

    def _journal(self, action: str, params: dict) -> None:
        entry = {
            "ts": datetime.datetime.now(datetime.timezone.utc).isoformat(),
            "action": action,
            "params": params,
        }
        with open(self.path(JOURNAL), "a", encoding="utf-8") as fh:
            fh.write(json.dumps(entry, sort_keys=True) + "\n")

    def journal_entries(self) -> list:
        if not self.has(JOURNAL):
            return []
        with open(self.path(JOURNAL), "r", encoding="utf-8") as fh:
            return [json.loads(line) for line in fh if line.strip()]

    def _locked(self):
        try:
            return self._lock.acquire(timeout=0)
        except Timeout:
            raise SessionLockedError(
                f"session {self.id!r} has another writer; retry later"
            ) from None

    # --- pipeline stages ----------------------------------------------------

    def init_log(self, log: EventLog, source: dict) -> None:
        with self._locked():
            write_canonical(self.path(LOG), log.to_dict())
            write_canonical(self.path(META), {"id": self.id, "source": source})
            self._journal("ingest", {"source": source})

    def simulate(self, spec: GroundTruthSpec) -> EventLog:
        with self._locked():
            log = self._run_simulate(spec.to_dict())
            write_canonical(self.path(META), {"id": self.id, "source": {"spec": spec.to_dict()}})
            self._journal("simulate", {"spec": spec.to_dict()})
            return log

    def _run_simulate(self, spec_dict: dict) -> EventLog:
        log, _hidden = generate_log(GroundTruthSpec.from_dict(spec_dict))
        write_canonical(self.path(LOG), log.to_dict())
        return log

    def current_log(self) -> EventLog:
        name = ENRICHED if self.has(ENRICHED) else LOG
        return EventLog.from_dict(self.read(name))

    def enrich(self, params: dict) -> EventLog:
        with self._locked():
            self._require(ENRICHED)
            log = self._run_enrich(params)
            self._journal("enrich", params)
            return log

    def _run_enrich(self, params: dict) -> EventLog:
        log = EventLog.from_dict(self.read(LOG))
        log = enrich_mod.enrich_derived(log, params.get("delayFraction", 0.01))
        if params.get("choices", True):
            log = enrich_mod.add_choice_attributes(log)
        aggregates = [
            enrich_mod.AggregatedAttribute.parse(a["name"], a.get("level", "event"))
            for a in params.get("aggregates", [])
        ]
        if aggregates:
            log = enrich_mod.enrich_aggregates(log, aggregates, params.get("windows", 1))
        sidecar = params.get("conformance")
        if sidecar:
            log = enrich_mod.attach_conformance(
                log,
                {
                    c: enrich_mod.ConformanceRecord(r[0], r[1], r[2])
                    for c, r in sidecar.items()
                },
            )
        write_canonical(self.path(ENRICHED), log.to_dict())
        return log

    def recommend(self, params: dict) -> list:
        with self._locked():
            self._require(RECOMMENDATIONS)
            recs = self._run_recommend(params)
            self._journal("recommend", params)
            return recs

    def _run_recommend(self, params: dict) -> list:
        log = self.current_log()
        class_feature = SituationFeature.from_dict(params["classFeature"])
        from .recommend import default_candidates

        if params.get("candidates"):
            candidates = tuple(
                SituationFeature.from_dict(f) for f in params["candidates"]
            )
        else:
            candidates = tuple(default_candidates(log, class_feature))
        cfg = RecommendationConfig(
            alpha=params["alpha"],
            bins=params["bins"],
            undesirable=Undesirable.from_dict(params["undesirable"]),
            candidates=candidates,
        )
        plan = ExtractionPlan(candidates + (class_feature,), class_feature)
        table = extract_table(log, plan)
        recs = flag_uninformative(recommend_from_table(table, cfg), table, cfg)
        payload = [r.to_dict() for r in recs]
        write_canonical(self.path(RECOMMENDATIONS), payload)
        return payload

    def set_plan(self, params: dict) -> SituationTable:
        with self._locked():
            self._require(TABLE)
            table = self._run_set_plan(params)
            self._journal("plan", params)
            return table

    def _run_set_plan(self, params: dict) -> SituationTable:
        log = self.current_log()
        plan = ExtractionPlan.from_dict(params["plan"])
        table = extract_table(log, plan)
        policy = params.get("dropPolicy", "row")
        if policy == "row":
            table = drop_incomplete_rows(table, DROP_ROW)
        elif isinstance(policy, (int, float)):
            table = drop_incomplete_rows(table, ("drop-column-threshold", policy))
        elif policy != "keep":
            raise StageOrderError(f"unknown drop policy {policy!r}")
        write_canonical(self.path(PLAN), plan.to_dict())
        write_canonical(self.path(TABLE), table.to_dict())
        return table

    def table(self) -> SituationTable:
        return SituationTable.from_dict(self.read(TABLE))

    def discover(self, params: dict) -> Pag:
        with self._locked():
            self._require(PAG)
            pag = self._run_discover(params)
            self._journal("discover", params)
            return pag

    def _run_discover(self, params: dict) -> Pag:
        table = self.table()
        knowledge = BackgroundKnowledge.from_dict(params.get("knowledge", {}))
        cfg = CiTestConfig(
            test=params.get("test", "fisher-z"),
            p_cutoff=params.get("pCutoff", 0.05),
            max_conditioning_size=params.get("maxConditioningSize"),
            discretize_levels=params.get("discretizeLevels", 5),
        )
        pag = discover_pag(table, knowledge, cfg)
        write_canonical(self.path(KNOWLEDGE), knowledge.to_dict())
        write_canonical(self.path(PAG), pag.to_dict())
        return pag

    def pag(self) -> Pag:
        return Pag.from_dict(self.read(PAG))

    def orient(self, params: dict) -> CausalStructure:
        with self._locked():
            self._require(DAG)
            dag = self._run_orient(params)
            self._journal("orient", params)
            return dag

    def _run_orient(self, params: dict) -> CausalStructure:
        pag = self.pag()
        dag = orient_pag_to_dag(pag, [tuple(p) for p in params["orientations"]])
        write_canonical(self.path(DAG), dag.to_dict())
        return dag

    def dag(self) -> CausalStructure:
        return CausalStructure.from_dict(self.read(DAG))

    def validate_dag(self, dag: CausalStructure, strict: bool = True) -> list:
        return validate_compatibility(dag, self.pag(), strict=strict)

    def fit(self, params: dict) -> Sem:
        with self._locked():
            self._require(SEM)
            sem = self._run_fit(params)
            self._journal("fit", params)
            return sem

    def _run_fit(self, params: dict) -> Sem:
        sem = fit_sem(self.table(), self.dag(), params.get("mode"))
        write_canonical(self.path(SEM), sem.to_dict())
        return sem

    def sem(self) -> Sem:
        return Sem.from_dict(self.read(SEM))

    def intervene(self, params: dict) -> dict:
        with self._locked():
            self._require(INTERVENTION)
            result = self._run_intervene(params)
            self._journal("intervene", params)
            return result

    def _run_intervene(self, params: dict) -> dict:
        sem = self.sem()
        result = intervention_query(
            sem,
            params["on"],
            params["target"],
            value=params.get("value"),
            method=params.get("method"),
            n=params.get("samples", 10_000),
            seed=params.get("seed", 0),
        ).to_dict()
        write_canonical(self.path(INTERVENTION), result)
        return result

    # --- views --------------------------------------------------------------

    def stage_names(self) -> list:
        return [s for s in STAGES if self.has(s)]

    def state(self) -> dict:
        """Full session state; the raw log stays a reference (path + size)."""
        out = {"id": self.id, "stages": self.stage_names()}
        if self.has(META):
            out["meta"] = self.read(META)
        for name in (LOG, ENRICHED):
            if self.has(name):
                data = self.read(name)
                out[name.removesuffix(".json")] = {
                    "path": name,
                    "traces": len(data["traces"]),
                    "events": sum(len(t["events"]) for t in data["traces"]),
                    "schema": data["schema"],
                }
        for name in (RECOMMENDATIONS, PLAN, TABLE, KNOWLEDGE, PAG, DAG, SEM, INTERVENTION):
            if self.has(name):
                out[name.removesuffix(".json")] = self.read(name)
        return out

    # --- replay ---------------------------------------------------------------

    def replay(self) -> list:
        """Re-run every journaled action; returns artifact names whose bytes
        changed (empty = byte-identical reproduction)."""
        runners = {
            "simulate": lambda p: self._run_simulate(p["spec"]),
            "enrich": self._run_enrich,
            "recommend": self._run_recommend,
            "plan": self._run_set_plan,
            "discover": self._run_discover,
            "orient": self._run_orient,
            "fit": self._run_fit,
            "intervene": self._run_intervene,
        }
        produced = {
            "simulate": (LOG,),
            "ingest": (),
            "enrich": (ENRICHED,),
            "recommend": (RECOMMENDATIONS,),
            "plan": (PLAN, TABLE),
            "discover": (KNOWLEDGE, PAG),
            "orient": (DAG,),
            "fit": (SEM,),
            "intervene": (INTERVENTION,),
        }
        before = {
            name: self.path(name).read_bytes()
            for names in produced.values()
            for name in names
            if self.has(name)
        }
        mismatches = []
        with self._locked():
            for entry in self.journal_entries():
                action = entry["action"]
                if action == "ingest":
                    continue  # the stored log is the input itself
                runners[action](entry["params"])
                for name in produced[action]:
                    if self.path(name).read_bytes() != before.get(name):
                        mismatches.append(name)
        return mismatches


class SessionStore:
    def __init__(self, root):
        self.root = Path(root)

    def list_ids(self) -> list:
        if not self.root.is_dir():
            return []
        return sorted(
            p.name for p in self.root.iterdir() if p.is_dir() and (p / META).exists()
        )

    def create(self, session_id: str) -> Session:
        directory = self.root / session_id
        directory.mkdir(parents=True, exist_ok=True)
        return Session(directory)

    def open(self, session_id: str) -> Session:
        directory = self.root / session_id
        if not (directory / META).exists():
            raise SessionNotFoundError(f"no session {session_id!r}")
        return Session(directory)


def default_session_root() -> str:
    return os.environ.get("PROCAUSE_SESSIONS", str(Path.cwd() / "sessions"))
