"""Ground-truth SEM log generation.

Builds event logs whose attributes follow a known linear SEM, for end-to-end
reproduction and property tests. Timestamps are synthetic (fixed gaps);
per-trace RNG streams are spawned from one seed, so the output is
byte-identical for a given spec regardless of scheduling.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .causal.structure import BackgroundKnowledge, CausalStructure
from .errors import SchemaError
from .logmodel import Event, EventLog, Trace, infer_schema
from .sem import CATEGORICAL, CategoricalEquation, Sem
from .situation import ExtractionPlan, SituationFeature, activity_feature, trace_feature

_BASE_TS = 1_704_067_200_000  # 2024-01-01T00:00:00Z
_TRACE_GAP = 3_600_000
_EVENT_STEP = 60_000

UNIFORM = "uniform"
GAUSSIAN = "gaussian"


@dataclass(frozen=True)
class FeatureDef:
    """One SEM variable: linear parents, a noise law, and where it is stored."""

    name: str
    parents: tuple = ()  # ((parent name, coefficient), ...)
    noise: tuple = (UNIFORM, 0.0, 1.0)  # (kind, a, b): uniform(lo, hi) | gaussian(mu, sigma)
    carrier: str | None = None  # activity carrying the attribute; None = trace level
    visible: bool = True

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "parents": [[p, w] for p, w in self.parents],
            "noise": list(self.noise),
            "carrier": self.carrier,
            "visible": self.visible,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "FeatureDef":
        return cls(
            data["name"],
            tuple((p, w) for p, w in data.get("parents", [])),
            tuple(data.get("noise", (UNIFORM, 0.0, 1.0))),
            data.get("carrier"),
            data.get("visible", True),
        )


@dataclass(frozen=True)
class GroundTruthSpec:
    features: tuple
    template: tuple  # activity sequence of one trace
    trace_count: int
    seed: int
    rework: tuple = ()  # activities appended with rework_probability
    rework_probability: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "features", tuple(self.features))
        object.__setattr__(self, "template", tuple(self.template))
        object.__setattr__(self, "rework", tuple(self.rework))
        names = [f.name for f in self.features]
        if len(set(names)) != len(names):
            raise SchemaError("duplicate feature names in spec")
        for f in self.features:
            if f.carrier is not None and f.carrier not in self.template + self.rework:
                raise SchemaError(f"{f.name}: carrier {f.carrier!r} not in template")
        self.structure()  # raises on cyclic parent relations

    def feature(self, name: str) -> FeatureDef:
        for f in self.features:
            if f.name == name:
                return f
        raise SchemaError(f"unknown feature {name!r}")

    def structure(self) -> CausalStructure:
        """The ground-truth DAG over situation-feature labels."""
        labels = {f.name: self.feature_label(f.name) for f in self.features}
        edges = {
            (labels[p], labels[f.name]) for f in self.features for p, _ in f.parents
        }
        return CausalStructure(tuple(labels[f.name] for f in self.features), edges)

    def feature_label(self, name: str) -> str:
        f = self.feature(name)
        sf = trace_feature(name) if f.carrier is None else activity_feature(name, f.carrier)
        return sf.label

    def situation_feature(self, name: str) -> SituationFeature:
        f = self.feature(name)
        return trace_feature(name) if f.carrier is None else activity_feature(name, f.carrier)

    def extraction_plan(self, class_name: str) -> ExtractionPlan:
        """Plan over the visible features, class last unless already placed."""
        feats = [self.situation_feature(f.name) for f in self.features if f.visible]
        class_sf = self.situation_feature(class_name)
        if class_sf not in feats:
            raise SchemaError(f"class feature {class_name!r} is not visible")
        return ExtractionPlan(tuple(feats), class_sf)

    def to_dict(self) -> dict:
        return {
            "features": [f.to_dict() for f in self.features],
            "template": list(self.template),
            "traceCount": self.trace_count,
            "seed": self.seed,
            "rework": list(self.rework),
            "reworkProbability": self.rework_probability,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "GroundTruthSpec":
        return cls(
            tuple(FeatureDef.from_dict(f) for f in data["features"]),
            tuple(data["template"]),
            data["traceCount"],
            data["seed"],
            tuple(data.get("rework", ())),
            data.get("reworkProbability", 0.0),
        )


def _topological(features) -> list:
    by_name = {f.name: f for f in features}
    order, seen = [], set()

    def visit(f):
        if f.name in seen:
            return
        seen.add(f.name)
        for p, _ in f.parents:
            visit(by_name[p])
        order.append(f)

    for f in features:
        visit(f)
    return order


def _draw_noise(rng, noise) -> float:
    kind, a, b = noise
    if kind == UNIFORM:
        return float(rng.uniform(a, b))
    if kind == GAUSSIAN:
        return float(rng.normal(a, b))
    raise SchemaError(f"unknown noise kind {kind!r}")


def generate_log(spec: GroundTruthSpec):
    """Sample the spec; returns (EventLog, hidden values by caseID).

    Hidden features are sampled but not written to the log; the sidecar dict
    keeps them for oracle checks.
    """
    order = _topological(spec.features)
    pad = max(len(str(spec.trace_count)), 1)
    seeds = np.random.SeedSequence(spec.seed).spawn(spec.trace_count)
    traces = []
    hidden: dict = {}
    eid = 0
    for i in range(spec.trace_count):
        rng = np.random.default_rng(seeds[i])
        values: dict = {}
        for f in order:
            v = sum(w * values[p] for p, w in f.parents) + _draw_noise(rng, f.noise)
            values[f.name] = v
        activities = list(spec.template)
        if spec.rework and rng.uniform() < spec.rework_probability:
            activities += list(spec.rework)

        case_id = f"{i + 1:0{pad}d}"
        stamped: set = set()
        events = []
        for j, act in enumerate(activities):
            attrs = {
                "caseID": case_id,
                "actName": act,
                "timestamp": _BASE_TS + i * _TRACE_GAP + j * _EVENT_STEP,
            }
            for f in spec.features:
                if f.visible and f.carrier == act and f.name not in stamped:
                    attrs[f.name] = values[f.name]
                    stamped.add(f.name)
            events.append(Event(eid, attrs))
            eid += 1
        trace_attrs = {
            f.name: values[f.name]
            for f in spec.features
            if f.visible and f.carrier is None
        }
        traces.append(Trace(events, trace_attrs))
        hidden[case_id] = {f.name: values[f.name] for f in spec.features if not f.visible}

    log = EventLog(traces, infer_schema(traces))
    log.validate()
    return log, hidden


# --- the built-in IT-company experiment -------------------------------------

IT_ACTIVITIES = (
    "Business case development",
    "Feasibility study",
    "Product backlog",
    "Team charter",
    "Development",
    "Test",
    "Release",
)

IT_REWORK = ("Development", "Test", "Release")


def it_company_spec(
    trace_count: int = 1000,
    seed: int = 7,
    reveal_hidden: bool = False,
    rework_probability: float = 0.0,
) -> GroundTruthSpec:
    """Five-variable project SEM: a hidden project complexity drives the
    backlog duration, the team size, and the implementation phase duration."""
    return GroundTruthSpec(
        features=(
            FeatureDef("Complexity", (), (UNIFORM, 1.0, 10.0), None, reveal_hidden),
            FeatureDef("Priority", (), (UNIFORM, 1.0, 3.0), "Business case development"),
            FeatureDef(
                "Duration", (("Complexity", 10.0),), (UNIFORM, -2.0, 4.0), "Product backlog"
            ),
            FeatureDef(
                "TeamSize",
                (("Complexity", 5.0), ("Priority", 3.0)),
                (UNIFORM, -1.0, 2.0),
                "Team charter",
            ),
            FeatureDef(
                "ImplementationPhaseDuration",
                (("Complexity", 50.0), ("TeamSize", 5.0)),
                (UNIFORM, 10.0, 20.0),
                None,
            ),
        ),
        template=IT_ACTIVITIES,
        trace_count=trace_count,
        seed=seed,
        rework=IT_REWORK,
        rework_probability=rework_probability,
    )


def it_company_plan(spec: GroundTruthSpec) -> ExtractionPlan:
    return spec.extraction_plan("ImplementationPhaseDuration")


def it_company_temporal_order(spec: GroundTruthSpec) -> list:
    """Feature labels in chronological order (hidden features omitted)."""
    names = ("Complexity", "Priority", "Duration", "TeamSize", "ImplementationPhaseDuration")
    return [
        spec.feature_label(n) for n in names if spec.feature(n).visible
    ]


def it_company_knowledge(spec: GroundTruthSpec) -> BackgroundKnowledge:
    """Chronology as forbidden directions: a later feature cannot cause an
    earlier one."""
    order = it_company_temporal_order(spec)
    forbidden = {
        (order[j], order[i]) for i in range(len(order)) for j in range(i + 1, len(order))
    }
    return BackgroundKnowledge(forbidden=forbidden)


BUILTINS = {"it-company": it_company_spec}


# --- random ground truths for property tests --------------------------------


def random_ground_truth(nodes: int, edge_prob: float, seed: int) -> GroundTruthSpec:
    """Random DAG with coefficients in ±[0.5, 3] and uniform noises; every
    feature is visible and event-level, one activity per feature in
    topological order."""
    if not 3 <= nodes <= 6:
        raise SchemaError("nodes must be in 3..6")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(nodes)  # perm[i] = feature index at topological slot i
    defs = [None] * nodes
    for slot in range(nodes):
        idx = int(perm[slot])
        parents = []
        for earlier in range(slot):
            if rng.uniform() < edge_prob:
                coef = float(rng.uniform(0.5, 3.0)) * (1 if rng.uniform() < 0.5 else -1)
                parents.append((f"F{int(perm[earlier])}", coef))
        defs[idx] = FeatureDef(
            f"F{idx}", tuple(parents), (UNIFORM, -1.0, 1.0), f"A{slot}"
        )
    template = tuple(f"A{slot}" for slot in range(nodes))
    return GroundTruthSpec(tuple(defs), template, trace_count=0, seed=seed)


def random_categorical_sem(
    n_vars: int, levels: int, edge_prob: float, seed: int, class_label: str | None = None
) -> Sem:
    """Random categorical SEM (values "v0".."v{levels-1}") for demo and
    property tests."""
    rng = np.random.default_rng(seed)
    names = [f"X{i}" for i in range(n_vars)]
    values = tuple(f"v{i}" for i in range(levels))
    edges = set()
    parents: dict = {n: [] for n in names}
    for j in range(n_vars):
        for i in range(j):
            if rng.uniform() < edge_prob:
                edges.add((names[i], names[j]))
                parents[names[j]].append(names[i])
    structure = CausalStructure(tuple(names), edges)

    def dirichlet() -> tuple:
        probs = rng.dirichlet(np.ones(levels) * 2.0)
        return tuple((values[i], float(probs[i])) for i in range(levels))

    equations = []
    for name in names:
        ps = tuple(parents[name])
        combos = [()]
        for _ in ps:
            combos = [c + (v,) for c in combos for v in values]
        cpt = tuple((combo, dirichlet()) for combo in combos)
        equations.append((name, CategoricalEquation(ps, values, cpt, dirichlet())))
    return Sem(structure, tuple(equations), CATEGORICAL, class_label)


def hidden_sidecar_rows(hidden: dict) -> list:
    """Rows for the hidden-values CSV: caseID plus one column per feature."""
    names = sorted({n for vals in hidden.values() for n in vals})
    rows = [["caseID"] + names]
    for case_id in hidden:
        rows.append([case_id] + [hidden[case_id].get(n) for n in names])
    return rows
