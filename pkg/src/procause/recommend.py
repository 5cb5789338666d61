"""Ranking of (situation feature, value) pairs by support among problem cases.

A nominal candidate is emitted with the fraction of undesirable situations
carrying each value; numeric candidates are equal-width binned over the
observed range and emitted with the bin's lower bound. Uninformativeness
flags reproduce the filtering an analyst would otherwise do by eye.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .errors import RecommendError
from .logmodel import EventLog, NUMERIC
from .situation import ExtractionPlan, SituationFeature, SituationTable, extract_table

NEAR_CONSTANT = "near-constant"
UNIFORM = "uniform"


@dataclass(frozen=True)
class Undesirable:
    """Predicate over class values: a value set or a comparison."""

    op: str  # in | eq | gt | ge | lt | le
    operand: object

    def __post_init__(self):
        if self.op not in ("in", "eq", "gt", "ge", "lt", "le"):
            raise RecommendError(f"unknown undesirable operator {self.op!r}")
        if self.op == "in":
            object.__setattr__(self, "operand", frozenset(self.operand))

    def matches(self, value) -> bool:
        if value is None:
            return False
        if self.op == "in":
            return value in self.operand
        if self.op == "eq":
            return value == self.operand
        if self.op == "gt":
            return value > self.operand
        if self.op == "ge":
            return value >= self.operand
        if self.op == "lt":
            return value < self.operand
        return value <= self.operand

    def to_dict(self) -> dict:
        operand = sorted(self.operand, key=str) if self.op == "in" else self.operand
        return {self.op: operand}

    @classmethod
    def from_dict(cls, data: dict) -> "Undesirable":
        if len(data) != 1:
            raise RecommendError(f"bad undesirable spec {data!r}")
        op, operand = next(iter(data.items()))
        return cls(op, operand)

    @classmethod
    def parse(cls, text: str) -> "Undesirable":
        """CLI form: ``in:a,b``, ``>=x``, ``>x``, ``<=x``, ``<x``, ``=v`` or a
        bare value (equality)."""

        def num(s: str):
            try:
                return int(s)
            except ValueError:
                try:
                    return float(s)
                except ValueError:
                    return s

        if text.startswith("in:"):
            return cls("in", frozenset(num(v) for v in text[3:].split(",")))
        for prefix, op in ((">=", "ge"), ("<=", "le"), (">", "gt"), ("<", "lt"), ("=", "eq")):
            if text.startswith(prefix):
                return cls(op, num(text[len(prefix):]))
        return cls("eq", num(text))


@dataclass(frozen=True)
class RecommendationConfig:
    alpha: float
    bins: int
    undesirable: Undesirable
    candidates: tuple = ()

    def __post_init__(self):
        if not 0 < self.alpha <= 1:
            raise RecommendError("alpha must be in (0, 1]")
        if self.bins < 1:
            raise RecommendError("bin count must be positive")
        object.__setattr__(self, "candidates", tuple(self.candidates))


@dataclass(frozen=True)
class Recommendation:
    feature: SituationFeature
    value: object  # nominal value, or the bin's lower bound for numeric
    support: float
    flags: tuple = field(default=())

    def to_dict(self) -> dict:
        return {
            "feature": self.feature.to_dict(),
            "label": self.feature.label,
            "value": self.value,
            "support": self.support,
            "flags": list(self.flags),
        }


def sort_key(rec: Recommendation):
    """Descending by support, then feature label, then value text."""
    return (-rec.support, rec.feature.label, str(rec.value))


def _bin_edges(values: list, bins: int):
    vmin, vmax = min(values), max(values)
    if vmin == vmax:
        return vmin, vmax, 0.0, 1  # degenerate range collapses to one bin
    return vmin, vmax, (vmax - vmin) / bins, bins


def _bin_index(v, vmin, width, nbins) -> int:
    if width == 0.0:
        return 0
    return min(int((v - vmin) / width), nbins - 1)


def recommend_from_table(table: SituationTable, cfg: RecommendationConfig) -> list:
    """Support-ranked (feature, value) recommendations from an extracted table."""
    class_feature = table.plan.class_feature
    candidates = cfg.candidates or tuple(
        f for f in table.plan.features if f != class_feature
    )
    if class_feature in candidates:
        raise RecommendError("class feature cannot be a candidate")

    class_col = table.class_values()
    undesirable_rows = [i for i, v in enumerate(class_col) if cfg.undesirable.matches(v)]
    if not undesirable_rows:
        raise RecommendError("no situations have an undesirable class value")
    n_undesirable = len(undesirable_rows)

    recs = []
    for f in candidates:
        col = table.column(f)
        bad = [col[i] for i in undesirable_rows if col[i] is not None]
        if not bad:
            continue
        if table.column_types[f.label] == NUMERIC:
            observed = [v for v in col if v is not None]
            vmin, vmax, width, nbins = _bin_edges(observed, cfg.bins)
            counts = [0] * nbins
            for v in bad:
                counts[_bin_index(v, vmin, width, nbins)] += 1
            for i, count in enumerate(counts):
                support = count / n_undesirable
                if support >= cfg.alpha:
                    recs.append(Recommendation(f, vmin + i * width, support))
        else:
            counts: dict = {}
            for v in bad:
                counts[v] = counts.get(v, 0) + 1
            for v, count in counts.items():
                support = count / n_undesirable
                if support >= cfg.alpha:
                    recs.append(Recommendation(f, v, support))
    recs.sort(key=sort_key)
    return recs


def flag_uninformative(
    recs: list, table: SituationTable, cfg: RecommendationConfig
) -> list:
    """Annotate (never drop) recommendations that carry little signal.

    ``near-constant``: the recommended value/bin covers at least 95% of all
    situations, undesirable or not. ``uniform``: the feature's supports among
    undesirable situations differ by less than alpha across its values.
    """
    n_rows = len(table.rows)
    class_col = table.class_values()
    undesirable_rows = [i for i, v in enumerate(class_col) if cfg.undesirable.matches(v)]
    n_undesirable = len(undesirable_rows) or 1

    out = []
    for rec in recs:
        f = rec.feature
        col = table.column(f)
        bad = [col[i] for i in undesirable_rows if col[i] is not None]
        flags = []
        if table.column_types[f.label] == NUMERIC:
            observed = [v for v in col if v is not None]
            vmin, vmax, width, nbins = _bin_edges(observed, cfg.bins)
            rec_bin = _bin_index(rec.value, vmin, width, nbins)
            coverage = sum(
                1 for v in observed if _bin_index(v, vmin, width, nbins) == rec_bin
            ) / (n_rows or 1)
            supports = [0] * nbins
            for v in bad:
                supports[_bin_index(v, vmin, width, nbins)] += 1
            supports = [c / n_undesirable for c in supports if c > 0]
        else:
            coverage = sum(1 for v in col if v == rec.value) / (n_rows or 1)
            counts: dict = {}
            for v in bad:
                counts[v] = counts.get(v, 0) + 1
            supports = [c / n_undesirable for c in counts.values()]
        if coverage >= 0.95:
            flags.append(NEAR_CONSTANT)
        if len(supports) >= 2 and max(supports) - min(supports) < cfg.alpha:
            flags.append(UNIFORM)
        out.append(replace(rec, flags=tuple(flags)))
    return out


def recommend_features(
    log: EventLog, class_feature: SituationFeature, cfg: RecommendationConfig
) -> list:
    """Extract a candidate table from the log, rank, and flag."""
    candidates = cfg.candidates or tuple(default_candidates(log, class_feature))
    if class_feature in candidates:
        raise RecommendError("class feature cannot be a candidate")
    plan = ExtractionPlan(tuple(candidates) + (class_feature,), class_feature)
    table = extract_table(log, plan)
    cfg = replace(cfg, candidates=candidates)
    return flag_uninformative(recommend_from_table(table, cfg), table, cfg)


def default_candidates(log: EventLog, class_feature: SituationFeature) -> list:
    """Every (attribute, activity group) pair present in the log, plus every
    trace attribute — the "all situation features" starting set."""
    core = {"caseID", "actName", "timestamp"}
    by_activity: dict = {}
    trace_attrs: set = set()
    for trace in log.traces:
        trace_attrs.update(k for k, v in trace.attrs.items() if v is not None)
        for ev in trace.events:
            for k, v in ev.attrs.items():
                if k not in core and v is not None:
                    by_activity.setdefault(ev.activity, set()).add(k)
    features = []
    from .situation import activity_feature, trace_feature

    for act in sorted(by_activity):
        for attr in sorted(by_activity[act]):
            features.append(activity_feature(attr, act))
    for attr in sorted(trace_attrs):
        features.append(trace_feature(attr))
    return [f for f in features if f != class_feature]
