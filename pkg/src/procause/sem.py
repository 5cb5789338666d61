"""Structural equation models over a validated causal structure.

Linear mode fits one OLS regression per feature on its parents (additive
noise, fitted intercepts); categorical mode fits conditional probability
tables with add-one smoothing. Interventions replace a single equation with
a constant and drop the feature's incoming edges; everything else stays
unchanged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import FitError, InterventionError
from .logmodel import NOMINAL, NUMERIC
from .situation import SituationTable
from .causal.structure import CausalStructure

LINEAR = "linear-gaussian"
CATEGORICAL = "categorical"

GAUSSIAN = "gaussian"
UNIFORM = "uniform"

# exact-inference guards
MAX_EXACT_FEATURES = 12
MAX_EXACT_LEVELS = 32
MAX_EXACT_STATES = 2_000_000


@dataclass(frozen=True)
class LinearEquation:
    """feature = intercept + Σ coefficient·parent + noise."""

    intercept: float
    coefficients: tuple  # ((parent, coefficient), ...) in structure-parent order
    noise_variance: float

    @property
    def parents(self) -> tuple:
        return tuple(p for p, _ in self.coefficients)

    def coefficient(self, parent) -> float:
        for p, w in self.coefficients:
            if p == parent:
                return w
        raise FitError(f"{parent!r} is not a parent in this equation")

    def to_dict(self) -> dict:
        return {
            "intercept": self.intercept,
            "coefficients": {p: w for p, w in self.coefficients},
            "noiseVariance": self.noise_variance,
        }


@dataclass(frozen=True)
class CategoricalEquation:
    """Conditional distribution of a nominal feature given its parents."""

    parents: tuple
    values: tuple  # observed domain of the feature itself
    cpt: tuple  # ((parent-value tuple, ((value, prob), ...)), ...)
    marginal: tuple  # ((value, prob), ...) fallback for unseen parent combos

    def distribution(self, parent_values: tuple) -> dict:
        for combo, probs in self.cpt:
            if combo == parent_values:
                return dict(probs)
        return dict(self.marginal)

    def to_dict(self) -> dict:
        return {
            "parents": list(self.parents),
            "values": [v for v in self.values],
            "cpt": [
                {"given": list(combo), "probs": [[v, p] for v, p in probs]}
                for combo, probs in self.cpt
            ],
            "marginal": [[v, p] for v, p in self.marginal],
        }


def _constant_equation(mode: str, value):
    if mode == LINEAR:
        return LinearEquation(float(value), (), 0.0)
    return CategoricalEquation((), (value,), (((), ((value, 1.0),)),), ((value, 1.0),))


@dataclass(frozen=True)
class Sem:
    structure: CausalStructure
    equations: tuple  # ((feature, equation), ...) in structure vertex order
    mode: str
    class_label: str | None = None

    def equation(self, feature):
        for f, eq in self.equations:
            if f == feature:
                return eq
        raise FitError(f"{feature!r} has no equation")

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "classFeature": self.class_label,
            "vertices": list(self.structure.vertices),
            "edges": sorted([list(e) for e in self.structure.edges]),
            "equations": {f: eq.to_dict() for f, eq in self.equations},
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Sem":
        structure = CausalStructure(tuple(data["vertices"]), {tuple(e) for e in data["edges"]})
        mode = data["mode"]
        equations = []
        for f in structure.vertices:
            eq = data["equations"][f]
            if mode == LINEAR:
                coeffs = tuple(
                    (p, eq["coefficients"][p]) for p in structure.parents(f)
                )
                equations.append((f, LinearEquation(eq["intercept"], coeffs, eq["noiseVariance"])))
            else:
                equations.append(
                    (
                        f,
                        CategoricalEquation(
                            tuple(eq["parents"]),
                            tuple(eq["values"]),
                            tuple(
                                (tuple(row["given"]), tuple((v, p) for v, p in row["probs"]))
                                for row in eq["cpt"]
                            ),
                            tuple((v, p) for v, p in eq["marginal"]),
                        ),
                    )
                )
        return cls(structure, tuple(equations), mode, data.get("classFeature"))

    def to_text(self) -> str:
        """One equation per line, coefficients to 4 decimals."""
        lines = []
        for f, eq in self.equations:
            if self.mode == LINEAR:
                terms = [f"{w:.4f} × {p}" for p, w in eq.coefficients]
                terms.append(f"{eq.intercept:.4f}")
                lines.append(f"{f} = " + " + ".join(terms) + " + noise")
            else:
                given = f" | {', '.join(eq.parents)}" if eq.parents else ""
                lines.append(f"{f}{given} ~ cpt over {{{', '.join(map(str, eq.values))}}}")
        return "\n".join(lines)


def _collinear_subset(design: np.ndarray, parents) -> list:
    """Parents whose columns do not add rank (after the intercept)."""
    bad = []
    kept = np.ones((design.shape[0], 1))
    for idx, parent in enumerate(parents):
        candidate = np.hstack([kept, design[:, idx : idx + 1]])
        if np.linalg.matrix_rank(candidate) == kept.shape[1]:
            bad.append(parent)
        else:
            kept = candidate
    return bad


def fit_sem(table: SituationTable, structure: CausalStructure, mode: str | None = None) -> Sem:
    """Fit one equation per structure vertex from a complete table."""
    missing = [v for v in structure.vertices if v not in table.labels]
    if missing:
        raise FitError(f"structure vertices missing from the table: {missing}")
    if not table.is_complete():
        raise FitError("table has missing values; drop incomplete rows first")
    types = {v: table.column_types[v] for v in structure.vertices}
    if mode is None:
        if all(t == NUMERIC for t in types.values()):
            mode = LINEAR
        elif all(t == NOMINAL for t in types.values()):
            mode = CATEGORICAL
        else:
            raise FitError(f"mixed column types; pass a mode explicitly: {types}")
    if mode == LINEAR and any(t != NUMERIC for t in types.values()):
        raise FitError("linear mode needs all-numeric columns")
    if mode == CATEGORICAL and any(t != NOMINAL for t in types.values()):
        raise FitError("categorical mode needs all-nominal columns")

    columns = {v: table.column(table.feature_by_label(v)) for v in structure.vertices}
    n = len(table.rows)
    equations = []
    for f in structure.vertices:
        parents = structure.parents(f)
        if mode == LINEAR:
            equations.append((f, _fit_linear(columns, f, parents, n)))
        else:
            equations.append((f, _fit_categorical(columns, f, parents, n)))
    return Sem(structure, tuple(equations), mode, getattr(table.plan.class_feature, "label", None))


def _fit_linear(columns, f, parents, n) -> LinearEquation:
    p = len(parents)
    if n < p + 2:
        raise FitError(f"{f!r}: need at least {p + 2} rows to fit {p} parents, got {n}")
    y = np.asarray(columns[f], dtype=float)
    if p == 0:
        mean = float(y.mean())
        var = float(y.var(ddof=1)) if n > 1 else 0.0
        return LinearEquation(mean, (), var)
    design = np.column_stack([np.asarray(columns[q], dtype=float) for q in parents])
    a = np.hstack([np.ones((n, 1)), design])
    if np.linalg.matrix_rank(a) < p + 1:
        raise FitError(
            f"{f!r}: collinear parents {_collinear_subset(design, parents)}",
            detail={"feature": f, "collinear": _collinear_subset(design, parents)},
        )
    beta, _, _, _ = np.linalg.lstsq(a, y, rcond=None)
    residuals = y - a @ beta
    variance = float(residuals @ residuals / (n - p - 1))
    coeffs = tuple((q, float(beta[i + 1])) for i, q in enumerate(parents))
    return LinearEquation(float(beta[0]), coeffs, variance)


def _fit_categorical(columns, f, parents, n) -> CategoricalEquation:
    values = sorted(set(columns[f]), key=str)
    k = len(values)
    counts: dict = {}
    for row in range(n):
        combo = tuple(columns[q][row] for q in parents)
        bucket = counts.setdefault(combo, {})
        v = columns[f][row]
        bucket[v] = bucket.get(v, 0) + 1
    cpt = []
    for combo in sorted(counts, key=lambda c: tuple(str(x) for x in c)):
        total = sum(counts[combo].values())
        probs = tuple(
            (v, (counts[combo].get(v, 0) + 1) / (total + k)) for v in values
        )
        cpt.append((combo, probs))
    overall: dict = {}
    for v in columns[f]:
        overall[v] = overall.get(v, 0) + 1
    marginal = tuple((v, (overall.get(v, 0) + 1) / (n + k)) for v in values)
    return CategoricalEquation(tuple(parents), tuple(values), tuple(cpt), marginal)


# --- queries ---------------------------------------------------------------


def path_effect(order, parents_of, coefficient, x, target) -> float:
    """Sum over directed x⇝target paths of edge-coefficient products, by
    dynamic programming along a topological order."""
    weight = {x: 1.0}
    started = False
    for v in order:
        if v == x:
            started = True
            continue
        if not started:
            continue
        total = None
        for p in parents_of(v):
            if p in weight:
                total = (total or 0.0) + weight[p] * coefficient(p, v)
        if total is not None:
            weight[v] = total
    return weight.get(target, 0.0)


def total_effect(sem: Sem, x, target) -> float:
    """Per-unit effect of x on target along directed paths (0 when none)."""
    if sem.mode != LINEAR:
        raise InterventionError("total_effect is defined for linear SEMs")
    for v in (x, target):
        if v not in sem.structure.vertices:
            raise InterventionError(f"{v!r} is not in the structure")
    if x == target:
        raise InterventionError("intervened feature and target must differ")
    order = sem.structure.topological_order()
    return path_effect(
        order,
        sem.structure.parents,
        lambda p, v: sem.equation(v).coefficient(p),
        x,
        target,
    )


def intervene(sem: Sem, x, value) -> Sem:
    """Atomic intervention do(x = value): constant equation, incoming edges
    removed, every other equation untouched."""
    if x not in sem.structure.vertices:
        raise InterventionError(f"{x!r} is not in the structure")
    if sem.class_label is not None and x == sem.class_label:
        raise InterventionError("cannot intervene on the class feature")
    if sem.mode == LINEAR:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise InterventionError(f"linear intervention needs a numeric value, got {value!r}")
    else:
        eq = sem.equation(x)
        if value not in eq.values:
            raise InterventionError(
                f"{value!r} is not an observed value of {x!r}", detail={"domain": list(eq.values)}
            )
    edges = {(a, b) for a, b in sem.structure.edges if b != x}
    structure = CausalStructure(sem.structure.vertices, edges)
    equations = tuple(
        (f, _constant_equation(sem.mode, value) if f == x else eq)
        for f, eq in sem.equations
    )
    return replace(sem, structure=structure, equations=equations)


@dataclass(frozen=True)
class TargetDistribution:
    """Distribution of the target under an intervention.

    Categorical targets carry ``probs``; continuous ones carry sampling
    moments.
    """

    probs: tuple | None = None  # ((value, prob), ...)
    mean: float | None = None
    std: float | None = None
    samples: int | None = None

    def prob(self, value) -> float:
        for v, p in self.probs or ():
            if v == value:
                return p
        return 0.0

    def to_dict(self) -> dict:
        if self.probs is not None:
            return {"probs": [[v, p] for v, p in self.probs]}
        return {"mean": self.mean, "std": self.std, "samples": self.samples}


def interventional_distribution(
    sem: Sem,
    x,
    value,
    target,
    method: str = "exact",
    n: int = 10_000,
    seed: int = 0,
    noise: str = GAUSSIAN,
) -> TargetDistribution:
    """P(target | do(x = value)) by truncated-factorization enumeration
    (``exact``, categorical only) or seeded ancestral sampling (``sample``)."""
    if target not in sem.structure.vertices:
        raise InterventionError(f"{target!r} is not in the structure")
    intervened = intervene(sem, x, value)
    if method == "exact":
        if sem.mode != CATEGORICAL:
            raise InterventionError("exact inference needs a categorical SEM")
        return _exact_distribution(intervened, target)
    if method == "sample":
        return _sampled_distribution(intervened, target, n, seed, noise)
    raise InterventionError(f"unknown method {method!r}")


def _exact_distribution(sem: Sem, target) -> TargetDistribution:
    structure = sem.structure
    if len(structure.vertices) > MAX_EXACT_FEATURES:
        raise InterventionError(
            f"exact inference is guarded to ≤{MAX_EXACT_FEATURES} features"
        )
    for f, eq in sem.equations:
        if len(eq.values) > MAX_EXACT_LEVELS:
            raise InterventionError(
                f"{f!r} has more than {MAX_EXACT_LEVELS} levels; use sampling"
            )

    # only the target's ancestors influence its interventional marginal
    relevant = {target}
    changed = True
    while changed:
        changed = False
        for a, b in structure.edges:
            if b in relevant and a not in relevant:
                relevant.add(a)
                changed = True
    order = [v for v in structure.topological_order() if v in relevant]

    states = 1
    for v in order:
        states *= len(sem.equation(v).values)
        if states > MAX_EXACT_STATES:
            raise InterventionError(
                f"joint state space exceeds {MAX_EXACT_STATES}; use sampling"
            )

    dist: dict = {}

    def rec(i: int, assignment: dict, prob: float) -> None:
        if prob == 0.0:
            return
        if i == len(order):
            dist[assignment[target]] = dist.get(assignment[target], 0.0) + prob
            return
        v = order[i]
        eq = sem.equation(v)
        combo = tuple(assignment[p] for p in eq.parents)
        for val, p in eq.distribution(combo).items():
            assignment[v] = val
            rec(i + 1, assignment, prob * p)
        del assignment[v]

    rec(0, {}, 1.0)
    values = sorted(dist, key=str)
    return TargetDistribution(probs=tuple((v, dist[v]) for v in values))


def sample_rows(sem: Sem, n: int, seed: int = 0, noise: str = GAUSSIAN) -> dict:
    """Ancestral samples of every feature: label -> length-n column.

    Linear noise is gaussian with the fitted residual variance, or a
    variance-matched uniform when ``noise="uniform"``.
    """
    rng = np.random.default_rng(seed)
    order = sem.structure.topological_order()
    if sem.mode == CATEGORICAL:
        columns: dict = {}
        for v in order:
            eq = sem.equation(v)
            out = np.empty(n, dtype=object)
            if eq.parents:
                parent_cols = [columns[p] for p in eq.parents]
                for i in range(n):
                    combo = tuple(col[i] for col in parent_cols)
                    dist = eq.distribution(combo)
                    vals = list(dist)
                    probs = np.array([dist[v2] for v2 in vals])
                    out[i] = vals[rng.choice(len(vals), p=probs / probs.sum())]
            else:
                dist = eq.distribution(())
                vals = list(dist)
                probs = np.array([dist[v2] for v2 in vals])
                idx = rng.choice(len(vals), size=n, p=probs / probs.sum())
                for i in range(n):
                    out[i] = vals[idx[i]]
            columns[v] = out
        return columns

    columns = {}
    for v in order:
        eq = sem.equation(v)
        acc = np.full(n, eq.intercept)
        for p, w in eq.coefficients:
            acc = acc + w * columns[p]
        if eq.noise_variance > 0:
            if noise == UNIFORM:
                half = math.sqrt(3.0 * eq.noise_variance)
                acc = acc + rng.uniform(-half, half, size=n)
            else:
                acc = acc + rng.normal(0.0, math.sqrt(eq.noise_variance), size=n)
        columns[v] = acc
    return columns


def _sampled_distribution(sem: Sem, target, n: int, seed: int, noise: str) -> TargetDistribution:
    columns = sample_rows(sem, n, seed, noise)
    out = columns[target]
    if sem.mode == CATEGORICAL:
        counts: dict = {}
        for v in out:
            counts[v] = counts.get(v, 0) + 1
        values = sorted(counts, key=str)
        return TargetDistribution(probs=tuple((v, counts[v] / n) for v in values))
    return TargetDistribution(mean=float(out.mean()), std=float(out.std()), samples=n)


@dataclass(frozen=True)
class InterventionResult:
    intervened: str
    target: str
    value: object = None
    total_effect: float | None = None
    distribution: TargetDistribution | None = None

    def to_dict(self) -> dict:
        out = {"intervened": self.intervened, "target": self.target, "value": self.value}
        if self.total_effect is not None:
            out["totalEffect"] = self.total_effect
        if self.distribution is not None:
            out["distribution"] = self.distribution.to_dict()
        return out


def intervention_query(
    sem: Sem,
    x,
    target,
    value=None,
    method: str | None = None,
    n: int = 10_000,
    seed: int = 0,
) -> InterventionResult:
    """The user-facing what-if query.

    Linear mode reports the per-unit total effect (plus a sampled
    distribution when a value and method are given); categorical mode
    reports the interventional distribution for the forced value.
    """
    if sem.mode == LINEAR:
        effect = total_effect(sem, x, target)
        dist = None
        if value is not None:
            dist = interventional_distribution(
                sem, x, value, target, method or "sample", n=n, seed=seed
            )
        return InterventionResult(x, target, value, total_effect=effect, distribution=dist)
    if value is None:
        raise InterventionError("categorical interventions need a value")
    dist = interventional_distribution(sem, x, value, target, method or "exact", n=n, seed=seed)
    return InterventionResult(x, target, value, distribution=dist)
