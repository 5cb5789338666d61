"""Conditional independence tests over situation feature tables.

Fisher-z works on all-numeric tables via partial correlation; the G² test
works on nominal tables via a stratified likelihood-ratio statistic. Numeric
columns are quantile-discretized (with a warning) when G² is requested on a
mixed table.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.stats import chi2, norm

from ..errors import CiTestError
from ..logmodel import NUMERIC
from ..situation import SituationTable

FISHER_Z = "fisher-z"
G_SQUARED = "g-squared"

INDEPENDENT = "independent"
DEPENDENT = "dependent"


@dataclass(frozen=True)
class CiTestConfig:
    test: str = FISHER_Z
    p_cutoff: float = 0.05
    max_conditioning_size: int | None = None
    discretize_levels: int = 5  # for numeric columns under g-squared

    def __post_init__(self):
        if self.test not in (FISHER_Z, G_SQUARED):
            raise CiTestError(f"unknown test {self.test!r}")
        if not 0 < self.p_cutoff < 1:
            raise CiTestError("p cutoff must be in (0, 1)")


@dataclass(frozen=True)
class CiResult:
    verdict: str
    p_value: float
    statistic: float

    @property
    def independent(self) -> bool:
        return self.verdict == INDEPENDENT


def fisher_z(data: np.ndarray, i: int, j: int, cond: tuple, p_cutoff: float) -> CiResult:
    """Partial-correlation test of columns i, j given ``cond`` columns."""
    n, _ = data.shape
    if n <= len(cond) + 3:
        raise CiTestError(
            f"fisher-z needs more than |cond|+3 = {len(cond) + 3} rows, got {n}"
        )
    cols = (i, j) + tuple(cond)
    sub = data[:, cols]
    stds = sub.std(axis=0)
    if np.any(stds == 0):
        bad = [cols[k] for k in np.flatnonzero(stds == 0)]
        raise CiTestError(f"zero-variance column(s) {bad} in fisher-z test")
    corr = np.corrcoef(sub.T)
    precision = np.linalg.pinv(corr)
    r = -precision[0, 1] / math.sqrt(precision[0, 0] * precision[1, 1])
    r = float(np.clip(r, -1.0, 1.0))
    if 1.0 - r * r < 1e-15:
        # singular: perfectly correlated, report as dependent
        return CiResult(DEPENDENT, 0.0, math.inf)
    z = 0.5 * math.sqrt(n - len(cond) - 3) * math.log((1 + r) / (1 - r))
    p = 2.0 * float(norm.sf(abs(z)))
    verdict = INDEPENDENT if p >= p_cutoff else DEPENDENT
    return CiResult(verdict, p, z)


def g_squared(columns: list, i: int, j: int, cond: tuple, p_cutoff: float) -> CiResult:
    """Stratified likelihood-ratio test on nominal columns.

    Degrees of freedom: (levels(i)-1)(levels(j)-1) * prod(levels of cond).
    """
    n = len(columns[i])
    levels = {k: sorted(set(columns[k]), key=str) for k in (i, j) + tuple(cond)}
    df = (len(levels[i]) - 1) * (len(levels[j]) - 1)
    for k in cond:
        df *= len(levels[k])
    if df <= 0:
        return CiResult(INDEPENDENT, 1.0, 0.0)

    strata: dict = {}
    for row in range(n):
        key = tuple(columns[k][row] for k in cond)
        cell = (columns[i][row], columns[j][row])
        bucket = strata.setdefault(key, {})
        bucket[cell] = bucket.get(cell, 0) + 1

    g2 = 0.0
    for bucket in strata.values():
        total = sum(bucket.values())
        margin_x: dict = {}
        margin_y: dict = {}
        for (x, y), count in bucket.items():
            margin_x[x] = margin_x.get(x, 0) + count
            margin_y[y] = margin_y.get(y, 0) + count
        for (x, y), observed in bucket.items():
            expected = margin_x[x] * margin_y[y] / total
            g2 += 2.0 * observed * math.log(observed / expected)
    p = float(chi2.sf(g2, df))
    verdict = INDEPENDENT if p >= p_cutoff else DEPENDENT
    return CiResult(verdict, p, g2)


def quantile_discretize(values, levels: int) -> list:
    """Map numeric values to level indices by quantile cut points."""
    arr = np.asarray(values, dtype=float)
    qs = np.quantile(arr, [q / levels for q in range(1, levels)])
    return [int(np.searchsorted(qs, v, side="right")) for v in arr]


class TableTester:
    """Prepares a table once and answers CI queries by column index."""

    def __init__(self, table: SituationTable, cfg: CiTestConfig):
        self.cfg = cfg
        self.labels = table.labels
        if not table.is_complete():
            raise CiTestError("table has missing values; drop incomplete rows first")
        if not table.rows:
            raise CiTestError("table has no rows")
        if cfg.test == FISHER_Z:
            bad = [l for l in self.labels if table.column_types[l] != NUMERIC]
            if bad:
                raise CiTestError(f"fisher-z needs all-numeric columns; nominal: {bad}")
            self.data = np.array(table.rows, dtype=float)
            self.columns = None
        else:
            self.columns = []
            mixed = []
            for f in table.plan.features:
                col = table.column(f)
                if table.column_types[f.label] == NUMERIC:
                    mixed.append(f.label)
                    col = quantile_discretize(col, cfg.discretize_levels)
                self.columns.append(col)
            if mixed:
                warnings.warn(
                    f"numeric columns {mixed} quantile-discretized to "
                    f"{cfg.discretize_levels} levels for the G² test; "
                    "interpret the discovered PAG with care",
                    stacklevel=2,
                )
            self.data = None

    def test(self, i: int, j: int, cond: tuple) -> CiResult:
        if self.cfg.test == FISHER_Z:
            return fisher_z(self.data, i, j, cond, self.cfg.p_cutoff)
        return g_squared(self.columns, i, j, cond, self.cfg.p_cutoff)

    def independent(self, i: int, j: int, cond: tuple) -> bool:
        return self.test(i, j, cond).independent


def ci_test(table: SituationTable, x, y, cond, cfg: CiTestConfig) -> CiResult:
    """Test feature x against y given ``cond`` (features or labels)."""
    tester = TableTester(table, cfg)

    def index(f):
        label = f if isinstance(f, str) else f.label
        return tester.labels.index(label)

    return tester.test(index(x), index(y), tuple(index(c) for c in cond))
