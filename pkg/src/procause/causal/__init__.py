"""Causal structure discovery: CI tests, PAG search, compatibility, orientation."""

from .citest import (
    FISHER_Z,
    G_SQUARED,
    CiResult,
    CiTestConfig,
    ci_test,
    quantile_discretize,
)
from .discover import discover_pag, search_pag
from .pag import ARROW, CIRCLE, TAIL, Pag
from .structure import (
    BackgroundKnowledge,
    CausalStructure,
    orient_pag_to_dag,
    validate_compatibility,
)

__all__ = [
    "ARROW",
    "CIRCLE",
    "TAIL",
    "FISHER_Z",
    "G_SQUARED",
    "BackgroundKnowledge",
    "CausalStructure",
    "CiResult",
    "CiTestConfig",
    "Pag",
    "ci_test",
    "discover_pag",
    "orient_pag_to_dag",
    "quantile_discretize",
    "search_pag",
    "validate_compatibility",
]
