"""Root-cause analysis for process event logs.

Pipeline: ingest (XES/CSV) → enrich → recommend features → extract a
class-sensitive situation feature table → discover a PAG → orient it into a
causal structure → fit a structural equation model → answer intervention
queries.
"""

__version__ = "0.1.0"
