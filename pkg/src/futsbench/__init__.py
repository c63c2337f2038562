"""Workbench for state-to-function labelled transition systems.

The package parses four quantitative process calculi (PEPA, IML, TPC,
MAL), builds their semantics as maps from states to weight functions,
builds an independent classical transition-relation semantics for
cross-checking, explores finite state spaces, decides bisimilarity by
partition refinement, and minimizes systems to their quotients.
"""

from .errors import FutsError

__all__ = ["FutsError"]
__version__ = "0.1.0"
