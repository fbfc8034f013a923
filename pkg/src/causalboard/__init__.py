"""Causal-model development workbench.

Learns an initial causal graph from tabular data (greedy BIC search with
CPDAG completion), estimates standardized path coefficients by linear SEM,
interrogates hypothesized relations through LLM prompt batteries, and lets
an analyst refine the graph while keeping every LLM-derived claim linked to
its source text.
"""

__version__ = "0.1.0"
