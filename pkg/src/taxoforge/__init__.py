"""Taxonomy inference for heterogeneous entity tables.

Two interchangeable pipelines produce a rooted DAG of entity types with
table associations: an embedding/clustering pipeline (subject-column
clustering, conceptual attributes, dendrogram pruning) and a generative
pipeline (per-table type prompting, layered hierarchy construction).
A metric suite scores outputs against annotated ground truth.
"""

__version__ = "0.1.0"
