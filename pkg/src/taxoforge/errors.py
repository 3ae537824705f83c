"""Exception types shared across the pipeline modules."""

from __future__ import annotations


class TaxoforgeError(Exception):
    """Base class for all taxoforge errors."""


# --- corpus ---------------------------------------------------------------

class EmptyCorpusError(TaxoforgeError):
    """A directory yielded no parseable tables."""


class MalformedTableError(TaxoforgeError):
    """A data row is longer than the header row."""

    def __init__(self, table_id: str, row_index: int, row_len: int, header_len: int):
        self.table_id = table_id
        self.row_index = row_index
        super().__init__(
            f"table {table_id!r}: row {row_index} has {row_len} cells, "
            f"header has {header_len}"
        )


# --- subject column -------------------------------------------------------

class NoCandidateError(TaxoforgeError):
    """No column has any non-empty cell to score."""


# --- embedding ------------------------------------------------------------

class ProviderError(TaxoforgeError):
    """Remote embedding provider failed after bounded retries."""

    def __init__(self, status: int | None, body: str):
        self.status = status
        self.body = body
        super().__init__(f"embedding provider failed (status={status}): {body[:200]}")


class DimensionMismatchError(TaxoforgeError):
    """Vectors of different dimensions where one dimension was expected."""


# --- clustering -----------------------------------------------------------

class NoValidKError(TaxoforgeError):
    """No cluster count in the requested range is realizable by any dendrogram cut."""


# --- taxonomy -------------------------------------------------------------

class CycleError(TaxoforgeError):
    """Adding an edge would create a directed cycle."""

    def __init__(self, parent: str, child: str):
        self.parent = parent
        self.child = child
        super().__init__(f"edge {parent!r} -> {child!r} would create a cycle")


class UnknownTypeError(TaxoforgeError):
    """A type id is not present in the taxonomy."""


# --- llm ------------------------------------------------------------------

class BackendError(TaxoforgeError):
    """A chat backend failed after bounded retries."""


class EmptyParseError(TaxoforgeError):
    """No names survived response parsing."""


# --- gett -----------------------------------------------------------------

class GenerationFailedError(TaxoforgeError):
    """A table's type generation failed even after the repair prompt."""

    def __init__(self, table_id: str):
        self.table_id = table_id
        super().__init__(f"type generation failed for table {table_id!r}")


class LayerParseError(TaxoforgeError):
    """A layering iteration produced no parseable edges twice in a row."""

    def __init__(self, iteration: int):
        self.iteration = iteration
        super().__init__(f"no parseable edges in iteration {iteration} (after retry)")


class PipelineAbortedError(TaxoforgeError):
    """More than half of the tables failed type generation."""


# --- metrics --------------------------------------------------------------

class InsufficientTablesError(TaxoforgeError):
    """Fewer than two tables shared between output and ground truth."""


class NoTypesError(TaxoforgeError):
    """No evaluable types (each needs at least one associated table)."""


class NoMatchedTypesError(TaxoforgeError):
    """No output type could be matched against the ground truth."""
