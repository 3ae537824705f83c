"""Generative pipeline: per-table type generation and layered hierarchy construction.

Each table is serialized (header plus up to five sampled rows, cells
truncated at fifty tokens, comma-separated values) and prompted for its
entity-type names. The merged candidate list is then organized top-down:
starting from a synthetic root, every iteration asks the backend for child
relations of the current layer's types, keeps only candidates that survive
a template-based edge filter, and repeats until the candidate list is
exhausted. Leftover candidates are attached directly under the root so
every generated type appears exactly once.
"""

from __future__ import annotations

import hashlib
import logging
import math
import re
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .corpus import Corpus, Table, sample_rows, truncate_cell
from .errors import (
    EmptyParseError,
    GenerationFailedError,
    LayerParseError,
    PipelineAbortedError,
)
from .llm import ChatRequest, TranscriptLogger, complete, parse_name_list
from .taxonomy import EntityType, Taxonomy

logger = logging.getLogger(__name__)

ROW_SAMPLE = 5
CELL_TOKEN_LIMIT = 50
DEFAULT_ROOT = "Thing"
DEFAULT_MAX_ITERS = 10
NO_CHILDREN_MARKER = "NONE"

EDGE_TEMPLATES = (
    "{child} is a kind of {parent}.",
    "{child} is a type of {parent}.",
    "Every {child} is a {parent}.",
)

_LINE_BULLET_RE = re.compile(r"^\s*(?:[-*•]+\s*|\d+[.)]\s*)?")


def load_prompt(name: str) -> str:
    return resources.files("taxoforge").joinpath(f"prompts/{name}.txt").read_text("utf-8")


@dataclass
class TypeCandidateList:
    names: list[str]
    origin: dict[str, set[str]]


@dataclass(frozen=True)
class EdgeScore:
    parent: str
    child: str
    score: float


@dataclass
class EdgeFilter:
    scorer: object
    threshold: float = 0.5


class ConstantScorer:
    """Scores every sentence with a fixed value; useful for tests and ablations."""

    def __init__(self, value: float = 1.0):
        self.value = value

    def score(self, sentence: str, parent: str, child: str) -> float:
        return self.value


class EmbeddingCosineScorer:
    """Cosine plausibility of child/parent names, rescaled to [0, 1].

    The template sentence is ignored; the signal comes entirely from the
    name embeddings, which keeps the offline path free of a second model.
    """

    def __init__(self, service):
        self.service = service
        self._cache: dict[str, np.ndarray] = {}

    def _vector(self, name: str) -> np.ndarray:
        if name not in self._cache:
            self._cache[name] = self.service.embed_texts([name])[0].astype(np.float64)
        return self._cache[name]

    def score(self, sentence: str, parent: str, child: str) -> float:
        a, b = self._vector(child), self._vector(parent)
        denom = float(np.linalg.norm(a) * np.linalg.norm(b))
        cos = float(a @ b) / denom if denom > 0 else 0.0
        return min(1.0, max(0.0, (cos + 1.0) / 2.0))


class LlmYesNoScorer:
    """Asks the backend whether each templated subsumption sentence holds."""

    def __init__(self, backend, transcript: TranscriptLogger | None = None):
        self.backend = backend
        self.transcript = transcript
        self._template = load_prompt("edge_yesno")

    def score(self, sentence: str, parent: str, child: str) -> float:
        req = ChatRequest(user=self._template.format(sentence=sentence))
        resp = complete(req, self.backend, self.transcript)
        return 1.0 if resp.text.strip().casefold().startswith("yes") else 0.0


def filter_edges(edges: list[tuple[str, str]], scorer) -> list[EdgeScore]:
    """Score each proposed edge as the mean over the sentence templates."""
    out = []
    for parent, child in edges:
        scores = [
            scorer.score(tpl.format(parent=parent, child=child), parent, child)
            for tpl in EDGE_TEMPLATES
        ]
        out.append(EdgeScore(parent=parent, child=child, score=sum(scores) / len(scores)))
    return out


def serialize_table_block(table: Table, seed: int) -> str:
    """Header line plus up to five sampled rows, comma-separated, cells capped."""
    lines = [", ".join(table.headers)]
    for row in sample_rows(table, ROW_SAMPLE, seed):
        lines.append(", ".join(truncate_cell(cell, CELL_TOKEN_LIMIT) for cell in row))
    return "\n".join(lines)


def build_generation_prompt(table: Table, seed: int) -> str:
    return load_prompt("generation").format(table=serialize_table_block(table, seed))


def generate_types(
    table: Table,
    backend,
    seed: int,
    transcript: TranscriptLogger | None = None,
) -> list[str]:
    """One generation round plus one repair round; then the table fails."""
    if table.n_rows == 0 and table.n_cols == 0:
        raise GenerationFailedError(table.id)
    prompt = build_generation_prompt(table, seed)
    resp = complete(ChatRequest(user=prompt), backend, transcript)
    try:
        return parse_name_list(resp.text)
    except EmptyParseError:
        logger.info("repair prompt for table %s", table.id)
    repair = load_prompt("generation_repair").format(table=serialize_table_block(table, seed))
    resp = complete(ChatRequest(user=repair), backend, transcript)
    try:
        return parse_name_list(resp.text)
    except EmptyParseError as exc:
        raise GenerationFailedError(table.id) from exc


def normalize_name(name: str) -> str:
    return " ".join(name.split())


def flatten(per_table: dict[str, list[str]]) -> TypeCandidateList:
    """Merge per-table names case-insensitively, keeping first casing and origins."""
    if not per_table:
        raise ValueError("no generated types to flatten")
    names: list[str] = []
    canonical: dict[str, str] = {}
    origin: dict[str, set[str]] = {}
    for table_id in sorted(per_table):
        for raw in per_table[table_id]:
            name = normalize_name(raw)
            if not name:
                continue
            key = name.casefold()
            if key not in canonical:
                canonical[key] = name
                names.append(name)
                origin[name] = set()
            origin[canonical[key]].add(table_id)
    return TypeCandidateList(names=names, origin=origin)


def render_outline(tax: Taxonomy) -> str:
    """Indented outline of the taxonomy; DAG nodes repeat under each parent."""
    lines: list[str] = []

    def walk(type_id: str, depth: int) -> None:
        lines.append("  " * depth + tax.types[type_id].name)
        for child in sorted(tax.children(type_id)):
            walk(child, depth + 1)

    for root in tax.roots:
        walk(root, 0)
    return "\n".join(lines)


def parse_edge_lines(text: str) -> tuple[list[tuple[str, str]], bool]:
    """Extract ``parent -> child`` pairs; second value is parseability.

    A response is parseable when it contains at least one relation line or
    is an explicit no-children marker; anything else counts as a parse
    failure for the retry/error logic.
    """
    edges = []
    for line in text.splitlines():
        if "->" not in line:
            continue
        parent, _, child = line.partition("->")
        parent = _LINE_BULLET_RE.sub("", parent, count=1).strip().strip("\"'").strip()
        child = child.strip().strip("\"'").strip()
        if parent and child:
            edges.append((parent, child))
    if edges:
        return edges, True
    stripped = text.strip().strip(".").casefold()
    return [], stripped == NO_CHILDREN_MARKER.casefold()


def chain_of_layer(
    candidates: TypeCandidateList,
    root_name: str,
    backend,
    edge_filter: EdgeFilter,
    max_iters: int = DEFAULT_MAX_ITERS,
    transcript: TranscriptLogger | None = None,
) -> Taxonomy:
    """Iteratively layer the candidate list beneath a synthetic root.

    The demonstration is requested from the backend once per run (its
    zero-shot mode) and reused across iterations. Children may land under
    several parents in one iteration (the taxonomy is a DAG); candidates
    never placed by the loop are attached directly under the root.
    """
    if not candidates.names:
        raise ValueError("candidate list is empty")
    if root_name.casefold() in {n.casefold() for n in candidates.names}:
        raise ValueError(f"root name {root_name!r} collides with a candidate type")
    tax = Taxonomy()
    tax.add_type(EntityType(id=root_name, name=root_name, synthetic=True))
    name_by_fold = {root_name.casefold(): root_name}
    remaining: list[str] = list(candidates.names)
    demo = complete(
        ChatRequest(user=load_prompt("layer_demonstration")), backend, transcript
    ).text
    layer_template = load_prompt("layer_step")
    layer = [root_name]
    for iteration in range(max_iters):
        if not remaining:
            break
        remaining_fold = {n.casefold(): n for n in remaining}
        proposals, parseable = _collect_proposals(
            layer, remaining, demo, layer_template, tax, backend, transcript
        )
        if not parseable:
            logger.warning("iteration %d yielded no parseable edges; retrying", iteration)
            proposals, parseable = _collect_proposals(
                layer, remaining, demo, layer_template, tax, backend, transcript
            )
            if not parseable:
                raise LayerParseError(iteration)
        guarded: list[tuple[str, str]] = []
        seen_pairs: set[tuple[str, str]] = set()
        for parent, child in proposals:
            parent_name = name_by_fold.get(normalize_name(parent).casefold())
            child_name = remaining_fold.get(normalize_name(child).casefold())
            if parent_name is None or child_name is None:
                logger.info("discarding edge %r -> %r (membership guard)", parent, child)
                continue
            pair = (parent_name, child_name)
            if pair not in seen_pairs:
                seen_pairs.add(pair)
                guarded.append(pair)
        kept = [
            e for e in filter_edges(guarded, edge_filter.scorer) if e.score >= edge_filter.threshold
        ]
        next_layer: list[str] = []
        for edge in kept:
            if edge.child not in next_layer:
                tax.add_type(
                    EntityType(
                        id=edge.child,
                        name=edge.child,
                        tables=set(candidates.origin.get(edge.child, set())),
                    )
                )
                name_by_fold[edge.child.casefold()] = edge.child
                next_layer.append(edge.child)
            else:
                logger.info("type %r placed under multiple parents", edge.child)
            tax.add_edge(edge.parent, edge.child)
        remaining = [n for n in remaining if n not in next_layer]
        if not next_layer:
            break
        layer = next_layer
    for name in remaining:
        logger.warning("attaching leftover type %r under the root", name)
        tax.add_type(
            EntityType(id=name, name=name, tables=set(candidates.origin.get(name, set())))
        )
        tax.add_edge(root_name, name)
    return tax


def _collect_proposals(
    layer: list[str],
    remaining: list[str],
    demonstration: str,
    template: str,
    tax: Taxonomy,
    backend,
    transcript: TranscriptLogger | None,
) -> tuple[list[tuple[str, str]], bool]:
    proposals: list[tuple[str, str]] = []
    any_parseable = False
    outline = render_outline(tax)
    for parent in layer:
        prompt = template.format(
            demonstration=demonstration,
            outline=outline,
            candidates=", ".join(remaining),
            parent=parent,
        )
        resp = complete(ChatRequest(user=prompt), backend, transcript)
        edges, parseable = parse_edge_lines(resp.text)
        any_parseable = any_parseable or parseable
        proposals.extend(edges)
    return proposals, any_parseable


def derive_table_seed(seed: int, table_id: str) -> int:
    digest = hashlib.blake2b(f"{seed}:{table_id}".encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


@dataclass
class GettResult:
    taxonomy: Taxonomy
    per_table: dict[str, list[str]]
    candidates: TypeCandidateList
    failures: list[str] = field(default_factory=list)


def run_gett(
    corpus: Corpus,
    backend,
    edge_filter: EdgeFilter,
    root_name: str = DEFAULT_ROOT,
    seed: int = 0,
    max_iters: int = DEFAULT_MAX_ITERS,
    transcript: TranscriptLogger | None = None,
) -> GettResult:
    """Generate types per table, flatten, and build the layered taxonomy.

    Per-table failures are recorded and tolerated while at least half of
    the tables succeed.
    """
    per_table: dict[str, list[str]] = {}
    failures: list[str] = []
    for table in corpus.tables:
        try:
            per_table[table.id] = generate_types(
                table, backend, derive_table_seed(seed, table.id), transcript
            )
        except GenerationFailedError:
            logger.warning("type generation failed for table %s", table.id)
            failures.append(table.id)
    required = math.ceil(len(corpus.tables) / 2)
    if len(per_table) < required:
        raise PipelineAbortedError(
            f"only {len(per_table)}/{len(corpus.tables)} tables generated types"
        )
    candidates = flatten(per_table)
    tax = chain_of_layer(candidates, root_name, backend, edge_filter, max_iters, transcript)
    return GettResult(taxonomy=tax, per_table=per_table, candidates=candidates, failures=failures)
