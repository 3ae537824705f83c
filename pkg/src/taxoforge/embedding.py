"""Column serialization and embedding providers with on-disk caching.

Two providers ship: ``remote`` speaks a JSON embeddings API (order-preserving
``{"model", "input": [...]}`` -> ``{"data": [{"embedding": [...]}]}``), and
``local-hash`` maps each token to a seeded pseudo-random unit vector and
averages, giving a fully offline space where shared vocabulary means high
cosine similarity. Vectors are cached one file per entry, keyed by the
SHA-256 of (provider id || serialized text), so repeated runs are bit-exact
even against nondeterministic remote backends.
"""

from __future__ import annotations

import concurrent.futures
import hashlib
import logging
import os
import struct
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import requests

from .corpus import Corpus, Table
from .errors import DimensionMismatchError, ProviderError

logger = logging.getLogger(__name__)

API_KEY_ENV = "TAXOFORGE_API_KEY"


@dataclass(frozen=True)
class ColumnRef:
    table_id: str
    col: int


@dataclass(frozen=True)
class SerializationSpec:
    include_header: bool = True
    max_distinct_cells: int = 128
    style: str = "sbert_markup"

    def __post_init__(self):
        if self.max_distinct_cells < 1:
            raise ValueError("max_distinct_cells must be >= 1")
        if self.style != "sbert_markup":
            raise ValueError(f"unknown serialization style {self.style!r}")


def serialize_column(table: Table, col: int, spec: SerializationSpec | None = None) -> str:
    """Render a column as ``<s> <header>H</header> v1 v2 ...``.

    Values are the first ``max_distinct_cells`` unique non-empty cells in
    first-occurrence order. With ``include_header=False`` the header
    segment is omitted.
    """
    spec = spec or SerializationSpec()
    if col >= table.n_cols:
        raise IndexError(f"column {col} out of range for table {table.id!r}")
    parts = ["<s>"]
    if spec.include_header:
        parts.append(f"<header>{table.headers[col]}</header>")
    seen: set[str] = set()
    for value in table.column(col):
        if value and value not in seen:
            seen.add(value)
            parts.append(value)
            if len(seen) >= spec.max_distinct_cells:
                break
    return " ".join(parts)


class LocalHashProvider:
    """Deterministic offline embedder: average of per-token random unit vectors.

    Each token seeds its own PCG64 stream from a BLAKE2 digest, so vectors
    are identical across processes and platforms for a given dim.
    """

    def __init__(self, dim: int = 64):
        if dim < 2:
            raise ValueError("dim must be >= 2")
        self.dim = dim
        self.provider_id = f"local-hash-d{dim}"
        self._token_cache: dict[str, np.ndarray] = {}

    def _token_vector(self, token: str) -> np.ndarray:
        vec = self._token_cache.get(token)
        if vec is None:
            digest = hashlib.blake2b(token.encode("utf-8"), digest_size=8).digest()
            rng = np.random.Generator(np.random.PCG64(int.from_bytes(digest, "little")))
            vec = rng.standard_normal(self.dim)
            vec /= np.linalg.norm(vec)
            self._token_cache[token] = vec
        return vec

    def embed_texts(self, texts: list[str]) -> np.ndarray:
        out = np.zeros((len(texts), self.dim), dtype=np.float32)
        for i, text in enumerate(texts):
            tokens = text.split() or [""]
            acc = np.zeros(self.dim)
            for tok in tokens:
                acc += self._token_vector(tok)
            acc /= len(tokens)
            norm = np.linalg.norm(acc)
            if norm > 0:
                acc /= norm
            out[i] = acc.astype(np.float32)
        return out


class RemoteProvider:
    """Client for a JSON embeddings endpoint, with bounded retries.

    POSTs ``{"model": ..., "input": [texts]}`` and expects order-preserving
    ``{"data": [{"embedding": [...]}, ...]}``. The API key is read from the
    TAXOFORGE_API_KEY environment variable.
    """

    def __init__(
        self,
        url: str,
        model: str,
        batch_size: int = 64,
        parallelism: int = 8,
        timeout: float = 60.0,
        max_retries: int = 3,
    ):
        self.url = url
        self.model = model
        self.batch_size = batch_size
        self.parallelism = max(1, parallelism)
        self.timeout = timeout
        self.max_retries = max_retries
        self.provider_id = f"remote:{model}"

    def _headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        key = os.environ.get(API_KEY_ENV, "")
        if key:
            headers["Authorization"] = f"Bearer {key}"
        return headers

    def _post_batch(self, texts: list[str]) -> list[list[float]]:
        last_status: int | None = None
        last_body = ""
        for attempt in range(self.max_retries):
            try:
                resp = requests.post(
                    self.url,
                    json={"model": self.model, "input": texts},
                    headers=self._headers(),
                    timeout=self.timeout,
                )
                last_status, last_body = resp.status_code, resp.text
                if resp.ok:
                    data = resp.json()["data"]
                    return [item["embedding"] for item in data]
            except requests.RequestException as exc:
                last_status, last_body = None, str(exc)
            if attempt < self.max_retries - 1:
                time.sleep(2**attempt)
        raise ProviderError(last_status, last_body)

    def embed_texts(self, texts: list[str]) -> np.ndarray:
        batches = [texts[i : i + self.batch_size] for i in range(0, len(texts), self.batch_size)]
        results: list[list[list[float]]] = [[] for _ in batches]
        with concurrent.futures.ThreadPoolExecutor(max_workers=self.parallelism) as pool:
            futures = {pool.submit(self._post_batch, b): i for i, b in enumerate(batches)}
            for fut in concurrent.futures.as_completed(futures):
                results[futures[fut]] = fut.result()
        flat = [vec for batch in results for vec in batch]
        if len(flat) != len(texts):
            raise ProviderError(None, f"expected {len(texts)} vectors, got {len(flat)}")
        dims = {len(v) for v in flat}
        if len(dims) > 1:
            raise DimensionMismatchError(f"provider returned mixed dims: {sorted(dims)}")
        return np.asarray(flat, dtype=np.float32)


def cache_key(provider_id: str, text: str) -> str:
    payload = provider_id.encode("utf-8") + b"\x00" + text.encode("utf-8")
    return hashlib.sha256(payload).hexdigest()


class VectorCache:
    """One file per vector: uint32 little-endian dim then float32 values."""

    def __init__(self, cache_dir: str | Path):
        self.dir = Path(cache_dir)
        self.dir.mkdir(parents=True, exist_ok=True)

    def _path(self, key: str) -> Path:
        return self.dir / f"{key}.vec"

    def get(self, key: str) -> np.ndarray | None:
        path = self._path(key)
        if not path.exists():
            return None
        blob = path.read_bytes()
        if len(blob) < 4:
            logger.warning("corrupt cache entry %s, ignoring", path)
            return None
        (dim,) = struct.unpack("<I", blob[:4])
        vec = np.frombuffer(blob[4:], dtype="<f4")
        if vec.shape[0] != dim:
            logger.warning("corrupt cache entry %s, ignoring", path)
            return None
        return vec.copy()

    def put(self, key: str, vec: np.ndarray) -> None:
        blob = struct.pack("<I", vec.shape[0]) + np.asarray(vec, dtype="<f4").tobytes()
        tmp = self.dir / f".{key}.{os.getpid()}.tmp"
        tmp.write_bytes(blob)
        os.replace(tmp, self._path(key))  # atomic under concurrent writers


class EmbeddingService:
    """Dedupe + cache layer in front of a provider.

    Same serialized text always yields a bit-identical vector: texts are
    deduplicated before the provider is called, and cache hits short-circuit
    the provider entirely.
    """

    def __init__(self, provider, cache_dir: str | Path | None = None):
        self.provider = provider
        self.cache = VectorCache(cache_dir) if cache_dir else None
        self.provider_calls = 0

    def embed_texts(self, texts: list[str]) -> np.ndarray:
        if not texts:
            return np.zeros((0, getattr(self.provider, "dim", 0)), dtype=np.float32)
        unique: list[str] = []
        index: dict[str, int] = {}
        for t in texts:
            if t not in index:
                index[t] = len(unique)
                unique.append(t)
        vectors: list[np.ndarray | None] = [None] * len(unique)
        missing: list[int] = []
        if self.cache is not None:
            for i, t in enumerate(unique):
                vectors[i] = self.cache.get(cache_key(self.provider.provider_id, t))
                if vectors[i] is None:
                    missing.append(i)
        else:
            missing = list(range(len(unique)))
        if missing:
            self.provider_calls += 1
            fresh = self.provider.embed_texts([unique[i] for i in missing])
            for slot, vec in zip(missing, fresh):
                vectors[slot] = vec
                if self.cache is not None:
                    self.cache.put(cache_key(self.provider.provider_id, unique[slot]), vec)
        dims = {v.shape[0] for v in vectors}
        if len(dims) > 1:
            raise DimensionMismatchError(f"mixed dims across texts: {sorted(dims)}")
        return np.stack([vectors[index[t]] for t in texts])

    def embed_columns(
        self,
        corpus: Corpus,
        refs: list[ColumnRef],
        spec: SerializationSpec | None = None,
    ) -> dict[ColumnRef, np.ndarray]:
        spec = spec or SerializationSpec()
        texts = [serialize_column(corpus.get(r.table_id), r.col, spec) for r in refs]
        matrix = self.embed_texts(texts)
        return {ref: matrix[i] for i, ref in enumerate(refs)}
