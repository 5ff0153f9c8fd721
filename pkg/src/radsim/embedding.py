"""Label-set embedding and GPT_sim scoring behind pluggable providers.

Three providers: an HTTP client for the embedding sidecar, a precomputed
JSON-lines file for air-gapped runs, and a hashed bag-of-words fallback
that needs no model at all. Vectors from remote sources are renormalized
locally; the hashed fallback normalizes exactly once at construction so
repeated runs are bit-identical. Embeddings are cached per (text hash,
provider fingerprint).
"""

from __future__ import annotations

import concurrent.futures
import hashlib
import json
import logging
import math
import threading
from pathlib import Path
from typing import Protocol, Sequence

import requests

from .errors import (
    DimensionMismatch,
    EmptyLabelSet,
    NormalizationFailure,
    ProviderError,
)
from .gtsim import cosine
from .labeling import GeneratedLabelSet
from .lexical import tokenize

log = logging.getLogger(__name__)

Vector = tuple[float, ...]


def _normalize(values: Sequence[float], context: str) -> Vector:
    norm = math.sqrt(math.fsum(v * v for v in values))
    if norm == 0.0:
        raise NormalizationFailure(f"zero vector from {context}")
    return tuple(v / norm for v in values)


def text_sha(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


class EmbeddingProvider(Protocol):
    provider_id: str
    model: str
    # remote vectors get renormalized after receipt; locally computed ones
    # are already exactly unit-norm and must not be divided twice
    renormalize: bool

    def embed_batch(self, texts: Sequence[str]) -> list[list[float]]: ...


class HashedEmbedder:
    """Feature-hashed unigram counts, L2-normalized.

    Deterministic and model-free; carries no claim of semantic fidelity
    beyond token overlap. Token index = first 8 bytes of
    sha256("<seed>:<token>") mod dim.
    """

    provider_id = "hashed"
    renormalize = False

    def __init__(self, dim: int = 256, seed: int = 0) -> None:
        if dim < 64:
            raise ValueError(f"hashed fallback dimension must be >= 64, got {dim}")
        self.dim = dim
        self.seed = seed
        self.model = f"unigram-d{dim}-s{seed}"
        self.batch_calls = 0
        self.texts_embedded = 0
        self._lock = threading.Lock()

    def _index(self, token: str) -> int:
        digest = hashlib.sha256(f"{self.seed}:{token}".encode("utf-8")).digest()
        return int.from_bytes(digest[:8], "big") % self.dim

    def embed_batch(self, texts: Sequence[str]) -> list[list[float]]:
        with self._lock:
            self.batch_calls += 1
            self.texts_embedded += len(texts)
        vectors = []
        for text in texts:
            values = [0.0] * self.dim
            for token in tokenize(text):
                values[self._index(token)] += 1.0
            vectors.append(list(_normalize(values, f"hashing {text!r}")))
        return vectors


class HttpEmbedder:
    """Client for the embedding sidecar wire contract.

    POST /embed {"texts": [...]} -> {"model", "dim", "vectors"};
    GET /health -> {"status", "model"}. The health probe at construction
    pins the model id so cache keys are stable before the first batch.
    """

    provider_id = "http"
    renormalize = True

    def __init__(self, base_url: str, timeout_s: float = 30.0) -> None:
        self.base_url = base_url.rstrip("/")
        self.timeout_s = timeout_s
        self.batch_calls = 0
        self._lock = threading.Lock()
        self._session = requests.Session()
        self.model = self._probe_health()

    def _probe_health(self) -> str:
        try:
            response = self._session.get(f"{self.base_url}/health", timeout=self.timeout_s)
        except requests.RequestException as exc:
            raise ProviderError(f"health probe of {self.base_url} failed: {exc}") from exc
        if response.status_code == 503:
            raise ProviderError(f"{self.base_url}: model not loaded yet; retry later")
        if response.status_code != 200:
            raise ProviderError(f"{self.base_url}/health returned HTTP {response.status_code}")
        try:
            return response.json()["model"]
        except (ValueError, KeyError, TypeError) as exc:
            raise ProviderError(f"malformed health response: {exc}") from exc

    def embed_batch(self, texts: Sequence[str]) -> list[list[float]]:
        with self._lock:
            self.batch_calls += 1
        try:
            response = self._session.post(
                f"{self.base_url}/embed", json={"texts": list(texts)}, timeout=self.timeout_s
            )
        except requests.RequestException as exc:
            raise ProviderError(f"embed request to {self.base_url} failed: {exc}") from exc
        if response.status_code != 200:
            raise ProviderError(f"{self.base_url}/embed returned HTTP {response.status_code}")
        try:
            payload = response.json()
            vectors = payload["vectors"]
            dim = payload["dim"]
        except (ValueError, KeyError, TypeError) as exc:
            raise ProviderError(f"malformed embed response: {exc}") from exc
        if len(vectors) != len(texts):
            raise ProviderError(f"asked for {len(texts)} vectors, got {len(vectors)}")
        for vector in vectors:
            if len(vector) != dim:
                raise DimensionMismatch(f"vector of length {len(vector)} in a dim={dim} response")
        return vectors


class PrecomputedEmbedder:
    """Vectors from a JSON-lines file of {"text_sha256": ..., "vector": [...]}."""

    provider_id = "file"
    renormalize = True

    def __init__(self, path: str | Path) -> None:
        path = Path(path)
        raw = path.read_bytes()
        self.model = "precomputed-" + hashlib.sha256(raw).hexdigest()[:12]
        self._vectors: dict[str, list[float]] = {}
        for line in raw.decode("utf-8").splitlines():
            if line.strip():
                record = json.loads(line)
                self._vectors[record["text_sha256"]] = record["vector"]
        self.path = path

    def embed_batch(self, texts: Sequence[str]) -> list[list[float]]:
        vectors = []
        for text in texts:
            sha = text_sha(text)
            if sha not in self._vectors:
                raise ProviderError(f"{self.path}: no precomputed vector for sha {sha[:12]} ({text[:40]!r})")
            vectors.append(self._vectors[sha])
        return vectors


class EmbeddingCache:
    """Append-only JSON-lines cache keyed (text hash, provider, model)."""

    def __init__(self, path: str | Path) -> None:
        self.path = Path(path)
        self._vectors: dict[tuple[str, str, str], Vector] = {}
        self._lock = threading.Lock()
        if self.path.exists():
            with self.path.open(encoding="utf-8") as fh:
                for line in fh:
                    if line.strip():
                        record = json.loads(line)
                        key = (record["text_sha256"], record["provider"], record["model"])
                        self._vectors[key] = tuple(record["vector"])

    def get(self, sha: str, provider: EmbeddingProvider) -> Vector | None:
        return self._vectors.get((sha, provider.provider_id, provider.model))

    def put(self, sha: str, provider: EmbeddingProvider, vector: Vector) -> None:
        with self._lock:
            key = (sha, provider.provider_id, provider.model)
            if key in self._vectors:
                return
            self._vectors[key] = vector
            self.path.parent.mkdir(parents=True, exist_ok=True)
            record = {
                "text_sha256": sha,
                "provider": provider.provider_id,
                "model": provider.model,
                "vector": list(vector),
            }
            with self.path.open("a", encoding="utf-8") as fh:
                fh.write(json.dumps(record) + "\n")

    def __len__(self) -> int:
        return len(self._vectors)


def embed(
    provider: EmbeddingProvider,
    texts: Sequence[str],
    cache: EmbeddingCache | None = None,
    batch_size: int = 64,
    concurrency: int = 4,
) -> list[Vector]:
    """Embed texts, order-preserving, one unit-norm vector each.

    Duplicate texts are computed once; cache misses go to the provider in
    batches, concurrently, with results (and cache writes) consumed in
    submission order.
    """
    if batch_size < 1:
        raise ValueError("batch_size must be >= 1")
    resolved: dict[str, Vector] = {}
    todo: list[str] = []
    for text in texts:
        sha = text_sha(text)
        if text in resolved or text in todo:
            continue
        cached = cache.get(sha, provider) if cache is not None else None
        if cached is not None:
            resolved[text] = cached
        else:
            todo.append(text)

    batches = [todo[i : i + batch_size] for i in range(0, len(todo), batch_size)]
    with concurrent.futures.ThreadPoolExecutor(max_workers=max(1, concurrency)) as pool:
        for batch, vectors in zip(batches, pool.map(provider.embed_batch, batches)):
            for text, values in zip(batch, vectors):
                vector = _normalize(values, f"provider {provider.provider_id}") if provider.renormalize else tuple(values)
                resolved[text] = vector
                if cache is not None:
                    cache.put(text_sha(text), provider, vector)

    dims = {len(vector) for vector in resolved.values()}
    if len(dims) > 1:
        raise DimensionMismatch(f"mixed vector dimensions in one run: {sorted(dims)}")
    return [resolved[text] for text in texts]


def labelset_to_text(label_set: GeneratedLabelSet) -> str:
    """Join labels with '; ' in order (combine mode "join")."""
    labels = [label.strip() for label in label_set.labels if label.strip()]
    if not labels:
        raise EmptyLabelSet(f"label set for {label_set.report_id!r} is empty")
    return "; ".join(labels)


def _mean_pooled(label_set: GeneratedLabelSet, provider, cache, batch_size, concurrency) -> Vector:
    labels = [label.strip() for label in label_set.labels if label.strip()]
    if not labels:
        raise EmptyLabelSet(f"label set for {label_set.report_id!r} is empty")
    vectors = embed(provider, labels, cache, batch_size, concurrency)
    dim = len(vectors[0])
    mean = [math.fsum(vector[i] for vector in vectors) / len(vectors) for i in range(dim)]
    return _normalize(mean, f"mean-pooling {label_set.report_id!r}")


def gpt_sim(
    a: GeneratedLabelSet,
    b: GeneratedLabelSet,
    provider: EmbeddingProvider,
    mode: str = "join",
    cache: EmbeddingCache | None = None,
    batch_size: int = 64,
    concurrency: int = 4,
) -> float:
    """Cosine similarity between the two label-set embeddings.

    Mode "join" embeds the '; '-joined string (label order matters);
    mode "mean-pool" averages per-label embeddings and renormalizes
    (label order cannot matter: the mean is an exact fsum).
    """
    if mode == "join":
        u, v = embed(provider, [labelset_to_text(a), labelset_to_text(b)], cache, batch_size, concurrency)
    elif mode == "mean-pool":
        u = _mean_pooled(a, provider, cache, batch_size, concurrency)
        v = _mean_pooled(b, provider, cache, batch_size, concurrency)
    else:
        raise ValueError(f"unknown combine mode {mode!r}")
    return cosine(u, v)
