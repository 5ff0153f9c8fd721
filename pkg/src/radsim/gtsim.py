"""Ground-truth similarity: numeric encoding of finding vectors and cosine.

Encoding: positive 1.0, negative 0.0, uncertain -1.0, missing -2.0, one
slot per schema name in schema order. An all-negative report encodes to
the zero vector, where cosine is undefined; that surfaces as ZeroVector
and callers record the pair's ground truth as absent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

from .corpus import Assignment, FindingSchema, FindingVector
from .errors import LengthMismatch, MissingEncoding, SchemaMismatch, ZeroVector

_ASSIGNMENT_VALUE = {
    Assignment.POSITIVE: 1.0,
    Assignment.NEGATIVE: 0.0,
    Assignment.UNCERTAIN: -1.0,
    Assignment.MISSING: -2.0,
}


@dataclass(frozen=True)
class EncodedFindingVector:
    report_id: str
    source: str
    values: tuple[float, ...]


def encode_vector(fv: FindingVector, schema: FindingSchema) -> EncodedFindingVector:
    if set(fv.assignments) != set(schema.names):
        raise SchemaMismatch(
            f"{fv.report_id}: assignments do not cover the schema "
            f"(extra: {sorted(set(fv.assignments) - set(schema.names))}, "
            f"missing: {sorted(set(schema.names) - set(fv.assignments))})"
        )
    values = tuple(_ASSIGNMENT_VALUE[fv.assignments[name]] for name in schema.names)
    return EncodedFindingVector(fv.report_id, fv.source, values)


def cosine(u: Sequence[float], v: Sequence[float]) -> float:
    """dot(u,v) / (||u||*||v||), clamped to [-1, 1]; fsum keeps the result
    independent of summation order."""
    if len(u) != len(v):
        raise LengthMismatch(f"vector lengths differ: {len(u)} vs {len(v)}")
    norm_u = math.sqrt(math.fsum(a * a for a in u))
    norm_v = math.sqrt(math.fsum(b * b for b in v))
    if norm_u == 0.0 or norm_v == 0.0:
        raise ZeroVector("cosine undefined for a zero vector")
    dot = math.fsum(a * b for a, b in zip(u, v))
    return max(-1.0, min(1.0, dot / (norm_u * norm_v)))


def gt_similarity(
    a_id: str,
    b_id: str,
    source: str,
    encoded: Mapping[tuple[str, str], EncodedFindingVector],
) -> float:
    """Cosine between two encoded vectors from one source; the store is
    keyed (source, report_id)."""
    try:
        u = encoded[(source, a_id)]
        v = encoded[(source, b_id)]
    except KeyError as exc:
        raise MissingEncoding(f"no {source} encoding for {exc.args[0][1]!r}") from exc
    return cosine(u.values, v.values)


def encode_corpus(
    vectors: Sequence[FindingVector], schema: FindingSchema
) -> dict[tuple[str, str], EncodedFindingVector]:
    return {(fv.source, fv.report_id): encode_vector(fv, schema) for fv in vectors}
