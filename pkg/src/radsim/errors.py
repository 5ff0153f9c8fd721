"""Error taxonomy.

Base classes group errors by how the CLI maps them to exit codes:
InputError -> 2, MissingPrerequisite -> 3, DegenerateData -> 4, anything
else derived from RadsimError -> 1.
"""

from __future__ import annotations


class RadsimError(Exception):
    """Base class for all errors raised by this package."""


class InputError(RadsimError):
    """Malformed or missing user-supplied input."""


class MissingPrerequisite(RadsimError):
    """A pipeline stage ran before the stage it depends on."""


class DegenerateData(RadsimError):
    """Inputs are structurally valid but leave nothing to compute."""


# corpus

class MissingColumn(InputError):
    pass


class DuplicateReportId(InputError):
    pass


class EmptyText(InputError):
    pass


class UnknownLabelColumn(InputError):
    pass


class InvalidCellValue(InputError):
    pass


class MissingReportId(InputError):
    pass


class EmptyCorpus(DegenerateData):
    pass


class OverlappingGroups(RadsimError):
    pass


# lexical_metrics

class InvalidN(RadsimError):
    pass


# gt_similarity

class SchemaMismatch(RadsimError):
    pass


class ZeroVector(RadsimError):
    pass


class LengthMismatch(RadsimError):
    pass


class MissingEncoding(RadsimError):
    pass


# llm_labeling

class ProviderError(RadsimError):
    pass


class RateLimited(ProviderError):
    pass


class UnparseableResponse(RadsimError):
    pass


class EmptyLabelList(RadsimError):
    pass


class NoMatch(RadsimError):
    pass


class AmbiguousMatch(RadsimError):
    pass


# embedding_sim

class EmptyLabelSet(RadsimError):
    pass


class DimensionMismatch(RadsimError):
    pass


class NormalizationFailure(RadsimError):
    pass


# eval_harness

class MissingLabelSet(RadsimError):
    pass


class NoValidPairs(DegenerateData):
    pass


class TooFewValues(DegenerateData):
    pass


# reporting

class IncompleteTable(RadsimError):
    pass


class EmptyLayer(DegenerateData):
    pass


# cli / config

class ConfigError(InputError):
    pass
