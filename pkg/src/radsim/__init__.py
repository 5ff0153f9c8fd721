"""Similarity evaluation for radiology reports.

Ground-truth similarity from clinical finding labels, LLM-generated
descriptive labels scored by embedding cosine, and ROUGE/BLEU lexical
baselines, aggregated into a mean-difference table and hexbin figures.
"""

from .corpus import (
    Assignment,
    FindingSchema,
    FindingVector,
    PairSet,
    Report,
    cross_pairs,
    filter_no_finding_only,
    load_finding_vectors,
    load_reports,
    split_groups,
)
from .embedding import HashedEmbedder, HttpEmbedder, PrecomputedEmbedder, embed, gpt_sim, labelset_to_text
from .gtsim import EncodedFindingVector, cosine, encode_vector, gt_similarity
from .harness import (
    HexbinLayer,
    MetricOptions,
    PairInputs,
    PairScore,
    SummaryCell,
    hexbin,
    mean_differences,
    percentile_band,
    run_all,
    score_pair,
)
from .labeling import (
    ChatProviderConfig,
    GeneratedLabelSet,
    HttpChatProvider,
    LabelCache,
    MockChatProvider,
    TaskDefinition,
    generate_labels,
    generate_tasks,
    identify_text,
    label_corpus,
    select_task,
)
from .lexical import MetricScore, bleu, ngram_counts, rouge_l, rouge_n, tokenize
from .reporting import PlotSpec, render_hexbin_svg, render_summary_markdown

__version__ = "0.1.0"

__all__ = [
    "Assignment",
    "ChatProviderConfig",
    "EncodedFindingVector",
    "FindingSchema",
    "FindingVector",
    "GeneratedLabelSet",
    "HashedEmbedder",
    "HexbinLayer",
    "HttpChatProvider",
    "HttpEmbedder",
    "LabelCache",
    "MetricOptions",
    "MetricScore",
    "MockChatProvider",
    "PairInputs",
    "PairScore",
    "PairSet",
    "PlotSpec",
    "PrecomputedEmbedder",
    "Report",
    "SummaryCell",
    "TaskDefinition",
    "bleu",
    "cosine",
    "cross_pairs",
    "embed",
    "encode_vector",
    "filter_no_finding_only",
    "generate_labels",
    "generate_tasks",
    "gpt_sim",
    "gt_similarity",
    "hexbin",
    "identify_text",
    "label_corpus",
    "labelset_to_text",
    "load_finding_vectors",
    "load_reports",
    "mean_differences",
    "ngram_counts",
    "percentile_band",
    "render_hexbin_svg",
    "render_summary_markdown",
    "rouge_l",
    "rouge_n",
    "run_all",
    "score_pair",
    "select_task",
    "split_groups",
    "tokenize",
    "__version__",
]
