"""Subcommand front-end: ingest -> label -> score -> report.

Each stage reads the run config, consumes the previous stage's artifact,
and writes its own deterministically, so reruns with unchanged inputs are
byte-identical. Exit codes: 2 bad input, 3 missing prerequisite stage,
4 degenerate data, 1 anything else that failed.
"""

from __future__ import annotations

import json
import logging
import os
import sys
from pathlib import Path
from typing import Callable

import click

from . import corpus, embedding, gtsim, harness, labeling, reporting
from .config import RunConfig, load_config
from .errors import DegenerateData, InputError, MissingPrerequisite, RadsimError
from .lexical import tokenize

log = logging.getLogger("radsim")


def _run_stage(stage: Callable[[], None]) -> None:
    try:
        stage()
    except InputError as exc:
        log.error("%s", exc)
        sys.exit(2)
    except MissingPrerequisite as exc:
        log.error("%s", exc)
        sys.exit(3)
    except DegenerateData as exc:
        log.error("%s", exc)
        sys.exit(4)
    except RadsimError as exc:
        log.error("%s", exc)
        sys.exit(1)


def build_chat_provider(config: RunConfig) -> labeling.ChatProvider:
    chat = config.chat
    if chat.provider == "mock":
        return labeling.MockChatProvider.from_file(chat.lexicon, chat.temperature)
    api_key = os.environ.get(chat.api_key_env) if chat.api_key_env else None
    provider_config = labeling.ChatProviderConfig(
        endpoint=chat.endpoint,
        model=chat.model,
        temperature=chat.temperature,
        max_retries=chat.max_retries,
        timeout_s=chat.timeout_s,
        api_key_env=chat.api_key_env,
    )
    return labeling.HttpChatProvider(provider_config, api_key)


def build_embedder(config: RunConfig) -> embedding.EmbeddingProvider:
    options = config.embedding
    if options.provider == "hashed":
        return embedding.HashedEmbedder(options.dim, options.hash_seed)
    if options.provider == "http":
        return embedding.HttpEmbedder(options.endpoint)
    return embedding.PrecomputedEmbedder(options.file)


def _read_manifest(config: RunConfig) -> dict:
    if not config.manifest_path.is_file():
        raise MissingPrerequisite(f"{config.manifest_path} not found; run `radsim ingest` first")
    return json.loads(config.manifest_path.read_text(encoding="utf-8"))


def _load_corpus(config: RunConfig):
    reports = corpus.load_reports(config.reports)
    chexpert = corpus.load_finding_vectors(config.chexpert, config.schema, "CheXpert")
    negbio = corpus.load_finding_vectors(config.negbio, config.schema, "NegBio")
    return reports, chexpert, negbio


def cmd_ingest(config: RunConfig) -> None:
    reports, chexpert, negbio = _load_corpus(config)
    chex_ids = {v.report_id for v in chexpert}
    negbio_ids = {v.report_id for v in negbio}
    dropped = [r.report_id for r in reports if r.report_id not in chex_ids or r.report_id not in negbio_ids]
    retained = corpus.filter_no_finding_only(reports, chexpert, negbio, config.schema)
    pair_set = corpus.split_groups(retained, config.seed)
    group_a, group_b = list(pair_set.group_a), list(pair_set.group_b)
    if config.group_size is not None:
        group_a = group_a[: config.group_size]
        group_b = group_b[: config.group_size]
    manifest = {
        "seed": config.seed,
        "schema": list(config.schema.names),
        "no_finding_name": config.schema.no_finding_name,
        "total_reports": len(reports),
        "dropped_missing_vectors": dropped,
        "excluded_no_finding": len(reports) - len(dropped) - len(retained),
        "retained": [r.report_id for r in retained],
        "group_a": group_a,
        "group_b": group_b,
    }
    config.output_dir.mkdir(parents=True, exist_ok=True)
    config.manifest_path.write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    log.info(
        "ingested %d reports: %d retained, %d no-finding-only excluded, %d dropped; groups %d/%d",
        len(reports),
        len(retained),
        manifest["excluded_no_finding"],
        len(dropped),
        len(group_a),
        len(group_b),
    )


def cmd_label(config: RunConfig) -> None:
    manifest = _read_manifest(config)
    reports, _, _ = _load_corpus(config)
    by_id = {r.report_id: r for r in reports}
    ids = sorted(manifest["group_a"] + manifest["group_b"])
    provider = build_chat_provider(config)
    cache = labeling.LabelCache(config.label_cache_path)

    samples = [by_id[rid] for rid in ids[:4]]
    identifications = {
        report.report_id: labeling.identify_text(provider, report, cache, config.chat.max_retries)
        for report in samples
    }
    log.info("identified sample reports as: %s", sorted(set(identifications.values())))
    tasks = labeling.generate_tasks(provider, samples, cache, config.chat.max_retries)
    task = labeling.select_task(tasks, config.task_pattern)
    log.info("selected task %s (%s)", task.task_id, task.name)

    batch = labeling.label_corpus(
        provider,
        [by_id[rid] for rid in ids],
        task,
        cache,
        config.chat.concurrency,
        config.chat.max_retries,
    )
    log.info("labeled %d/%d reports", len(batch.label_sets), len(ids))
    log.info("chat provider calls: %d", getattr(provider, "calls", -1))
    if batch.failures:
        for rid, message in batch.failures:
            log.error("labeling failed for %s: %s", rid, message)
        sys.exit(1)


def _embeddings_for(
    config: RunConfig,
    label_sets: dict[str, labeling.GeneratedLabelSet],
    ids: list[str],
) -> dict[str, embedding.Vector]:
    provider = build_embedder(config)
    cache = embedding.EmbeddingCache(config.embedding_cache_path)
    options = config.embedding
    if options.combine_mode == "join":
        texts = [embedding.labelset_to_text(label_sets[rid]) for rid in ids]
        vectors = embedding.embed(provider, texts, cache, options.batch_size, options.concurrency)
        return dict(zip(ids, vectors))
    return {
        rid: embedding._mean_pooled(
            label_sets[rid], provider, cache, options.batch_size, options.concurrency
        )
        for rid in ids
    }


def cmd_score(config: RunConfig) -> None:
    manifest = _read_manifest(config)
    if not config.label_cache_path.is_file():
        raise MissingPrerequisite(f"{config.label_cache_path} not found; run `radsim label` first")
    reports, chexpert, negbio = _load_corpus(config)
    by_id = {r.report_id: r for r in reports}
    encoded = gtsim.encode_corpus(chexpert + negbio, config.schema)
    ids = list(manifest["group_a"]) + list(manifest["group_b"])

    chat_provider = build_chat_provider(config)
    cache = labeling.LabelCache(config.label_cache_path)
    samples = [by_id[rid] for rid in sorted(ids)[:4]]
    tasks = labeling.generate_tasks(chat_provider, samples, cache, config.chat.max_retries)
    task = labeling.select_task(tasks, config.task_pattern)

    label_sets: dict[str, labeling.GeneratedLabelSet] = {}
    for rid in ids:
        _, record = labeling._labels_record(chat_provider, by_id[rid], task)
        cached = cache.get(record)
        if cached is None:
            raise MissingPrerequisite(f"no cached labels for {rid!r}; run `radsim label` first")
        label_sets[rid] = labeling._labelset_from_record(by_id[rid], task, chat_provider, cached)

    vectors = _embeddings_for(config, label_sets, ids)
    inputs = {
        rid: harness.PairInputs(
            report_id=rid,
            tokens=tuple(tokenize(by_id[rid].text)),
            embedding=vectors[rid],
            encoded={
                source: encoded[(source, rid)] for source in harness.SOURCES if (source, rid) in encoded
            },
        )
        for rid in ids
    }
    pair_set = corpus.cross_pairs(corpus.PairSet(tuple(manifest["group_a"]), tuple(manifest["group_b"])))
    scores, failures = harness.run_all(
        pair_set.pairs, inputs, config.metrics, config.embedding.concurrency
    )
    config.output_dir.mkdir(parents=True, exist_ok=True)
    harness.write_scores_csv(config.scores_path, scores)
    log.info("scored %d pairs -> %s", len(scores), config.scores_path)
    if failures:
        for pair, message in failures:
            log.error("scoring failed for %s: %s", pair, message)
        sys.exit(1)


def cmd_report(config: RunConfig) -> None:
    if not config.scores_path.is_file():
        raise MissingPrerequisite(f"{config.scores_path} not found; run `radsim score` first")
    scores = harness.read_scores_csv(config.scores_path)
    cells = []
    for source in harness.SOURCES:
        cells.extend(harness.mean_differences(scores, source, config.metrics.difference_mode))
    config.output_dir.mkdir(parents=True, exist_ok=True)
    (config.output_dir / "summary.md").write_text(
        reporting.render_summary_markdown(cells), encoding="utf-8"
    )
    reporting.write_summary_csv(config.output_dir / "summary.csv", cells)
    figures_dir = config.output_dir / "figures"
    if config.report.figures:
        figures_dir.mkdir(parents=True, exist_ok=True)
    for method in harness.METHODS:
        for source in harness.SOURCES:
            layer = harness.hexbin(scores, method, source, config.report.hex_radius, config.report.min_count)
            slug = f"hexbin_{method.lower()}_{source.lower()}"
            reporting.write_hexbin_csv(config.output_dir / f"{slug}.csv", layer)
            svg = reporting.render_hexbin_svg(layer)
            (config.output_dir / f"{slug}.svg").write_text(svg, encoding="utf-8")
            if config.report.figures:
                reporting.render_hexbin_png(layer, figures_dir / f"{slug}.png")
    log.info("report written to %s", config.output_dir)


def _common_options(fn):
    fn = click.option("--embedder", type=click.Choice(["hashed", "http", "file"]), default=None)(fn)
    fn = click.option("--provider", type=click.Choice(["mock", "http"]), default=None)(fn)
    fn = click.option("--seed", type=int, default=None)(fn)
    fn = click.option(
        "--config", "config_path", required=True, type=click.Path(path_type=Path), help="run config TOML"
    )(fn)
    return fn


def _stage_command(group: click.Group, name: str, stage: Callable[[RunConfig], None], doc: str):
    @group.command(name, help=doc)
    @_common_options
    def command(config_path: Path, seed: int | None, provider: str | None, embedder: str | None):
        def run():
            stage(load_config(config_path, seed, provider, embedder))

        _run_stage(run)


@click.group()
def main() -> None:
    """Similarity evaluation for radiology reports: ground-truth label
    vectors vs LLM-label embeddings vs ROUGE/BLEU baselines."""
    # force rebinds the handler to the current stderr, which matters when
    # several runs happen in one process with redirected streams
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        force=True,
    )


_stage_command(main, "ingest", cmd_ingest, "Load, filter, and split the corpus; write manifest.json.")
_stage_command(main, "label", cmd_label, "Run the labeling pipeline over retained reports.")
_stage_command(main, "score", cmd_score, "Score every cross-group pair; write scores.csv.")
_stage_command(main, "report", cmd_report, "Aggregate scores into summary tables and hexbin figures.")


if __name__ == "__main__":
    main()
