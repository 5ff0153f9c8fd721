"""TOML run configuration.

One file describes a whole run (inputs, seed, providers, metric and
report options) so a result can be reproduced from a single artifact.
Relative paths resolve against the config file's directory. CLI flags
may override the seed and the provider kinds, nothing else.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .corpus import FindingSchema
from .errors import ConfigError
from .harness import MetricOptions


@dataclass(frozen=True)
class ChatOptions:
    provider: str = "mock"
    model: str = "gpt-4"
    temperature: float = 0.0
    max_retries: int = 3
    timeout_s: float = 30.0
    api_key_env: str = ""
    endpoint: str = ""
    lexicon: Path | None = None
    concurrency: int = 4


@dataclass(frozen=True)
class EmbeddingOptions:
    provider: str = "hashed"
    dim: int = 256
    hash_seed: int = 0
    batch_size: int = 64
    concurrency: int = 4
    combine_mode: str = "join"
    endpoint: str = ""
    file: Path | None = None


@dataclass(frozen=True)
class ReportOptions:
    hex_radius: float = 0.05
    min_count: int = 100
    figures: bool = True


@dataclass(frozen=True)
class RunConfig:
    seed: int
    reports: Path
    chexpert: Path
    negbio: Path
    output_dir: Path
    cache_dir: Path
    schema: FindingSchema = field(default_factory=FindingSchema)
    chat: ChatOptions = field(default_factory=ChatOptions)
    embedding: EmbeddingOptions = field(default_factory=EmbeddingOptions)
    metrics: MetricOptions = field(default_factory=MetricOptions)
    report: ReportOptions = field(default_factory=ReportOptions)
    task_pattern: str = "finding"
    group_size: int | None = None

    @property
    def manifest_path(self) -> Path:
        return self.output_dir / "manifest.json"

    @property
    def scores_path(self) -> Path:
        return self.output_dir / "scores.csv"

    @property
    def label_cache_path(self) -> Path:
        return self.cache_dir / "labels.jsonl"

    @property
    def embedding_cache_path(self) -> Path:
        return self.cache_dir / "embeddings.jsonl"


def _require(table: dict, key: str, where: str):
    if key not in table:
        raise ConfigError(f"config is missing {where}{key}")
    return table[key]


def load_config(
    path: str | Path,
    seed: int | None = None,
    chat_provider: str | None = None,
    embedder: str | None = None,
) -> RunConfig:
    """Parse and validate a run config; optional arguments override the
    corresponding file values (CLI flags land here)."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        raw = tomllib.loads(path.read_text(encoding="utf-8"))
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: invalid TOML: {exc}") from exc
    base = path.resolve().parent

    def resolve(value: str) -> Path:
        p = Path(value)
        return p if p.is_absolute() else base / p

    if seed is None:
        if "seed" not in raw:
            raise ConfigError(f"{path}: a seed is required (no implicit randomness)")
        seed = int(raw["seed"])

    paths = _require(raw, "paths", "")
    reports = resolve(_require(paths, "reports", "paths."))
    chexpert = resolve(_require(paths, "chexpert", "paths."))
    negbio = resolve(_require(paths, "negbio", "paths."))
    output_dir = resolve(paths.get("output_dir", "out"))
    cache_dir = resolve(paths.get("cache_dir", "cache"))

    schema_table = raw.get("schema", {})
    schema_kwargs = {}
    if "finding_names" in schema_table:
        schema_kwargs["names"] = tuple(schema_table["finding_names"])
    if "no_finding_name" in schema_table:
        schema_kwargs["no_finding_name"] = schema_table["no_finding_name"]
    try:
        schema = FindingSchema(**schema_kwargs)
    except ValueError as exc:
        raise ConfigError(f"{path}: bad schema: {exc}") from exc

    chat_table = raw.get("chat", {})
    chat = ChatOptions(
        provider=chat_provider or chat_table.get("provider", "mock"),
        model=chat_table.get("model", "gpt-4"),
        temperature=float(chat_table.get("temperature", 0.0)),
        max_retries=int(chat_table.get("max_retries", 3)),
        timeout_s=float(chat_table.get("timeout_s", 30.0)),
        api_key_env=chat_table.get("api_key_env", ""),
        endpoint=chat_table.get("endpoint", ""),
        lexicon=resolve(chat_table["lexicon"]) if "lexicon" in chat_table else None,
        concurrency=int(chat_table.get("concurrency", 4)),
    )
    if chat.provider not in ("mock", "http"):
        raise ConfigError(f"{path}: chat provider must be mock or http, got {chat.provider!r}")

    embed_table = raw.get("embedding", {})
    embedding = EmbeddingOptions(
        provider=embedder or embed_table.get("provider", "hashed"),
        dim=int(embed_table.get("dim", 256)),
        hash_seed=int(embed_table.get("hash_seed", 0)),
        batch_size=int(embed_table.get("batch_size", 64)),
        concurrency=int(embed_table.get("concurrency", 4)),
        combine_mode=embed_table.get("combine_mode", "join"),
        endpoint=embed_table.get("endpoint", ""),
        file=resolve(embed_table["file"]) if "file" in embed_table else None,
    )
    if embedding.provider not in ("hashed", "http", "file"):
        raise ConfigError(
            f"{path}: embedding provider must be hashed, http or file, got {embedding.provider!r}"
        )
    if embedding.combine_mode not in ("join", "mean-pool"):
        raise ConfigError(f"{path}: combine_mode must be join or mean-pool")

    metrics_table = raw.get("metrics", {})
    metrics = MetricOptions(
        bleu_max_n=int(metrics_table.get("bleu_max_n", 4)),
        bleu_smoothing=bool(metrics_table.get("bleu_smoothing", False)),
        bleu_epsilon=float(metrics_table.get("bleu_epsilon", 1e-9)),
        difference_mode=metrics_table.get("difference_mode", "absolute"),
    )
    if metrics.difference_mode not in ("absolute", "signed"):
        raise ConfigError(f"{path}: difference_mode must be absolute or signed")

    report_table = raw.get("report", {})
    report = ReportOptions(
        hex_radius=float(report_table.get("hex_radius", 0.05)),
        min_count=int(report_table.get("min_count", 100)),
        figures=bool(report_table.get("figures", True)),
    )

    config = RunConfig(
        seed=seed,
        reports=reports,
        chexpert=chexpert,
        negbio=negbio,
        output_dir=output_dir,
        cache_dir=cache_dir,
        schema=schema,
        chat=chat,
        embedding=embedding,
        metrics=metrics,
        report=report,
        task_pattern=raw.get("task", {}).get("pattern", "finding"),
        group_size=int(raw["group_size"]) if "group_size" in raw else None,
    )
    _validate_inputs(config)
    return config


def _validate_inputs(config: RunConfig) -> None:
    for label, p in (
        ("reports", config.reports),
        ("chexpert", config.chexpert),
        ("negbio", config.negbio),
    ):
        if not p.is_file():
            raise ConfigError(f"{label} file not found: {p}")
    if config.chat.provider == "mock":
        if config.chat.lexicon is None:
            raise ConfigError("mock chat provider requires chat.lexicon")
        if not config.chat.lexicon.is_file():
            raise ConfigError(f"lexicon file not found: {config.chat.lexicon}")
    if config.chat.provider == "http" and not config.chat.endpoint:
        raise ConfigError("http chat provider requires chat.endpoint")
    if config.embedding.provider == "http" and not config.embedding.endpoint:
        raise ConfigError("http embedding provider requires embedding.endpoint")
    if config.embedding.provider == "file":
        if config.embedding.file is None:
            raise ConfigError("file embedding provider requires embedding.file")
        if not config.embedding.file.is_file():
            raise ConfigError(f"embedding file not found: {config.embedding.file}")
