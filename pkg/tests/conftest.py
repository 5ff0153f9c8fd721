"""Shared fixtures: isolated run configs over the bundled fixture corpus,
a session-wide end-to-end run, and the acceptance-criterion summary that
prints one pass/fail line per criterion after the run.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from pathlib import Path

import pytest
from click.testing import CliRunner

from radsim.cli import main as cli_main

REPO = Path(__file__).resolve().parent.parent
FIXTURES = REPO / "fixtures"
GOLDEN = REPO / "tests" / "golden"

CRITERION_TITLES = {
    1: "metric oracle equivalence",
    2: "encoding fidelity",
    3: "cosine property suite",
    4: "pair-count reproduction",
    5: "end-to-end golden run",
    6: "paper-direction property",
    7: "hexbin correctness",
    8: "cache soundness",
    9: "service contract conformance",
}

_criterion_outcomes: dict[int, str] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    n = marker.args[0]
    if report.when == "call":
        _criterion_outcomes[n] = report.outcome
    elif report.when == "setup" and report.outcome != "passed":
        _criterion_outcomes[n] = "skipped" if report.skipped else "failed"


def pytest_terminal_summary(terminalreporter):
    if not _criterion_outcomes:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    words = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}
    for n in sorted(CRITERION_TITLES):
        if n in _criterion_outcomes:
            word = words.get(_criterion_outcomes[n], _criterion_outcomes[n].upper())
            terminalreporter.write_line(f"criterion {n} {word}: {CRITERION_TITLES[n]}")


def write_config(
    directory: Path,
    *,
    reports: Path = FIXTURES / "reports.csv",
    chexpert: Path = FIXTURES / "chexpert.csv",
    negbio: Path = FIXTURES / "negbio.csv",
    lexicon: Path = FIXTURES / "mock_lexicon.json",
    seed: int = 7,
    min_count: int = 0,
    figures: bool = False,
    extra: str = "",
) -> Path:
    """A run config equivalent to the bundled run.toml, pointed at an
    isolated output/cache location."""
    config = directory / "run.toml"
    config.write_text(
        f"""\
seed = {seed}

[paths]
reports = "{reports}"
chexpert = "{chexpert}"
negbio = "{negbio}"
output_dir = "out"
cache_dir = "cache"

[chat]
provider = "mock"
model = "gpt-4"
temperature = 0.0
max_retries = 3
timeout_s = 30.0
api_key_env = "RADSIM_API_KEY"
lexicon = "{lexicon}"
concurrency = 4

[embedding]
provider = "hashed"
dim = 256
hash_seed = 13
batch_size = 64
concurrency = 4
combine_mode = "join"

[metrics]
bleu_max_n = 4
bleu_smoothing = false
bleu_epsilon = 1e-9
difference_mode = "absolute"

[report]
hex_radius = 0.05
min_count = {min_count}
figures = {"true" if figures else "false"}

[task]
pattern = "finding"
{extra}
""",
        encoding="utf-8",
    )
    return config


@pytest.fixture
def runner() -> CliRunner:
    return CliRunner()


@pytest.fixture
def fixture_config(tmp_path: Path) -> Path:
    return write_config(tmp_path)


@dataclass
class PipelineRun:
    config: Path
    out: Path
    cache: Path
    stage_seconds: dict[str, float] = field(default_factory=dict)

    @property
    def total_seconds(self) -> float:
        return sum(self.stage_seconds.values())


def run_pipeline(config: Path, stages=("ingest", "label", "score", "report")) -> PipelineRun:
    runner = CliRunner()
    run = PipelineRun(config, config.parent / "out", config.parent / "cache")
    for stage in stages:
        started = time.monotonic()
        result = runner.invoke(cli_main, [stage, "--config", str(config)])
        run.stage_seconds[stage] = time.monotonic() - started
        assert result.exit_code == 0, f"{stage} failed ({result.exit_code}): {result.output}"
    return run


@pytest.fixture(scope="session")
def golden_run(tmp_path_factory) -> PipelineRun:
    """One full ingest->label->score->report over the bundled fixtures,
    with the same settings as the repository's run.toml (figures on)."""
    directory = tmp_path_factory.mktemp("golden_run")
    config = write_config(directory, figures=True)
    return run_pipeline(config)
