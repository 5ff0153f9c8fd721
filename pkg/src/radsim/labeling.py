"""Four-stage chat pipeline: identify the text, generate labeling tasks,
select one, and label every report under it.

Providers are pluggable behind a one-method protocol. The mock provider
answers from a keyword lexicon so the whole pipeline runs offline and
deterministically; the HTTP provider speaks the common chat-completion
JSON shape. Every provider response is cached in a JSON-lines file keyed
by prompt hash and provider fingerprint, so reruns make zero calls.
"""

from __future__ import annotations

import concurrent.futures
import hashlib
import json
import logging
import re
import threading
import time
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Protocol, Sequence

import requests

from .corpus import Report
from .errors import (
    AmbiguousMatch,
    EmptyLabelList,
    EmptyText,
    NoMatch,
    ProviderError,
    RateLimited,
    UnparseableResponse,
)

log = logging.getLogger(__name__)

# patched in tests to avoid real backoff waits
_sleep = time.sleep

_LIST_ITEM_RE = re.compile(r"^\s*(?:\d+[.)]|[-*])\s+(.*)$")
MAX_LABEL_LENGTH = 120

# stage markers the mock provider keys on; each appears in exactly one template
_IDENTIFY_MARKER = "Identify the type of document"
_TASKS_MARKER = "propose labeling tasks"
_LABELS_MARKER = "Generate a numbered list of short labels"

_MOCK_IDENTIFICATION = "chest radiology report"
_MOCK_TASKS_RESPONSE = "\n".join(
    [
        "1. findings-based labeling :: Label each clinical finding described in the document with a short phrase. :: radiologists",
        "2. anatomy region tagging :: Tag each anatomical region mentioned in the document. :: technologists",
        "3. urgency triage :: Assign an urgency tier for follow-up of the document. :: referring physicians",
    ]
)


@dataclass(frozen=True)
class ChatProviderConfig:
    endpoint: str = ""
    model: str = "gpt-4"
    temperature: float = 0.0
    max_retries: int = 3
    timeout_s: float = 30.0
    api_key_env: str = ""

    def __post_init__(self) -> None:
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")


@dataclass(frozen=True)
class TaskDefinition:
    task_id: str
    name: str
    instruction: str
    audience: str = ""


@dataclass(frozen=True)
class GeneratedLabelSet:
    report_id: str
    task_id: str
    labels: tuple[str, ...]
    raw_response: str
    model: str
    temperature: float


class ChatProvider(Protocol):
    model: str
    temperature: float

    def complete(self, prompt: str) -> str: ...


class MockChatProvider:
    """Deterministic offline provider.

    Detects the pipeline stage from the template's marker phrase. Label
    requests are answered by scanning the prompt for lexicon patterns
    (ordered substring match against the lowercased prompt); since the
    templates avoid clinical vocabulary, only the embedded report text
    can trigger a pattern.
    """

    def __init__(
        self,
        lexicon: Sequence[tuple[str, str]],
        fingerprint: str,
        temperature: float = 0.0,
        fail_if_contains: str | None = None,
    ) -> None:
        self.lexicon = list(lexicon)
        self.model = fingerprint
        self.temperature = temperature
        self.fail_if_contains = fail_if_contains
        self.calls = 0
        self._lock = threading.Lock()

    @classmethod
    def from_file(cls, path: str | Path, temperature: float = 0.0) -> "MockChatProvider":
        raw = Path(path).read_bytes()
        entries = json.loads(raw.decode("utf-8"))["lexicon"]
        lexicon = [(item["pattern"], item["label"]) for item in entries]
        fingerprint = "mock-" + hashlib.sha256(raw).hexdigest()[:12]
        return cls(lexicon, fingerprint, temperature)

    def complete(self, prompt: str) -> str:
        with self._lock:
            self.calls += 1
        if self.fail_if_contains is not None and self.fail_if_contains in prompt:
            raise ProviderError(f"injected failure: prompt contains {self.fail_if_contains!r}")
        if _IDENTIFY_MARKER in prompt:
            return _MOCK_IDENTIFICATION
        if _TASKS_MARKER in prompt:
            return _MOCK_TASKS_RESPONSE
        if _LABELS_MARKER in prompt:
            lower = prompt.lower()
            labels: list[str] = []
            for pattern, label in self.lexicon:
                if pattern in lower and label not in labels:
                    labels.append(label)
            return "\n".join(f"{i}. {label}" for i, label in enumerate(labels, start=1))
        raise ProviderError("mock provider got a prompt from no known template")


class HttpChatProvider:
    """Chat-completion client for the common messages/choices JSON shape."""

    def __init__(self, config: ChatProviderConfig, api_key: str | None = None) -> None:
        if not config.endpoint:
            raise ProviderError("http chat provider requires an endpoint")
        self.config = config
        self.model = config.model
        self.temperature = config.temperature
        self.calls = 0
        self._api_key = api_key
        self._lock = threading.Lock()
        self._session = requests.Session()

    def complete(self, prompt: str) -> str:
        with self._lock:
            self.calls += 1
        headers = {"Content-Type": "application/json"}
        if self._api_key:
            headers["Authorization"] = f"Bearer {self._api_key}"
        payload = {
            "model": self.config.model,
            "temperature": self.config.temperature,
            "messages": [{"role": "user", "content": prompt}],
        }
        try:
            response = self._session.post(
                self.config.endpoint, json=payload, headers=headers, timeout=self.config.timeout_s
            )
        except requests.RequestException as exc:
            raise ProviderError(f"request to {self.config.endpoint} failed: {exc}") from exc
        if response.status_code == 429:
            raise RateLimited(f"{self.config.endpoint} returned 429")
        if response.status_code >= 400:
            raise ProviderError(f"{self.config.endpoint} returned HTTP {response.status_code}")
        try:
            return response.json()["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise ProviderError(f"malformed chat response: {exc}") from exc


def load_template(name: str) -> str:
    return resources.files("radsim").joinpath(f"prompts/{name}.txt").read_text(encoding="utf-8")


def render_template(template: str, **values: str) -> str:
    rendered = template
    for key, value in values.items():
        rendered = rendered.replace("{{" + key + "}}", value)
    return rendered


def _prompt_sha(prompt: str) -> str:
    return hashlib.sha256(prompt.encode("utf-8")).hexdigest()


class LabelCache:
    """Append-only JSON-lines cache of provider responses.

    One record per (kind, subject, model, temperature, prompt hash) key;
    appends are serialized through a lock so concurrent batch workers can
    share one cache instance.
    """

    def __init__(self, path: str | Path) -> None:
        self.path = Path(path)
        self._records: dict[tuple, dict] = {}
        self._lock = threading.Lock()
        if self.path.exists():
            with self.path.open(encoding="utf-8") as fh:
                for line in fh:
                    if line.strip():
                        record = json.loads(line)
                        self._records[self._key(record)] = record

    @staticmethod
    def _key(record: dict) -> tuple:
        return (
            record["kind"],
            record["subject"],
            record.get("task_id", ""),
            record["model"],
            repr(record["temperature"]),
            record["prompt_sha256"],
        )

    def get(self, record_key: dict) -> dict | None:
        return self._records.get(self._key(record_key))

    def put(self, record: dict) -> None:
        with self._lock:
            key = self._key(record)
            if key in self._records:
                return
            self._records[key] = record
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with self.path.open("a", encoding="utf-8") as fh:
                fh.write(json.dumps(record, ensure_ascii=False) + "\n")

    def __len__(self) -> int:
        return len(self._records)


def call_with_retries(provider: ChatProvider, prompt: str, max_retries: int, backoff_s: float = 0.5) -> str:
    attempt = 0
    while True:
        try:
            return provider.complete(prompt)
        except RateLimited:
            if attempt >= max_retries:
                raise
            delay = backoff_s * (2**attempt)
            log.warning("rate limited; retrying in %.1fs", delay)
            _sleep(delay)
            attempt += 1


def parse_label_list(text: str) -> list[str]:
    """Extract items from a numbered or bulleted list.

    Total over arbitrary input: returns the non-blank items (possibly
    none) or raises UnparseableResponse when no line carries a list
    marker at all.
    """
    items: list[str] = []
    saw_marker = False
    for line in text.splitlines():
        match = _LIST_ITEM_RE.match(line)
        if match:
            saw_marker = True
            item = match.group(1).strip()
            if item:
                items.append(item)
    if not saw_marker:
        raise UnparseableResponse(f"no list markers in response: {text[:80]!r}")
    return items


def _normalize_labels(items: Sequence[str]) -> tuple[str, ...]:
    labels: list[str] = []
    seen: set[str] = set()
    for item in items:
        label = item.strip()[:MAX_LABEL_LENGTH]
        if label and label.lower() not in seen:
            seen.add(label.lower())
            labels.append(label)
    return tuple(labels)


def parse_task_list(text: str) -> list[TaskDefinition]:
    """Each item: ``<name> :: <instruction> :: <audience>``, audience optional."""
    tasks: list[TaskDefinition] = []
    for index, item in enumerate(parse_label_list(text), start=1):
        parts = [part.strip() for part in item.split("::")]
        if len(parts) < 2 or not parts[0] or not parts[1]:
            raise UnparseableResponse(f"task item lacks 'name :: instruction': {item!r}")
        audience = parts[2] if len(parts) > 2 else ""
        tasks.append(TaskDefinition(f"task-{index}", parts[0], parts[1], audience))
    return tasks


def identify_text(provider: ChatProvider, report: Report, cache: LabelCache, max_retries: int = 3) -> str:
    if not report.text.strip():
        raise EmptyText(f"report {report.report_id!r} has no text to identify")
    prompt = render_template(load_template("identify"), report_text=report.text)
    record = {
        "kind": "identify",
        "subject": report.report_id,
        "model": provider.model,
        "temperature": provider.temperature,
        "prompt_sha256": _prompt_sha(prompt),
    }
    cached = cache.get(record)
    if cached is not None:
        return cached["raw_response"]
    response = call_with_retries(provider, prompt, max_retries)
    cache.put({**record, "raw_response": response})
    return response


def generate_tasks(
    provider: ChatProvider, samples: Sequence[Report], cache: LabelCache, max_retries: int = 3
) -> list[TaskDefinition]:
    if not samples:
        raise EmptyText("at least one sample report is required")
    joined = "\n---\n".join(report.text for report in samples)
    prompt = render_template(load_template("tasks"), report_text=joined)
    record = {
        "kind": "tasks",
        "subject": ",".join(report.report_id for report in samples),
        "model": provider.model,
        "temperature": provider.temperature,
        "prompt_sha256": _prompt_sha(prompt),
    }
    cached = cache.get(record)
    if cached is not None:
        response = cached["raw_response"]
    else:
        response = call_with_retries(provider, prompt, max_retries)
        cache.put({**record, "raw_response": response})
    tasks = parse_task_list(response)
    if not any("finding" in task.name.lower() for task in tasks):
        raise UnparseableResponse("task list has no findings-oriented task")
    return tasks


def select_task(tasks: Sequence[TaskDefinition], pattern: str) -> TaskDefinition:
    """Pick the unique task whose name contains the pattern; this is the
    stand-in for a human review choosing among generated tasks."""
    matches = [task for task in tasks if pattern.lower() in task.name.lower()]
    if not matches:
        raise NoMatch(f"no task name contains {pattern!r}")
    if len(matches) > 1:
        raise AmbiguousMatch(f"{len(matches)} task names contain {pattern!r}")
    return matches[0]


def _labels_record(provider: ChatProvider, report: Report, task: TaskDefinition) -> tuple[str, dict]:
    prompt = render_template(
        load_template("labels"), task_instruction=task.instruction, report_text=report.text
    )
    record = {
        "kind": "labels",
        "subject": report.report_id,
        "task_id": task.task_id,
        "model": provider.model,
        "temperature": provider.temperature,
        "prompt_sha256": _prompt_sha(prompt),
    }
    return prompt, record


def _labelset_from_record(report: Report, task: TaskDefinition, provider: ChatProvider, record: dict) -> GeneratedLabelSet:
    return GeneratedLabelSet(
        report.report_id,
        task.task_id,
        tuple(record["labels"]),
        record["raw_response"],
        provider.model,
        provider.temperature,
    )


def _parse_labels_response(report: Report, response: str) -> tuple[str, ...]:
    labels = _normalize_labels(parse_label_list(response))
    if not labels:
        raise EmptyLabelList(f"no usable labels for {report.report_id!r}: {response[:80]!r}")
    return labels


def generate_labels(
    provider: ChatProvider,
    report: Report,
    task: TaskDefinition,
    cache: LabelCache,
    max_retries: int = 3,
) -> GeneratedLabelSet:
    prompt, record = _labels_record(provider, report, task)
    cached = cache.get(record)
    if cached is not None:
        return _labelset_from_record(report, task, provider, cached)
    response = call_with_retries(provider, prompt, max_retries)
    labels = _parse_labels_response(report, response)
    cache.put({**record, "labels": list(labels), "raw_response": response})
    return GeneratedLabelSet(
        report.report_id, task.task_id, labels, response, provider.model, provider.temperature
    )


@dataclass
class BatchResult:
    label_sets: dict[str, GeneratedLabelSet] = field(default_factory=dict)
    failures: list[tuple[str, str]] = field(default_factory=list)


def label_corpus(
    provider: ChatProvider,
    reports: Sequence[Report],
    task: TaskDefinition,
    cache: LabelCache,
    concurrency: int = 4,
    max_retries: int = 3,
) -> BatchResult:
    """Label every report; a failing report is recorded and never aborts
    the batch.

    Provider calls for cache misses run bounded-concurrently, but cache
    writes happen on this thread in submission order, so the cache file
    comes out byte-identical for identical inputs.
    """
    result = BatchResult()
    prepared: list[tuple[Report, str, dict]] = []
    for report in reports:
        prompt, record = _labels_record(provider, report, task)
        cached = cache.get(record)
        if cached is not None:
            result.label_sets[report.report_id] = _labelset_from_record(report, task, provider, cached)
        else:
            prepared.append((report, prompt, record))

    def worker(item: tuple[Report, str, dict]) -> str | Exception:
        try:
            return call_with_retries(provider, item[1], max_retries)
        except Exception as exc:  # noqa: BLE001 - aggregated per-report
            return exc

    with concurrent.futures.ThreadPoolExecutor(max_workers=max(1, concurrency)) as pool:
        for (report, _, record), outcome in zip(prepared, pool.map(worker, prepared)):
            if isinstance(outcome, Exception):
                log.warning("labeling %s failed: %s", report.report_id, outcome)
                result.failures.append((report.report_id, str(outcome)))
                continue
            try:
                labels = _parse_labels_response(report, outcome)
            except (UnparseableResponse, EmptyLabelList) as exc:
                log.warning("labeling %s failed: %s", report.report_id, exc)
                result.failures.append((report.report_id, str(exc)))
                continue
            cache.put({**record, "labels": list(labels), "raw_response": outcome})
            result.label_sets[report.report_id] = GeneratedLabelSet(
                report.report_id, task.task_id, labels, outcome, provider.model, provider.temperature
            )
    return result
