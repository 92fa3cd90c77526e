"""Prompt construction, model querying, candidate extraction, and run manifests.

The prompt is a fixed template with a single substitution point
(`__MAPPING_DATA_HERE__`) that receives the first `stage` ground-truth points,
one `<n> -> (<c1>, <c2>[, <c3>])` line each.  Responses are reduced to the
first fenced code block (or the whole text when unfenced) and must define
`map_to_coordinates` taking one parameter, else the run is non-compiling.
"""

from __future__ import annotations

import ast
import hashlib
import json
import logging
import os
import re
from dataclasses import dataclass, field
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path
from typing import Union

import requests

from mapforge.geometry import Domain, DomainError, GroundTruth
from mapforge.validation import AccuracyReport, CandidateVerdict, Status

__all__ = [
    "PLACEHOLDER",
    "STANDARD_STAGES",
    "API_KEY_ENV",
    "EndpointError",
    "EndpointNetworkError",
    "EndpointHTTPError",
    "EndpointTimeout",
    "PromptSpec",
    "ModelEndpoint",
    "RunManifest",
    "prompt_template",
    "format_point_line",
    "build_prompt",
    "run_inference",
    "extract_code",
    "prompt_hash",
    "persist_run",
    "load_run",
]

log = logging.getLogger(__name__)

PLACEHOLDER = "__MAPPING_DATA_HERE__"
STANDARD_STAGES = (20, 50, 100)
API_KEY_ENV = "MAPFORGE_API_KEY"

_FENCE_RE = re.compile(r"```[^\n]*\n(.*?)```", re.DOTALL)


class EndpointError(RuntimeError):
    """Base class for model-endpoint failures."""


class EndpointNetworkError(EndpointError):
    pass


class EndpointHTTPError(EndpointError):
    def __init__(self, status_code: int, message: str):
        super().__init__(message)
        self.status_code = status_code


class EndpointTimeout(EndpointError):
    pass


def prompt_template() -> str:
    return (
        resources.files("mapforge")
        .joinpath("assets/prompt_template.txt")
        .read_text(encoding="utf-8")
    )


@dataclass(frozen=True)
class PromptSpec:
    domain: Domain
    stage: int

    def __post_init__(self) -> None:
        if self.stage < 1:
            raise DomainError(f"stage must be >= 1, got {self.stage}")

    @property
    def standard(self) -> bool:
        return self.stage in STANDARD_STAGES


def format_point_line(n: int, coord: tuple) -> str:
    return f"{n} -> ({', '.join(str(c) for c in coord)})"


def build_prompt(spec: PromptSpec, gt: GroundTruth) -> str:
    """Template with only the placeholder replaced by `stage` data lines."""
    if gt.domain is not spec.domain:
        raise DomainError(
            f"ground truth is for {gt.domain.value}, prompt wants {spec.domain.value}"
        )
    if gt.count < spec.stage:
        raise DomainError(
            f"ground truth holds {gt.count} points but stage needs {spec.stage}"
        )
    if not spec.standard:
        log.warning("non-standard stage %d (standard: %s)", spec.stage, STANDARD_STAGES)
    data = "\n".join(format_point_line(n, gt.coords[n]) for n in range(spec.stage))
    return prompt_template().replace(PLACEHOLDER, data)


@dataclass(frozen=True)
class ModelEndpoint:
    """Chat-completions-style HTTP endpoint; params pass through to the server."""

    base_url: str
    model_name: str
    params: dict = field(default_factory=dict)
    timeout: float = 600.0
    api_key: str | None = None

    def __post_init__(self) -> None:
        if not self.base_url:
            raise DomainError("endpoint base_url must be non-empty")
        if self.timeout <= 0:
            raise DomainError(f"endpoint timeout must be > 0, got {self.timeout}")

    @property
    def url(self) -> str:
        base = self.base_url.rstrip("/")
        return base if base.endswith("/chat/completions") else base + "/chat/completions"


def run_inference(endpoint: ModelEndpoint, prompt: str) -> str:
    """POST the prompt as a single user message; return the completion text."""
    headers = {"Content-Type": "application/json"}
    key = endpoint.api_key or os.environ.get(API_KEY_ENV)
    if key:
        headers["Authorization"] = f"Bearer {key}"
    body = {
        "model": endpoint.model_name,
        "messages": [{"role": "user", "content": prompt}],
        **endpoint.params,
    }
    try:
        response = requests.post(
            endpoint.url, json=body, headers=headers, timeout=endpoint.timeout
        )
    except requests.Timeout as exc:
        raise EndpointTimeout(f"no response within {endpoint.timeout}s: {exc}") from exc
    except requests.RequestException as exc:
        raise EndpointNetworkError(str(exc)) from exc
    if response.status_code != 200:
        raise EndpointHTTPError(
            response.status_code,
            f"HTTP {response.status_code} from {endpoint.url}: {response.text[:200]}",
        )
    try:
        return response.json()["choices"][0]["message"]["content"]
    except (ValueError, KeyError, IndexError, TypeError) as exc:
        raise EndpointNetworkError(f"malformed completion payload: {exc}") from exc


def extract_code(raw: str) -> Union[str, CandidateVerdict]:
    """First fenced block (whole text when unfenced), which must define
    map_to_coordinates taking one parameter; otherwise a NonCompiling verdict."""
    fences = _FENCE_RE.findall(raw)
    if fences:
        if len(fences) > 1:
            log.warning("response holds %d fenced blocks; keeping the first", len(fences))
        source = fences[0]
    else:
        source = raw
    source = source.strip("\n")
    if not source.strip():
        return CandidateVerdict(Status.NON_COMPILING, "empty response")
    try:
        tree = ast.parse(source)
    except SyntaxError as exc:
        return CandidateVerdict(Status.NON_COMPILING, f"syntax error: {exc}")
    for node in ast.walk(tree):
        if isinstance(node, ast.FunctionDef) and node.name == "map_to_coordinates":
            args = node.args
            if len(args.args) == 1 and not args.posonlyargs and not args.kwonlyargs:
                return source
            return CandidateVerdict(
                Status.NON_COMPILING, "map_to_coordinates must take exactly one parameter"
            )
    return CandidateVerdict(Status.NON_COMPILING, "no map_to_coordinates definition found")


# ------------------------------------------------------------- run manifests

def _utcnow() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


@dataclass(frozen=True)
class RunManifest:
    """Everything needed to re-score a run without re-querying the model."""

    run_id: str
    domain: Domain
    stage: int
    model_name: str
    prompt_hash: str
    raw_response: str
    verdict: CandidateVerdict
    extracted_source: str | None = None
    report: AccuracyReport | None = None
    params: dict = field(default_factory=dict)
    started: str = field(default_factory=_utcnow)
    finished: str = field(default_factory=_utcnow)
    joules: float | None = None  # user-supplied measurement, never collected here

    def __post_init__(self) -> None:
        if self.extracted_source is None and self.verdict.status is Status.OK:
            raise DomainError("a run without extracted source cannot be Ok")

    def to_json_dict(self) -> dict:
        d = {
            "run_id": self.run_id,
            "domain": self.domain.value,
            "stage": self.stage,
            "model_name": self.model_name,
            "prompt_hash": self.prompt_hash,
            "raw_response": self.raw_response,
            "extracted_source": self.extracted_source,
            "verdict": {"status": self.verdict.status.value, "detail": self.verdict.detail},
            "report": None,
            "params": self.params,
            "started": self.started,
            "finished": self.finished,
            "joules": self.joules,
        }
        if self.report is not None:
            d["report"] = {
                "ordered": self.report.ordered,
                "anyorder": self.report.anyorder,
                "n_evaluated": self.report.n_evaluated,
            }
        return d

    @classmethod
    def from_json_dict(cls, d: dict) -> "RunManifest":
        verdict = CandidateVerdict(Status(d["verdict"]["status"]), d["verdict"]["detail"])
        report = None
        if d.get("report") is not None:
            report = AccuracyReport(
                ordered=d["report"]["ordered"],
                anyorder=d["report"]["anyorder"],
                n_evaluated=d["report"]["n_evaluated"],
                verdict=verdict,
            )
        return cls(
            run_id=d["run_id"],
            domain=Domain(d["domain"]),
            stage=d["stage"],
            model_name=d["model_name"],
            prompt_hash=d["prompt_hash"],
            raw_response=d["raw_response"],
            extracted_source=d.get("extracted_source"),
            verdict=verdict,
            report=report,
            params=d.get("params", {}),
            started=d["started"],
            finished=d["finished"],
            joules=d.get("joules"),
        )


def prompt_hash(prompt: str) -> str:
    return hashlib.sha256(prompt.encode("utf-8")).hexdigest()


def persist_run(manifest: RunManifest, runs_dir: str | Path) -> Path:
    runs_dir = Path(runs_dir)
    runs_dir.mkdir(parents=True, exist_ok=True)
    path = runs_dir / f"{manifest.run_id}.json"
    if path.exists():
        raise FileExistsError(f"run {manifest.run_id} already persisted at {path}")
    path.write_text(json.dumps(manifest.to_json_dict(), indent=2), encoding="utf-8")
    return path


def load_run(run_id: str, runs_dir: str | Path) -> RunManifest:
    path = Path(runs_dir) / f"{run_id}.json"
    if not path.exists():
        raise FileNotFoundError(f"no run {run_id} under {runs_dir}")
    return RunManifest.from_json_dict(json.loads(path.read_text(encoding="utf-8")))
