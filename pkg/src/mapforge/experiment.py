"""Experiment orchestration: sweep (domain, stage, endpoint) cells through the
prompt -> inference -> extraction -> runner-validation pipeline, persist one
manifest per run, and render the results as per-domain accuracy tables."""

from __future__ import annotations

import logging
import uuid
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from threading import Lock

import yaml

from mapforge.geometry import (
    Domain,
    GroundTruth,
    generate_ground_truth,
    read_ground_truth,
    write_ground_truth,
)
from mapforge.inference import (
    EndpointError,
    EndpointTimeout,
    ModelEndpoint,
    PromptSpec,
    RunManifest,
    build_prompt,
    extract_code,
    load_run,
    persist_run,
    prompt_hash,
    run_inference,
)
from mapforge.validation import (
    AccuracyReport,
    CandidateVerdict,
    Status,
    score_candidate,
)

__all__ = [
    "ConfigError",
    "ExperimentPaths",
    "ExperimentConfig",
    "CellResult",
    "ResultsTable",
    "load_config",
    "cached_ground_truth",
    "evaluate_candidate",
    "run_cell",
    "run_experiment",
    "table_from_runs",
    "render_report",
    "DOMAIN_LABELS",
]

log = logging.getLogger(__name__)

DOMAIN_LABELS = {
    Domain.TRIANGULAR_2D: "2D Triangular",
    Domain.PYRAMID_3D: "3D Pyramid",
    Domain.GASKET_2D: "2D Sierpinski Gasket",
    Domain.CARPET_2D: "2D Sierpinski Carpet",
    Domain.SIERPINSKI_3D: "3D Sierpinski Pyramid",
    Domain.MENGER_3D: "3D Menger Sponge",
}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentPaths:
    datasets: Path
    runs: Path
    reports: Path


@dataclass(frozen=True)
class ExperimentConfig:
    domains: tuple[Domain, ...]
    stages: tuple[int, ...]
    endpoints: tuple[ModelEndpoint, ...]
    paths: ExperimentPaths
    validate_n: int = 1_000_000
    attempts: int = 1
    runner_timeout: float = 300.0
    runner_batch: int = 100_000
    parallel_endpoints: bool = False

    def __post_init__(self) -> None:
        if not self.domains:
            raise ConfigError("config needs at least one domain")
        if not self.stages or any(s < 1 for s in self.stages):
            raise ConfigError("config needs stages >= 1")
        if not self.endpoints:
            raise ConfigError("config needs at least one endpoint")
        if self.validate_n < max(self.stages):
            raise ConfigError(
                f"validate_n ({self.validate_n}) must cover the largest stage "
                f"({max(self.stages)})"
            )
        if self.attempts < 1:
            raise ConfigError("attempts must be >= 1")


def load_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    try:
        raw = yaml.safe_load(path.read_text(encoding="utf-8"))
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: config must be a mapping")
    base = path.parent

    def _path(key: str, default: str) -> Path:
        value = raw.get("paths", {}).get(key, default)
        p = Path(value)
        return p if p.is_absolute() else base / p

    try:
        domains = tuple(Domain.parse(d) for d in raw.get("domains", []))
        endpoints = tuple(
            ModelEndpoint(
                base_url=e["base_url"],
                model_name=e.get("model") or e["model_name"],
                params=e.get("params") or {},
                timeout=float(e.get("timeout", 600.0)),
                api_key=e.get("api_key"),
            )
            for e in raw.get("endpoints", [])
        )
        runner = raw.get("runner", {})
        return ExperimentConfig(
            domains=domains,
            stages=tuple(int(s) for s in raw.get("stages", [])),
            endpoints=endpoints,
            paths=ExperimentPaths(
                datasets=_path("datasets", "datasets"),
                runs=_path("runs", "runs"),
                reports=_path("reports", "reports"),
            ),
            validate_n=int(raw.get("validate_n", 1_000_000)),
            attempts=int(raw.get("attempts", 1)),
            runner_timeout=float(runner.get("timeout", 300.0)),
            runner_batch=int(runner.get("batch_size", 100_000)),
            parallel_endpoints=bool(raw.get("parallel_endpoints", False)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"{path}: {exc}") from exc


def cached_ground_truth(domain: Domain, count: int, datasets_dir: Path) -> GroundTruth:
    """Dataset files are keyed by (domain, count); regenerating 10^6 points per
    sweep would dominate runtime."""
    datasets_dir.mkdir(parents=True, exist_ok=True)
    path = datasets_dir / f"{domain.value}_{count}.jsonl"
    if path.exists():
        gt = read_ground_truth(path, domain)
        if gt.count == count:
            return gt
        log.warning("cached dataset %s has wrong count; regenerating", path)
    gt = generate_ground_truth(domain, count)
    write_ground_truth(gt, path)
    return gt


# ------------------------------------------------------------- sweep cells

@dataclass(frozen=True)
class CellResult:
    ordered: float
    anyorder: float
    verdict: CandidateVerdict

    def __post_init__(self) -> None:
        if not (0.0 <= self.ordered <= 1.0 and 0.0 <= self.anyorder <= 1.0):
            raise ValueError("cell fractions must lie in [0, 1]")

    @property
    def sort_key(self) -> tuple[float, float]:
        return (self.ordered, self.anyorder)


class ResultsTable:
    """At most one row per (model, domain, stage); repeats keep the best attempt."""

    def __init__(self) -> None:
        self.rows: dict[tuple[str, Domain, int], CellResult] = {}

    def record(self, model: str, domain: Domain, stage: int, result: CellResult) -> None:
        key = (model, domain, stage)
        current = self.rows.get(key)
        if current is None or result.sort_key > current.sort_key:
            self.rows[key] = result

    def models(self) -> list[str]:
        return sorted({m for m, _, _ in self.rows})

    def domains(self) -> list[Domain]:
        present = {d for _, d, _ in self.rows}
        return [d for d in Domain if d in present]

    def stages(self) -> list[int]:
        return sorted({s for _, _, s in self.rows})


def evaluate_candidate(
    source: str, count: int, timeout: float, batch_size: int
):
    """Run a candidate through the isolated worker (never in-process).

    Returns a record list or a CandidateVerdict.  The mapforge-runner package
    provides the worker; it is imported lazily so everything else works
    without it.
    """
    try:
        from mapforge_runner import RunnerLimits, RunnerVerdict, evaluate_source
    except ImportError as exc:
        raise RuntimeError(
            "candidate validation needs the mapforge-runner package "
            "(pip install ./runner)"
        ) from exc
    outcome = evaluate_source(
        source, count, RunnerLimits(timeout=timeout, batch_size=batch_size)
    )
    if isinstance(outcome, RunnerVerdict):
        return CandidateVerdict(Status(outcome.status), outcome.detail)
    return outcome


def _utcnow() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _slug(text: str) -> str:
    return "".join(ch if ch.isalnum() else "-" for ch in text).strip("-").lower()


def run_cell(
    endpoint: ModelEndpoint,
    domain: Domain,
    stage: int,
    gt: GroundTruth,
    config: ExperimentConfig,
    persist_lock: Lock | None = None,
) -> tuple[RunManifest, CellResult]:
    """One prompt -> inference -> extraction -> validation pass, persisted."""
    prompt = build_prompt(PromptSpec(domain, stage), gt)
    started = _utcnow()
    raw_response = ""
    extracted: str | None = None
    report: AccuracyReport | None = None

    try:
        raw_response = run_inference(endpoint, prompt)
    except EndpointTimeout as exc:
        verdict = CandidateVerdict(Status.TIMEOUT, str(exc))
    except EndpointError as exc:
        verdict = CandidateVerdict(Status.RUNTIME_FAILURE, str(exc))
    else:
        result = extract_code(raw_response)
        if isinstance(result, CandidateVerdict):
            verdict = result
        else:
            extracted = result
            outcome = evaluate_candidate(
                extracted, gt.count, config.runner_timeout, config.runner_batch
            )
            if isinstance(outcome, CandidateVerdict):
                verdict = outcome
            else:
                report = score_candidate(outcome, gt)
                verdict = report.verdict

    if report is None:
        report = AccuracyReport(0.0, 0.0, n_evaluated=0, verdict=verdict)

    manifest = RunManifest(
        run_id=f"{_slug(endpoint.model_name)}_{domain.value}_{stage}_{uuid.uuid4().hex[:8]}",
        domain=domain,
        stage=stage,
        model_name=endpoint.model_name,
        prompt_hash=prompt_hash(prompt),
        raw_response=raw_response,
        extracted_source=extracted,
        verdict=verdict,
        report=report,
        params=dict(endpoint.params),
        started=started,
        finished=_utcnow(),
    )
    if persist_lock:
        with persist_lock:
            persist_run(manifest, config.paths.runs)
    else:
        persist_run(manifest, config.paths.runs)
    return manifest, CellResult(report.ordered, report.anyorder, verdict)


def run_experiment(config: ExperimentConfig) -> ResultsTable:
    """Full sweep; per-run failures become table rows, never abort the sweep."""
    table = ResultsTable()
    ground_truths = {
        domain: cached_ground_truth(domain, config.validate_n, config.paths.datasets)
        for domain in config.domains
    }
    lock = Lock()

    def sweep_endpoint(endpoint: ModelEndpoint) -> None:
        for domain in config.domains:
            for stage in config.stages:
                for attempt in range(config.attempts):
                    try:
                        _, result = run_cell(
                            endpoint, domain, stage, ground_truths[domain], config, lock
                        )
                    except Exception as exc:  # noqa: BLE001 - sweep must survive
                        log.error(
                            "run failed (%s, %s, stage %d, attempt %d): %s",
                            endpoint.model_name, domain.value, stage, attempt, exc,
                        )
                        result = CellResult(
                            0.0, 0.0, CandidateVerdict(Status.RUNTIME_FAILURE, str(exc))
                        )
                    with lock:
                        table.record(endpoint.model_name, domain, stage, result)

    if config.parallel_endpoints and len(config.endpoints) > 1:
        with ThreadPoolExecutor(max_workers=len(config.endpoints)) as pool:
            list(pool.map(sweep_endpoint, config.endpoints))
    else:
        for endpoint in config.endpoints:
            sweep_endpoint(endpoint)
    return table


def table_from_runs(runs_dir: str | Path) -> ResultsTable:
    """Rebuild the results table from persisted manifests (deterministic order)."""
    runs_dir = Path(runs_dir)
    table = ResultsTable()
    for path in sorted(runs_dir.glob("*.json")):
        manifest = load_run(path.stem, runs_dir)
        if manifest.report is not None:
            result = CellResult(
                manifest.report.ordered, manifest.report.anyorder, manifest.verdict
            )
        else:
            result = CellResult(0.0, 0.0, manifest.verdict)
        table.record(manifest.model_name, manifest.domain, manifest.stage, result)
    return table


# ------------------------------------------------------------- rendering

_ANNOTATIONS = {
    Status.NON_COMPILING: " (NC)",
    Status.TIMEOUT: " (Timeout)",
    Status.RUNTIME_FAILURE: " (Fail)",
}


def _pct(value: float) -> str:
    return f"{value * 100:.2f}%"


def _cells(result: CellResult) -> tuple[str, str]:
    note = _ANNOTATIONS.get(result.verdict.status, "")
    return _pct(result.ordered) + note, _pct(result.anyorder)


def render_report(table: ResultsTable, fmt: str = "markdown") -> str:
    """One section per domain, one row per model, (Ord., Any) column pair per stage."""
    if not table.rows:
        raise ValueError("cannot render an empty results table")
    if fmt not in ("markdown", "csv"):
        raise ValueError(f"unknown report format {fmt!r}")
    stages = table.stages()
    models = table.models()

    if fmt == "csv":
        header = ["domain", "model"]
        for s in stages:
            header += [f"ord_{s}", f"any_{s}"]
        lines = [",".join(header)]
        for domain in table.domains():
            for model in models:
                row = [domain.value, model]
                for s in stages:
                    result = table.rows.get((model, domain, s))
                    row += list(_cells(result)) if result else ["", ""]
                lines.append(",".join(row))
        return "\n".join(lines) + "\n"

    lines = []
    for domain in table.domains():
        lines.append(f"## {DOMAIN_LABELS[domain]}")
        lines.append("")
        header = "| Model | " + " | ".join(f"{s} pts Ord. | {s} pts Any" for s in stages) + " |"
        lines.append(header)
        lines.append("|" + " --- |" * (1 + 2 * len(stages)))
        for model in models:
            cells = [model]
            for s in stages:
                result = table.rows.get((model, domain, s))
                cells += list(_cells(result)) if result else ["", ""]
            lines.append("| " + " | ".join(cells) + " |")
        lines.append("")
    return "\n".join(lines)
