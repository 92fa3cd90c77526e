"""Command-line front end.

Subcommands: gen, prompt, infer, validate, blocksim, report.  Exit code 0 on
success (including runs whose candidate failed: failures are data), 2 on
configuration errors.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from mapforge.blocksim import (
    BlockShape,
    block_stats_csv,
    simulate_analytical,
    simulate_bb,
)
from mapforge.geometry import (
    CapacityError,
    Domain,
    DomainError,
    generate_ground_truth,
    write_ground_truth,
)
from mapforge.inference import PromptSpec, build_prompt
from mapforge.validation import score_candidate
from mapforge.experiment import (
    ConfigError,
    cached_ground_truth,
    evaluate_candidate,
    load_config,
    render_report,
    run_cell,
    table_from_runs,
)


def _cmd_gen(args) -> int:
    domain = Domain.parse(args.domain)
    gt = generate_ground_truth(domain, args.count)
    write_ground_truth(gt, args.out)
    print(f"wrote {gt.count} {domain.value} points to {args.out}")
    return 0


def _cmd_prompt(args) -> int:
    domain = Domain.parse(args.domain)
    gt = generate_ground_truth(domain, args.stage)
    text = build_prompt(PromptSpec(domain, args.stage), gt)
    Path(args.out).write_text(text, encoding="utf-8")
    print(f"wrote stage-{args.stage} {domain.value} prompt to {args.out}")
    return 0


def _cmd_infer(args) -> int:
    config = load_config(args.config)
    domain = Domain.parse(args.domain)
    matches = [e for e in config.endpoints if e.model_name == args.model]
    if not matches:
        raise ConfigError(f"no endpoint for model {args.model!r} in {args.config}")
    gt = cached_ground_truth(domain, config.validate_n, config.paths.datasets)
    manifest, result = run_cell(matches[0], domain, args.stage, gt, config)
    print(
        f"run {manifest.run_id}: ordered={result.ordered * 100:.2f}% "
        f"anyorder={result.anyorder * 100:.2f}% verdict={result.verdict.status.value}"
    )
    return 0


def _cmd_validate(args) -> int:
    domain = Domain.parse(args.domain)
    source = Path(args.candidate).read_text(encoding="utf-8")
    gt = generate_ground_truth(domain, args.n)
    outcome = evaluate_candidate(source, args.n, args.timeout, args.batch)
    report = score_candidate(outcome, gt)
    print(
        f"ordered={report.ordered * 100:.2f}% anyorder={report.anyorder * 100:.2f}% "
        f"verdict={report.verdict.status.value}"
        + (f" ({report.verdict.detail})" if report.verdict.detail else "")
    )
    return 0


def _cmd_blocksim(args) -> int:
    domain = Domain.parse(args.domain)
    shape = BlockShape.parse(args.block)
    rows = [
        (domain.value, "bounding_box", simulate_bb(domain, args.elements, shape)),
        (domain.value, "analytical", simulate_analytical(args.elements, shape.threads)),
    ]
    sys.stdout.write(block_stats_csv(rows))
    return 0


def _cmd_report(args) -> int:
    table = table_from_runs(args.runs)
    sys.stdout.write(render_report(table, args.format))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mapforge",
        description="thread-mapping workbench: datasets, prompts, inference, "
        "validation, block accounting, reports",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="write a ground-truth JSONL dataset")
    p.add_argument("--domain", required=True)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_gen)

    p = sub.add_parser("prompt", help="build the inference prompt for a stage")
    p.add_argument("--domain", required=True)
    p.add_argument("--stage", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_prompt)

    p = sub.add_parser("infer", help="run one (domain, stage, model) cell")
    p.add_argument("--config", required=True)
    p.add_argument("--domain", required=True)
    p.add_argument("--stage", type=int, required=True)
    p.add_argument("--model", required=True)
    p.set_defaults(fn=_cmd_infer)

    p = sub.add_parser("validate", help="score a candidate source file")
    p.add_argument("--candidate", required=True)
    p.add_argument("--domain", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--timeout", type=float, default=300.0)
    p.add_argument("--batch", type=int, default=100_000)
    p.set_defaults(fn=_cmd_validate)

    p = sub.add_parser("blocksim", help="emit block-accounting CSV for a launch")
    p.add_argument("--domain", required=True)
    p.add_argument("--elements", type=int, required=True)
    p.add_argument("--block", required=True, help="per-axis dims, e.g. 16x16 or 8x8x4")
    p.set_defaults(fn=_cmd_blocksim)

    p = sub.add_parser("report", help="render persisted runs as accuracy tables")
    p.add_argument("--runs", required=True)
    p.add_argument("--format", choices=("csv", "markdown"), default="markdown")
    p.set_defaults(fn=_cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ConfigError, DomainError, CapacityError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
