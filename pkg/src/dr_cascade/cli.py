"""Command-line entry point: ``dr-cascade <command>``.

Exit codes: 0 success, 1 internal error, 2 invalid input.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .cascade import CLOUD_ONLY, outcomes_from_jsonl, outcomes_to_jsonl, run_cascade
from .errors import CascadeError, InputError
from .evaluation import evaluate
from .grading import GRADES, ReferableLabel, dump_manifest, load_manifest, manifest_from_counts, to_referable
from .scores import load_score_file, synthetic_provider, triage_score
from .split import SplitAssignment, SplitSpec, referable_counts, stratified_split
from .tuning import (
    DEFAULT_SWEEP_STEPS,
    DEFAULT_TARGET_SENSITIVITY,
    REFERENCE_THRESHOLD,
    OperatingPoint,
    curve_to_csv,
    default_thresholds,
    select_operating_point,
    sweep_curve,
)

log = logging.getLogger("dr_cascade")


class UsageError(InputError):
    pass


def _read(path: str | os.PathLike) -> str:
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"no such file: {p}")
    return p.read_text(encoding="utf-8")


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _ids_for(args, manifest) -> list[str]:
    if getattr(args, "split", None):
        split = SplitAssignment.from_json(_read(args.split))
        return list(split.subset(args.subset))
    return manifest.ids


def _threshold_source(args) -> OperatingPoint:
    sources = [s for s in (args.threshold is not None, args.operating_point is not None, args.cloud_only) if s]
    if len(sources) != 1:
        raise UsageError("give exactly one of --threshold, --operating-point, --cloud-only (or set CASCADE_THRESHOLD)")
    if args.cloud_only:
        return CLOUD_ONLY
    if args.operating_point is not None:
        return OperatingPoint.from_json(_read(args.operating_point))
    return OperatingPoint.fixed(args.threshold)


def _env_float(name: str) -> float | None:
    value = os.environ.get(name)
    if value in (None, ""):
        return None
    try:
        return float(value)
    except ValueError:
        raise UsageError(f"{name}={value!r} is not a number") from None


def cmd_make_manifest(args) -> int:
    counts = [int(c) for c in args.counts.split(",")]
    if len(counts) != len(GRADES) or any(c < 0 for c in counts):
        raise UsageError("--counts needs five non-negative integers")
    _write(args.out, dump_manifest(manifest_from_counts(counts, args.prefix)))
    return 0


def cmd_split(args) -> int:
    manifest = load_manifest(_read(args.manifest))
    spec = SplitSpec(args.test_fraction, args.val_fraction, args.seed)
    assignment = stratified_split(manifest, spec)
    _write(args.out, assignment.to_json() + "\n")
    for name, (ref, nonref) in referable_counts(assignment, manifest).items():
        log.info("%-5s %5d images (%d referable, %d non-referable)", name, ref + nonref, ref, nonref)
    return 0


def cmd_gen_synthetic(args) -> int:
    manifest = load_manifest(_read(args.manifest))
    provider = synthetic_provider(manifest, args.noise, args.seed)
    _write(args.out, provider.dump_jsonl())
    return 0


def cmd_tune(args) -> int:
    manifest = load_manifest(_read(args.manifest))
    provider = load_score_file(_read(args.scores))
    ids = _ids_for(args, manifest)
    labelled = []
    for image_id in ids:
        if image_id not in manifest:
            raise UsageError(f"id {image_id!r} is not in the manifest")
        labelled.append((triage_score(provider, image_id), to_referable(manifest.grade_of(image_id))))
    curve = sweep_curve(labelled, default_thresholds(args.steps))
    op = select_operating_point(curve, args.target)
    if op.best_effort:
        log.warning("target sensitivity %.4f not reachable; best-effort threshold %.4f", args.target, op.threshold)
    if args.curve:
        _write(args.curve, curve_to_csv(curve))
    _write(args.out, op.to_json() + "\n")
    return 0


def cmd_replay(args) -> int:
    manifest = load_manifest(_read(args.manifest))
    ids = _ids_for(args, manifest)
    override = not args.no_override
    if args.edge_url or args.cloud_url:
        if not (args.edge_url and args.cloud_url):
            raise UsageError("networked replay needs both --edge-url and --cloud-url")
        if args.threshold is not None or args.operating_point is not None or args.cloud_only:
            log.info("networked replay: the edge service's configured threshold is used")
        from .service.client import networked_replay

        outcomes = networked_replay(ids, args.edge_url, args.cloud_url, override=override, workers=args.workers)
    else:
        if not args.scores:
            raise UsageError("in-process replay needs --scores (or CASCADE_SCORES)")
        op = _threshold_source(args)
        provider = load_score_file(_read(args.scores))
        outcomes = run_cascade(ids, provider, op, override=override)
    _write(args.outcomes, outcomes_to_jsonl(outcomes))
    if outcomes:
        report = evaluate(outcomes, manifest)
        if args.report:
            _write(args.report, report.to_json() + "\n")
        sys.stderr.write(report.summary())
    return 0


def cmd_report(args) -> int:
    manifest = load_manifest(_read(args.manifest))
    outcomes = outcomes_from_jsonl(_read(args.outcomes))
    report = evaluate(outcomes, manifest)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "deployed_confusion.csv").write_text(report.deployed_cm.to_csv())
    (out_dir / "triage_confusion.csv").write_text(report.triage_cm.to_csv())
    if report.grade_cm is not None:
        (out_dir / "grade_confusion.csv").write_text(report.grade_cm.to_csv())
    (out_dir / "report.json").write_text(report.to_json() + "\n")
    sys.stdout.write(report.summary())
    return 0


def cmd_serve_edge(args) -> int:
    from .service.edge import create_edge_app
    from .service.runner import parse_address, serve

    if not args.scores:
        raise UsageError("serve-edge needs --scores (or CASCADE_SCORES)")
    provider = load_score_file(_read(args.scores))
    if args.operating_point:
        op = OperatingPoint.from_json(_read(args.operating_point))
    else:
        op = OperatingPoint.fixed(args.threshold if args.threshold is not None else REFERENCE_THRESHOLD)
    host, port = parse_address(args.addr, 8081)
    serve(create_edge_app(provider, op), host, port)
    return 0


def cmd_serve_cloud(args) -> int:
    from .service.cloud import create_cloud_app
    from .service.runner import parse_address, serve

    if not args.scores:
        raise UsageError("serve-cloud needs --scores (or CASCADE_SCORES)")
    provider = load_score_file(_read(args.scores))
    host, port = parse_address(args.addr, 8082)
    serve(create_cloud_app(provider), host, port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    env_scores = os.environ.get("CASCADE_SCORES") or None
    parser = argparse.ArgumentParser(prog="dr-cascade", description="Two-tier diabetic retinopathy triage and grading cascade.")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("make-manifest", help="write a manifest with given per-grade counts")
    p.add_argument("--counts", default="1805,370,999,193,295")
    p.add_argument("--prefix", default="img")
    p.add_argument("-o", "--out")
    p.set_defaults(func=cmd_make_manifest)

    p = sub.add_parser("split", help="stratified train/val/test split")
    p.add_argument("--manifest", required=True)
    p.add_argument("--test-fraction", type=float, default=0.20)
    p.add_argument("--val-fraction", type=float, default=0.20, help="fraction of the non-test remainder")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("-o", "--out")
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("gen-synthetic", help="write a synthetic score file for a manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--out")
    p.set_defaults(func=cmd_gen_synthetic)

    p = sub.add_parser("tune", help="pick the tier-1 threshold on validation scores")
    p.add_argument("--manifest", required=True)
    p.add_argument("--scores", default=env_scores)
    p.add_argument("--split", help="split JSON; the --subset ids are used (default: all manifest ids)")
    p.add_argument("--subset", default="val", choices=("train", "val", "test"))
    p.add_argument("--target", type=float, default=DEFAULT_TARGET_SENSITIVITY)
    p.add_argument("--steps", type=int, default=DEFAULT_SWEEP_STEPS)
    p.add_argument("--curve", help="write the sweep as CSV here")
    p.add_argument("-o", "--out")
    p.set_defaults(func=cmd_tune)

    p = sub.add_parser("replay", help="run the cascade over scored images and evaluate it")
    p.add_argument("--manifest", required=True)
    p.add_argument("--scores", default=env_scores)
    p.add_argument("--split")
    p.add_argument("--subset", default="test", choices=("train", "val", "test"))
    src = p.add_mutually_exclusive_group()
    src.add_argument("--threshold", type=float)
    src.add_argument("--operating-point", help="operating point JSON written by 'tune'")
    src.add_argument("--cloud-only", action="store_true", help="send every image to tier 2")
    p.add_argument("--no-override", action="store_true", help="forwarded images never drop below class 2")
    p.add_argument("--edge-url")
    p.add_argument("--cloud-url")
    p.add_argument("--workers", type=int, default=16)
    p.add_argument("--outcomes", default="-", help="outcomes JSONL path (default stdout)")
    p.add_argument("--report", help="metrics report JSON path")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("report", help="summarize outcomes and write confusion matrix CSVs")
    p.add_argument("--outcomes", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--out-dir", default="report")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("serve-edge", help="run the edge triage service")
    p.add_argument("--scores", default=env_scores)
    p.add_argument("--threshold", type=float)
    p.add_argument("--operating-point")
    p.add_argument("--addr", default=os.environ.get("CASCADE_EDGE_ADDR", "127.0.0.1:8081"))
    p.set_defaults(func=cmd_serve_edge)

    p = sub.add_parser("serve-cloud", help="run the cloud grading service")
    p.add_argument("--scores", default=env_scores)
    p.add_argument("--addr", default=os.environ.get("CASCADE_CLOUD_ADDR", "127.0.0.1:8082"))
    p.set_defaults(func=cmd_serve_cloud)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO, format="%(levelname)s %(message)s")
    if getattr(args, "threshold", None) is None and hasattr(args, "threshold") and not getattr(args, "cloud_only", False):
        if getattr(args, "operating_point", None) is None:
            try:
                args.threshold = _env_float("CASCADE_THRESHOLD")
            except UsageError as exc:
                print(f"dr-cascade: error: {exc}", file=sys.stderr)
                return 2
    try:
        return args.func(args)
    except (InputError, FileNotFoundError) as exc:
        print(f"dr-cascade: error: {exc}", file=sys.stderr)
        return 2
    except CascadeError as exc:
        print(f"dr-cascade: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
