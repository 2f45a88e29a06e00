"""Command-line surface: grid evaluation, subset reports, question dumps."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .dataset import SceneFormatError, SceneInvariantError, Vocabulary, load_scenes
from .harness import (
    default_grid,
    emit_report,
    load_grid_config,
    restrict_reports,
    run_grid,
)
from .metrics import evaluate_subsets
from .uncertainty import MethodConfigError, parse_method


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--data", required=True, help="canonical scene record file")
    parser.add_argument("--vocab", help="sidecar vocabulary file for attribute validation")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="groundcheck",
        description="Detect grounding uncertainty, score methods, and emit clarification questions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_eval = sub.add_parser("evaluate", help="grid search over method configurations")
    _add_common(p_eval)
    p_eval.add_argument("--grid", help="grid config file (JSON); defaults to the built-in grid")
    p_eval.add_argument("--restrict", action="store_true",
                        help="keep only methods passing the selection restrictions")
    p_eval.add_argument("--require-pass", action="store_true",
                        help="exit nonzero unless at least one method passes the restrictions")
    p_eval.add_argument("--format", choices=("csv", "markdown"), default="csv")
    p_eval.add_argument("--out", help="write the report here instead of stdout")

    p_q = sub.add_parser("questions", help="write disambiguation records for uncertain scenes")
    _add_common(p_q)
    p_q.add_argument("--method", required=True,
                     help='method string, e.g. "top16+Ens4+EV"')
    p_q.add_argument("--out", required=True, help="output record file")

    p_sub = sub.add_parser("subsets", help="evaluate one method per subset tag")
    _add_common(p_sub)
    p_sub.add_argument("--method", required=True)
    p_sub.add_argument("--format", choices=("csv", "markdown"), default="csv")
    p_sub.add_argument("--out", help="write the report here instead of stdout")
    return parser


def _write(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _load(args: argparse.Namespace):
    vocab = Vocabulary.load(args.vocab) if args.vocab else None
    return load_scenes(args.data, vocab=vocab)


def _cmd_evaluate(args: argparse.Namespace) -> int:
    scenes = _load(args)
    config = load_grid_config(args.grid) if args.grid else default_grid(
        max_members=scenes[0].scores.n_members if scenes else 1
    )
    reports = run_grid(scenes, config)
    survivors = restrict_reports(reports, config.restrictions)
    shown = survivors if args.restrict else reports
    _write(emit_report(shown, format=args.format), args.out)
    if args.require_pass and not survivors:
        print("no method passed the restrictions", file=sys.stderr)
        return 1
    return 0


def _cmd_questions(args: argparse.Namespace) -> int:
    from .harness import emit_questions

    scenes = _load(args)
    method = parse_method(args.method)
    count = emit_questions(scenes, method, args.out)
    print(f"wrote {count} uncertain-scene records to {args.out}")
    return 0


def _cmd_subsets(args: argparse.Namespace) -> int:
    scenes = _load(args)
    method = parse_method(args.method)
    by_tag = evaluate_subsets(scenes, method)
    lines = []
    if args.format == "csv":
        lines.append("Subset, " + emit_report([], format="csv").split("\n")[0])
        for tag, report in by_tag.items():
            row = emit_report([report], format="csv").strip().split("\n")[1]
            lines.append(f"{tag}, {row}")
        text = "\n".join(lines) + "\n"
    else:
        text = ""
        for tag, report in by_tag.items():
            text += f"### {tag}\n\n" + emit_report([report], format="markdown") + "\n"
    _write(text, args.out)
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handler = {
        "evaluate": _cmd_evaluate,
        "questions": _cmd_questions,
        "subsets": _cmd_subsets,
    }[args.command]
    try:
        return handler(args)
    except (SceneFormatError, SceneInvariantError, MethodConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
