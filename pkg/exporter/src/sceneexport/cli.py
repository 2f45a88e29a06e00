"""scene-export: command-line entry for the dump converter."""

from __future__ import annotations

import argparse
import json
import sys

from .convert import ADAPTERS, export
from .schema import ExportError


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scene-export",
        description="Convert visual-grounding ensemble dumps into canonical scene records.",
    )
    parser.add_argument("--dumps", required=True, help="directory of per-scene dump files")
    parser.add_argument("--annotations", help="directory of per-scene annotation files")
    parser.add_argument("--vocab", help="color/action vocabulary sidecar (JSON)")
    parser.add_argument("--superclass-map", required=True,
                        help="class to superclass mapping sidecar (JSON)")
    parser.add_argument("--out", required=True, help="output record file")
    parser.add_argument("--adapter", choices=sorted(ADAPTERS), default="json-dir")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        with open(args.superclass_map, encoding="utf-8") as fh:
            superclass_map = json.load(fh)
        vocab = None
        if args.vocab:
            with open(args.vocab, encoding="utf-8") as fh:
                vocab = json.load(fh)
        count = export(
            args.dumps,
            args.annotations,
            args.out,
            superclass_map=superclass_map,
            vocab=vocab,
            adapter=args.adapter,
        )
    except (ExportError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {count} scene records to {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
