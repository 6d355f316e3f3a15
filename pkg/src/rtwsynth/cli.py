"""Command-line front end.

Exit codes: 0 success, 1 corrupt input, 2 bad configuration.
Logging level comes from the RTW_LOG environment variable.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from .annotations import compute_stats, record_from_json
from .config import load_config
from .errors import BadConfig, EngineError, MissingFile
from .pipeline import preview, run, validate_dir

log = logging.getLogger("rtwsynth")

_LEVELS = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}


def _setup_logging() -> None:
    level = os.environ.get("RTW_LOG", "error").strip().lower()
    logging.basicConfig(
        level=_LEVELS.get(level, logging.ERROR),
        format="%(levelname)s %(name)s: %(message)s",
    )


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rtwsynth",
        description="Deterministic synthetic scene-text dataset generation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="run the full generation pipeline")
    g.add_argument("--config", required=True, help="pipeline config file")
    g.add_argument("--seed", required=True, type=int, help="global seed")
    g.add_argument("--out", required=True, help="output directory")
    g.add_argument("--workers", type=int, default=None, help="worker processes")
    g.add_argument("--limit", type=int, default=None, help="process first N images")

    s = sub.add_parser("stats", help="recompute statistics from a manifest")
    s.add_argument("--manifest", required=True)
    s.add_argument("--out", required=True)

    v = sub.add_parser("validate", help="format-check every artifact in a directory")
    v.add_argument("--dir", required=True)

    p = sub.add_parser("preview", help="render an annotation overlay")
    p.add_argument("--image", required=True)
    p.add_argument("--annotation", required=True)
    p.add_argument("--out", required=True)
    return parser


def _cmd_generate(args) -> int:
    cfg = load_config(args.config)
    if args.workers is not None and args.workers < 1:
        raise BadConfig("--workers must be >= 1")
    if args.limit is not None and args.limit < 0:
        raise BadConfig("--limit must be >= 0")
    manifest = run(cfg, args.seed, args.out, workers=args.workers, limit=args.limit)
    log.info(
        "generated %d, skipped %d, errors %d",
        len(manifest.entries),
        len(manifest.skipped),
        len(manifest.errors),
    )
    return 1 if manifest.corrupt else 0


def _cmd_stats(args) -> int:
    mpath = Path(args.manifest)
    if not mpath.is_file():
        print(f"manifest not found: {mpath}", file=sys.stderr)
        return 1
    records = []
    split: dict[str, str] = {}
    try:
        for line in mpath.read_text(encoding="utf-8").splitlines():
            entry = json.loads(line)
            ann = mpath.parent / entry["annotation"]
            records.append(record_from_json(ann.read_text(encoding="utf-8")))
            split[entry["image_id"]] = entry["subset"]
    except (OSError, KeyError, ValueError, json.JSONDecodeError) as e:
        print(f"corrupt manifest: {e}", file=sys.stderr)
        return 1
    table = compute_stats(records, split)
    Path(args.out).write_text(table.to_json() + "\n", encoding="utf-8")
    return 0


def _cmd_validate(args) -> int:
    problems = validate_dir(args.dir)
    for problem in problems:
        print(problem, file=sys.stderr)
    if problems:
        print(f"{len(problems)} problem(s) found", file=sys.stderr)
        return 1
    return 0


def _cmd_preview(args) -> int:
    try:
        preview(args.image, args.annotation, args.out)
    except MissingFile as e:
        print(f"missing file: {e}", file=sys.stderr)
        return 1
    except EngineError as e:
        print(f"corrupt input: {e}", file=sys.stderr)
        return 1
    return 0


_COMMANDS = {
    "generate": _cmd_generate,
    "stats": _cmd_stats,
    "validate": _cmd_validate,
    "preview": _cmd_preview,
}


def main(argv=None) -> int:
    _setup_logging()
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except BadConfig as e:
        print(f"bad config: {e}", file=sys.stderr)
        return 2
    except EngineError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
