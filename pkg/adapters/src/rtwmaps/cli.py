"""Command-line front end.

Exit codes match the engine's convention: 0 on success, 1 when input
data or a model run failed, 2 for configuration and usage errors.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from .backends import ModelsConfig, build_backends, load_models_cfg
from .bundle import extract_bundle
from .errors import AdapterError, BadConfig, ModelUnavailable
from .synth import SCENARIOS, make_synthetic_maps

log = logging.getLogger("rtwmaps")

_LEVELS = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}


def _setup_logging() -> None:
    level = os.environ.get("RTW_LOG", "error").strip().lower()
    logging.basicConfig(
        level=_LEVELS.get(level, logging.ERROR),
        format="%(levelname)s %(name)s: %(message)s",
    )


def _cmd_extract(args) -> int:
    cfg = load_models_cfg(args.models) if args.models else ModelsConfig()
    backends = build_backends(cfg)
    images_dir = Path(args.images)
    if not images_dir.is_dir():
        raise BadConfig(f"images directory not found: {images_dir}")
    failures: list[tuple[str, str]] = []
    written = 0
    for path in sorted(images_dir.glob("*.png")):
        try:
            extract_bundle(path, args.out, backends)
            written += 1
            log.info("extracted %s", path.name)
        except AdapterError as e:
            failures.append((path.name, str(e)))
            log.error("%s: %s", path.name, e)
    print(f"wrote {written} bundle(s) to {args.out}")
    for name, message in failures:
        print(f"failed {name}: {message}", file=sys.stderr)
    return 1 if failures else 0


def _cmd_synth(args) -> int:
    try:
        w_str, _, h_str = args.dims.lower().partition("x")
        dims = (int(w_str), int(h_str))
    except ValueError as e:
        raise BadConfig(f"dims must look like 640x480, got {args.dims!r}") from e
    scene = make_synthetic_maps(dims, args.scenario, args.out)
    print(f"wrote scene {scene.scene_id} to {args.out}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rtwmaps")
    sub = parser.add_subparsers(dest="command", required=True)

    p_extract = sub.add_parser(
        "extract", help="infer map bundles for every *.png in a directory"
    )
    p_extract.add_argument("--images", required=True, help="directory of photos")
    p_extract.add_argument("--out", required=True, help="output directory")
    p_extract.add_argument("--models", default="", help="models config file")
    p_extract.set_defaults(func=_cmd_extract)

    p_synth = sub.add_parser(
        "synth-maps", help="write an analytic ground-truth bundle"
    )
    p_synth.add_argument(
        "--scenario", required=True, choices=sorted(SCENARIOS)
    )
    p_synth.add_argument("--dims", required=True, help="WxH, e.g. 320x240")
    p_synth.add_argument("--out", required=True, help="output directory")
    p_synth.set_defaults(func=_cmd_synth)
    return parser


def main(argv=None) -> int:
    _setup_logging()
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except BadConfig as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except ModelUnavailable as e:
        # a model the config asks for is not on disk: config problem
        print(f"model unavailable: {e}", file=sys.stderr)
        return 2
    except AdapterError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
