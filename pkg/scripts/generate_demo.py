#!/usr/bin/env python3
"""Run the full pipeline on the checked-in 10-image fixture set and write
annotation previews next to the outputs.

Usage:
    python3 scripts/generate_demo.py --out out/demo [--seed 42] [--workers 4]

Handy as a smoke test and as a template for wiring real data: point the
four path overrides at your own directories.
"""

import argparse
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "tests" / "fixtures"


def build_config(args):
    import dataclasses

    from rtwsynth.config import PathsConfig, PipelineConfig, RenderConfig

    corpus = FIXTURES / "corpus"
    return PipelineConfig(
        paths=PathsConfig(
            images_dir=str(args.images or FIXTURES / "e2e" / "images"),
            maps_dir=str(args.maps or FIXTURES / "e2e" / "maps"),
            fonts_dir=str(args.fonts or FIXTURES / "fonts"),
            words_file=str(corpus / "words.txt"),
            blocklist_file=str(corpus / "blocklist.txt"),
            surnames_file=str(corpus / "surnames.txt"),
            english_file=str(corpus / "english.txt"),
            boxes_dir=str(args.boxes or FIXTURES / "e2e" / "boxes"),
        ),
        render=dataclasses.replace(RenderConfig(), size_range=(12, 20)),
        workers=args.workers,
    )


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--images", help="override background image directory")
    parser.add_argument("--maps", help="override depth/boundary map directory")
    parser.add_argument("--boxes", help="override detection box directory")
    parser.add_argument("--fonts", help="override font directory")
    args = parser.parse_args()

    from rtwsynth.pipeline import ANNOTATION_SUFFIX, preview, run, validate_dir

    cfg = build_config(args)
    out = Path(args.out)
    manifest = run(cfg, seed=args.seed, out_dir=out, workers=args.workers)

    print(f"generated {len(manifest.entries)} images into {out}")
    for image_id, reason in manifest.skipped:
        print(f"  skipped {image_id}: {reason}")
    for image_id, message in manifest.errors:
        print(f"  ERROR {image_id}: {message}")

    for entry in manifest.entries:
        target = out / f"{entry.image_id}.preview.png"
        preview(out / entry.image, out / entry.annotation, target)
    print(f"wrote {len(manifest.entries)} previews (*.preview.png)")

    joint = manifest.stats.joint
    print(
        f"stats: {joint.images} images, {joint.boxes} paragraphs, "
        f"{joint.lines} lines, {joint.words} words"
    )

    problems = validate_dir(out)
    for problem in problems:
        print(f"  VALIDATION: {problem}")
    print("validation:", "clean" if not problems else f"{len(problems)} problem(s)")
    return 1 if (manifest.corrupt or problems) else 0


if __name__ == "__main__":
    sys.exit(main())
