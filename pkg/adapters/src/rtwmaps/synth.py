"""Analytic map bundles for calibration runs.

Each scenario writes the same file family a real extraction would,
except the rasters come from closed-form geometry instead of a model,
so downstream behavior can be checked against known ground truth. The
depth values are the literal scenario constants, not rescaled: the
consumer normalizes on load, and keeping the constants makes the files
self-describing next to their provenance.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .bundle import (
    FACE_SUFFIX,
    PROVENANCE_SUFFIX,
    TEXT_SUFFIX,
    AdapterOutputBundle,
    _sha256,
)
from .errors import BadConfig
from .mapio import BOUNDARY_SUFFIX, DEPTH_SUFFIX, write_boxes, write_map

BACKGROUND_GRAY = 128


@dataclass(frozen=True)
class SyntheticScene:
    scene_id: str
    image_path: Path
    bundle: AdapterOutputBundle


def _flat(w: int, h: int):
    depth = np.full((h, w), 0.5, dtype=np.float32)
    boundary = np.zeros((h, w), dtype=np.float32)
    truth = {"planes": [{"kind": "constant", "depth": 0.5}], "seams": []}
    return depth, boundary, truth


def _ramp(w: int, h: int):
    xs = np.arange(w, dtype=np.float32)
    depth = np.broadcast_to(0.3 + 0.4 * (xs / w), (h, w)).astype(np.float32)
    boundary = np.zeros((h, w), dtype=np.float32)
    truth = {
        "planes": [{"kind": "ramp", "depth_at": "0.3 + 0.4 * (x / width)"}],
        "seams": [],
    }
    return depth, boundary, truth


def _two_plane(w: int, h: int):
    seam = w // 2
    depth = np.empty((h, w), dtype=np.float32)
    depth[:, :seam] = 0.4
    xs = np.arange(seam, w, dtype=np.float32)
    # seam column starts the right plane at 0.5; far edge reaches 0.8
    t = (xs - seam) / max(1, (w - 1) - seam)
    depth[:, seam:] = 0.5 + 0.3 * t
    boundary = np.zeros((h, w), dtype=np.float32)
    boundary[:, seam] = 1.0
    truth = {
        "planes": [
            {"kind": "constant", "depth": 0.4, "columns": [0, seam]},
            {"kind": "ramp", "depth_range": [0.5, 0.8], "columns": [seam, w]},
        ],
        "seams": [{"axis": "column", "index": seam}],
    }
    return depth, boundary, truth


SCENARIOS = {"flat": _flat, "ramp": _ramp, "two-plane": _two_plane}


def make_synthetic_maps(dims: tuple[int, int], scenario: str, out_dir) -> SyntheticScene:
    """Write `<scenario>-<w>x<h>` image, rasters, empty box lists, and a
    provenance record carrying the ground-truth description."""
    if scenario not in SCENARIOS:
        raise BadConfig(f"unknown scenario {scenario!r}; choices: {sorted(SCENARIOS)}")
    w, h = dims
    if w < 1 or h < 1:
        raise BadConfig(f"dims must be positive, got {w}x{h}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    scene_id = f"{scenario}-{w}x{h}"

    depth, boundary, truth = SCENARIOS[scenario](w, h)
    image_path = out / (scene_id + ".png")
    Image.fromarray(
        np.full((h, w, 3), BACKGROUND_GRAY, dtype=np.uint8)
    ).save(image_path)

    bundle = AdapterOutputBundle(
        image_id=scene_id,
        depth_path=out / (scene_id + DEPTH_SUFFIX),
        boundary_path=out / (scene_id + BOUNDARY_SUFFIX),
        text_path=out / (scene_id + TEXT_SUFFIX),
        face_path=out / (scene_id + FACE_SUFFIX),
        provenance_path=out / (scene_id + PROVENANCE_SUFFIX),
    )
    write_map(bundle.depth_path, depth)
    write_map(bundle.boundary_path, boundary)
    write_boxes(bundle.text_path, [])
    write_boxes(bundle.face_path, [])

    doc = {
        "image_id": scene_id,
        "source": image_path.name,
        "width": w,
        "height": h,
        "models": {
            role: {"model": "synthetic", "version": "builtin-1",
                   "params": {"scenario": scenario}}
            for role in ("depth", "boundary", "text", "face")
        },
        "ground_truth": truth,
        "sha256": {p.name: _sha256(p) for p in bundle.payload_paths()},
    }
    bundle.provenance_path.write_text(
        json.dumps(doc, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    return SyntheticScene(scene_id=scene_id, image_path=image_path, bundle=bundle)
