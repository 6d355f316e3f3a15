"""Run every backend on one photo and write the map bundle it feeds
downstream: depth and boundary rasters, text and face box lists, and a
provenance record tying the files to the models that produced them."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .backends import Backends
from .errors import BadInput, InferenceFailure
from .mapio import (
    BOUNDARY_SUFFIX,
    BOXES_SUFFIX,
    DEPTH_SUFFIX,
    normalize_unit,
    write_boxes,
    write_map,
)

TEXT_SUFFIX = ".text" + BOXES_SUFFIX
FACE_SUFFIX = ".face" + BOXES_SUFFIX
PROVENANCE_SUFFIX = ".provenance.json"


@dataclass(frozen=True)
class AdapterOutputBundle:
    image_id: str
    depth_path: Path
    boundary_path: Path
    text_path: Path
    face_path: Path
    provenance_path: Path

    def payload_paths(self) -> tuple[Path, ...]:
        return (self.depth_path, self.boundary_path, self.text_path, self.face_path)


def load_image(path) -> np.ndarray:
    """Decode to (h, w, 3) float32 in [0, 1]."""
    p = Path(path)
    try:
        with Image.open(p) as im:
            rgb = im.convert("RGB")
            arr = np.asarray(rgb, dtype=np.float32) / 255.0
    except FileNotFoundError as e:
        raise BadInput(p, "no such file") from e
    except UnidentifiedImageError as e:
        raise BadInput(p, f"not a decodable image: {e}") from e
    return arr


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _check_dims(name: str, out: np.ndarray, img: np.ndarray) -> np.ndarray:
    if out.shape != img.shape[:2]:
        raise InferenceFailure(
            name, f"output {out.shape} does not match image {img.shape[:2]}"
        )
    if not np.all(np.isfinite(out)):
        raise InferenceFailure(name, "output contains non-finite values")
    return out


def write_provenance(
    path: Path, image_id: str, source: str, dims: tuple[int, int],
    roles: dict, checksums: dict,
) -> None:
    """Stable-serialized record: sorted keys, no timestamps, so a re-run
    over unchanged inputs reproduces the file byte for byte."""
    doc = {
        "image_id": image_id,
        "source": source,
        "width": dims[0],
        "height": dims[1],
        "models": roles,
        "sha256": checksums,
    }
    path.write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n", encoding="utf-8")


def extract_bundle(image_path, out_dir, backends: Backends) -> AdapterOutputBundle:
    """Infer all four maps for one image and write them next to each
    other under the image's stem. Depth is affinely rescaled to [0, 1];
    boundary strengths are clipped to [0, 1]."""
    image_path = Path(image_path)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    img = load_image(image_path)
    image_id = image_path.stem

    depth = normalize_unit(_check_dims(backends.depth.name, backends.depth.infer(img), img))
    boundary = np.clip(
        _check_dims(backends.boundary.name, backends.boundary.infer(img), img), 0.0, 1.0
    ).astype(np.float32)
    text_boxes = backends.text.infer(img)
    face_boxes = backends.face.infer(img)

    bundle = AdapterOutputBundle(
        image_id=image_id,
        depth_path=out / (image_id + DEPTH_SUFFIX),
        boundary_path=out / (image_id + BOUNDARY_SUFFIX),
        text_path=out / (image_id + TEXT_SUFFIX),
        face_path=out / (image_id + FACE_SUFFIX),
        provenance_path=out / (image_id + PROVENANCE_SUFFIX),
    )
    write_map(bundle.depth_path, depth)
    write_map(bundle.boundary_path, boundary)
    write_boxes(bundle.text_path, text_boxes)
    write_boxes(bundle.face_path, face_boxes)

    roles = {
        role: {
            "model": backend.name,
            "version": backend.version,
            "params": backend.params,
        }
        for role, backend in backends.by_role().items()
    }
    checksums = {p.name: _sha256(p) for p in bundle.payload_paths()}
    h, w = img.shape[:2]
    write_provenance(
        bundle.provenance_path, image_id, image_path.name, (w, h), roles, checksums
    )
    return bundle
