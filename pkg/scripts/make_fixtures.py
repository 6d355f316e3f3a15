#!/usr/bin/env python3
"""Regenerate the checked-in test fixtures.

Deterministic: fixed seeds, no timestamps, so re-running produces
byte-identical files.  Run from the repository root:

    python3 scripts/make_fixtures.py
"""

from __future__ import annotations

import json
import shutil
import sys
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from rtwsynth.raster import Box, Raster, boxes_to_json, save_map, save_png  # noqa: E402

FIX = ROOT / "tests" / "fixtures"


# ---------------------------------------------------------------------------
# Fonts


def make_fonts() -> None:
    import matplotlib
    from fontTools.subset import Options, Subsetter
    from fontTools.ttLib import TTFont

    src = Path(matplotlib.get_data_path()) / "fonts" / "ttf"

    full = FIX / "fonts"
    full.mkdir(parents=True, exist_ok=True)
    for name in ("DejaVuSans.ttf", "STIXGeneral.ttf"):
        shutil.copyfile(src / name, full / name)

    latin_only = FIX / "fonts_reject"
    latin_only.mkdir(parents=True, exist_ok=True)
    shutil.copyfile(src / "cmr10.ttf", latin_only / "cmr10.ttf")

    # a DejaVu subset that drops Ё/ё, for the partial-coverage case
    mixed = FIX / "fonts_mixed"
    mixed.mkdir(parents=True, exist_ok=True)
    shutil.copyfile(src / "DejaVuSans.ttf", mixed / "DejaVuSans.ttf")
    shutil.copyfile(src / "DejaVuSerif.ttf", mixed / "DejaVuSerif.ttf")
    font = TTFont(str(src / "DejaVuSans.ttf"))
    keep = set(font.getBestCmap()) - {0x0401, 0x0451}
    sub = Subsetter(Options(notdef_outline=True))
    sub.populate(unicodes=sorted(keep))
    sub.subset(font)
    font.save(str(mixed / "DejaVuSans-NoYo.ttf"))


# ---------------------------------------------------------------------------
# Corpus files

WORDS = """дом кот мама папа вода хлеб молоко магазин улица город
школа книга стол окно дверь рука нога день ночь утро
вечер друг работа машина дорога лес река море небо солнце
луна звезда снег дождь ветер цветок дерево птица рыба собака
злодей дурак веселье правда сила поле гора камень трава огонь""".split()

BLOCKLIST = ["злодей", "Дурак", "плохослово"]
SURNAMES = ["Иванов", "Петров", "Сидоров", "Кузнецов", "Смирнов"]
ENGLISH = ["cafe", "shop", "hotel", "bar", "market", "exit", "sale"]


def make_corpus() -> None:
    d = FIX / "corpus"
    d.mkdir(parents=True, exist_ok=True)
    (d / "words.txt").write_text("\n".join(WORDS) + "\n", encoding="utf-8")
    (d / "blocklist.txt").write_text("\n".join(BLOCKLIST) + "\n", encoding="utf-8")
    (d / "surnames.txt").write_text("\n".join(SURNAMES) + "\n", encoding="utf-8")
    (d / "english.txt").write_text("\n".join(ENGLISH) + "\n", encoding="utf-8")
    # invalid UTF-8 on line 3, for the loader's error reporting
    (d / "bad_utf8.txt").write_bytes("ok\nтоже\n".encode("utf-8") + b"\xff\xfe bad\n")


# ---------------------------------------------------------------------------
# End-to-end image + map set


def _background(width: int, height: int, seed: int, tint) -> Raster:
    rng = np.random.default_rng(seed)
    y, x = np.mgrid[0:height, 0:width].astype(np.float32)
    base = 0.45 + 0.15 * (x / width) + 0.05 * (y / height)
    img = np.stack([base * t for t in tint], axis=2).astype(np.float32)
    img += rng.normal(0.0, 0.02, img.shape).astype(np.float32)
    return Raster(np.clip(img, 0.05, 0.95))


def _flat_depth(width: int, height: int) -> Raster:
    return Raster(np.full((height, width, 1), 0.5, dtype=np.float32))


def _ramp_depth(width: int, height: int) -> Raster:
    x = np.arange(width, dtype=np.float32)
    row = 0.3 + 0.4 * (x / np.float32(width))
    return Raster(np.tile(row, (height, 1))[:, :, None])


def _two_plane_depth(width: int, height: int, seam: int) -> Raster:
    # the seam column carries the global minimum so min-max normalization
    # never flattens either plane region to z = 0 (unusable for projection)
    d = np.full((height, width), 0.4, dtype=np.float32)
    d[:, seam:] = 0.6
    d[:, seam] = 0.2
    return Raster(d[:, :, None])


def _zero_boundary(width: int, height: int) -> Raster:
    return Raster(np.zeros((height, width, 1), dtype=np.float32))


def _seam_boundary(width: int, height: int, seam: int, axis: str = "col") -> Raster:
    b = np.zeros((height, width), dtype=np.float32)
    if axis == "col":
        b[:, seam] = 1.0
    else:
        b[seam, :] = 1.0
    return Raster(b[:, :, None])


def _ones_boundary(width: int, height: int) -> Raster:
    return Raster(np.ones((height, width, 1), dtype=np.float32))


def make_e2e() -> None:
    images = FIX / "e2e" / "images"
    maps = FIX / "e2e" / "maps"
    boxes = FIX / "e2e" / "boxes"
    for d in (images, maps, boxes):
        d.mkdir(parents=True, exist_ok=True)

    # id -> (w, h, tint, depth builder, boundary builder)
    plan = {
        "img_000": (128, 96, (1.0, 1.0, 1.0), _flat_depth, _zero_boundary),
        "img_001": (128, 96, (1.0, 0.9, 0.8), _ramp_depth, _zero_boundary),
        "img_002": (120, 120, (0.8, 1.0, 0.9),
                    lambda w, h: _two_plane_depth(w, h, 60),
                    lambda w, h: _seam_boundary(w, h, 60, "col")),
        "img_003": (96, 96, (1.0, 1.0, 1.0), _flat_depth, _ones_boundary),
        "img_004": (96, 96, (0.9, 0.9, 1.0), _flat_depth, _zero_boundary),
        "img_005": (128, 96, (1.0, 1.0, 0.85), _flat_depth, _zero_boundary),
        "img_006": (128, 112, (0.85, 0.95, 1.0), _ramp_depth,
                    lambda w, h: _seam_boundary(w, h, 56, "row")),
        "img_007": (112, 128, (1.0, 0.85, 0.9),
                    lambda w, h: _two_plane_depth(w, h, 56),
                    lambda w, h: _seam_boundary(w, h, 56, "col")),
        "img_008": (128, 96, (0.7, 1.0, 0.7), _flat_depth, _zero_boundary),
        "img_009": (96, 128, (1.0, 0.95, 0.7), _flat_depth, _zero_boundary),
    }
    for i, (image_id, (w, h, tint, depth_fn, boundary_fn)) in enumerate(plan.items()):
        save_png(_background(w, h, 1000 + i, tint), images / f"{image_id}.png")
        save_map(depth_fn(w, h), maps / f"{image_id}.depth.rtwmap")
        save_map(boundary_fn(w, h), maps / f"{image_id}.boundary.rtwmap")

    # img_004: pre-existing text covering ~30% of the image -> discard
    big = Box("existing-text", [[5.0, 5.0], [90.0, 5.0], [90.0, 40.0], [5.0, 40.0]])
    (boxes / "img_004.boxes.json").write_text(
        boxes_to_json([big]) + "\n", encoding="utf-8"
    )
    # img_005: one small text box + one face -> blur, then keep
    small = Box("existing-text", [[8.0, 8.0], [38.0, 8.0], [38.0, 20.0], [8.0, 20.0]])
    face = Box("face", [[90.0, 60.0], [118.0, 60.0], [118.0, 90.0], [90.0, 90.0]])
    (boxes / "img_005.boxes.json").write_text(
        boxes_to_json([small, face]) + "\n", encoding="utf-8"
    )


# ---------------------------------------------------------------------------
# Golden values (computed here by a standalone implementation, asserted by
# tests against the package)


def _fnv1a(data: bytes) -> int:
    h = 0xCBF29CE484222325
    for b in data:
        h = ((h ^ b) * 0x100000001B3) & 0xFFFFFFFFFFFFFFFF
    return h


def make_golden() -> None:
    d = ROOT / "tests" / "golden"
    d.mkdir(parents=True, exist_ok=True)
    cases = []
    for seed, image_id in [(0, "img_000"), (0, ""), (42, "img_000"), (7, "весна")]:
        data = (seed & 0xFFFFFFFFFFFFFFFF).to_bytes(8, "little") + image_id.encode("utf-8")
        cases.append({"seed": seed, "image_id": image_id, "key": _fnv1a(data)})
    payload = {
        "fnv1a_empty": _fnv1a(b""),
        "fnv1a_a": _fnv1a(b"a"),
        "stream_keys": cases,
    }
    (d / "fnv1a.json").write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


if __name__ == "__main__":
    make_fonts()
    make_corpus()
    make_e2e()
    make_golden()
    print(f"fixtures written under {FIX}")
