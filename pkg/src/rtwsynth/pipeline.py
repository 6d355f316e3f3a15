"""End-to-end generation: per-image stage loop, worker pool, manifest and
stats emission, directory validation, preview overlays.

Per-image work is a pure function of (config, global seed, image id), so
the worker count can never change any output byte.
"""

from __future__ import annotations

import dataclasses
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image, ImageDraw

from .annotations import (
    AnnotationRecord,
    StatsTable,
    compute_stats,
    emit_annotation,
    emit_mask,
    record_from_json,
    record_to_json,
    validate_record,
)
from .blending import build_problem, compose, solve
from .config import PipelineConfig, require_paths
from .corpus import Corpus, build_corpus, sample_text
from .errors import (
    CorruptInput,
    DegenerateRegion,
    EmptyDomain,
    EngineError,
    MissingFile,
    MissingMap,
    NumericallySingular,
)
from .geometry import fit_plane, fits, region_homography, warp_patch
from .prefilter import Decision, blur_regions, decide_image
from .polygons import polygon_mask
from .raster import (
    Box,
    Raster,
    clamp_box,
    load_boxes,
    load_map,
    load_mask_png,
    load_png,
    normalize_depth,
    save_mask_png,
    save_png,
)
from .regions import Region, filter_regions, pick_region, regions_from_boundaries
from .rng import derive_rng, split_assign, stream_key
from .textrender import (
    FontSet,
    SineWarpParams,
    Spacing,
    apply_sine_warp,
    contrast_color,
    layout_text,
    load_fonts,
    rasterize,
)
from .errors import UnsupportedGlyph

log = logging.getLogger("rtwsynth.pipeline")

# file layout conventions (flat output tree, stem = image id)
DEPTH_SUFFIX = ".depth.rtwmap"
BOUNDARY_SUFFIX = ".boundary.rtwmap"
ANNOTATION_SUFFIX = ".ann.json"
MASK_SUFFIX = ".mask.png"
BOXES_SUFFIX = ".boxes.json"


@dataclass(frozen=True)
class Skipped:
    image_id: str
    reason: str  # "PreexistingText" | "NoPlacement"


@dataclass
class Placement:
    instance_id: int
    region_id: int
    homography: np.ndarray  # 3x3
    layout: object  # GlyphLayout in image coordinates
    text: str
    font_family: str
    size_px: int
    warp: SineWarpParams
    blend_mode: str
    alpha: np.ndarray = field(repr=False)  # full-canvas float alpha
    omega: np.ndarray = field(repr=False)  # blend domain actually solved


@dataclass
class GeneratedImage:
    image_id: str
    image: Raster
    record: AnnotationRecord
    mask: np.ndarray
    placements: list[Placement]
    base_after_prefilter: Raster | None = None  # for locality checks


def _load_inputs(cfg: PipelineConfig, image_id: str):
    p = cfg.paths
    img_path = Path(p.images_dir) / f"{image_id}.png"
    depth_path = Path(p.maps_dir) / f"{image_id}{DEPTH_SUFFIX}"
    boundary_path = Path(p.maps_dir) / f"{image_id}{BOUNDARY_SUFFIX}"
    if not img_path.is_file():
        raise MissingMap("image", str(img_path))
    if not depth_path.is_file():
        raise MissingMap("depth", str(depth_path))
    if not boundary_path.is_file():
        raise MissingMap("boundary", str(boundary_path))
    try:
        img = load_png(img_path)
    except EngineError as e:
        raise CorruptInput(str(img_path), str(e)) from e
    try:
        depth = load_map(depth_path)
    except EngineError as e:
        raise CorruptInput(str(depth_path), str(e)) from e
    try:
        boundary = load_map(boundary_path)
    except EngineError as e:
        raise CorruptInput(str(boundary_path), str(e)) from e
    if (depth.height, depth.width) != (img.height, img.width):
        raise CorruptInput(str(depth_path), "depth dims do not match the image")
    if (boundary.height, boundary.width) != (img.height, img.width):
        raise CorruptInput(str(boundary_path), "boundary dims do not match the image")

    boxes: list[Box] = []
    if p.boxes_dir:
        for bp in sorted(Path(p.boxes_dir).glob(f"{image_id}*{BOXES_SUFFIX}")):
            try:
                boxes.extend(load_boxes(bp))
            except (EngineError, ValueError, KeyError, TypeError) as e:
                raise CorruptInput(str(bp), str(e)) from e
        boxes = [clamp_box(b, img.width, img.height) for b in boxes]
    return img, depth, boundary, boxes


def _text_occupancy(boxes: list[Box], width: int, height: int) -> np.ndarray | None:
    text_boxes = [b for b in boxes if b.kind == "existing-text"]
    if not text_boxes:
        return None
    occ = np.zeros((height, width), dtype=bool)
    for b in text_boxes:
        occ |= polygon_mask(b.quad, width, height)
    return occ


def _u(rng: np.random.Generator, lo_hi: tuple[float, float]) -> float:
    lo, hi = lo_hi
    return float(rng.uniform(lo, hi)) if hi > lo else float(lo)


def _try_placement(
    cfg: PipelineConfig,
    base: Raster,
    depth_n: Raster,
    regions: list[Region],
    avail: list[int],
    rng: np.random.Generator,
    fonts: FontSet,
    corp: Corpus,
    instance_id: int,
):
    """One attempt: draw everything, fit, warp, blend. None on any rejection."""
    sub = [regions[i] for i in avail]
    region = pick_region(sub, rng)
    region_id = avail[next(j for j, r in enumerate(sub) if r is region)]

    sample = sample_text(corp, rng, cfg.sample, cfg.corpus)
    font = fonts.fonts[int(rng.integers(len(fonts.fonts)))]
    size = int(rng.integers(cfg.render.size_range[0], cfg.render.size_range[1] + 1))
    sp = Spacing(
        letter=_u(rng, cfg.render.letter_spacing_range),
        word=_u(rng, cfg.render.word_spacing_range),
        line=_u(rng, cfg.render.line_spacing_range),
    )
    try:
        layout = layout_text(sample, font, size, sp)
    except UnsupportedGlyph:
        return None
    warp = SineWarpParams(
        amplitude=_u(rng, cfg.render.amplitude_frac_range) * layout.line_height,
        period=_u(rng, cfg.render.period_range),
        phase=_u(rng, (0.0, 2.0 * math.pi)),
    )
    warped = apply_sine_warp(layout, warp)

    mean_rgb = base.pixels[region.pixel_mask].mean(axis=0)
    color = contrast_color(mean_rgb, rng, cfg.render.hue_jitter_deg)
    patch = rasterize(warped, tuple(color), rng)
    psize = (float(patch.alpha.width), float(patch.alpha.height))

    try:
        plane = fit_plane(depth_n, region, cfg.geometry, rng)
    except (DegenerateRegion, NumericallySingular):
        return None
    # scale-down retries: halve the target area fraction while fits() fails
    area_fraction = _u(rng, cfg.render.area_fraction_range)
    H = None
    for _scale_try in range(3):
        try:
            cand = region_homography(
                plane, region, psize, depth_n, cfg.geometry,
                area_fraction=area_fraction,
            )
        except NumericallySingular:
            return None
        if fits(psize, region, cand, cfg.geometry.min_coverage):
            H = cand
            break
        area_fraction *= 0.5
    if H is None:
        return None

    placed = warp_patch(patch, H, (base.width, base.height))
    try:
        problem = build_problem(base, placed, cfg.blend.mode, cfg.blend.solver())
        result = solve(problem)
    except EmptyDomain:
        return None
    new_base = compose(base, result, problem)
    placement = Placement(
        instance_id=instance_id,
        region_id=region_id,
        homography=H.H,
        layout=placed.layout,
        text="\n".join(s.text for s in placed.layout.line_spans),
        font_family=font.family,
        size_px=size,
        warp=warp,
        blend_mode=cfg.blend.mode,
        alpha=placed.alpha.plane(),
        omega=problem.omega,
    )
    avail.remove(region_id)
    return new_base, placement


def generate_image(
    cfg: PipelineConfig,
    image_id: str,
    rng: np.random.Generator,
    fonts: FontSet | None = None,
    corp: Corpus | None = None,
) -> GeneratedImage | Skipped:
    """Full stage order for one image: prefilter, regions, sample, render,
    fit, warp, blend, annotate."""
    fonts = fonts if fonts is not None else load_fonts(cfg.paths.fonts_dir)
    corp = corp if corp is not None else load_corpus(cfg)
    img, depth, boundary, boxes = _load_inputs(cfg, image_id)
    dims = (img.width, img.height)

    decision = decide_image(boxes, cfg.prefilter, float(img.width * img.height))
    if decision is Decision.DISCARD:
        return Skipped(image_id, "PreexistingText")
    base = img
    if decision is Decision.BLUR_THEN_KEEP:
        base = blur_regions(img, boxes, cfg.prefilter)

    depth_n = normalize_depth(depth)
    regions = filter_regions(
        regions_from_boundaries(boundary, cfg.region),
        cfg.region,
        occupancy=_text_occupancy(boxes, img.width, img.height),
    )
    if not regions:
        return Skipped(image_id, "NoPlacement")

    lo, hi = cfg.placements_range
    n_target = int(rng.integers(lo, hi + 1))
    avail = list(range(len(regions)))
    placements: list[Placement] = []
    current = base
    for _ in range(n_target):
        if not avail:
            break
        outcome = None
        for _attempt in range(cfg.retries_per_placement + 1):
            outcome = _try_placement(
                cfg, current, depth_n, regions, avail, rng, fonts, corp,
                instance_id=len(placements) + 1,
            )
            if outcome is not None:
                break
        if outcome is None:
            continue
        current, placement = outcome
        placements.append(placement)

    if not placements:
        return Skipped(image_id, "NoPlacement")
    record = emit_annotation(placements, image_id, dims)
    mask = emit_mask([p.alpha for p in placements], dims)
    return GeneratedImage(
        image_id=image_id,
        image=current,
        record=record,
        mask=mask,
        placements=placements,
        base_after_prefilter=base,
    )


def load_corpus(cfg: PipelineConfig) -> Corpus:
    p = cfg.paths
    corpus_cfg = cfg.corpus
    if p.english_file and not corpus_cfg.english_words:
        corpus_cfg = dataclasses.replace(corpus_cfg, english_words=p.english_file)
    return build_corpus(
        p.words_file,
        p.blocklist_file or None,
        p.surnames_file or None,
        corpus_cfg,
    )


# ---------------------------------------------------------------------------
# Batch run


@dataclass(frozen=True)
class ManifestEntry:
    image_id: str
    image: str
    annotation: str
    mask: str
    seed: int
    placements: int
    subset: str

    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self), ensure_ascii=False)


@dataclass
class Manifest:
    entries: list[ManifestEntry]
    skipped: list[tuple[str, str]]
    errors: list[tuple[str, str]]
    stats: StatsTable
    corrupt: bool  # any CorruptInput seen


def discover_images(images_dir) -> list[str]:
    return sorted(p.stem for p in Path(images_dir).glob("*.png"))


# per-process shared immutables, set once by the pool initializer
_SHARED: dict = {}


def _init_worker(cfg: PipelineConfig) -> None:
    _SHARED["fonts"] = load_fonts(cfg.paths.fonts_dir)
    _SHARED["corpus"] = load_corpus(cfg)


def _write_outputs(gen: GeneratedImage, out_dir: Path) -> tuple[str, str, str]:
    image_name = f"{gen.image_id}.png"
    ann_name = f"{gen.image_id}{ANNOTATION_SUFFIX}"
    mask_name = f"{gen.image_id}{MASK_SUFFIX}"
    save_png(gen.image, out_dir / image_name)
    (out_dir / ann_name).write_text(record_to_json(gen.record), encoding="utf-8")
    save_mask_png(gen.mask, out_dir / mask_name)
    return image_name, ann_name, mask_name


def _process_one(cfg: PipelineConfig, seed: int, image_id: str, out_dir: str):
    """Worker body; returns a picklable outcome tuple."""
    rng = derive_rng(seed, image_id)
    fonts = _SHARED.get("fonts")
    corp = _SHARED.get("corpus")
    try:
        result = generate_image(cfg, image_id, rng, fonts, corp)
    except CorruptInput as e:
        return ("corrupt", image_id, str(e))
    except EngineError as e:
        return ("error", image_id, f"{type(e).__name__}: {e}")
    if isinstance(result, Skipped):
        return ("skip", image_id, result.reason)
    names = _write_outputs(result, Path(out_dir))
    return ("ok", image_id, names, len(result.placements), result.record)


def _worker(args):
    return _process_one(*args)


def run(
    cfg: PipelineConfig,
    seed: int,
    out_dir,
    workers: int | None = None,
    limit: int | None = None,
) -> Manifest:
    require_paths(cfg)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    image_ids = discover_images(cfg.paths.images_dir)
    if limit is not None:
        image_ids = image_ids[:limit]
    nworkers = workers if workers is not None else cfg.workers

    tasks = [(cfg, seed, image_id, str(out)) for image_id in image_ids]
    if nworkers <= 1:
        _init_worker(cfg)
        outcomes = [_worker(t) for t in tasks]
    else:
        with ProcessPoolExecutor(
            max_workers=nworkers, initializer=_init_worker, initargs=(cfg,)
        ) as pool:
            outcomes = list(pool.map(_worker, tasks, chunksize=1))

    entries: list[ManifestEntry] = []
    skipped: list[tuple[str, str]] = []
    errors: list[tuple[str, str]] = []
    records: list[AnnotationRecord] = []
    split: dict[str, str] = {}
    corrupt = False
    for outcome in outcomes:  # input order == manifest order
        tag, image_id = outcome[0], outcome[1]
        if tag == "ok":
            _, _, names, n_placements, record = outcome
            subset = split_assign(image_id, cfg.train_fraction)
            split[image_id] = subset
            records.append(record)
            entries.append(
                ManifestEntry(
                    image_id=image_id,
                    image=names[0],
                    annotation=names[1],
                    mask=names[2],
                    seed=stream_key(seed, image_id),
                    placements=n_placements,
                    subset=subset,
                )
            )
        elif tag == "skip":
            skipped.append((image_id, outcome[2]))
            log.info("skipped %s: %s", image_id, outcome[2])
        elif tag == "corrupt":
            corrupt = True
            errors.append((image_id, outcome[2]))
            log.error("corrupt input for %s: %s", image_id, outcome[2])
        else:
            errors.append((image_id, outcome[2]))
            log.error("failed %s: %s", image_id, outcome[2])

    stats = compute_stats(records, split)
    manifest_text = "".join(e.to_json() + "\n" for e in entries)
    (out / "manifest.jsonl").write_text(manifest_text, encoding="utf-8")
    (out / "stats.json").write_text(stats.to_json() + "\n", encoding="utf-8")
    return Manifest(
        entries=entries, skipped=skipped, errors=errors, stats=stats, corrupt=corrupt
    )


# ---------------------------------------------------------------------------
# Validation walk


def _check_mask_bijection(record: AnnotationRecord, mask: np.ndarray) -> list[str]:
    want = {p.id for p in record.paragraphs}
    got = {int(v) for v in np.unique(mask) if v != 0}
    if want != got:
        return [
            f"mask ids {sorted(got)} do not biject with paragraph ids {sorted(want)}"
        ]
    return []


def validate_dir(directory) -> list[str]:
    """Format checks over every recognized artifact under ``directory``.

    Returns human-readable problems; empty list means the tree is clean.
    """
    d = Path(directory)
    if not d.is_dir():
        return [f"not a directory: {directory}"]
    problems: list[str] = []
    for path in sorted(d.rglob("*")):
        if not path.is_file():
            continue
        rel = path.relative_to(d)
        name = path.name
        try:
            if name == "manifest.jsonl":
                for lineno, line in enumerate(
                    path.read_text(encoding="utf-8").splitlines(), start=1
                ):
                    entry = json.loads(line)
                    for key in ("image", "annotation", "mask"):
                        ref = path.parent / entry[key]
                        if not ref.is_file():
                            problems.append(f"{rel}:{lineno}: missing {key} {entry[key]}")
            elif name == "stats.json":
                StatsTable.from_json(path.read_text(encoding="utf-8"))
            elif name.endswith(ANNOTATION_SUFFIX):
                record = record_from_json(path.read_text(encoding="utf-8"))
                for v in validate_record(record):
                    problems.append(f"{rel}: {v}")
                mask_path = path.parent / (name[: -len(ANNOTATION_SUFFIX)] + MASK_SUFFIX)
                if mask_path.is_file():
                    mask = load_mask_png(mask_path)
                    if mask.shape != (record.height, record.width):
                        problems.append(f"{rel}: mask dims {mask.shape} mismatch")
                    else:
                        problems.extend(
                            f"{rel}: {msg}" for msg in _check_mask_bijection(record, mask)
                        )
            elif name.endswith(BOXES_SUFFIX):
                load_boxes(path)
            elif path.suffix == ".rtwmap":
                raster = load_map(path)
                if name.endswith(BOUNDARY_SUFFIX):
                    if raster.channels != 1:
                        problems.append(f"{rel}: boundary map must be 1-channel")
                    else:
                        plane = raster.plane()
                        if plane.min() < 0.0 or plane.max() > 1.0:
                            problems.append(f"{rel}: boundary strengths outside [0, 1]")
                elif name.endswith(DEPTH_SUFFIX) and raster.channels != 1:
                    problems.append(f"{rel}: depth map must be 1-channel")
            elif name.endswith(MASK_SUFFIX):
                load_mask_png(path)
        except (EngineError, ValueError, KeyError, json.JSONDecodeError) as e:
            problems.append(f"{rel}: {type(e).__name__}: {e}")
    return problems


# ---------------------------------------------------------------------------
# Preview overlay

PARAGRAPH_COLOR = (220, 40, 40)
WORD_COLOR = (250, 210, 60)
TINT_COLOR = np.array([60, 200, 90], dtype=np.float64)
TINT_OPACITY = 0.3


def _draw_outline(draw: ImageDraw.ImageDraw, polygon, color, width: int) -> None:
    pts = [tuple(p) for p in np.asarray(polygon, dtype=np.float64).reshape(-1, 2)]
    if len(pts) < 2:
        return
    draw.line(pts + [pts[0]], fill=color, width=width, joint="curve")


def preview(image_path, annotation_path, out_path) -> None:
    """Overlay: mask tint at 30%, word outlines 1 px, paragraph outlines 2 px."""
    image_path, annotation_path = Path(image_path), Path(annotation_path)
    if not image_path.is_file():
        raise MissingFile(str(image_path))
    if not annotation_path.is_file():
        raise MissingFile(str(annotation_path))
    record = record_from_json(annotation_path.read_text(encoding="utf-8"))
    img = Image.open(image_path).convert("RGB")

    name = annotation_path.name
    if name.endswith(ANNOTATION_SUFFIX):
        mask_path = annotation_path.parent / (
            name[: -len(ANNOTATION_SUFFIX)] + MASK_SUFFIX
        )
        if mask_path.is_file():
            mask = load_mask_png(mask_path)
            if mask.shape == (img.height, img.width) and (mask > 0).any():
                px = np.asarray(img, dtype=np.float64)
                sel = mask > 0
                px[sel] = (1.0 - TINT_OPACITY) * px[sel] + TINT_OPACITY * TINT_COLOR
                img = Image.fromarray(np.round(px).astype(np.uint8))

    draw = ImageDraw.Draw(img)
    for p in record.paragraphs:
        for line in p.lines:
            for w in line.words:
                _draw_outline(draw, w.polygon, WORD_COLOR, 1)
        _draw_outline(draw, p.polygon, PARAGRAPH_COLOR, 2)
    img.save(out_path, format="PNG")
