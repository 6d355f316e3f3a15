"""Pipeline configuration: dataclass blocks per stage plus a flat
`section.key = value` text format (diff-friendly, language-neutral).

Unknown keys, unparsable values, and missing required paths all raise
BadConfig; the CLI maps that to exit code 2.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path

from .blending import SolverConfig
from .corpus import CorpusConfig, SampleLayout
from .errors import BadConfig
from .geometry import GeometryConfig
from .prefilter import PrefilterPolicy
from .regions import RegionParams


@dataclass(frozen=True)
class PathsConfig:
    images_dir: str = ""
    maps_dir: str = ""
    fonts_dir: str = ""
    words_file: str = ""
    blocklist_file: str = ""  # optional ("" = no blocklist)
    surnames_file: str = ""  # optional
    english_file: str = ""  # optional
    boxes_dir: str = ""  # optional pre-existing text/face boxes


@dataclass(frozen=True)
class RenderConfig:
    size_range: tuple[int, int] = (12, 96)  # font pixel sizes
    amplitude_frac_range: tuple[float, float] = (0.0, 0.35)  # of line height
    period_range: tuple[float, float] = (40.0, 160.0)  # px
    letter_spacing_range: tuple[float, float] = (1.0, 1.15)
    word_spacing_range: tuple[float, float] = (1.0, 1.3)
    line_spacing_range: tuple[float, float] = (1.0, 1.4)
    area_fraction_range: tuple[float, float] = (0.2, 0.7)  # of region area
    hue_jitter_deg: float = 30.0


@dataclass(frozen=True)
class BlendConfig:
    mode: str = "mix"  # "mix" or "replace"
    tolerance: float = 1e-6
    max_iters: int = 0  # 0 -> solver default

    def solver(self) -> SolverConfig:
        return SolverConfig(
            tolerance=self.tolerance,
            max_iters=self.max_iters or None,
        )


@dataclass(frozen=True)
class PipelineConfig:
    paths: PathsConfig = field(default_factory=PathsConfig)
    prefilter: PrefilterPolicy = field(default_factory=PrefilterPolicy)
    region: RegionParams = field(default_factory=RegionParams)
    corpus: CorpusConfig = field(default_factory=CorpusConfig)
    sample: SampleLayout = field(default_factory=SampleLayout)
    render: RenderConfig = field(default_factory=RenderConfig)
    geometry: GeometryConfig = field(default_factory=GeometryConfig)
    blend: BlendConfig = field(default_factory=BlendConfig)
    placements_range: tuple[int, int] = (1, 4)
    retries_per_placement: int = 3
    train_fraction: float = 0.946  # published split proportion
    workers: int = 1


# value casters ------------------------------------------------------------


def _bool(s: str) -> bool:
    v = s.strip().lower()
    if v in ("true", "1", "yes"):
        return True
    if v in ("false", "0", "no"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _pair(cast):
    def parse(s: str):
        parts = [p.strip() for p in s.split(",")]
        if len(parts) != 2:
            raise ValueError(f"expected 'lo, hi': {s!r}")
        lo, hi = cast(parts[0]), cast(parts[1])
        if hi < lo:
            raise ValueError(f"range reversed: {s!r}")
        return (lo, hi)

    return parse


def _opt_float(s: str):
    return None if s.strip().lower() in ("", "none") else float(s)


_STR = str.strip

# key -> (section attr, field name, caster)
SCHEMA: dict[str, tuple[str, str, object]] = {
    "paths.images_dir": ("paths", "images_dir", _STR),
    "paths.maps_dir": ("paths", "maps_dir", _STR),
    "paths.fonts_dir": ("paths", "fonts_dir", _STR),
    "paths.words_file": ("paths", "words_file", _STR),
    "paths.blocklist_file": ("paths", "blocklist_file", _STR),
    "paths.surnames_file": ("paths", "surnames_file", _STR),
    "paths.english_file": ("paths", "english_file", _STR),
    "paths.boxes_dir": ("paths", "boxes_dir", _STR),
    "prefilter.discard_coverage_threshold": (
        "prefilter", "discard_coverage_threshold", float),
    "prefilter.blur_sigma": ("prefilter", "blur_sigma", _opt_float),
    "prefilter.face_blur": ("prefilter", "face_blur", _bool),
    "region.boundary_threshold": ("region", "boundary_threshold", float),
    "region.min_area_frac": ("region", "min_area_frac", float),
    "region.max_aspect": ("region", "max_aspect", float),
    "region.max_text_occupancy": ("region", "max_text_occupancy", float),
    "corpus.word_weight": ("corpus", "word_weight", float),
    "corpus.surname_weight": ("corpus", "surname_weight", float),
    "corpus.number_weight": ("corpus", "number_weight", float),
    "corpus.phone_weight": ("corpus", "phone_weight", float),
    "corpus.number_length_range": ("corpus", "number_length_range", _pair(int)),
    "sample.max_lines": ("sample", "max_lines", int),
    "sample.words_per_line_range": ("sample", "words_per_line_range", _pair(int)),
    "sample.punctuation_prob": ("sample", "punctuation_prob", float),
    "render.size_range": ("render", "size_range", _pair(int)),
    "render.amplitude_frac_range": ("render", "amplitude_frac_range", _pair(float)),
    "render.period_range": ("render", "period_range", _pair(float)),
    "render.letter_spacing_range": ("render", "letter_spacing_range", _pair(float)),
    "render.word_spacing_range": ("render", "word_spacing_range", _pair(float)),
    "render.line_spacing_range": ("render", "line_spacing_range", _pair(float)),
    "render.area_fraction_range": ("render", "area_fraction_range", _pair(float)),
    "render.hue_jitter_deg": ("render", "hue_jitter_deg", float),
    "geometry.focal_scale": ("geometry", "focal_scale", float),
    "geometry.ransac_iters": ("geometry", "ransac_iters", int),
    "geometry.inlier_tol": ("geometry", "inlier_tol", float),
    "geometry.min_normal_z": ("geometry", "min_normal_z", float),
    "geometry.min_coverage": ("geometry", "min_coverage", float),
    "blend.mode": ("blend", "mode", _STR),
    "blend.tolerance": ("blend", "tolerance", float),
    "blend.max_iters": ("blend", "max_iters", int),
    "pipeline.placements_range": (None, "placements_range", _pair(int)),
    "pipeline.retries_per_placement": (None, "retries_per_placement", int),
    "pipeline.train_fraction": (None, "train_fraction", float),
    "pipeline.workers": (None, "workers", int),
}


def parse_config(text: str, base: PipelineConfig | None = None) -> PipelineConfig:
    cfg = base or PipelineConfig()
    sections: dict[str, dict] = {}
    top: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise BadConfig(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        entry = SCHEMA.get(key)
        if entry is None:
            raise BadConfig(f"line {lineno}: unknown key {key!r}")
        section, fname, caster = entry
        try:
            parsed = caster(value.strip())
        except (ValueError, TypeError) as exc:
            raise BadConfig(f"line {lineno}: bad value for {key}: {exc}") from exc
        if section is None:
            top[fname] = parsed
        else:
            sections.setdefault(section, {})[fname] = parsed
    for section, updates in sections.items():
        block = getattr(cfg, section)
        cfg = dataclasses.replace(cfg, **{section: dataclasses.replace(block, **updates)})
    if top:
        cfg = dataclasses.replace(cfg, **top)
    _check(cfg)
    return cfg


def load_config(path) -> PipelineConfig:
    p = Path(path)
    if not p.is_file():
        raise BadConfig(f"config file not found: {p}")
    try:
        text = p.read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise BadConfig(f"config is not UTF-8: {p}") from exc
    return parse_config(text)


def _check(cfg: PipelineConfig) -> None:
    if not (0.0 < cfg.train_fraction < 1.0):
        raise BadConfig(f"pipeline.train_fraction must be in (0,1), got {cfg.train_fraction}")
    if cfg.placements_range[0] < 1:
        raise BadConfig("pipeline.placements_range must start at >= 1")
    if cfg.retries_per_placement < 0:
        raise BadConfig("pipeline.retries_per_placement must be >= 0")
    if cfg.workers < 1:
        raise BadConfig("pipeline.workers must be >= 1")
    if cfg.blend.mode not in ("mix", "replace"):
        raise BadConfig(f"blend.mode must be mix|replace, got {cfg.blend.mode!r}")
    if not (0.0 < cfg.region.boundary_threshold < 1.0):
        raise BadConfig("region.boundary_threshold must be in (0,1)")
    if cfg.render.size_range[0] < 4:
        raise BadConfig("render.size_range lower bound is too small to rasterize")
    for name, rng_ in (
        ("render.amplitude_frac_range", cfg.render.amplitude_frac_range),
        ("render.area_fraction_range", cfg.render.area_fraction_range),
    ):
        if rng_[0] < 0.0:
            raise BadConfig(f"{name} must be non-negative")
    if cfg.render.amplitude_frac_range[1] > 0.5:
        raise BadConfig("render.amplitude_frac_range exceeds the legibility cap 0.5")
    if cfg.render.period_range[0] <= 0.0:
        raise BadConfig("render.period_range must be positive")
    if not math.isfinite(cfg.blend.tolerance) or cfg.blend.tolerance <= 0:
        raise BadConfig("blend.tolerance must be positive")


def require_paths(cfg: PipelineConfig) -> None:
    """Startup check: every referenced path exists."""
    p = cfg.paths
    required = [
        ("paths.images_dir", p.images_dir, "dir"),
        ("paths.maps_dir", p.maps_dir, "dir"),
        ("paths.fonts_dir", p.fonts_dir, "dir"),
        ("paths.words_file", p.words_file, "file"),
    ]
    optional = [
        ("paths.blocklist_file", p.blocklist_file, "file"),
        ("paths.surnames_file", p.surnames_file, "file"),
        ("paths.english_file", p.english_file, "file"),
        ("paths.boxes_dir", p.boxes_dir, "dir"),
    ]
    for key, value, kind in required:
        if not value:
            raise BadConfig(f"{key} is required")
        _must_exist(key, value, kind)
    for key, value, kind in optional:
        if value:
            _must_exist(key, value, kind)


def _must_exist(key: str, value: str, kind: str) -> None:
    path = Path(value)
    ok = path.is_dir() if kind == "dir" else path.is_file()
    if not ok:
        raise BadConfig(f"{key}: no such {kind}: {value}")
