"""Deterministic synthetic scene-text dataset generation.

Plants Cyrillic/Latin text into background photographs using pre-computed
depth and boundary maps, and emits multi-granularity annotations plus
dataset statistics.
"""

from .annotations import (
    AnnotationRecord,
    StatsTable,
    classify_box,
    compute_stats,
    emit_annotation,
    emit_mask,
    validate_record,
)
from .config import PipelineConfig, load_config, parse_config
from .errors import EngineError
from .pipeline import GeneratedImage, Manifest, Skipped, generate_image, run
from .raster import Box, Raster, load_map, normalize_depth, save_map
from .rng import derive_rng, fnv1a_64, split_assign

__version__ = "0.1.0"

__all__ = [
    "AnnotationRecord",
    "Box",
    "EngineError",
    "GeneratedImage",
    "Manifest",
    "PipelineConfig",
    "Raster",
    "Skipped",
    "StatsTable",
    "classify_box",
    "compute_stats",
    "derive_rng",
    "emit_annotation",
    "emit_mask",
    "fnv1a_64",
    "generate_image",
    "load_config",
    "load_map",
    "normalize_depth",
    "parse_config",
    "run",
    "save_map",
    "split_assign",
    "validate_record",
    "__version__",
]
