"""Map adapters: turn photos into the raster/box bundles the synthesis
engine consumes, speaking to it only through files on disk."""

from .backends import Backends, ModelsConfig, build_backends, load_models_cfg, parse_models_cfg
from .bundle import AdapterOutputBundle, extract_bundle, load_image
from .errors import (
    AdapterError,
    BadConfig,
    BadInput,
    InferenceFailure,
    ModelUnavailable,
)
from .mapio import normalize_unit, read_map, rect_quad, write_boxes, write_map
from .synth import SCENARIOS, SyntheticScene, make_synthetic_maps

__all__ = [
    "AdapterError",
    "AdapterOutputBundle",
    "Backends",
    "BadConfig",
    "BadInput",
    "InferenceFailure",
    "ModelUnavailable",
    "ModelsConfig",
    "SCENARIOS",
    "SyntheticScene",
    "build_backends",
    "extract_bundle",
    "load_image",
    "load_models_cfg",
    "make_synthetic_maps",
    "normalize_unit",
    "parse_models_cfg",
    "read_map",
    "rect_quad",
    "write_boxes",
    "write_map",
]
