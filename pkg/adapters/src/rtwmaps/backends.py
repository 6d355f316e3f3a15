"""Pluggable estimator backends behind the four map roles.

Each role (depth, boundary, text, face) has deterministic classical
builtins that need nothing beyond this package's dependencies, and
model wrappers that load pretrained weights from paths named in the
models config. Wrappers raise ModelUnavailable when their file is not
there; nothing is downloaded on the caller's behalf.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np
from scipy import ndimage

from .errors import BadConfig, InferenceFailure, ModelUnavailable
from .mapio import rect_quad

LUMA = np.array([0.2126, 0.7152, 0.0722], dtype=np.float64)


# ------------------------------------------------------------------- config


@dataclass(frozen=True)
class ModelsConfig:
    depth_backend: str = "luminance"
    boundary_backend: str = "sobel"
    text_backend: str = "contrast"
    face_backend: str = "none"
    # model files, all local paths; empty string means not configured
    midas_weights: str = ""
    cob_weights: str = ""
    craft_weights: str = ""
    haar_cascade: str = ""
    # knobs recorded in provenance
    craft_text_threshold: float = 0.7
    cob_level: float = 0.5
    text_contrast_threshold: float = 0.18
    text_min_area: int = 40
    text_max_area_frac: float = 0.2

    def __post_init__(self):
        if not (0.0 < self.craft_text_threshold < 1.0):
            raise BadConfig("craft_text_threshold must be in (0, 1)")
        if not (0.0 <= self.cob_level <= 1.0):
            raise BadConfig("cob_level must be in [0, 1]")
        if self.text_contrast_threshold <= 0.0:
            raise BadConfig("text_contrast_threshold must be positive")
        if self.text_min_area < 1:
            raise BadConfig("text_min_area must be >= 1")
        if not (0.0 < self.text_max_area_frac <= 1.0):
            raise BadConfig("text_max_area_frac must be in (0, 1]")


# field annotations are strings under `from __future__ import annotations`
_CASTS = {"str": str, "float": float, "int": int}


def parse_models_cfg(text: str) -> ModelsConfig:
    """Flat ``key = value`` lines, # comments, same idiom as the engine."""
    known = {f.name: _CASTS[f.type] for f in fields(ModelsConfig)}
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise BadConfig(f"line {lineno}: expected 'key = value'")
        key, _, val = line.partition("=")
        key = key.strip()
        if key not in known:
            raise BadConfig(f"line {lineno}: unknown key {key!r}")
        try:
            values[key] = known[key](val.strip())
        except ValueError as e:
            raise BadConfig(f"line {lineno}: bad value for {key}: {e}") from e
    return ModelsConfig(**values)


def load_models_cfg(path) -> ModelsConfig:
    p = Path(path)
    if not p.is_file():
        raise BadConfig(f"models config not found: {path}")
    return parse_models_cfg(p.read_text(encoding="utf-8"))


def _luminance(img: np.ndarray) -> np.ndarray:
    return img.astype(np.float64) @ LUMA


def _require_rgb(img: np.ndarray) -> np.ndarray:
    a = np.asarray(img, dtype=np.float32)
    if a.ndim != 3 or a.shape[2] != 3:
        raise ValueError(f"expected (h, w, 3) image, got shape {a.shape}")
    return a


# ------------------------------------------------------------ depth backends


class LuminanceDepth:
    """Classical stand-in for a monocular estimator: smoothed inverse
    luminance. Dark regions read as far; only relative order matters to
    the consumer, which sees the map affinely rescaled anyway."""

    name = "luminance-depth"
    version = "builtin-1"

    def __init__(self, cfg: ModelsConfig):
        self.params = {}

    def infer(self, img: np.ndarray) -> np.ndarray:
        a = _require_rgb(img)
        return ndimage.gaussian_filter(1.0 - _luminance(a), sigma=3.0).astype(
            np.float32
        )


class TorchScriptWrapper:
    """Shared plumbing for the pretrained-model roles.

    Loads a TorchScript module from a local file and runs it on a
    normalized CHW tensor. Missing file (or missing torch) raises
    ModelUnavailable at construction; runtime errors raise
    InferenceFailure.
    """

    def __init__(self, name: str, weights: str, config_key: str):
        self.name = name
        if not weights:
            raise ModelUnavailable(name, f"set {config_key} to a local file")
        path = Path(weights)
        if not path.is_file():
            raise ModelUnavailable(name, f"no such file: {weights}")
        try:
            import torch
        except ImportError as e:
            raise ModelUnavailable(name, f"torch not importable: {e}") from e
        self._torch = torch
        try:
            self.module = torch.jit.load(str(path), map_location="cpu").eval()
        except Exception as e:
            raise InferenceFailure(name, f"cannot load weights: {e}") from e
        self.version = f"torchscript:{path.name}"

    def run(self, img: np.ndarray) -> np.ndarray:
        torch = self._torch
        chw = np.moveaxis(_require_rgb(img), 2, 0)[None]
        try:
            with torch.no_grad():
                out = self.module(torch.from_numpy(np.ascontiguousarray(chw)))
            return out.squeeze().cpu().numpy().astype(np.float32)
        except Exception as e:
            raise InferenceFailure(self.name, str(e)) from e


class MidasDepth(TorchScriptWrapper):
    def __init__(self, cfg: ModelsConfig):
        super().__init__("midas-depth", cfg.midas_weights, "midas_weights")
        self.params = {}

    def infer(self, img: np.ndarray) -> np.ndarray:
        out = self.run(img)
        if out.ndim != 2:
            raise InferenceFailure(self.name, f"expected 2-d depth, got {out.shape}")
        # monocular nets predict inverse depth; flip so larger means farther
        return (out.max() - out).astype(np.float32)


# --------------------------------------------------------- boundary backends


class SobelBoundary:
    """Gradient magnitude of the smoothed luminance, rescaled to [0, 1]."""

    name = "sobel-boundary"
    version = "builtin-1"

    def __init__(self, cfg: ModelsConfig):
        self.params = {}

    def infer(self, img: np.ndarray) -> np.ndarray:
        lum = ndimage.gaussian_filter(_luminance(_require_rgb(img)), sigma=1.0)
        gx = ndimage.sobel(lum, axis=1)
        gy = ndimage.sobel(lum, axis=0)
        mag = np.hypot(gx, gy)
        peak = float(mag.max())
        if peak > 0.0:
            mag /= peak
        return mag.astype(np.float32)


class CobBoundary(TorchScriptWrapper):
    def __init__(self, cfg: ModelsConfig):
        super().__init__("cob-boundary", cfg.cob_weights, "cob_weights")
        self.params = {"level": cfg.cob_level}
        self.level = cfg.cob_level

    def infer(self, img: np.ndarray) -> np.ndarray:
        out = self.run(img)
        if out.ndim == 3:  # hierarchy stack: pick the configured level
            idx = min(int(self.level * out.shape[0]), out.shape[0] - 1)
            out = out[idx]
        if out.ndim != 2:
            raise InferenceFailure(self.name, f"expected 2-d map, got {out.shape}")
        out = np.clip(out, 0.0, None)
        peak = float(out.max())
        return (out / peak if peak > 0 else out).astype(np.float32)


# ------------------------------------------------------------- text backends


class ContrastText:
    """Classical detector: connected blobs of high local contrast with
    text-plausible size and aspect, reported as axis-aligned quads. A
    constant image has zero contrast everywhere and yields no boxes."""

    name = "contrast-text"
    version = "builtin-1"

    def __init__(self, cfg: ModelsConfig):
        self.threshold = cfg.text_contrast_threshold
        self.min_area = cfg.text_min_area
        self.max_area_frac = cfg.text_max_area_frac
        self.params = {
            "contrast_threshold": self.threshold,
            "min_area": self.min_area,
            "max_area_frac": self.max_area_frac,
        }

    def infer(self, img: np.ndarray) -> list[dict]:
        a = _require_rgb(img)
        lum = _luminance(a)
        # local contrast: |value - neighborhood mean|, pooled a little
        contrast = np.abs(lum - ndimage.uniform_filter(lum, size=7))
        energy = ndimage.maximum_filter(contrast, size=5)
        hot = energy > self.threshold
        labels, count = ndimage.label(hot)
        h, w = lum.shape
        boxes: list[dict] = []
        for sl in ndimage.find_objects(labels):
            if sl is None:
                continue
            bh = sl[0].stop - sl[0].start
            bw = sl[1].stop - sl[1].start
            area = bh * bw
            if area < self.min_area or area > self.max_area_frac * h * w:
                continue
            aspect = max(bw / bh, bh / bw)
            if aspect > 25.0:
                continue
            boxes.append(
                {
                    "kind": "existing-text",
                    "quad": rect_quad(
                        float(sl[1].start), float(sl[0].start),
                        float(sl[1].stop), float(sl[0].stop),
                    ),
                }
            )
        return boxes


class CraftText(TorchScriptWrapper):
    def __init__(self, cfg: ModelsConfig):
        super().__init__("craft-text", cfg.craft_weights, "craft_weights")
        self.threshold = cfg.craft_text_threshold
        self.params = {"text_threshold": self.threshold}

    def infer(self, img: np.ndarray) -> list[dict]:
        score = self.run(img)
        if score.ndim == 3:
            score = score[0]
        if score.ndim != 2:
            raise InferenceFailure(self.name, f"expected 2-d score, got {score.shape}")
        labels, _ = ndimage.label(score > self.threshold)
        boxes = []
        for sl in ndimage.find_objects(labels):
            if sl is None:
                continue
            boxes.append(
                {
                    "kind": "existing-text",
                    "quad": rect_quad(
                        float(sl[1].start), float(sl[0].start),
                        float(sl[1].stop), float(sl[0].stop),
                    ),
                }
            )
        return boxes


# ------------------------------------------------------------- face backends


class NoFaces:
    """Explicit opt-out: always reports an empty list."""

    name = "no-faces"
    version = "builtin-1"

    def __init__(self, cfg: ModelsConfig):
        self.params = {}

    def infer(self, img: np.ndarray) -> list[dict]:
        _require_rgb(img)
        return []


class HaarFace:
    """OpenCV Haar cascade; the cascade XML is a pretrained model file
    and must be supplied locally (cv2 5.x ships none)."""

    name = "haar-face"

    def __init__(self, cfg: ModelsConfig):
        if not cfg.haar_cascade:
            raise ModelUnavailable(self.name, "set haar_cascade to a local XML file")
        path = Path(cfg.haar_cascade)
        if not path.is_file():
            raise ModelUnavailable(self.name, f"no such file: {cfg.haar_cascade}")
        try:
            import cv2
        except ImportError as e:
            raise ModelUnavailable(self.name, f"cv2 not importable: {e}") from e
        self._cv2 = cv2
        self.cascade = cv2.CascadeClassifier(str(path))
        if self.cascade.empty():
            raise InferenceFailure(self.name, f"cannot parse cascade: {path.name}")
        self.version = f"haarcascade:{path.name}"
        self.params = {}

    def infer(self, img: np.ndarray) -> list[dict]:
        gray = (np.clip(_luminance(_require_rgb(img)), 0.0, 1.0) * 255).astype(
            np.uint8
        )
        try:
            rects = self.cascade.detectMultiScale(gray, 1.1, 4)
        except self._cv2.error as e:
            raise InferenceFailure(self.name, str(e)) from e
        return [
            {
                "kind": "face",
                "quad": rect_quad(float(x), float(y), float(x + w), float(y + h)),
            }
            for (x, y, w, h) in rects
        ]


# ----------------------------------------------------------------- registry


_DEPTH = {"luminance": LuminanceDepth, "midas": MidasDepth}
_BOUNDARY = {"sobel": SobelBoundary, "cob": CobBoundary}
_TEXT = {"contrast": ContrastText, "craft": CraftText}
_FACE = {"none": NoFaces, "haar": HaarFace}


@dataclass(frozen=True)
class Backends:
    depth: object
    boundary: object
    text: object
    face: object

    def by_role(self) -> dict:
        return {
            "depth": self.depth,
            "boundary": self.boundary,
            "text": self.text,
            "face": self.face,
        }


def _pick(table: dict, key: str, role: str, cfg: ModelsConfig):
    if key not in table:
        raise BadConfig(
            f"unknown {role} backend {key!r}; choices: {sorted(table)}"
        )
    return table[key](cfg)


def build_backends(cfg: ModelsConfig) -> Backends:
    return Backends(
        depth=_pick(_DEPTH, cfg.depth_backend, "depth", cfg),
        boundary=_pick(_BOUNDARY, cfg.boundary_backend, "boundary", cfg),
        text=_pick(_TEXT, cfg.text_backend, "text", cfg),
        face=_pick(_FACE, cfg.face_backend, "face", cfg),
    )
