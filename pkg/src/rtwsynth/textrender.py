"""Font loading, glyph layout, sine-curve warping, and patch rasterization.

Layout model: left-aligned lines of advance boxes on a shared line box
(ascent + descent tall).  The warp rides every vertex on
y -> y + A*sin(2*pi*x/lambda + phi); rasterization applies the identical
displacement per pixel column, so glyph ink and quad geometry stay glued
together.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field, replace

import numpy as np
from fontTools.ttLib import TTFont
from PIL import Image, ImageDraw, ImageFont

from .corpus import ALLOWED_CHARS, TextSample
from .errors import NoUsableFonts, UnsupportedGlyph
from .polygons import offset_convex, polygon_mask
from .raster import Raster

# every usable font must map all of these
REQUIRED_CHARS = sorted(ALLOWED_CHARS)

PATCH_MARGIN = 2.0


class LoadedFont:
    """One usable font face: path, family name, codepoint coverage."""

    def __init__(self, path: str, family: str, coverage: frozenset[int]):
        self.path = path
        self.family = family
        self.coverage = coverage
        self._sized: dict[int, ImageFont.FreeTypeFont] = {}

    def at_size(self, size_px: int) -> ImageFont.FreeTypeFont:
        f = self._sized.get(size_px)
        if f is None:
            f = ImageFont.truetype(self.path, size_px)
            self._sized[size_px] = f
        return f

    def covers(self, text: str) -> bool:
        return all(ord(c) in self.coverage for c in text)

    def __repr__(self) -> str:
        return f"LoadedFont({self.family!r})"


@dataclass(frozen=True)
class FontSet:
    fonts: tuple[LoadedFont, ...]
    rejected: tuple[tuple[str, str], ...] = ()  # (filename, missing chars preview)

    def __post_init__(self):
        if not self.fonts:
            raise NoUsableFonts(
                f"no font covers the required alphabet; rejected: "
                f"{[name for name, _ in self.rejected]}"
            )

    @property
    def families(self) -> tuple[str, ...]:
        return tuple(sorted({f.family for f in self.fonts}))


def _font_identity(path: str) -> tuple[str, frozenset[int]]:
    tt = TTFont(path, fontNumber=0, lazy=True)
    try:
        cmap = tt.getBestCmap() or {}
        family = None
        name = tt.get("name")
        if name is not None:
            rec = name.getDebugName(1)
            if rec:
                family = rec
        return family or os.path.splitext(os.path.basename(path))[0], frozenset(cmap)
    finally:
        tt.close()


def load_fonts(directory) -> FontSet:
    """Scan a directory for .ttf/.otf faces, keeping those with full coverage."""
    names = sorted(
        n for n in os.listdir(directory) if n.lower().endswith((".ttf", ".otf"))
    )
    if not names:
        raise NoUsableFonts(f"no font files in {directory}")
    usable: list[LoadedFont] = []
    rejected: list[tuple[str, str]] = []
    for n in names:
        path = os.path.join(directory, n)
        try:
            family, coverage = _font_identity(path)
        except Exception as e:  # unreadable/corrupt font file
            rejected.append((n, f"unreadable: {e}"))
            continue
        missing = [c for c in REQUIRED_CHARS if ord(c) not in coverage]
        if missing:
            rejected.append((n, "missing " + "".join(missing[:8])))
            continue
        usable.append(LoadedFont(path, family, coverage))
    return FontSet(fonts=tuple(usable), rejected=tuple(rejected))


# ---------------------------------------------------------------------------
# Layout


@dataclass(frozen=True)
class CharBox:
    char: str
    quad: np.ndarray  # (4, 2) float64: tl, tr, br, bl
    pen: tuple[float, float]  # (x, line top) where the glyph is drawn
    line_index: int


@dataclass(frozen=True)
class Span:
    start: int  # first char index (inclusive)
    end: int  # last char index (exclusive)
    line_index: int
    text: str


@dataclass(frozen=True)
class SineWarpParams:
    amplitude: float
    period: float
    phase: float

    def __post_init__(self):
        if self.period <= 0:
            raise ValueError("period must be positive")
        if self.amplitude < 0:
            raise ValueError("amplitude must be non-negative")

    def displacement(self, x) -> np.ndarray:
        return self.amplitude * np.sin(2.0 * math.pi * np.asarray(x) / self.period + self.phase)


@dataclass(frozen=True)
class Spacing:
    letter: float = 1.0
    word: float = 1.0
    line: float = 1.0


@dataclass(frozen=True)
class GlyphLayout:
    chars: tuple[CharBox, ...]
    word_spans: tuple[Span, ...]
    line_spans: tuple[Span, ...]
    patch_size: tuple[float, float]
    line_height: float
    baselines: tuple[float, ...]  # flat baseline y per line (pre-warp)
    font: LoadedFont | None
    size_px: int
    warp: SineWarpParams | None = None
    raster_shift: float = 0.0  # y re-anchor applied by rasterize()

    def word_polygon(self, span: Span) -> np.ndarray:
        return _ribbon([self.chars[i].quad for i in range(span.start, span.end)])

    def line_polygon(self, span: Span) -> np.ndarray:
        return _ribbon([self.chars[i].quad for i in range(span.start, span.end)])

    def paragraph_polygon(self) -> np.ndarray:
        return _paragraph_ribbon(self)

    @property
    def paragraph_quad(self) -> np.ndarray:
        return self.paragraph_polygon()


def _ribbon(quads: list[np.ndarray]) -> np.ndarray:
    """Polygon through the top corners left-to-right, then bottom corners
    back; char quads lie inside it exactly (their edges are its edges)."""
    if not quads:
        return np.zeros((0, 2))
    top = []
    bottom = []
    for q in quads:
        top += [q[0], q[1]]
        bottom += [q[3], q[2]]
    return np.array(top + bottom[::-1])


def _paragraph_ribbon(g: GlyphLayout) -> np.ndarray:
    """Warp-following hull of all content, padded PATCH_MARGIN px; breakpoints
    are every char-corner x, so line ribbons sit inside with >= (pad - sagitta)
    slack."""
    if not g.chars:
        return np.zeros((0, 2))
    xs = sorted({float(v[0]) for c in g.chars for v in c.quad})
    y_top = min(float(v[1]) for c in g.chars for v in (c.quad[0], c.quad[1]))
    y_bot = max(float(v[1]) for c in g.chars for v in (c.quad[2], c.quad[3]))
    if g.warp is not None:
        # recover pre-warp band from unwarped line boxes
        tops = [b - _ascent_frac(g) for b in g.baselines]
        y0 = min(tops)
        y1 = max(tops) + g.line_height
        disp = g.warp.displacement(np.array(xs)) + g.raster_shift
    else:
        y0, y1 = y_top, y_bot
        disp = np.zeros(len(xs))
    pad = PATCH_MARGIN
    xs = np.asarray(xs)
    top_edge = np.stack([xs, y0 + disp - pad], axis=1)
    bot_edge = np.stack([xs, y1 + disp + pad], axis=1)
    top_edge[0, 0] -= pad
    bot_edge[0, 0] -= pad
    top_edge[-1, 0] += pad
    bot_edge[-1, 0] += pad
    return np.vstack([top_edge, bot_edge[::-1]])


def _ascent_frac(g: GlyphLayout) -> float:
    # line top = baseline - ascent; ascent fraction recorded via baseline list
    return g.baselines[0] - _line_top(g, 0)


def _line_top(g: GlyphLayout, i: int) -> float:
    return PATCH_MARGIN + i * g.line_height * _line_mult(g)


def _line_mult(g: GlyphLayout) -> float:
    if len(g.baselines) < 2 or g.line_height == 0:
        return 1.0
    return (g.baselines[1] - g.baselines[0]) / g.line_height


def layout_text(
    sample: TextSample,
    font: LoadedFont,
    size_px: int,
    spacing: Spacing = Spacing(),
) -> GlyphLayout:
    """Left-aligned advance-box layout of a text sample at a fixed size."""
    face = font.at_size(size_px)
    ascent, descent = face.getmetrics()
    line_height = float(ascent + descent)
    space_adv = face.getlength(" ") * spacing.word

    chars: list[CharBox] = []
    word_spans: list[Span] = []
    line_spans: list[Span] = []
    baselines: list[float] = []
    max_right = 0.0

    for li, line in enumerate(sample.lines):
        top = PATCH_MARGIN + li * line_height * spacing.line
        baselines.append(top + ascent)
        pen = PATCH_MARGIN
        line_start = len(chars)
        for wi, token in enumerate(line):
            if wi > 0:
                pen += space_adv
            word_start = len(chars)
            for ch in token.text:
                if not font.covers(ch):
                    raise UnsupportedGlyph(f"{font.family} lacks {ch!r}")
                adv = face.getlength(ch)
                quad = np.array(
                    [
                        [pen, top],
                        [pen + adv, top],
                        [pen + adv, top + line_height],
                        [pen, top + line_height],
                    ]
                )
                chars.append(CharBox(ch, quad, (pen, top), li))
                max_right = max(max_right, pen + adv)
                pen += adv * spacing.letter
            word_spans.append(Span(word_start, len(chars), li, token.text))
        line_spans.append(
            Span(line_start, len(chars), li, " ".join(t.text for t in line))
        )

    n_lines = len(sample.lines)
    content_h = line_height + (n_lines - 1) * line_height * spacing.line
    width = max_right + PATCH_MARGIN
    height = PATCH_MARGIN + content_h + PATCH_MARGIN
    return GlyphLayout(
        chars=tuple(chars),
        word_spans=tuple(word_spans),
        line_spans=tuple(line_spans),
        patch_size=(width, height),
        line_height=line_height,
        baselines=tuple(baselines),
        font=font,
        size_px=size_px,
    )


def apply_sine_warp(g: GlyphLayout, w: SineWarpParams) -> GlyphLayout:
    """Displace every quad vertex by (0, A*sin(2*pi*x/lambda + phi)).

    The patch grows by exactly 2A in height; content may overhang y=0 until
    rasterize() re-anchors it.
    """
    if w.amplitude > 0.5 * g.line_height:
        raise ValueError("amplitude above the 0.5 * line-height legibility cap")
    if w.amplitude == 0.0:
        return replace(g, warp=w)
    new_chars = []
    for c in g.chars:
        q = c.quad.copy()
        q[:, 1] += w.displacement(q[:, 0])
        new_chars.append(CharBox(c.char, q, c.pen, c.line_index))
    pw, ph = g.patch_size
    return replace(
        g,
        chars=tuple(new_chars),
        patch_size=(pw, ph + 2.0 * w.amplitude),
        warp=w,
    )


@dataclass(frozen=True)
class TextPatch:
    color: Raster  # 3-channel, constant
    alpha: Raster  # 1-channel, [0, 1]
    layout: GlyphLayout


def _render_flat(g: GlyphLayout, width: int, height: int) -> np.ndarray:
    img = Image.new("L", (width, height), 0)
    draw = ImageDraw.Draw(img)
    face = g.font.at_size(g.size_px)
    for c in g.chars:
        draw.text(c.pen, c.char, font=face, fill=255)
    return np.asarray(img, dtype=np.float32) / np.float32(255.0)


def rasterize(g: GlyphLayout, color: tuple[float, float, float], rng=None) -> TextPatch:
    """Anti-aliased alpha patch plus constant color plane.

    The returned layout is re-anchored so polygon coordinates equal raster
    pixel coordinates (warp overhang shifted back inside).  ``rng`` is part
    of the call contract for styling hooks; the base renderer is
    deterministic and ignores it.
    """
    pw, ph = g.patch_size
    width = max(1, int(math.ceil(pw)))
    height = max(1, int(math.ceil(ph)))
    shift = g.warp.amplitude if g.warp is not None else 0.0

    if not g.chars:
        alpha = np.zeros((height, width), dtype=np.float32)
        return TextPatch(
            color=Raster(np.broadcast_to(np.asarray(color, np.float32), (height, width, 3)).copy()),
            alpha=Raster(alpha),
            layout=replace(g, raster_shift=shift),
        )

    flat_h = max(1, int(math.ceil(ph - 2.0 * shift)))
    flat = _render_flat(g, width, flat_h)

    if shift > 0.0:
        cols = np.arange(width, dtype=np.float64) + 0.5
        disp = g.warp.displacement(cols) + shift  # total downward shift per column
        rows = np.arange(height, dtype=np.float64)[:, None]
        src = rows - disp[None, :]  # sample position in the flat render
        lo = np.floor(src).astype(np.int64)
        frac = (src - lo).astype(np.float32)
        lo0 = np.clip(lo, 0, flat_h - 1)
        lo1 = np.clip(lo + 1, 0, flat_h - 1)
        colidx = np.broadcast_to(np.arange(width), (height, width))
        valid0 = (lo >= 0) & (lo <= flat_h - 1)
        valid1 = (lo + 1 >= 0) & (lo + 1 <= flat_h - 1)
        a0 = np.where(valid0, flat[lo0, colidx], 0.0)
        a1 = np.where(valid1, flat[lo1, colidx], 0.0)
        alpha = (1.0 - frac) * a0 + frac * a1
        layout = replace(
            g,
            chars=tuple(
                CharBox(c.char, c.quad + [0.0, shift], c.pen, c.line_index)
                for c in g.chars
            ),
            raster_shift=shift,
        )
    else:
        alpha = flat if flat.shape == (height, width) else np.pad(
            flat, ((0, height - flat.shape[0]), (0, width - flat.shape[1]))
        )
        layout = replace(g, raster_shift=0.0)

    # clamp support to the union of 2 px dilated char quads
    support = np.zeros((height, width), dtype=bool)
    for c in layout.chars:
        support |= polygon_mask(offset_convex(c.quad, 2.0), width, height)
    alpha = np.where(support, alpha, 0.0).astype(np.float32)
    alpha = np.clip(alpha, 0.0, 1.0)

    color_plane = np.empty((height, width, 3), dtype=np.float32)
    color_plane[:] = np.clip(np.asarray(color, dtype=np.float32), 0.0, 1.0)
    return TextPatch(color=Raster(color_plane), alpha=Raster(alpha), layout=layout)


# ---------------------------------------------------------------------------
# Text color: region mean, flipped to the opposite lightness half in Lab

_RGB2XYZ = np.array(
    [
        [0.4124564, 0.3575761, 0.1804375],
        [0.2126729, 0.7151522, 0.0721750],
        [0.0193339, 0.1191920, 0.9503041],
    ]
)
_WHITE = np.array([0.95047, 1.0, 1.08883])


def _srgb_to_lab(rgb: np.ndarray) -> np.ndarray:
    c = np.asarray(rgb, dtype=np.float64)
    lin = np.where(c <= 0.04045, c / 12.92, ((c + 0.055) / 1.055) ** 2.4)
    xyz = _RGB2XYZ @ lin
    t = xyz / _WHITE
    f = np.where(t > (6 / 29) ** 3, np.cbrt(t), t / (3 * (6 / 29) ** 2) + 4 / 29)
    return np.array(
        [116 * f[1] - 16, 500 * (f[0] - f[1]), 200 * (f[1] - f[2])]
    )


def _lab_to_srgb(lab: np.ndarray) -> np.ndarray:
    L, a, b = lab
    fy = (L + 16) / 116
    fx = fy + a / 500
    fz = fy - b / 200
    f = np.array([fx, fy, fz])
    t = np.where(f > 6 / 29, f**3, 3 * (6 / 29) ** 2 * (f - 4 / 29))
    xyz = t * _WHITE
    lin = np.linalg.solve(_RGB2XYZ, xyz)
    c = np.where(
        lin <= 0.0031308, 12.92 * lin, 1.055 * np.clip(lin, 0, None) ** (1 / 2.4) - 0.055
    )
    return np.clip(c, 0.0, 1.0)


def contrast_color(mean_rgb, rng: np.random.Generator, hue_jitter_deg: float = 12.0):
    """Mean region color reflected into the opposite L* half, hue jittered."""
    lab = _srgb_to_lab(np.clip(mean_rgb, 0.0, 1.0))
    lab[0] = 100.0 - lab[0]
    # keep some separation from mid gray
    if 35.0 < lab[0] < 65.0:
        lab[0] = 20.0 if lab[0] <= 50.0 else 80.0
    theta = math.radians(float(rng.uniform(-hue_jitter_deg, hue_jitter_deg)))
    ca, sa = math.cos(theta), math.sin(theta)
    a, b = lab[1], lab[2]
    lab[1], lab[2] = ca * a - sa * b, sa * a + ca * b
    return tuple(float(v) for v in _lab_to_srgb(lab))
