"""Per-image annotation records, instance masks, validation, and the
dataset statistics table.

Annotation JSON carries four granularities (paragraph / line / word /
char polygons); the statistics table mirrors the ten published dataset
columns per subset.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .corpus import ALLOWED_CHARS, CYRILLIC, DIGITS, LATIN, PUNCTUATION
from .polygons import clip_to_rect, convex_hull, offset_convex

PARAGRAPH_PAD = 4.0  # boxes are not tight: hull padding in px

STATS_FIELDS = (
    "images",
    "boxes",
    "boxes_russian",
    "boxes_english",
    "boxes_digits",
    "boxes_punctuation",
    "lines",
    "words",
    "unique_words_cs",
    "unique_words_no_numbers",
)
SUBSETS = ("training", "test", "joint")
ADDITIVE_FIELDS = STATS_FIELDS[:8]  # unique-word fields are not additive


@dataclass(frozen=True)
class WordAnn:
    polygon: list  # [[x, y], ...]
    text: str
    chars: list  # [{"polygon": ..., "char": c}]


@dataclass(frozen=True)
class LineAnn:
    polygon: list
    text: str
    words: list  # of WordAnn


@dataclass(frozen=True)
class ParagraphAnn:
    id: int
    polygon: list
    text: str
    lines: list  # of LineAnn


@dataclass(frozen=True)
class AnnotationRecord:
    image_id: str
    width: int
    height: int
    paragraphs: list = field(default_factory=list)


def classify_box(text: str) -> dict[str, bool]:
    """Character-presence flags; a box may set several at once."""
    if not text:
        raise ValueError("classify_box needs non-empty text")
    chars = set(text)
    return {
        "russian": bool(chars & CYRILLIC),
        "english": bool(chars & LATIN),
        "digits": bool(chars & DIGITS),
        "punctuation": bool(chars & set(PUNCTUATION)),
    }


@dataclass(frozen=True)
class StatsRow:
    images: int = 0
    boxes: int = 0
    boxes_russian: int = 0
    boxes_english: int = 0
    boxes_digits: int = 0
    boxes_punctuation: int = 0
    lines: int = 0
    words: int = 0
    unique_words_cs: int = 0
    unique_words_no_numbers: int = 0

    def to_dict(self) -> dict[str, int]:
        return {f: getattr(self, f) for f in STATS_FIELDS}


@dataclass(frozen=True)
class StatsTable:
    training: StatsRow
    test: StatsRow
    joint: StatsRow

    def to_dict(self) -> dict:
        return {s: getattr(self, s).to_dict() for s in SUBSETS}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, indent=2)

    @classmethod
    def from_dict(cls, d: dict) -> "StatsTable":
        rows = {}
        for s in SUBSETS:
            rows[s] = StatsRow(**{f: int(d[s][f]) for f in STATS_FIELDS})
        return cls(**rows)

    @classmethod
    def from_json(cls, text: str) -> "StatsTable":
        return cls.from_dict(json.loads(text))


def _accumulate(records: list[AnnotationRecord]) -> StatsRow:
    boxes = flags_r = flags_e = flags_d = flags_p = lines = words = 0
    uniq: set[str] = set()
    for rec in records:
        for p in rec.paragraphs:
            boxes += 1
            fl = classify_box(p.text) if p.text else dict.fromkeys(
                ("russian", "english", "digits", "punctuation"), False
            )
            flags_r += fl["russian"]
            flags_e += fl["english"]
            flags_d += fl["digits"]
            flags_p += fl["punctuation"]
            lines += len(p.lines)
            toks = p.text.split()
            words += len(toks)
            uniq.update(toks)
    return StatsRow(
        images=len(records),
        boxes=boxes,
        boxes_russian=flags_r,
        boxes_english=flags_e,
        boxes_digits=flags_d,
        boxes_punctuation=flags_p,
        lines=lines,
        words=words,
        unique_words_cs=len(uniq),
        unique_words_no_numbers=len({t for t in uniq if not (set(t) & DIGITS)}),
    )


def compute_stats(
    records: list[AnnotationRecord], split: dict[str, str]
) -> StatsTable:
    """Aggregate the ten table columns per subset.

    ``split`` maps image_id to "training"/"test"; ids absent from the map
    count as training.
    """
    train = [r for r in records if split.get(r.image_id, "training") == "training"]
    test = [r for r in records if split.get(r.image_id) == "test"]
    return StatsTable(
        training=_accumulate(train),
        test=_accumulate(test),
        joint=_accumulate(train + test),
    )


# ---------------------------------------------------------------------------
# Emission


def paragraph_hull(
    word_polygons: list, bounds: tuple[float, float] | None = None
) -> np.ndarray:
    """Paragraph polygon: convex hull of all word-polygon vertices, padded
    outward by PARAGRAPH_PAD, optionally clipped to [0,w] x [0,h].

    Word polygons inside both the hull and the bounds stay contained after
    the clip (intersection of two containing sets).
    """
    pts = np.vstack([np.asarray(p, dtype=np.float64).reshape(-1, 2) for p in word_polygons])
    hull = convex_hull(pts)
    if hull.shape[0] >= 3:
        hull = offset_convex(hull, PARAGRAPH_PAD)
    else:  # collinear degenerate layout: fall back to a padded bbox
        x0, y0 = pts.min(axis=0) - PARAGRAPH_PAD
        x1, y1 = pts.max(axis=0) + PARAGRAPH_PAD
        hull = np.array([[x0, y0], [x1, y0], [x1, y1], [x0, y1]])
    if bounds is not None:
        hull = clip_to_rect(hull, bounds[0], bounds[1])
    return hull


def emit_annotation(placements: list, image_id: str, dims: tuple[int, int]) -> AnnotationRecord:
    """Assemble the four-granularity record from image-space placements.

    Each placement carries ``instance_id`` and a ``layout`` whose polygons
    are already in image coordinates.
    """
    width, height = dims
    paragraphs = []
    for p in placements:
        layout = p.layout
        lines = []
        word_polys: list[np.ndarray] = []
        for ls in layout.line_spans:
            words = []
            for ws in layout.word_spans:
                if ws.line_index != ls.line_index:
                    continue
                poly = layout.word_polygon(ws)
                word_polys.append(poly)
                chars = [
                    {"polygon": c.quad.tolist(), "char": c.char}
                    for c in layout.chars[ws.start : ws.end]
                ]
                words.append(WordAnn(polygon=poly.tolist(), text=ws.text, chars=chars))
            lines.append(
                LineAnn(
                    polygon=layout.line_polygon(ls).tolist(), text=ls.text, words=words
                )
            )
        para_poly = paragraph_hull(word_polys, bounds=(float(width), float(height)))
        paragraphs.append(
            ParagraphAnn(
                id=p.instance_id,
                polygon=para_poly.tolist(),
                text="\n".join(l.text for l in lines),
                lines=lines,
            )
        )
    return AnnotationRecord(
        image_id=image_id, width=width, height=height, paragraphs=paragraphs
    )


def _round_poly(polygon) -> list:
    arr = np.asarray(polygon, dtype=np.float64).reshape(-1, 2)
    # + 0.0 turns -0.0 into 0.0 so serialized files never differ on sign bits
    return [[round(float(x), 2) + 0.0, round(float(y), 2) + 0.0] for x, y in arr]


def record_to_json(rec: AnnotationRecord) -> str:
    """Deterministic key order, polygons rounded to 2 decimals."""

    def word_obj(w: WordAnn):
        return {
            "polygon": _round_poly(w.polygon),
            "text": w.text,
            "chars": [
                {"polygon": _round_poly(c["polygon"]), "char": c["char"]}
                for c in w.chars
            ],
        }

    obj = {
        "image_id": rec.image_id,
        "width": rec.width,
        "height": rec.height,
        "paragraphs": [
            {
                "id": p.id,
                "polygon": _round_poly(p.polygon),
                "text": p.text,
                "lines": [
                    {
                        "polygon": _round_poly(l.polygon),
                        "text": l.text,
                        "words": [word_obj(w) for w in l.words],
                    }
                    for l in p.lines
                ],
            }
            for p in rec.paragraphs
        ],
    }
    return json.dumps(obj, ensure_ascii=False, indent=1)


def record_from_json(text: str) -> AnnotationRecord:
    d = json.loads(text)
    paragraphs = []
    for p in d.get("paragraphs", []):
        lines = []
        for l in p.get("lines", []):
            words = [
                WordAnn(polygon=w["polygon"], text=w["text"], chars=w.get("chars", []))
                for w in l.get("words", [])
            ]
            lines.append(LineAnn(polygon=l["polygon"], text=l["text"], words=words))
        paragraphs.append(
            ParagraphAnn(id=int(p["id"]), polygon=p["polygon"], text=p["text"], lines=lines)
        )
    return AnnotationRecord(
        image_id=str(d["image_id"]),
        width=int(d["width"]),
        height=int(d["height"]),
        paragraphs=paragraphs,
    )


def emit_mask(alphas: list[np.ndarray], dims: tuple[int, int]) -> np.ndarray:
    """Instance mask: paragraph id where that placement's alpha > 0.5 (later
    placements overwrite earlier on overlap), 0 elsewhere."""
    width, height = dims
    if len(alphas) > 65535:
        raise ValueError("more instance ids than uint16 can carry")
    mask = np.zeros((height, width), dtype=np.uint16)
    for i, a in enumerate(alphas, start=1):
        mask[a > 0.5] = i
    return mask


# ---------------------------------------------------------------------------
# Validation against the annotation rules

ALLOWED_TEXT_CHARS = ALLOWED_CHARS | {"\n"}


@dataclass(frozen=True)
class Violation:
    kind: str
    detail: str

    def __str__(self) -> str:
        return f"{self.kind}: {self.detail}"


def validate_record(
    rec: AnnotationRecord, allowed: frozenset | set | None = None
) -> list[Violation]:
    """Rule check: alphabet, bounds, id sequence, text/char consistency.

    ``allowed`` overrides the character profile (default: engine alphabet
    plus newline).
    """
    charset = ALLOWED_TEXT_CHARS if allowed is None else set(allowed)
    out: list[Violation] = []

    def check_text(text: str, where: str):
        for ch in text:
            if ch not in charset:
                out.append(
                    Violation("DisallowedCharacter", f"{ch!r} in {where}")
                )

    def check_poly(poly, where: str, min_vertices: int = 4):
        arr = np.asarray(poly, dtype=np.float64).reshape(-1, 2)
        if arr.shape[0] < min_vertices:
            out.append(Violation("DegeneratePolygon", f"{where} has {arr.shape[0]} vertices"))
        if (
            arr[:, 0].min() < 0
            or arr[:, 1].min() < 0
            or arr[:, 0].max() > rec.width
            or arr[:, 1].max() > rec.height
        ):
            out.append(Violation("OutOfBounds", f"{where} exits [0,{rec.width}]x[0,{rec.height}]"))

    for i, p in enumerate(rec.paragraphs):
        if p.id != i + 1:
            out.append(
                Violation("IdGap", f"paragraph #{i} has id {p.id}, expected {i + 1}")
            )
        where = f"paragraph {p.id}"
        check_text(p.text, where)
        check_poly(p.polygon, where)
        joined = "\n".join(l.text for l in p.lines)
        if joined != p.text:
            out.append(Violation("TextMismatch", f"{where}: text != joined line texts"))
        for li, l in enumerate(p.lines):
            lwhere = f"{where} line {li}"
            check_text(l.text, lwhere)
            check_poly(l.polygon, lwhere)
            if " ".join(w.text for w in l.words) != l.text:
                out.append(Violation("TextMismatch", f"{lwhere}: text != joined word texts"))
            for wi, w in enumerate(l.words):
                wwhere = f"{lwhere} word {wi}"
                check_text(w.text, wwhere)
                check_poly(w.polygon, wwhere)
                concat = "".join(c["char"] for c in w.chars)
                if concat != w.text:
                    out.append(
                        Violation("TextMismatch", f"{wwhere}: chars join to {concat!r}")
                    )
                for c in w.chars:
                    check_poly(c["polygon"], f"{wwhere} char {c['char']!r}")
    return out
